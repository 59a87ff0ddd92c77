import json

from remixd.cli import main
from remixd.mesh import Cube, load_stl, is_watertight, make_primitive, write_stl


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_search_lists_remixable_results(capsys):
    code, out, _ = run(["search", "pot"], capsys)
    assert code == 0
    assert "pot-classic" in out
    assert "pot-fancy" not in out


def test_search_no_results(capsys):
    code, out, _ = run(["search", "zeppelin"], capsys)
    assert code == 0
    assert "no remixable results" in out


def test_usage_error_exit_2(capsys):
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_domain_error_exit_1(capsys, tmp_path):
    code, _, err = run(["replay", str(tmp_path / "missing.json"), "--out-dir", str(tmp_path)], capsys)
    assert code == 1
    assert "error:" in err


def test_fetch_writes_preprocessed_stl(capsys, tmp_path):
    out_file = tmp_path / "planter.stl"
    code, out, _ = run(["fetch", "pot-classic", "--out", str(out_file)], capsys)
    assert code == 0
    mesh = load_stl(out_file.read_bytes())
    assert mesh.triangle_count > 0
    assert is_watertight(mesh)


def test_slice_subcommand(capsys, tmp_path):
    stl = tmp_path / "cube10.stl"
    stl.write_bytes(write_stl(make_primitive(Cube(edge=10)), "binary"))
    out = tmp_path / "cube10.gcode"
    code, text, _ = run(
        ["slice", str(stl), "--layer-height", "0.2", "--out", str(out)], capsys
    )
    assert code == 0
    assert "50 layers" in text
    assert out.read_text().startswith("; remixd toolpath")


def test_replay_writes_outputs_and_report(capsys, tmp_path, fixture_dir):
    script = fixture_dir / "scripts" / "walkthrough2_path3.remix.json"
    out_dir = tmp_path / "out"
    code, out, _ = run(["replay", str(script), "--out-dir", str(out_dir)], capsys)
    assert code == 0
    stl = out_dir / "walkthrough2_path3.stl"
    assert stl.is_file()
    assert is_watertight(load_stl(stl.read_bytes()))
    report = json.loads((out_dir / "walkthrough2_path3.remix.report.json").read_text())
    assert report["steps"][0]["op"] == "import_env"
    assert report["final_nodes"]
