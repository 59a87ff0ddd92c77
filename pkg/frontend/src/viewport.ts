/** three.js viewport: renders server meshes, selection outlines in the
 * operand colors, transform gizmos, and the carousel ghost preview.
 * Rendering only; geometry math stays on the server. */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";
import { TransformControls } from "three/addons/controls/TransformControls.js";

import type { SessionStore } from "./state.js";
import type { NodeDto, TransformDto } from "./types.js";
import { parseBinaryStl } from "./stl.js";

const MODEL_COLORS = [0x7ab87a, 0xb8937a, 0x7a93b8, 0xb87ab0, 0xb8b07a];
const ENV_MATERIAL = new THREE.MeshStandardMaterial({
  color: 0x8a8a8a,
  transparent: true,
  opacity: 0.45,
  roughness: 0.9,
});

function geometryFromStl(buffer: ArrayBuffer): THREE.BufferGeometry {
  const parsed = parseBinaryStl(buffer);
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(parsed.positions, 3));
  geometry.computeVertexNormals();
  return geometry;
}

function applyDto(object: THREE.Object3D, transform: TransformDto): void {
  object.position.set(...transform.t);
  const [w, x, y, z] = transform.q;
  object.quaternion.set(x, y, z, w);
  object.scale.set(...transform.s);
}

export class Viewport {
  readonly scene = new THREE.Scene();
  private readonly camera: THREE.PerspectiveCamera;
  private readonly renderer: THREE.WebGLRenderer;
  private readonly orbit: OrbitControls;
  private readonly gizmo: TransformControls;
  private readonly nodeObjects = new Map<number, THREE.Mesh>();
  private readonly outlines = new Map<number, THREE.LineSegments>();
  private readonly meshCache = new Map<string, THREE.BufferGeometry>();
  private ghost: THREE.Mesh | null = null;
  private gizmoNode: number | null = null;

  onPick: (nodeId: number, additive: boolean) => void = () => {};
  onGizmoCommit: (nodeId: number, transform: TransformDto) => void = () => {};

  constructor(private readonly store: SessionStore, canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setClearColor(0x1c1f24);
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.1, 5000);
    this.camera.position.set(180, -220, 160);
    this.camera.up.set(0, 0, 1);

    this.scene.add(new THREE.AmbientLight(0xffffff, 0.45));
    const key = new THREE.DirectionalLight(0xffffff, 1.1);
    key.position.set(150, -100, 300);
    this.scene.add(key);
    const grid = new THREE.GridHelper(400, 40, 0x39404a, 0x2a2f36);
    grid.rotation.x = Math.PI / 2;
    this.scene.add(grid);

    this.orbit = new OrbitControls(this.camera, canvas);
    this.gizmo = new TransformControls(this.camera, canvas);
    this.gizmo.addEventListener("dragging-changed", (event) => {
      const dragging = Boolean(event.value);
      this.orbit.enabled = !dragging;
      if (!dragging && this.gizmoNode !== null) {
        const object = this.nodeObjects.get(this.gizmoNode);
        if (object) {
          // commit once on release, matching the pessimistic store
          this.onGizmoCommit(this.gizmoNode, {
            t: [object.position.x, object.position.y, object.position.z],
            q: [
              object.quaternion.w,
              object.quaternion.x,
              object.quaternion.y,
              object.quaternion.z,
            ],
            s: [object.scale.x, object.scale.y, object.scale.z],
          });
        }
      }
    });
    this.scene.add(this.gizmo as unknown as THREE.Object3D);

    canvas.addEventListener("pointerdown", (event) => this.pick(event));
    const resize = () => {
      const { clientWidth, clientHeight } = canvas.parentElement ?? canvas;
      this.renderer.setSize(clientWidth, clientHeight, false);
      this.camera.aspect = clientWidth / Math.max(clientHeight, 1);
      this.camera.updateProjectionMatrix();
    };
    new ResizeObserver(resize).observe(canvas.parentElement ?? canvas);
    resize();

    const animate = () => {
      requestAnimationFrame(animate);
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  setGizmoMode(mode: "translate" | "rotate" | "scale"): void {
    this.gizmo.setMode(mode);
  }

  attachGizmo(nodeId: number | null): void {
    this.gizmoNode = nodeId;
    const object = nodeId !== null ? this.nodeObjects.get(nodeId) : undefined;
    if (object) {
      this.gizmo.attach(object);
    } else {
      this.gizmo.detach();
    }
  }

  private pick(event: PointerEvent): void {
    if ((this.gizmo as unknown as { dragging: boolean }).dragging) return;
    const rect = (event.target as HTMLCanvasElement).getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((event.clientX - rect.left) / rect.width) * 2 - 1,
      -((event.clientY - rect.top) / rect.height) * 2 + 1,
    );
    const caster = new THREE.Raycaster();
    caster.setFromCamera(ndc, this.camera);
    const hits = caster.intersectObjects([...this.nodeObjects.values()]);
    if (hits.length) {
      const nodeId = hits[0].object.userData.nodeId as number;
      this.onPick(nodeId, event.shiftKey);
    }
  }

  /** Pull meshes for new nodes and reconcile transforms/outlines. */
  async sync(): Promise<void> {
    const scene = this.store.state.scene;
    if (!scene) return;
    const seen = new Set<number>();
    for (const node of scene.nodes) {
      seen.add(node.id);
      let object = this.nodeObjects.get(node.id);
      if (!object) {
        const geometry = await this.nodeGeometry(scene.scene_id, node);
        const material =
          node.kind === "environment"
            ? ENV_MATERIAL
            : new THREE.MeshStandardMaterial({
                color: MODEL_COLORS[node.id % MODEL_COLORS.length],
                roughness: 0.65,
              });
        object = new THREE.Mesh(geometry, material);
        object.userData.nodeId = node.id;
        this.nodeObjects.set(node.id, object);
        this.scene.add(object);
      }
      applyDto(object, node.transform);
    }
    for (const [nodeId, object] of [...this.nodeObjects]) {
      if (!seen.has(nodeId)) {
        this.scene.remove(object);
        this.nodeObjects.delete(nodeId);
        if (this.gizmoNode === nodeId) this.attachGizmo(null);
      }
    }
    this.syncOutlines();
  }

  private async nodeGeometry(sceneId: string, node: NodeDto): Promise<THREE.BufferGeometry> {
    const key = `${sceneId}/${node.id}/${node.triangles}`;
    const cached = this.meshCache.get(key);
    if (cached) return cached;
    const buffer = await this.store.api.nodeMesh(sceneId, node.id, "local");
    const geometry = geometryFromStl(buffer);
    this.meshCache.set(key, geometry);
    return geometry;
  }

  private syncOutlines(): void {
    const colors = this.store.selectionColors();
    for (const [nodeId, outline] of [...this.outlines]) {
      if (!colors.has(nodeId)) {
        outline.removeFromParent();
        this.outlines.delete(nodeId);
      }
    }
    for (const [nodeId, color] of colors) {
      const host = this.nodeObjects.get(nodeId);
      if (!host) continue;
      let outline = this.outlines.get(nodeId);
      if (!outline) {
        outline = new THREE.LineSegments(
          new THREE.EdgesGeometry(host.geometry, 25),
          new THREE.LineBasicMaterial({ color }),
        );
        host.add(outline);
        this.outlines.set(nodeId, outline);
      } else {
        (outline.material as THREE.LineBasicMaterial).color.set(color);
      }
    }
  }

  /** Ghost preview of the active carousel item at a point in space. */
  async showGhost(position: { x: number; y: number; z: number } | null): Promise<void> {
    if (this.ghost) {
      this.ghost.removeFromParent();
      this.ghost = null;
    }
    const scene = this.store.state.scene;
    if (!position || !scene || scene.gathered.length === 0) return;
    // the ghost is client-side only; reuse any cached geometry of a node
    // placed from the same entry, else skip rendering the preview
    const item = scene.gathered[this.store.state.carouselActive];
    const source = scene.nodes.find(
      (n) => (n.source as { entry_id?: string }).entry_id === item.entry_id,
    );
    if (!source) return;
    const host = this.nodeObjects.get(source.id);
    if (!host) return;
    const ghost = new THREE.Mesh(
      host.geometry,
      new THREE.MeshBasicMaterial({
        color: 0xffffff,
        transparent: true,
        opacity: 0.25,
        wireframe: true,
      }),
    );
    ghost.position.set(position.x, position.y, position.z);
    this.scene.add(ghost);
    this.ghost = ghost;
  }
}
