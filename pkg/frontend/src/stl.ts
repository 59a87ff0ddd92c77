/** Binary STL parsing and the divergence-theorem volume, used to verify
 * exports without trusting the renderer. */

export interface ParsedStl {
  triangleCount: number;
  /** flat xyz triples, 9 floats per triangle */
  positions: Float32Array;
}

export function parseBinaryStl(buffer: ArrayBuffer): ParsedStl {
  if (buffer.byteLength < 84) {
    throw new Error("buffer too small for binary STL");
  }
  const view = new DataView(buffer);
  const count = view.getUint32(80, true);
  if (buffer.byteLength !== 84 + 50 * count) {
    throw new Error(
      `byte length ${buffer.byteLength} does not match ${count} facets`,
    );
  }
  const positions = new Float32Array(count * 9);
  let offset = 84;
  for (let i = 0; i < count; i++) {
    offset += 12; // stored normal is ignored; winding is authoritative
    for (let k = 0; k < 9; k++) {
      positions[i * 9 + k] = view.getFloat32(offset, true);
      offset += 4;
    }
    offset += 2; // attribute byte count
  }
  return { triangleCount: count, positions };
}

export function signedVolume(stl: ParsedStl): number {
  const p = stl.positions;
  let total = 0;
  for (let i = 0; i < stl.triangleCount; i++) {
    const o = i * 9;
    const ax = p[o], ay = p[o + 1], az = p[o + 2];
    const bx = p[o + 3], by = p[o + 4], bz = p[o + 5];
    const cx = p[o + 6], cy = p[o + 7], cz = p[o + 8];
    total +=
      ax * (by * cz - bz * cy) -
      ay * (bx * cz - bz * cx) +
      az * (bx * cy - by * cx);
  }
  return total / 6;
}

export function boundingBox(stl: ParsedStl): { min: number[]; max: number[] } {
  const min = [Infinity, Infinity, Infinity];
  const max = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < stl.positions.length; i += 3) {
    for (let k = 0; k < 3; k++) {
      const v = stl.positions[i + k];
      if (v < min[k]) min[k] = v;
      if (v > max[k]) max[k] = v;
    }
  }
  return { min, max };
}
