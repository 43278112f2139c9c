// Minimal dual quaternion decoding: the service streams robot poses as
// 8-vectors [rw rx ry rz dw dx dy dz]; the views need the tool position and
// the tool axis direction only.

export type Vec3 = [number, number, number];

function quatMul(a: number[], b: number[]): number[] {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

function conj(q: number[]): number[] {
  return [q[0], -q[1], -q[2], -q[3]];
}

/** Frame origin: t = 2 * dual * conj(primary). */
export function poseTranslation(vec8: number[]): Vec3 {
  const p = vec8.slice(0, 4);
  const d = vec8.slice(4, 8);
  const t = quatMul(d, conj(p));
  return [2 * t[1], 2 * t[2], 2 * t[3]];
}

/** Unit axis of the frame rotated into the world: r * axis * conj(r). */
export function poseAxis(vec8: number[], axis: Vec3): Vec3 {
  const p = vec8.slice(0, 4);
  const v = quatMul(quatMul(p, [0, axis[0], axis[1], axis[2]]), conj(p));
  return [v[1], v[2], v[3]];
}
