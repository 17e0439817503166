//! Rotation algebra: unit quaternions, rotation matrices and Z-Y-X Euler angles.
//!
//! Every type is an immutable value and every operation is pure. Quaternions
//! renormalize on construction and carry a canonical sign (`w >= 0`, ties
//! broken by the first nonzero vector component) so the double cover never
//! leaks into stored data or error metrics.

use nalgebra::{Matrix3, Vector3};

/// Unit quaternion `w + xi + yj + zk`, always normalized and canonical-signed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Proper rotation matrix (orthonormal columns, determinant +1).
#[derive(Debug, Clone, Copy)]
pub struct RotationMatrix(pub(crate) Matrix3<f64>);

/// Intrinsic Z-Y-X Euler angles: yaw `phi`, pitch `psi`, roll `theta`.
///
/// `phi, theta` lie in `(-pi, pi]`, `psi` in `[-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub phi: f64,
    pub psi: f64,
    pub theta: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Build from raw components, renormalizing and canonicalizing the sign.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        assert!(n > 0.0 && n.is_finite(), "quaternion components must be finite and nonzero");
        Self { w: w / n, x: x / n, y: y / n, z: z / n }.canonicalized()
    }

    /// Rotation by `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        assert!(n > 0.0, "axis must be nonzero");
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    /// Rotation vector (axis * angle) exponential.
    pub fn from_rotation_vector(v: [f64; 3]) -> Self {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-12 {
            // first-order expansion, renormalized by new()
            return Self::new(1.0, v[0] / 2.0, v[1] / 2.0, v[2] / 2.0);
        }
        Self::from_axis_angle(v, n)
    }

    fn canonicalized(self) -> Self {
        let Self { w, x, y, z } = self;
        let flip = w < 0.0
            || (w == 0.0 && (x < 0.0 || (x == 0.0 && (y < 0.0 || (y == 0.0 && z < 0.0)))));
        if flip {
            Self { w: -w, x: -x, y: -y, z: -z }
        } else {
            self
        }
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product `self ⊗ rhs`; composed rotation applies `rhs` first.
    pub fn compose(self, rhs: Self) -> Self {
        let (aw, ax, ay, az) = (self.w, self.x, self.y, self.z);
        let (bw, bx, by, bz) = (rhs.w, rhs.x, rhs.y, rhs.z);
        Self::new(
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        )
    }

    /// Rotate a 3-vector.
    pub fn rotate(self, v: [f64; 3]) -> [f64; 3] {
        let r = self.to_matrix().0 * Vector3::new(v[0], v[1], v[2]);
        [r.x, r.y, r.z]
    }

    pub fn to_matrix(self) -> RotationMatrix {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        RotationMatrix(Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
    }

    /// Shepperd's method; numerically stable for all rotations.
    pub fn from_matrix(m: &RotationMatrix) -> Self {
        let r = &m.0;
        let tr = r[(0, 0)] + r[(1, 1)] + r[(2, 2)];
        let (w, x, y, z);
        if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            w = s / 4.0;
            x = (r[(2, 1)] - r[(1, 2)]) / s;
            y = (r[(0, 2)] - r[(2, 0)]) / s;
            z = (r[(1, 0)] - r[(0, 1)]) / s;
        } else if r[(0, 0)] >= r[(1, 1)] && r[(0, 0)] >= r[(2, 2)] {
            let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            w = (r[(2, 1)] - r[(1, 2)]) / s;
            x = s / 4.0;
            y = (r[(0, 1)] + r[(1, 0)]) / s;
            z = (r[(0, 2)] + r[(2, 0)]) / s;
        } else if r[(1, 1)] >= r[(2, 2)] {
            let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
            w = (r[(0, 2)] - r[(2, 0)]) / s;
            x = (r[(0, 1)] + r[(1, 0)]) / s;
            y = s / 4.0;
            z = (r[(1, 2)] + r[(2, 1)]) / s;
        } else {
            let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
            w = (r[(1, 0)] - r[(0, 1)]) / s;
            x = (r[(0, 2)] + r[(2, 0)]) / s;
            y = (r[(1, 2)] + r[(2, 1)]) / s;
            z = s / 4.0;
        }
        Self::new(w, x, y, z)
    }

    /// Rotation vector (axis * angle, angle in [0, pi]) of this rotation.
    ///
    /// Uses atan2 rather than arccos so small angles keep full precision.
    pub fn to_rotation_vector(self) -> [f64; 3] {
        let vn = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        if vn < 1e-12 {
            return [2.0 * self.x, 2.0 * self.y, 2.0 * self.z];
        }
        let scale = 2.0 * vn.atan2(self.w) / vn;
        [self.x * scale, self.y * scale, self.z * scale]
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn components(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn to_euler(self) -> EulerAngles {
        quat_to_euler(self)
    }

    pub fn from_euler(e: EulerAngles) -> Self {
        euler_to_quat(e)
    }
}

impl RotationMatrix {
    pub fn entries(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    /// Max deviation of `R^T R` from identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.0.transpose() * self.0 - Matrix3::identity();
        d.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }
}

/// Hamilton product of two unit quaternions.
pub fn quat_compose(a: UnitQuaternion, b: UnitQuaternion) -> UnitQuaternion {
    a.compose(b)
}

/// Relative rotation `q01` with `q0 ⊗ q01 = q1`.
pub fn relative_rotation(q0: UnitQuaternion, q1: UnitQuaternion) -> UnitQuaternion {
    q0.conjugate().compose(q1)
}

/// Geodesic angle `2 acos(|<a,b>|)` between two rotations, in `[0, pi]`.
///
/// Invariant under a global sign flip of either argument.
pub fn quat_angle_error(a: UnitQuaternion, b: UnitQuaternion) -> f64 {
    let dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    // relative quaternion has |w| = |dot|; atan2 keeps precision near zero
    let rel = relative_rotation(a, b);
    let vn = (rel.x * rel.x + rel.y * rel.y + rel.z * rel.z).sqrt();
    2.0 * vn.atan2(dot.abs())
}

/// Quaternion of intrinsic Z-Y-X angles: `Rz(phi) * Ry(psi) * Rx(theta)`.
pub fn euler_to_quat(e: EulerAngles) -> UnitQuaternion {
    let qz = UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], e.phi);
    let qy = UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], e.psi);
    let qx = UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], e.theta);
    qz.compose(qy).compose(qx)
}

/// Intrinsic Z-Y-X angles of a rotation.
///
/// Within 1e-6 of gimbal lock (|psi| = pi/2) the roll is pinned to zero and
/// yaw absorbs the remaining rotation; the recomposed quaternion still matches.
pub fn quat_to_euler(q: UnitQuaternion) -> EulerAngles {
    let m = q.to_matrix().0;
    let s_psi = (-m[(2, 0)]).clamp(-1.0, 1.0);
    if 1.0 - s_psi.abs() < 5e-15 {
        // degenerate branch: only phi -/+ theta is observable
        let phi = if s_psi > 0.0 {
            m[(1, 2)].atan2(m[(1, 1)])
        } else {
            (-m[(1, 2)]).atan2(m[(1, 1)])
        };
        return EulerAngles { phi, psi: s_psi.asin(), theta: 0.0 };
    }
    EulerAngles {
        phi: m[(1, 0)].atan2(m[(0, 0)]),
        psi: s_psi.asin(),
        theta: m[(2, 1)].atan2(m[(2, 2)]),
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a % std::f64::consts::TAU;
    if r <= -std::f64::consts::PI {
        r += std::f64::consts::TAU;
    } else if r > std::f64::consts::PI {
        r -= std::f64::consts::TAU;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_quat(rng: &mut ChaCha8Rng) -> UnitQuaternion {
        loop {
            let (w, x, y, z) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n: f64 = w * w + x * x + y * y + z * z;
            if n > 1e-3 && n < 1.0 {
                return UnitQuaternion::new(w, x, y, z);
            }
        }
    }

    #[test]
    fn compose_identity_and_inverse() {
        let q = UnitQuaternion::from_axis_angle([0.3, -0.5, 0.8], 1.1);
        let id = UnitQuaternion::IDENTITY;
        assert!(quat_angle_error(quat_compose(id, q), q) < 1e-15);
        assert!(quat_angle_error(quat_compose(q, q.conjugate()), id) < 1e-15);
    }

    #[test]
    fn compose_matches_matrix_product_oracle() {
        // 90 deg about x then composed with 90 deg about y, checked against the
        // brute-force matrix product converted back to a quaternion.
        let qx = UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], FRAC_PI_2);
        let qy = UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], FRAC_PI_2);
        let composed = quat_compose(qx, qy);
        let oracle =
            UnitQuaternion::from_matrix(&RotationMatrix(qx.to_matrix().0 * qy.to_matrix().0));
        assert!(quat_angle_error(composed, oracle) < 1e-12);
        // frozen expected value for this case
        for (got, want) in composed.components().iter().zip([0.5, 0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-12);
        }
    }

    #[test]
    fn relative_rotation_trivial_cases() {
        let q = UnitQuaternion::from_axis_angle([0.1, 0.9, -0.2], 0.7);
        assert!(quat_angle_error(relative_rotation(q, q), UnitQuaternion::IDENTITY) < 1e-15);
        assert!(quat_angle_error(relative_rotation(UnitQuaternion::IDENTITY, q), q) < 1e-15);
    }

    #[test]
    fn relative_rotation_recomposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let q0 = random_quat(&mut rng);
            let q1 = random_quat(&mut rng);
            let rel = relative_rotation(q0, q1);
            assert!(quat_angle_error(quat_compose(q0, rel), q1) < 1e-10);
        }
    }

    #[test]
    fn composition_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let (a, b, c) = (random_quat(&mut rng), random_quat(&mut rng), random_quat(&mut rng));
            let lhs = quat_compose(quat_compose(a, b), c);
            let rhs = quat_compose(a, quat_compose(b, c));
            assert!(quat_angle_error(lhs, rhs) < 1e-10);
        }
    }

    #[test]
    fn euler_fixed_points() {
        let e = quat_to_euler(UnitQuaternion::IDENTITY);
        assert_abs_diff_eq!(e.phi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.psi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.theta, 0.0, epsilon = 1e-15);

        let yaw90 = UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], FRAC_PI_2);
        let e = quat_to_euler(yaw90);
        assert_abs_diff_eq!(e.phi, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(e.psi, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.theta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn euler_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let q = random_quat(&mut rng);
            let back = euler_to_quat(quat_to_euler(q));
            assert!(quat_angle_error(back, q) < 1e-9, "{q:?}");
            let e = quat_to_euler(q);
            assert!(e.phi > -PI && e.phi <= PI);
            assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&e.psi));
            assert!(e.theta > -PI && e.theta <= PI);
        }
    }

    #[test]
    fn euler_near_gimbal_lock() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let eps: f64 = rng.random_range(-1e-6..1e-6);
            let q = euler_to_quat(EulerAngles {
                phi: rng.random_range(-3.0..3.0),
                psi: FRAC_PI_2 - eps.abs(),
                theta: rng.random_range(-3.0..3.0),
            });
            let back = euler_to_quat(quat_to_euler(q));
            assert!(quat_angle_error(back, q) < 1e-6);
        }
    }

    #[test]
    fn angle_error_cases() {
        let q = UnitQuaternion::from_axis_angle([0.2, 0.5, 0.6], 0.9);
        assert_abs_diff_eq!(quat_angle_error(q, q), 0.0, epsilon = 1e-12);
        // double-cover: component-wise negation is the same rotation
        let neg = UnitQuaternion { w: -q.w, x: -q.x, y: -q.y, z: -q.z };
        assert_abs_diff_eq!(quat_angle_error(q, neg), 0.0, epsilon = 1e-12);

        let a = UnitQuaternion::IDENTITY;
        let b = UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], 0.2);
        assert_abs_diff_eq!(quat_angle_error(a, b), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn canonical_sign_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let q = random_quat(&mut rng);
            assert!(q.w >= 0.0);
            assert_abs_diff_eq!(q.norm(), 1.0, epsilon = 1e-12);
            let m = q.to_matrix();
            assert!(m.orthonormality_defect() < 1e-10);
            assert_abs_diff_eq!(m.determinant(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rotation_vector_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let q = random_quat(&mut rng);
            let back = UnitQuaternion::from_rotation_vector(q.to_rotation_vector());
            assert!(quat_angle_error(back, q) < 1e-10);
        }
    }
}
