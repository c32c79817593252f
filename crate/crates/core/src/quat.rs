//! Quaternion algebra and the double cover of SO(4).
//!
//! Points of R^4 are identified with quaternions q = (q1,q2,q3,q4), or with
//! the complex pair (z1, z2) = (q1 + i q2, q3 + i q4). A pair of unit
//! quaternions (l, r) acts on R^4 by q -> l q r~, which is a rotation; the
//! map (l, r) -> rotation is 2-to-1 with kernel {(1,1),(-1,-1)}.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for accepting a quaternion as unit-norm on input.
const UNIT_INPUT_TOL: f64 = 1e-9;
/// Orthogonality defect accepted by the checked `Orthogonal4` constructor.
const ORTHOGONALITY_TOL: f64 = 1e-12;
/// A component below this is treated as zero when picking the canonical sign.
const SIGN_PIVOT_TOL: f64 = 1e-9;

/// A real quaternion (q1, q2, q3, q4); q1 is the real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(q1: f64, q2: f64, q3: f64, q4: f64) -> Self {
        Quaternion { q1, q2, q3, q4 }
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q1, self.q2, self.q3, self.q4]
    }

    /// The complex pair (z1, z2) = (q1 + i q2, q3 + i q4).
    pub fn to_complex_pair(self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.q1, self.q2),
            Complex64::new(self.q3, self.q4),
        )
    }

    pub fn from_complex_pair(z1: Complex64, z2: Complex64) -> Self {
        Quaternion::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Quaternion::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.q1, self.q2, self.q3, self.q4)
    }

    /// Conjugate q~ = (q1, -q2, -q3, -q4); the inverse of a unit quaternion.
    pub fn conjugate(self) -> Self {
        Quaternion::new(self.q1, -self.q2, -self.q3, -self.q4)
    }

    pub fn norm_sq(self) -> f64 {
        self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3 + self.q4 * self.q4
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(s * self.q1, s * self.q2, s * self.q3, s * self.q4)
    }

    pub fn neg(self) -> Self {
        self.scale(-1.0)
    }

    /// Rescale to unit norm; errors when the input is not already close.
    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if (n - 1.0).abs() > UNIT_INPUT_TOL {
            return Err(Error::NotUnitQuaternion {
                norm: n,
                tol: UNIT_INPUT_TOL,
            });
        }
        Ok(self.scale(1.0 / n))
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

/// Quaternion product.
///
/// In complex-pair form, h u = (h1 u1 - h2 conj(u2), h1 u2 + h2 conj(u1)).
pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3 - a.q4 * b.q4,
        a.q1 * b.q2 + a.q2 * b.q1 + a.q3 * b.q4 - a.q4 * b.q3,
        a.q1 * b.q3 - a.q2 * b.q4 + a.q3 * b.q1 + a.q4 * b.q2,
        a.q1 * b.q4 + a.q2 * b.q3 - a.q3 * b.q2 + a.q4 * b.q1,
    )
}

/// An element of O(4), stored as its matrix.
///
/// SO(4) elements built from quaternion pairs and the orientation-reversing
/// reflections (which no quaternion pair produces) share this carrier.
#[derive(Debug, Clone, Copy)]
pub struct Orthogonal4 {
    m: Matrix4<f64>,
}

impl Orthogonal4 {
    /// Validating constructor: M^T M = I within `ORTHOGONALITY_TOL`.
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let defect = (m.transpose() * m - Matrix4::identity()).norm();
        if defect > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { defect });
        }
        Ok(Orthogonal4 { m })
    }

    /// Internal constructor for products of already-validated elements.
    pub(crate) fn new_unchecked(m: Matrix4<f64>) -> Self {
        debug_assert!(
            (m.transpose() * m - Matrix4::identity()).norm() < 1e-10,
            "orthogonality lost in composition"
        );
        Orthogonal4 { m }
    }

    pub fn identity() -> Self {
        Orthogonal4 {
            m: Matrix4::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    pub fn is_rotation(&self) -> bool {
        self.det() > 0.0
    }

    pub fn apply(&self, v: &Vector4<f64>) -> Vector4<f64> {
        self.m * v
    }

    pub fn compose(&self, other: &Orthogonal4) -> Orthogonal4 {
        Orthogonal4::new_unchecked(self.m * other.m)
    }

    pub fn inverse(&self) -> Orthogonal4 {
        Orthogonal4::new_unchecked(self.m.transpose())
    }

    /// Frobenius distance to another element.
    pub fn dist(&self, other: &Orthogonal4) -> f64 {
        (self.m - other.m).norm()
    }
}

/// A rotation of R^4 given by a unit quaternion pair, q -> l q r~.
///
/// The sign ambiguity (l, r) ~ (-l, -r) is resolved by making the first
/// component of `l` that exceeds `SIGN_PIVOT_TOL` in magnitude positive.
#[derive(Debug, Clone, Copy)]
pub struct Rotation4 {
    left: Quaternion,
    right: Quaternion,
}

impl Rotation4 {
    pub fn new(left: Quaternion, right: Quaternion) -> Result<Self> {
        let mut l = left.normalized()?;
        let mut r = right.normalized()?;
        for c in l.to_array() {
            if c.abs() > SIGN_PIVOT_TOL {
                if c < 0.0 {
                    l = l.neg();
                    r = r.neg();
                }
                break;
            }
        }
        Ok(Rotation4 { left: l, right: r })
    }

    pub fn left(&self) -> Quaternion {
        self.left
    }

    pub fn right(&self) -> Quaternion {
        self.right
    }

    /// The matrix of q -> l q r~. Columns are the images of the basis
    /// quaternions; the determinant is +1.
    pub fn matrix(&self) -> Orthogonal4 {
        let rc = self.right.conjugate();
        let mut m = Matrix4::zeros();
        let basis = [
            Quaternion::new(1.0, 0.0, 0.0, 0.0),
            Quaternion::new(0.0, 1.0, 0.0, 0.0),
            Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Quaternion::new(0.0, 0.0, 0.0, 1.0),
        ];
        for (j, e) in basis.iter().enumerate() {
            let img = quat_mul(quat_mul(self.left, *e), rc);
            m.set_column(j, &img.to_vector());
        }
        Orthogonal4::new_unchecked(m)
    }
}

/// Matrix of the rotation q -> l q r~ with input validation.
pub fn rotation_matrix(left: Quaternion, right: Quaternion) -> Result<Orthogonal4> {
    Ok(Rotation4::new(left, right)?.matrix())
}

/// Predicate behind "dim Fix<g> = 2": writing g = ((cos a, sin a v);
/// (cos b, sin b w)), the fixed space of <g> is a plane iff cos a = cos b.
/// The identity (dim 4) is excluded explicitly.
pub fn dim_fix_two_predicate(g: &Rotation4) -> bool {
    let l1 = g.left().q1;
    let r1 = g.right().q1;
    let is_identity = (l1.abs() - 1.0).abs() < 1e-12
        && (r1.abs() - 1.0).abs() < 1e-12
        && (l1 - r1).abs() < 1e-10;
    if is_identity {
        return false;
    }
    (l1 - r1).abs() <= 1e-10
}

/// Intersection geometry of two planes given by their plane reflections.
///
/// A plane reflection is a rotation ((0, v); (0, w)): identity on the plane,
/// -I on its orthogonal complement. Writing p, q for the first components of
/// the quaternion products l1 l2 and r1 r2, the planes intersect in a line
/// iff p = q, and the angle between them is then acos|p|. Returns `None`
/// when the planes meet only at the origin.
pub fn plane_pair_geometry(p1: &Rotation4, p2: &Rotation4) -> Result<Option<f64>> {
    for g in [p1, p2] {
        if g.left().q1.abs() > 1e-10 || g.right().q1.abs() > 1e-10 {
            return Err(Error::ParameterDomain(format!(
                "plane_pair_geometry expects plane reflections ((0,v);(0,w)); got left q1 = {}, right q1 = {}",
                g.left().q1,
                g.right().q1
            )));
        }
    }
    let p = quat_mul(p1.left(), p2.left()).q1;
    let q = quat_mul(p1.right(), p2.right()).q1;
    if (p - q).abs() > 1e-9 {
        return Ok(None);
    }
    let c = 0.5 * (p + q);
    Ok(Some(c.abs().clamp(0.0, 1.0).acos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    #[test]
    fn identity_element() {
        let x = q(0.3, -0.4, 0.5, 0.1);
        assert_eq!(quat_mul(Quaternion::ONE, x), x);
        assert_eq!(quat_mul(x, Quaternion::ONE), x);
    }

    #[test]
    fn ij_equals_k() {
        let i = q(0.0, 1.0, 0.0, 0.0);
        let j = q(0.0, 0.0, 1.0, 0.0);
        let k = quat_mul(i, j);
        assert_eq!(k.to_array(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn conjugate_gives_norm() {
        let x = q(1.2, -0.7, 0.3, 2.1);
        let p = quat_mul(x, x.conjugate());
        assert_relative_eq!(p.q1, x.norm_sq(), epsilon = 1e-14);
        assert!(p.q2.abs() < 1e-14 && p.q3.abs() < 1e-14 && p.q4.abs() < 1e-14);
    }

    #[test]
    fn norm_is_multiplicative() {
        let a = q(0.9, -1.3, 0.2, 0.5);
        let b = q(-0.1, 0.8, 1.1, -0.6);
        assert_relative_eq!(
            quat_mul(a, b).norm(),
            a.norm() * b.norm(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn complex_pair_product_matches() {
        let a = q(0.9, -1.3, 0.2, 0.5);
        let b = q(-0.1, 0.8, 1.1, -0.6);
        let (h1, h2) = a.to_complex_pair();
        let (u1, u2) = b.to_complex_pair();
        let prod = Quaternion::from_complex_pair(h1 * u1 - h2 * u2.conj(), h1 * u2 + h2 * u1.conj());
        let direct = quat_mul(a, b);
        for (x, y) in prod.to_array().iter().zip(direct.to_array().iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn rotation_matrix_is_special_orthogonal() {
        let g = Rotation4::new(q(0.5, 0.5, 0.5, 0.5), q(0.0, 1.0, 0.0, 0.0)).unwrap();
        let m = g.matrix();
        assert!(m.is_rotation());
        assert_relative_eq!(m.det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn action_table_row_first() {
        // ((0,1,0,0); (1,1,0,0)/sqrt2) acts as (z1,z2) -> (e^{i pi/4} z1, e^{3 i pi/4} z2)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = Rotation4::new(q(0.0, 1.0, 0.0, 0.0), q(s, s, 0.0, 0.0)).unwrap();
        let m = g.matrix();
        let img = m.apply(&Vector4::new(1.0, 0.0, 0.0, 0.0));
        assert_relative_eq!(img[0], s, epsilon = 1e-14);
        assert_relative_eq!(img[1], s, epsilon = 1e-14);
        assert!(img[2].abs() < 1e-14 && img[3].abs() < 1e-14);
        let img2 = m.apply(&Vector4::new(0.0, 0.0, 1.0, 0.0));
        assert_relative_eq!(img2[2], -s, epsilon = 1e-14);
        assert_relative_eq!(img2[3], s, epsilon = 1e-14);
    }

    #[test]
    fn action_table_rows_kappa() {
        // kappa(1,0,1) = ((0,1,0,0);(0,0,1,-1)/sqrt2): (z1,z2) -> (e^{3pi i/4} z2, e^{-3pi i/4} z1)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = Rotation4::new(q(0.0, 1.0, 0.0, 0.0), q(0.0, 0.0, s, -s)).unwrap();
        let m = g.matrix();
        // z = (0, 1): image should be (e^{3pi i/4}, 0)
        let img = m.apply(&Vector4::new(0.0, 0.0, 1.0, 0.0));
        assert_relative_eq!(img[0], -s, epsilon = 1e-14);
        assert_relative_eq!(img[1], s, epsilon = 1e-14);
        assert!(img[2].abs() < 1e-14 && img[3].abs() < 1e-14);
        // z = (1, 0): image should be (0, e^{-3pi i/4})
        let img2 = m.apply(&Vector4::new(1.0, 0.0, 0.0, 0.0));
        assert!(img2[0].abs() < 1e-14 && img2[1].abs() < 1e-14);
        assert_relative_eq!(img2[2], -s, epsilon = 1e-14);
        assert_relative_eq!(img2[3], -s, epsilon = 1e-14);

        // kappa(0,0,1) is the same map with the opposite global sign
        let h = Rotation4::new(q(0.0, 1.0, 0.0, 0.0), q(0.0, 0.0, -s, s)).unwrap();
        assert_relative_eq!(
            (h.matrix().matrix() + m.matrix()).norm(),
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn kernel_pair_same_matrix() {
        let l = q(0.5, 0.5, 0.5, 0.5);
        let r = q(0.0, 0.0, 1.0, 0.0);
        let g1 = Rotation4::new(l, r).unwrap().matrix();
        let g2 = Rotation4::new(l.neg(), r.neg()).unwrap().matrix();
        assert!(g1.dist(&g2) < 1e-14);
    }

    #[test]
    fn non_unit_rejected() {
        assert!(Rotation4::new(q(2.0, 0.0, 0.0, 0.0), Quaternion::ONE).is_err());
        assert!(rotation_matrix(q(0.9, 0.0, 0.0, 0.0), Quaternion::ONE).is_err());
    }

    #[test]
    fn plane_geometry_same_plane_angle_zero() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = Rotation4::new(q(0.0, 1.0, 0.0, 0.0), q(0.0, 0.0, s, -s)).unwrap();
        let angle = plane_pair_geometry(&p, &p).unwrap().unwrap();
        assert!(angle.abs() < 1e-12);
    }

    #[test]
    fn plane_geometry_rejects_non_reflection() {
        let p = Rotation4::new(q(0.5, 0.5, 0.5, 0.5), q(0.0, 1.0, 0.0, 0.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = Rotation4::new(q(0.0, 1.0, 0.0, 0.0), q(0.0, 0.0, s, -s)).unwrap();
        assert!(plane_pair_geometry(&p, &r).is_err());
    }

    #[test]
    fn right_angle_and_disjoint_planes() {
        let i = q(0.0, 1.0, 0.0, 0.0);
        let j = q(0.0, 0.0, 1.0, 0.0);
        // (i; i) fixes the z1-plane, (j; j) fixes the real plane (x1, x2).
        // They share the x1-axis and meet at a right angle: p = q = 0.
        let p1 = Rotation4::new(i, i).unwrap();
        let p2 = Rotation4::new(j, j).unwrap();
        let angle = plane_pair_geometry(&p1, &p2).unwrap();
        assert_relative_eq!(angle.unwrap(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        // (i; -i) fixes the z2-plane, fully orthogonal to the z1-plane:
        // first components differ (p = -1, q = +1), no shared line.
        let p3 = Rotation4::new(i, i.neg()).unwrap();
        assert!(plane_pair_geometry(&p1, &p3).unwrap().is_none());
    }

    #[test]
    fn dim_fix_predicate_basics() {
        // epsilon-type element: both first components 1/2
        let eps = Rotation4::new(q(0.5, 0.0, 0.0, 3f64.sqrt() / 2.0), q(0.5, 0.5, 0.5, 0.5)).unwrap();
        assert!(dim_fix_two_predicate(&eps));
        // identity: special-cased to false (fixed space has dim 4)
        let id = Rotation4::new(Quaternion::ONE, Quaternion::ONE).unwrap();
        assert!(!dim_fix_two_predicate(&id));
        // -I = (1; -1): first components 1 and -1, dim Fix = 0
        let minus = Rotation4::new(Quaternion::ONE, Quaternion::ONE.neg()).unwrap();
        assert!(!dim_fix_two_predicate(&minus));
    }
}
