//! The vector-field families under study: two cubic systems in R^4 with
//! dihedral symmetry (with and without an extra reflection), a cubic system
//! equivariant under the order-48 quaternionic group, and a planar quadratic
//! with triangular symmetry.
//!
//! Each family carries its symmetry group, an analytic Jacobian, closed-form
//! eigenvalues at the axis equilibria, and predicates for the inequalities
//! that govern existence of the heteroclinic cycle.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{
    d3_generators, d3_sigma_generators, generate_group, gl23_generators, GroupTable,
    LinearSubspace, MAX_ORDER_DEFAULT,
};
use crate::quat::Orthogonal4;

/// Largest admissible equivariance residual for a constructed field.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;
/// Largest admissible field norm at a reported equilibrium.
pub const FIELD_RESIDUAL_TOL: f64 = 1e-10;
/// Largest admissible gap between closed-form and numeric eigenvalues.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-8;
/// Largest admissible out-of-subspace component for a restriction.
pub const INVARIANCE_TOL: f64 = 1e-10;

const CONSTRAINT_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 64;
const EQUIVARIANCE_SEED: u64 = 0x4551_5549;
const INVARIANCE_SEED: u64 = 0x494e_5641;

/// Coefficients of the cubic system with dihedral symmetry.
///
/// The first equation is
/// `z1' = a1 z1 + a2 conj(z1) + a3 z1^2 + a4 conj(z1)^2 + a5 z1 conj(z1)
///      + a6 z2 conj(z2) + a7 z1^2 conj(z1) + a8 z1 z2 conj(z2)
///      + a9 z2^3 + a10 conj(z2)^3`
/// and the second
/// `z2' = b1 z2 + b2 z1 z2 + b3 conj(z1) z2 + b4 conj(z2)^2
///      + b5 z2 z1 conj(z1) + b6 z2^2 conj(z2)`.
///
/// Construction pins `a3 + a4 + a5 = 0` and `a7 = a8 = -1`. The tilde
/// variant adds the reflection `(z1, z2) -> (z1, conj(z2))` to the symmetry
/// group, which forces `a9 = a10` and `b2 = b3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffsD3 {
    a: [f64; 10],
    b: [f64; 6],
    tilde: bool,
}

impl CoeffsD3 {
    /// Coefficient set for the plain dihedral family.
    pub fn new(a: [f64; 10], b: [f64; 6]) -> Result<Self> {
        let sum = a[2] + a[3] + a[4];
        if sum.abs() > CONSTRAINT_TOL {
            return Err(Error::CoefficientConstraint(format!(
                "a3 + a4 + a5 = {sum:.3e} instead of 0"
            )));
        }
        if (a[6] + 1.0).abs() > CONSTRAINT_TOL || (a[7] + 1.0).abs() > CONSTRAINT_TOL {
            return Err(Error::CoefficientConstraint(format!(
                "a7 = {} and a8 = {} must both equal -1",
                a[6], a[7]
            )));
        }
        Ok(CoeffsD3 { a, b, tilde: false })
    }

    /// Coefficient set for the family with the extra reflection.
    pub fn new_tilde(a: [f64; 10], b: [f64; 6]) -> Result<Self> {
        let mut c = Self::new(a, b)?;
        if (a[8] - a[9]).abs() > CONSTRAINT_TOL {
            return Err(Error::CoefficientConstraint(format!(
                "reflection symmetry needs a9 = a10, got {} and {}",
                a[8], a[9]
            )));
        }
        if (b[1] - b[2]).abs() > CONSTRAINT_TOL {
            return Err(Error::CoefficientConstraint(format!(
                "reflection symmetry needs b2 = b3, got {} and {}",
                b[1], b[2]
            )));
        }
        c.tilde = true;
        Ok(c)
    }

    /// The published example set: a completely unstable cycle with a stable
    /// periodic orbit nearby.
    pub fn example() -> Self {
        CoeffsD3::new(
            [0.25, 0.05, 0.3, -0.05, -0.25, 0.6, -1.0, -1.0, 0.1, 0.15],
            [0.2, -0.1, -0.09, -0.1, -1.0, -1.0],
        )
        .expect("example coefficients satisfy the constraints")
    }

    /// The published example set for the reflection-extended family: the
    /// cycle attracts along the extra invariant 3-space.
    pub fn example_tilde() -> Self {
        CoeffsD3::new_tilde(
            [0.25, 0.05, 0.3, -0.05, -0.25, 0.6, -1.0, -1.0, 0.1, 0.1],
            [0.2, -0.6, -0.6, -0.1, -1.0, -1.0],
        )
        .expect("tilde example coefficients satisfy the constraints")
    }

    /// Coefficients `a1..a10` (index 0 holds `a1`).
    pub fn a(&self) -> &[f64; 10] {
        &self.a
    }

    /// Coefficients `b1..b6` (index 0 holds `b1`).
    pub fn b(&self) -> &[f64; 6] {
        &self.b
    }

    /// Linear rate along the symmetry axis, `a1 + a2`.
    pub fn alpha(&self) -> f64 {
        self.a[0] + self.a[1]
    }

    /// Linear rate on the in-plane transverse direction, `a1 - a2`.
    pub fn alpha_prime(&self) -> f64 {
        self.a[0] - self.a[1]
    }

    /// Whether the extra reflection is part of the symmetry group.
    pub fn is_tilde(&self) -> bool {
        self.tilde
    }
}

/// Coefficients of the cubic system with the order-48 symmetry group.
///
/// The complex constants of the compact arrangement are derived, never
/// stored: `A = -3 sqrt(3) e - i c/2`, `B = d + i e`,
/// `C = -3d + sqrt(3) c + 3 i e`, `D = sqrt(3)(-e + i(2d - sqrt(3) c / 2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffsGl {
    mu: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
}

impl CoeffsGl {
    pub fn new(mu: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        CoeffsGl { mu, b, c, d, e }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    /// The derived complex constants (A, B, C, D) of the cubic terms.
    pub fn cubic_constants(&self) -> (Complex64, Complex64, Complex64, Complex64) {
        let s3 = 3.0_f64.sqrt();
        let ca = Complex64::new(-3.0 * s3 * self.e, -self.c / 2.0);
        let cb = Complex64::new(self.d, self.e);
        let cc = Complex64::new(-3.0 * self.d + s3 * self.c, 3.0 * self.e);
        let cd = Complex64::new(-s3 * self.e, s3 * (2.0 * self.d - s3 / 2.0 * self.c));
        (ca, cb, cc, cd)
    }

    /// Cubic coefficient of the axis restriction through the first
    /// equilibrium: `r' = r (mu + K1 r^2)`.
    pub fn k1(&self) -> f64 {
        let s2 = 2.0_f64.sqrt();
        let s3 = 3.0_f64.sqrt();
        2.0 * self.b + 2.0 * s2 * self.c - 8.0 * s2 / s3 * self.d - 4.0 / s3 * self.e
    }

    /// Cubic coefficient of the axis restriction through the second
    /// equilibrium: `r' = r (mu + K2 r^2)`.
    pub fn k2(&self) -> f64 {
        let s2 = 2.0_f64.sqrt();
        let s3 = 3.0_f64.sqrt();
        2.0 * self.b - 2.0 * s2 * self.c + 8.0 * s2 / s3 * self.d - 4.0 / s3 * self.e
    }
}

/// Two-parameter slice of [`CoeffsGl`] used for the simulations: `d = 1`,
/// `mu = 1`, `e = (d - h1) / (2 sqrt(2))`,
/// `c = (10 sqrt(3) d + 2 sqrt(6) e) / 9 + h2`,
/// `b = (3 sqrt(2) c - 4 sqrt(6) d + 2 sqrt(3) e) / 3 - 1`.
///
/// `h2` is the double expanding eigenvalue up to the factor
/// `6 sqrt(2) r^2`, so small `h2` means a weakly unstable cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlParametrization {
    h1: f64,
    h2: f64,
}

impl GlParametrization {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        if h1 <= -1.0 || h1 >= 1.0 {
            return Err(Error::ParameterDomain(format!(
                "h1 = {h1} is outside (-1, 1)"
            )));
        }
        if h2 <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "h2 = {h2} must be positive"
            )));
        }
        Ok(GlParametrization { h1, h2 })
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn coeffs(&self) -> CoeffsGl {
        let s2 = 2.0_f64.sqrt();
        let s3 = 3.0_f64.sqrt();
        let s6 = 6.0_f64.sqrt();
        let d = 1.0;
        let e = (d - self.h1) / (2.0 * s2);
        let c = (10.0 * s3 * d + 2.0 * s6 * e) / 9.0 + self.h2;
        let b = (3.0 * s2 * c - 4.0 * s6 * d + 2.0 * s3 * e) / 3.0 - 1.0;
        CoeffsGl::new(1.0, b, c, d, e)
    }
}

/// Coefficients of the planar quadratic `z' = alpha z + beta conj(z)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarCoeffs {
    alpha: f64,
    beta: f64,
}

impl PlanarCoeffs {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "planar alpha = {alpha} must be positive"
            )));
        }
        if beta <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "planar beta = {beta} must be positive"
            )));
        }
        Ok(PlanarCoeffs { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Family tag of a vector field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    D3Cubic,
    D3TildeCubic,
    Gl23Cubic,
    PlanarD3,
}

#[derive(Clone, Debug)]
enum Coeffs {
    D3(CoeffsD3),
    Gl(CoeffsGl),
    Planar(PlanarCoeffs),
}

/// A vector field together with its symmetry group.
///
/// Construction computes the group table from the family's generators and
/// rejects coefficient sets whose equivariance residual exceeds
/// [`EQUIVARIANCE_TOL`]. The planar family embeds its symmetries in the
/// upper-left block of 4x4 matrices; the trailing two coordinates are inert.
#[derive(Clone, Debug)]
pub struct VectorFieldSpec {
    coeffs: Coeffs,
    group: GroupTable,
}

impl VectorFieldSpec {
    /// Cubic field in R^4 with the dihedral group (order 6) or, when the
    /// coefficients carry the reflection flag, its extension (order 12).
    pub fn d3(coeffs: CoeffsD3) -> Result<Self> {
        let gens = if coeffs.is_tilde() {
            d3_sigma_generators()
        } else {
            d3_generators()
        };
        let group = generate_group(&gens, MAX_ORDER_DEFAULT)?;
        Self::assemble(Coeffs::D3(coeffs), group)
    }

    /// Cubic field in R^4 with the order-48 quaternionic group.
    pub fn gl23(coeffs: CoeffsGl) -> Result<Self> {
        let group = generate_group(&gl23_generators(), MAX_ORDER_DEFAULT)?;
        Self::assemble(Coeffs::Gl(coeffs), group)
    }

    /// Planar quadratic with triangular symmetry.
    pub fn planar(coeffs: PlanarCoeffs) -> Result<Self> {
        let group = generate_group(&planar_d3_generators(), MAX_ORDER_DEFAULT)?;
        Self::assemble(Coeffs::Planar(coeffs), group)
    }

    fn assemble(coeffs: Coeffs, group: GroupTable) -> Result<Self> {
        let spec = VectorFieldSpec { coeffs, group };
        let residual = spec.verify_equivariance(16);
        if residual > EQUIVARIANCE_TOL {
            return Err(Error::CoefficientConstraint(format!(
                "field is not equivariant under its symmetry group: residual {residual:.3e}"
            )));
        }
        Ok(spec)
    }

    #[cfg(test)]
    fn assemble_unchecked(coeffs: Coeffs, group: GroupTable) -> Self {
        VectorFieldSpec { coeffs, group }
    }

    pub fn family(&self) -> Family {
        match &self.coeffs {
            Coeffs::D3(c) if c.is_tilde() => Family::D3TildeCubic,
            Coeffs::D3(_) => Family::D3Cubic,
            Coeffs::Gl(_) => Family::Gl23Cubic,
            Coeffs::Planar(_) => Family::PlanarD3,
        }
    }

    pub fn group(&self) -> &GroupTable {
        &self.group
    }

    /// State dimension: 4 for the quaternionic families, 2 for the planar one.
    pub fn dim(&self) -> usize {
        match &self.coeffs {
            Coeffs::Planar(_) => 2,
            _ => 4,
        }
    }

    /// Coefficients of the dihedral families, when applicable.
    pub fn coeffs_d3(&self) -> Option<&CoeffsD3> {
        match &self.coeffs {
            Coeffs::D3(c) => Some(c),
            _ => None,
        }
    }

    /// Coefficients of the order-48 family, when applicable.
    pub fn coeffs_gl(&self) -> Option<&CoeffsGl> {
        match &self.coeffs {
            Coeffs::Gl(c) => Some(c),
            _ => None,
        }
    }

    /// Coefficients of the planar family, when applicable.
    pub fn coeffs_planar(&self) -> Option<&PlanarCoeffs> {
        match &self.coeffs {
            Coeffs::Planar(c) => Some(c),
            _ => None,
        }
    }

    /// Evaluate the field at a point of matching dimension.
    pub fn eval_field(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match &self.coeffs {
            Coeffs::Planar(_) => {
                let f = self.eval2(&Vector2::new(x[0], x[1]));
                vec![f.x, f.y]
            }
            _ => {
                let f = self.eval4(&Vector4::new(x[0], x[1], x[2], x[3]));
                f.as_slice().to_vec()
            }
        })
    }

    /// Jacobian of the field at a point of matching dimension.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match &self.coeffs {
            Coeffs::Planar(_) => {
                let j = self.jacobian2(&Vector2::new(x[0], x[1]));
                DMatrix::from_column_slice(2, 2, j.as_slice())
            }
            _ => {
                let j = self.jacobian4(&Vector4::new(x[0], x[1], x[2], x[3]));
                DMatrix::from_column_slice(4, 4, j.as_slice())
            }
        })
    }

    /// Fast typed evaluation for the four-dimensional families.
    ///
    /// Panics on the planar family; use [`VectorFieldSpec::eval_field`] for
    /// dimension-checked access.
    #[inline]
    pub fn eval4(&self, x: &Vector4<f64>) -> Vector4<f64> {
        match &self.coeffs {
            Coeffs::D3(c) => eval_d3(c, x),
            Coeffs::Gl(c) => eval_gl(c, x),
            Coeffs::Planar(_) => panic!("eval4 called on the planar family"),
        }
    }

    /// Analytic Jacobian for the four-dimensional families.
    ///
    /// Panics on the planar family; use [`VectorFieldSpec::jacobian`] for
    /// dimension-checked access.
    pub fn jacobian4(&self, x: &Vector4<f64>) -> Matrix4<f64> {
        match &self.coeffs {
            Coeffs::D3(c) => jacobian_d3(c, x),
            Coeffs::Gl(c) => jacobian_gl(c, x),
            Coeffs::Planar(_) => panic!("jacobian4 called on the planar family"),
        }
    }

    /// Fast typed evaluation for the planar family.
    ///
    /// Panics on the four-dimensional families.
    #[inline]
    pub fn eval2(&self, x: &Vector2<f64>) -> Vector2<f64> {
        match &self.coeffs {
            Coeffs::Planar(c) => {
                let z = Complex64::new(x.x, x.y);
                let f = c.alpha() * z + c.beta() * z.conj() * z.conj();
                Vector2::new(f.re, f.im)
            }
            _ => panic!("eval2 called on a four-dimensional family"),
        }
    }

    /// Analytic Jacobian for the planar family.
    ///
    /// Panics on the four-dimensional families.
    pub fn jacobian2(&self, x: &Vector2<f64>) -> Matrix2<f64> {
        match &self.coeffs {
            Coeffs::Planar(c) => {
                let w = Complex64::new(x.x, -x.y);
                let fz = Complex64::new(c.alpha(), 0.0);
                let fw = 2.0 * c.beta() * w;
                let cx = fz + fw;
                let cy = Complex64::i() * (fz - fw);
                Matrix2::new(cx.re, cy.re, cx.im, cy.im)
            }
            _ => panic!("jacobian2 called on a four-dimensional family"),
        }
    }

    /// Maximum relative equivariance residual `|f(gx) - g f(x)| / (1 + |f(x)|)`
    /// over all group elements and `samples` pseudo-random points.
    pub fn verify_equivariance(&self, samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(EQUIVARIANCE_SEED);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            match &self.coeffs {
                Coeffs::Planar(_) => {
                    let x = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let fx = self.eval2(&x);
                    for g in self.group.elements() {
                        let m = g.matrix().fixed_view::<2, 2>(0, 0).into_owned();
                        let lhs = self.eval2(&(m * x));
                        let res = (lhs - m * fx).norm() / (1.0 + fx.norm());
                        worst = worst.max(res);
                    }
                }
                _ => {
                    let x = Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                    let fx = self.eval4(&x);
                    for g in self.group.elements() {
                        let lhs = self.eval4(&g.apply(&x));
                        let res = (lhs - g.apply(&fx)).norm() / (1.0 + fx.norm());
                        worst = worst.max(res);
                    }
                }
            }
        }
        worst
    }

    /// Restrict the field to a flow-invariant subspace of R^4.
    ///
    /// The restriction evaluates in the subspace's orthonormal coordinates.
    /// Points sampled across the subspace must map into it within
    /// [`INVARIANCE_TOL`] (relative to the field size).
    pub fn restrict(&self, space: &LinearSubspace) -> Result<Restriction<'_>> {
        if self.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: self.dim(),
            });
        }
        if space.dim() == 0 {
            return Err(Error::ParameterDomain(
                "cannot restrict to the zero subspace".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(INVARIANCE_SEED);
        let mut worst = 0.0_f64;
        for _ in 0..32 {
            let mut x = Vector4::zeros();
            for b in space.basis() {
                x += *b * rng.gen_range(-1.0..1.0);
            }
            let f = self.eval4(&x);
            let res = (f - space.project(&f)).norm() / (1.0 + f.norm());
            worst = worst.max(res);
        }
        if worst > INVARIANCE_TOL {
            return Err(Error::NotFlowInvariant { residual: worst });
        }
        Ok(Restriction {
            spec: self,
            space: space.clone(),
        })
    }
}

/// A vector field restricted to a flow-invariant subspace.
pub struct Restriction<'a> {
    spec: &'a VectorFieldSpec,
    space: LinearSubspace,
}

impl Restriction<'_> {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn subspace(&self) -> &LinearSubspace {
        &self.space
    }

    /// Evaluate the reduced field in subspace coordinates.
    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: y.len(),
            });
        }
        let mut x = Vector4::zeros();
        for (c, b) in y.iter().zip(self.space.basis()) {
            x += *b * *c;
        }
        let f = self.spec.eval4(&x);
        Ok(self.space.basis().iter().map(|b| b.dot(&f)).collect())
    }
}

/// Generators of the planar triangular symmetry, embedded in the upper-left
/// block of O(4).
fn planar_d3_generators() -> Vec<Orthogonal4> {
    let t = 2.0 * std::f64::consts::PI / 3.0;
    let rot = Matrix4::new(
        t.cos(),
        -t.sin(),
        0.0,
        0.0,
        t.sin(),
        t.cos(),
        0.0,
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        0.0,
        1.0,
    );
    let conj = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, 1.0, 1.0));
    vec![
        Orthogonal4::new(rot).expect("rotation block is orthogonal"),
        Orthogonal4::new(conj).expect("reflection block is orthogonal"),
    ]
}

#[inline]
fn eval_d3(c: &CoeffsD3, x: &Vector4<f64>) -> Vector4<f64> {
    let [a1, a2, a3, a4, a5, a6, a7, a8, a9, a10] = *c.a();
    let [b1, b2, b3, b4, b5, b6] = *c.b();
    let z1 = Complex64::new(x.x, x.y);
    let z2 = Complex64::new(x.z, x.w);
    let w1 = z1.conj();
    let w2 = z2.conj();
    let f1 = a1 * z1
        + a2 * w1
        + a3 * z1 * z1
        + a4 * w1 * w1
        + a5 * z1 * w1
        + a6 * z2 * w2
        + a7 * z1 * z1 * w1
        + a8 * z1 * z2 * w2
        + a9 * z2 * z2 * z2
        + a10 * w2 * w2 * w2;
    let f2 = b1 * z2 + b2 * z1 * z2 + b3 * w1 * z2 + b4 * w2 * w2 + b5 * z2 * z1 * w1
        + b6 * z2 * z2 * w2;
    Vector4::new(f1.re, f1.im, f2.re, f2.im)
}

fn jacobian_d3(c: &CoeffsD3, x: &Vector4<f64>) -> Matrix4<f64> {
    let [a1, a2, a3, a4, a5, a6, a7, a8, a9, a10] = *c.a();
    let [b1, b2, b3, b4, b5, b6] = *c.b();
    let z1 = Complex64::new(x.x, x.y);
    let z2 = Complex64::new(x.z, x.w);
    let w1 = z1.conj();
    let w2 = z2.conj();
    let dz = [
        [
            a1 + 2.0 * a3 * z1 + a5 * w1 + 2.0 * a7 * z1 * w1 + a8 * z2 * w2,
            a6 * w2 + a8 * z1 * w2 + 3.0 * a9 * z2 * z2,
        ],
        [
            b2 * z2 + b5 * z2 * w1,
            b1 + b2 * z1 + b3 * w1 + b5 * z1 * w1 + 2.0 * b6 * z2 * w2,
        ],
    ];
    let dw = [
        [
            a2 + 2.0 * a4 * w1 + a5 * z1 + a7 * z1 * z1,
            a6 * z2 + a8 * z1 * z2 + 3.0 * a10 * w2 * w2,
        ],
        [
            b3 * z2 + b5 * z1 * z2,
            2.0 * b4 * w2 + b6 * z2 * z2,
        ],
    ];
    real_jacobian(dz, dw)
}

#[inline]
fn eval_gl(c: &CoeffsGl, x: &Vector4<f64>) -> Vector4<f64> {
    let (ca, cb, cc, cd) = c.cubic_constants();
    let ic = Complex64::new(0.0, c.c());
    let z1 = Complex64::new(x.x, x.y);
    let z2 = Complex64::new(x.z, x.w);
    let w1 = z1.conj();
    let w2 = z2.conj();
    let lin = c.mu() + c.b() * (z1.norm_sqr() + z2.norm_sqr());
    let f1 = lin * z1
        + ca * z1 * z1 * w1
        + ic * z1 * z2 * w2
        + cb * z2 * z2 * z2
        + cc * w1 * w1 * z2
        + cd * w1 * w2 * w2;
    let f2 = lin * z2 + ca * z2 * z2 * w2 + ic * z1 * w1 * z2 - cb * z1 * z1 * z1
        - cc * z1 * w2 * w2
        + cd * w1 * w1 * w2;
    Vector4::new(f1.re, f1.im, f2.re, f2.im)
}

fn jacobian_gl(c: &CoeffsGl, x: &Vector4<f64>) -> Matrix4<f64> {
    let (ca, cb, cc, cd) = c.cubic_constants();
    let ic = Complex64::new(0.0, c.c());
    let b = c.b();
    let mu = c.mu();
    let z1 = Complex64::new(x.x, x.y);
    let z2 = Complex64::new(x.z, x.w);
    let w1 = z1.conj();
    let w2 = z2.conj();
    let dz = [
        [
            mu + b * (2.0 * z1 * w1 + z2 * w2) + 2.0 * ca * z1 * w1 + ic * z2 * w2,
            b * z1 * w2 + ic * z1 * w2 + 3.0 * cb * z2 * z2 + cc * w1 * w1,
        ],
        [
            b * w1 * z2 + ic * w1 * z2 - 3.0 * cb * z1 * z1 - cc * w2 * w2,
            mu + b * (z1 * w1 + 2.0 * z2 * w2) + 2.0 * ca * z2 * w2 + ic * z1 * w1,
        ],
    ];
    let dw = [
        [
            b * z1 * z1 + ca * z1 * z1 + 2.0 * cc * w1 * z2 + cd * w2 * w2,
            b * z1 * z2 + ic * z1 * z2 + 2.0 * cd * w1 * w2,
        ],
        [
            b * z1 * z2 + ic * z1 * z2 + 2.0 * cd * w1 * w2,
            b * z2 * z2 + ca * z2 * z2 - 2.0 * cc * z1 * w2 + cd * w1 * w1,
        ],
    ];
    real_jacobian(dz, dw)
}

/// Assemble the real 4x4 Jacobian from the complex derivatives of
/// `(F1, F2)` with respect to `(z1, z2)` (`dz`) and their conjugates (`dw`).
fn real_jacobian(dz: [[Complex64; 2]; 2], dw: [[Complex64; 2]; 2]) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let cx = dz[i][j] + dw[i][j];
            let cy = Complex64::i() * (dz[i][j] - dw[i][j]);
            m[(2 * i, 2 * j)] = cx.re;
            m[(2 * i + 1, 2 * j)] = cx.im;
            m[(2 * i, 2 * j + 1)] = cy.re;
            m[(2 * i + 1, 2 * j + 1)] = cy.im;
        }
    }
    m
}

/// Which of the two axis equilibria of the cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhichEquilibrium {
    Xi1,
    Xi2,
}

/// Closed-form eigenvalues of the linearization at an axis equilibrium.
///
/// `single` is the simple non-radial eigenvalue, `double` the eigenvalue
/// with the two-dimensional eigenspace. The printed formulas attach the
/// contraction/expansion names to the wrong rows for the dihedral families;
/// roles here come from sign and eigenspace geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticEigenvalues {
    pub radial: f64,
    pub single: f64,
    pub double: f64,
}

/// Geometric role of an eigenvalue at an axis equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenRole {
    /// Along the equilibrium's own axis.
    Radial,
    /// Simple eigenvalue, negative.
    Contracting,
    /// Simple eigenvalue, positive.
    Expanding,
    /// The two-dimensional eigenspace pairing the next connection plane
    /// with its transverse copy.
    Double,
}

/// One eigenvalue of the linearization with its eigenspace.
#[derive(Clone, Debug)]
pub struct LabeledEigenvalue {
    pub value: f64,
    pub multiplicity: usize,
    pub basis: Vec<Vector4<f64>>,
    pub role: EigenRole,
}

/// An equilibrium on a symmetry axis with its full linearization data.
#[derive(Clone, Debug)]
pub struct EquilibriumReport {
    pub which: WhichEquilibrium,
    pub position: Vector4<f64>,
    pub radial: f64,
    pub residual: f64,
    pub eigenvalues: Vec<LabeledEigenvalue>,
}

/// Closed-form eigenvalues at an axis equilibrium.
pub fn analytic_eigenvalues(
    spec: &VectorFieldSpec,
    which: WhichEquilibrium,
) -> Result<AnalyticEigenvalues> {
    match (&spec.coeffs, which) {
        (Coeffs::D3(c), w) => {
            let alpha = c.alpha();
            if alpha <= 0.0 {
                return Err(Error::MissingEquilibrium(format!(
                    "alpha = {alpha} is not positive; the axis equilibria do not exist"
                )));
            }
            let s = match w {
                WhichEquilibrium::Xi1 => alpha.sqrt(),
                WhichEquilibrium::Xi2 => -alpha.sqrt(),
            };
            let [_, _, a3, a4, _, _, _, _, _, _] = *c.a();
            let [b1, b2, b3, _, b5, _] = *c.b();
            Ok(AnalyticEigenvalues {
                radial: -2.0 * alpha,
                single: c.alpha_prime() + 2.0 * (a3 - a4) * s - alpha,
                double: b1 + (b2 + b3) * s + b5 * alpha,
            })
        }
        (Coeffs::Gl(c), w) => {
            let s2 = 2.0_f64.sqrt();
            let s3 = 3.0_f64.sqrt();
            let s6 = 6.0_f64.sqrt();
            let k = match w {
                WhichEquilibrium::Xi1 => c.k1(),
                WhichEquilibrium::Xi2 => c.k2(),
            };
            if k >= 0.0 {
                return Err(Error::MissingEquilibrium(format!(
                    "axis cubic coefficient {k:.6} is not negative; no equilibrium on this axis"
                )));
            }
            let r2 = c.mu() / (-k);
            let (single, double) = match w {
                WhichEquilibrium::Xi1 => (
                    r2 * (-32.0 / s3 * c.e() + 8.0 * s2 / s3 * c.d()),
                    2.0 * s2 * r2 / 3.0 * (-9.0 * c.c() + 10.0 * s3 * c.d() - 2.0 * s6 * c.e()),
                ),
                WhichEquilibrium::Xi2 => (
                    r2 * (-32.0 / s3 * c.e() - 8.0 * s2 / s3 * c.d()),
                    2.0 * s2 * r2 / 3.0 * (9.0 * c.c() - 10.0 * s3 * c.d() - 2.0 * s6 * c.e()),
                ),
            };
            Ok(AnalyticEigenvalues {
                radial: -2.0 * c.mu(),
                single,
                double,
            })
        }
        (Coeffs::Planar(_), _) => Err(Error::InvalidScenario(
            "axis equilibrium spectra are defined for the four-dimensional families".into(),
        )),
    }
}

/// Contraction and expansion rates of the cycle, by eigenvalue role.
///
/// `c1`/`e1` sit at the first equilibrium (double contraction, simple
/// expansion), `c2`/`e2` at the second (simple contraction, double
/// expansion). All four are positive when the cycle exists.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleRates {
    pub c1: f64,
    pub e1: f64,
    pub c2: f64,
    pub e2: f64,
}

impl CycleRates {
    /// The contraction-to-expansion ratio `c1 c2 / (e1 e2)` that decides
    /// fragmentary stability of the cycle in the reflection-extended family.
    pub fn h(&self) -> f64 {
        self.c1 * self.c2 / (self.e1 * self.e2)
    }
}

/// Extract the cycle's four rates from the closed-form eigenvalues.
pub fn cycle_rates(spec: &VectorFieldSpec) -> Result<CycleRates> {
    let at1 = analytic_eigenvalues(spec, WhichEquilibrium::Xi1)?;
    let at2 = analytic_eigenvalues(spec, WhichEquilibrium::Xi2)?;
    let rates = CycleRates {
        c1: -at1.double,
        e1: at1.single,
        c2: -at2.single,
        e2: at2.double,
    };
    if rates.c1 <= 0.0 || rates.e1 <= 0.0 || rates.c2 <= 0.0 || rates.e2 <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "eigenvalues do not form a cycle (need double contraction then double expansion): \
             c1 = {:.4}, e1 = {:.4}, c2 = {:.4}, e2 = {:.4}",
            rates.c1, rates.e1, rates.c2, rates.e2
        )));
    }
    Ok(rates)
}

/// Locate the two axis equilibria and report their full linearizations.
pub fn equilibria_on_axes(spec: &VectorFieldSpec) -> Result<Vec<EquilibriumReport>> {
    let (dir1, s1, dir2, s2) = match &spec.coeffs {
        Coeffs::D3(c) => {
            let alpha = c.alpha();
            if alpha <= 0.0 {
                return Err(Error::MissingEquilibrium(format!(
                    "alpha = {alpha} is not positive; the axis equilibria do not exist"
                )));
            }
            let e1 = Vector4::new(1.0, 0.0, 0.0, 0.0);
            (e1, alpha.sqrt(), -e1, alpha.sqrt())
        }
        Coeffs::Gl(c) => {
            for (k, name) in [(c.k1(), "first"), (c.k2(), "second")] {
                if k >= 0.0 {
                    return Err(Error::MissingEquilibrium(format!(
                        "{name} axis cubic coefficient {k:.6} is not negative"
                    )));
                }
            }
            let r1 = (c.mu() / (-c.k1())).sqrt();
            let r2 = (c.mu() / (-c.k2())).sqrt();
            // The equilibrium at radius r sits at R^4 distance r * sqrt(2)
            // because both complex components have modulus r on the axis.
            (
                gl_axis_direction(WhichEquilibrium::Xi1),
                r1 * 2.0_f64.sqrt(),
                gl_axis_direction(WhichEquilibrium::Xi2),
                r2 * 2.0_f64.sqrt(),
            )
        }
        Coeffs::Planar(_) => {
            return Err(Error::InvalidScenario(
                "axis equilibrium reports are defined for the four-dimensional families".into(),
            ))
        }
    };
    let mut out = Vec::new();
    for (which, dir, s0) in [
        (WhichEquilibrium::Xi1, dir1, s1),
        (WhichEquilibrium::Xi2, dir2, s2),
    ] {
        let s = polish_on_axis(spec, &dir, s0);
        let position = dir * s;
        let residual = spec.eval4(&position).norm();
        if residual > FIELD_RESIDUAL_TOL {
            return Err(Error::EquilibriumNotConverged { residual });
        }
        let analytic = analytic_eigenvalues(spec, which)?;
        let jac = spec.jacobian4(&position);
        check_spectrum(&jac, &analytic)?;
        let single_role = if analytic.single >= 0.0 {
            EigenRole::Expanding
        } else {
            EigenRole::Contracting
        };
        let eigenvalues = vec![
            LabeledEigenvalue {
                value: analytic.radial,
                multiplicity: 1,
                basis: eigenspace(&jac, analytic.radial, 1)?,
                role: EigenRole::Radial,
            },
            LabeledEigenvalue {
                value: analytic.single,
                multiplicity: 1,
                basis: eigenspace(&jac, analytic.single, 1)?,
                role: single_role,
            },
            LabeledEigenvalue {
                value: analytic.double,
                multiplicity: 2,
                basis: eigenspace(&jac, analytic.double, 2)?,
                role: EigenRole::Double,
            },
        ];
        out.push(EquilibriumReport {
            which,
            position,
            radial: analytic.radial,
            residual,
            eigenvalues,
        });
    }
    Ok(out)
}

/// Unit direction of the invariant axis hosting the given equilibrium of the
/// order-48 family.
pub fn gl_axis_direction(which: WhichEquilibrium) -> Vector4<f64> {
    let quarter = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let three_quarter = Complex64::from_polar(1.0, 3.0 * std::f64::consts::FRAC_PI_4);
    let s3 = 3.0_f64.sqrt();
    let (sign, re) = match which {
        WhichEquilibrium::Xi1 => (-1.0, -1.0),
        WhichEquilibrium::Xi2 => (1.0, 1.0),
    };
    let phase_sq = Complex64::new(re / s3, 2.0_f64.sqrt() / s3) * quarter;
    let u = phase_sq.sqrt();
    let z1 = sign * three_quarter * u;
    let z2 = u;
    Vector4::new(z1.re, z1.im, z2.re, z2.im) / 2.0_f64.sqrt()
}

/// One-dimensional Newton refinement of the equilibrium radius along an axis.
fn polish_on_axis(spec: &VectorFieldSpec, dir: &Vector4<f64>, s0: f64) -> f64 {
    let mut s = s0;
    for _ in 0..NEWTON_MAX_ITER {
        let x = dir * s;
        let g = dir.dot(&spec.eval4(&x));
        let dg = dir.dot(&(spec.jacobian4(&x) * dir));
        if dg == 0.0 {
            break;
        }
        let step = g / dg;
        s -= step;
        if step.abs() <= 1e-15 * s.abs().max(1.0) {
            break;
        }
    }
    s
}

/// Check that every closed-form eigenvalue appears in the numeric spectrum
/// with its multiplicity.
fn check_spectrum(jac: &Matrix4<f64>, analytic: &AnalyticEigenvalues) -> Result<()> {
    let mut numeric: Vec<Complex64> = jac.complex_eigenvalues().iter().copied().collect();
    for (value, mult) in [
        (analytic.radial, 1),
        (analytic.single, 1),
        (analytic.double, 2),
    ] {
        for _ in 0..mult {
            let target = Complex64::new(value, 0.0);
            let (idx, defect) = numeric
                .iter()
                .enumerate()
                .map(|(i, nv)| (i, (nv - target).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("spectrum has four entries");
            if defect > SPECTRUM_MATCH_TOL {
                return Err(Error::SpectrumMismatch {
                    analytic: value,
                    defect,
                });
            }
            numeric.swap_remove(idx);
        }
    }
    Ok(())
}

/// Orthonormal basis of the eigenspace for an (approximately real) eigenvalue.
fn eigenspace(jac: &Matrix4<f64>, value: f64, expected: usize) -> Result<Vec<Vector4<f64>>> {
    let shifted = jac - Matrix4::identity() * value;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("svd of a 4x4 matrix yields v_t");
    let sigma_max = svd.singular_values.max().max(1.0);
    let mut basis: Vec<Vector4<f64>> = Vec::new();
    for i in 0..4 {
        if svd.singular_values[i] < 1e-7 * sigma_max {
            let mut v: Vector4<f64> = v_t.row(i).transpose();
            let pivot = v.iter().copied().find(|c| c.abs() > 1e-9).unwrap_or(1.0);
            if pivot < 0.0 {
                v = -v;
            }
            basis.push(v);
        }
    }
    if basis.len() != expected {
        return Err(Error::ParameterDomain(format!(
            "eigenvalue {value:.6} has eigenspace dimension {}, expected {expected}",
            basis.len()
        )));
    }
    basis.sort_by(|a, b| {
        a.iter()
            .map(|x| (x * 1e6).round() as i64)
            .cmp(b.iter().map(|x| (x * 1e6).round() as i64))
    });
    Ok(basis)
}

/// One inequality of an existence report.
#[derive(Clone, Debug)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl InequalityCheck {
    fn less(name: &'static str, lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            name,
            lhs,
            rhs,
            satisfied: lhs < rhs,
        }
    }

    fn greater(name: &'static str, lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            name,
            lhs,
            rhs,
            satisfied: lhs > rhs,
        }
    }
}

/// Evaluation of every existence inequality of a family.
#[derive(Clone, Debug)]
pub struct ExistenceReport {
    pub checks: Vec<InequalityCheck>,
    pub all_satisfied: bool,
}

/// Evaluate the published existence inequalities for the family, reporting
/// each with its computed sides.
pub fn existence_report(spec: &VectorFieldSpec) -> ExistenceReport {
    let mut checks = Vec::new();
    match &spec.coeffs {
        Coeffs::D3(c) => {
            let alpha = c.alpha();
            let [_, _, a3, a4, _, _, _, _, _, _] = *c.a();
            checks.push(InequalityCheck::greater("alpha > 0", alpha, 0.0));
            checks.push(InequalityCheck::greater("a3 + a4 > 0", a3 + a4, 0.0));
            checks.push(InequalityCheck::greater("a3 - a4 > 0", a3 - a4, 0.0));
            checks.push(InequalityCheck::less(
                "a3 - a4 + sqrt((a3 - a4)^2 + alpha') < sqrt(alpha)",
                a3 - a4 + ((a3 - a4).powi(2) + c.alpha_prime()).sqrt(),
                alpha.sqrt(),
            ));
            if alpha > 0.0 {
                if let (Ok(at1), Ok(_)) = (
                    analytic_eigenvalues(spec, WhichEquilibrium::Xi1),
                    analytic_eigenvalues(spec, WhichEquilibrium::Xi2),
                ) {
                    checks.push(InequalityCheck::greater(
                        "3 c1 > e1",
                        3.0 * -at1.double,
                        at1.single,
                    ));
                }
            }
        }
        Coeffs::Gl(c) => {
            let s2 = 2.0_f64.sqrt();
            let s3 = 3.0_f64.sqrt();
            let s6 = 6.0_f64.sqrt();
            let (b, cc, d, e) = (c.b(), c.c(), c.d(), c.e());
            checks.push(InequalityCheck::less("K1 < 0", c.k1(), 0.0));
            checks.push(InequalityCheck::less("K2 < 0", c.k2(), 0.0));
            if c.k1() < 0.0 && c.k2() < 0.0 {
                let at1 = analytic_eigenvalues(spec, WhichEquilibrium::Xi1)
                    .expect("equilibrium exists when K1 < 0");
                let at2 = analytic_eigenvalues(spec, WhichEquilibrium::Xi2)
                    .expect("equilibrium exists when K2 < 0");
                checks.push(InequalityCheck::greater(
                    "lambda1_sgl > 0",
                    at1.single,
                    0.0,
                ));
                checks.push(InequalityCheck::less("lambda2_sgl < 0", at2.single, 0.0));
                checks.push(InequalityCheck::less("lambda1_mlt < 0", at1.double, 0.0));
                checks.push(InequalityCheck::greater(
                    "lambda2_mlt > 0",
                    at2.double,
                    0.0,
                ));
            }
            checks.push(InequalityCheck::less("-d < 2 sqrt(2) e", -d, 2.0 * s2 * e));
            checks.push(InequalityCheck::less("2 sqrt(2) e < d", 2.0 * s2 * e, d));
            checks.push(InequalityCheck::greater(
                "9 c > max(10 sqrt(3) d + 2 sqrt(6) e, 10 sqrt(3) d - 2 sqrt(6) e)",
                9.0 * cc,
                (10.0 * s3 * d + 2.0 * s6 * e).max(10.0 * s3 * d - 2.0 * s6 * e),
            ));
            checks.push(InequalityCheck::less(
                "3 b < min(3 sqrt(2) c - 4 sqrt(6) d + 2 sqrt(3) e, \
                 -3 sqrt(2) c + 4 sqrt(6) d + 2 sqrt(3) e)",
                3.0 * b,
                (3.0 * s2 * cc - 4.0 * s6 * d + 2.0 * s3 * e)
                    .min(-3.0 * s2 * cc + 4.0 * s6 * d + 2.0 * s3 * e),
            ));
        }
        Coeffs::Planar(c) => {
            checks.push(InequalityCheck::greater("alpha > 0", c.alpha(), 0.0));
            checks.push(InequalityCheck::greater("beta > 0", c.beta(), 0.0));
        }
    }
    let all_satisfied = checks.iter().all(|c| c.satisfied);
    ExistenceReport {
        checks,
        all_satisfied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_isotropy_gl23;
    use approx::assert_relative_eq;

    fn d3_spec() -> VectorFieldSpec {
        VectorFieldSpec::d3(CoeffsD3::example()).unwrap()
    }

    fn tilde_spec() -> VectorFieldSpec {
        VectorFieldSpec::d3(CoeffsD3::example_tilde()).unwrap()
    }

    fn gl_spec() -> VectorFieldSpec {
        VectorFieldSpec::gl23(GlParametrization::new(0.8, 0.001).unwrap().coeffs()).unwrap()
    }

    fn planar_spec() -> VectorFieldSpec {
        VectorFieldSpec::planar(PlanarCoeffs::new(0.05, 1.0).unwrap()).unwrap()
    }

    fn random_point4(rng: &mut ChaCha8Rng) -> Vector4<f64> {
        Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn origin_is_an_equilibrium_for_every_family() {
        for spec in [d3_spec(), tilde_spec(), gl_spec()] {
            assert_eq!(spec.eval4(&Vector4::zeros()).norm(), 0.0);
        }
        assert_eq!(planar_spec().eval2(&Vector2::zeros()).norm(), 0.0);
    }

    #[test]
    fn coefficient_constraints_are_enforced() {
        let mut a = *CoeffsD3::example().a();
        a[2] += 0.1;
        assert!(matches!(
            CoeffsD3::new(a, *CoeffsD3::example().b()),
            Err(Error::CoefficientConstraint(_))
        ));
        let mut a = *CoeffsD3::example().a();
        a[8] = 0.1;
        a[9] = 0.15;
        assert!(matches!(
            CoeffsD3::new_tilde(a, *CoeffsD3::example_tilde().b()),
            Err(Error::CoefficientConstraint(_))
        ));
    }

    #[test]
    fn axis_restriction_is_a_scalar_cubic() {
        let spec = d3_spec();
        let alpha = CoeffsD3::example().alpha();
        for x1 in [-0.9, -0.3, 0.2, 0.55, 1.4] {
            let f = spec.eval4(&Vector4::new(x1, 0.0, 0.0, 0.0));
            assert_relative_eq!(f.x, alpha * x1 - x1.powi(3), max_relative = 1e-14);
            assert_eq!(f.y, 0.0);
            assert_eq!(f.z, 0.0);
            assert_eq!(f.w, 0.0);
        }
    }

    #[test]
    fn gl_field_matches_the_monomial_sum() {
        // Independent evaluation: mu z + b(|z1|^2+|z2|^2) z plus the three
        // cubic maps with weights c, d, e, written monomial by monomial.
        let coeffs = GlParametrization::new(0.6, 0.01).unwrap().coeffs();
        let spec = VectorFieldSpec::gl23(coeffs).unwrap();
        let i = Complex64::i();
        let s3 = 3.0_f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = random_point4(&mut rng);
            let z1 = Complex64::new(x.x, x.y);
            let z2 = Complex64::new(x.z, x.w);
            let (w1, w2) = (z1.conj(), z2.conj());
            let theta1 = (
                s3 * w1 * w1 * z2 - i / 2.0 * z1 * z1 * w1 + i * z1 * z2 * w2
                    - 1.5 * i * w1 * w2 * w2,
                -s3 * z1 * w2 * w2 - i / 2.0 * z2 * z2 * w2 + i * z1 * w1 * z2
                    - 1.5 * i * w1 * w1 * w2,
            );
            let theta2 = (
                z2 * z2 * z2 - 3.0 * w1 * w1 * z2 + 2.0 * i * s3 * w1 * w2 * w2,
                -z1 * z1 * z1 + 3.0 * z1 * w2 * w2 + 2.0 * i * s3 * w1 * w1 * w2,
            );
            let theta3 = (
                -3.0 * s3 * z1 * z1 * w1 - s3 * w1 * w2 * w2 + i * z2 * z2 * z2
                    + 3.0 * i * w1 * w1 * z2,
                -3.0 * s3 * z2 * z2 * w2 - s3 * w1 * w1 * w2 - i * z1 * z1 * z1
                    - 3.0 * i * z1 * w2 * w2,
            );
            let lin = coeffs.mu() + coeffs.b() * (z1.norm_sqr() + z2.norm_sqr());
            let f1 = lin * z1 + coeffs.c() * theta1.0 + coeffs.d() * theta2.0 + coeffs.e() * theta3.0;
            let f2 = lin * z2 + coeffs.c() * theta1.1 + coeffs.d() * theta2.1 + coeffs.e() * theta3.1;
            let f = spec.eval4(&x);
            assert_relative_eq!(f.x, f1.re, epsilon = 1e-13);
            assert_relative_eq!(f.y, f1.im, epsilon = 1e-13);
            assert_relative_eq!(f.z, f2.re, epsilon = 1e-13);
            assert_relative_eq!(f.w, f2.im, epsilon = 1e-13);
        }
    }

    #[test]
    fn jacobian_at_origin_is_the_linear_part() {
        let spec = d3_spec();
        let c = CoeffsD3::example();
        let j = spec.jacobian4(&Vector4::zeros());
        let expected = Matrix4::from_diagonal(&Vector4::new(
            c.alpha(),
            c.alpha_prime(),
            c.b()[0],
            c.b()[0],
        ));
        assert!((j - expected).norm() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for spec in [d3_spec(), tilde_spec(), gl_spec()] {
            for _ in 0..100 {
                let x = random_point4(&mut rng);
                let j = spec.jacobian4(&x);
                for col in 0..4 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[col] += h;
                    xm[col] -= h;
                    let fd = (spec.eval4(&xp) - spec.eval4(&xm)) / (2.0 * h);
                    for row in 0..4 {
                        assert!(
                            (j[(row, col)] - fd[row]).abs() < 1e-6,
                            "entry ({row},{col}) analytic {} vs fd {}",
                            j[(row, col)],
                            fd[row]
                        );
                    }
                }
            }
        }
        let spec = planar_spec();
        for _ in 0..100 {
            let x = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let j = spec.jacobian2(&x);
            for col in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[col] += h;
                xm[col] -= h;
                let fd = (spec.eval2(&xp) - spec.eval2(&xm)) / (2.0 * h);
                for row in 0..2 {
                    assert!((j[(row, col)] - fd[row]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn jacobian_conjugates_under_the_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for spec in [d3_spec(), gl_spec()] {
            let x = random_point4(&mut rng);
            for g in spec.group().elements() {
                let lhs = spec.jacobian4(&g.apply(&x));
                let m = g.matrix();
                let rhs = m * spec.jacobian4(&x) * m.transpose();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn equivariance_residuals_are_tiny() {
        assert!(d3_spec().verify_equivariance(100) < 1e-10);
        assert!(tilde_spec().verify_equivariance(100) < 1e-10);
        assert!(gl_spec().verify_equivariance(100) < 1e-9);
        assert!(planar_spec().verify_equivariance(100) < 1e-12);
    }

    #[test]
    fn corrupted_reflection_coefficients_are_rejected() {
        // a9 != a10 breaks equivariance under the reflection-extended group.
        let coeffs = CoeffsD3::new(
            [0.25, 0.05, 0.3, -0.05, -0.25, 0.6, -1.0, -1.0, 0.1, 0.15],
            [0.2, -0.6, -0.6, -0.1, -1.0, -1.0],
        )
        .unwrap();
        let group = generate_group(&d3_sigma_generators(), MAX_ORDER_DEFAULT).unwrap();
        let err = VectorFieldSpec::assemble(Coeffs::D3(coeffs), group.clone());
        assert!(matches!(err, Err(Error::CoefficientConstraint(_))));
        let spec = VectorFieldSpec::assemble_unchecked(Coeffs::D3(coeffs), group);
        assert!(spec.verify_equivariance(32) > 1e-3);
    }

    #[test]
    fn d3_equilibria_match_the_published_spectrum() {
        let reports = equilibria_on_axes(&d3_spec()).unwrap();
        assert_eq!(reports.len(), 2);
        let xi1 = &reports[0];
        let xi2 = &reports[1];
        assert_relative_eq!(xi1.position.x, 0.3_f64.sqrt(), epsilon = 1e-14);
        assert!(xi1.residual <= FIELD_RESIDUAL_TOL);
        assert_relative_eq!(xi1.radial, -0.6, epsilon = 1e-14);
        let single1 = &xi1.eigenvalues[1];
        let double1 = &xi1.eigenvalues[2];
        assert_eq!(single1.role, EigenRole::Expanding);
        assert!((single1.value - 0.2834).abs() < 5e-4);
        assert_eq!(double1.role, EigenRole::Double);
        assert_eq!(double1.multiplicity, 2);
        assert!((double1.value + 0.2041).abs() < 5e-4);
        let single2 = &xi2.eigenvalues[1];
        let double2 = &xi2.eigenvalues[2];
        assert_eq!(single2.role, EigenRole::Contracting);
        assert!((single2.value + 0.4834).abs() < 5e-4);
        assert!((double2.value - 0.0041).abs() < 5e-4);
        // The double eigenspace is the plane of the last two coordinates.
        for v in &double1.basis {
            assert!(v.x.abs() < 1e-9 && v.y.abs() < 1e-9);
        }
    }

    #[test]
    fn tilde_rates_give_strong_total_contraction() {
        let rates = cycle_rates(&tilde_spec()).unwrap();
        assert!((rates.c1 - 0.7573).abs() < 1e-3);
        assert!((rates.e2 - 0.5573).abs() < 1e-3);
        assert!((rates.h() - 2.318).abs() < 1e-3);
        assert!(rates.h() > 1.0);
    }

    #[test]
    fn gl_second_equilibrium_radius_is_exactly_one_half_squared() {
        let coeffs = GlParametrization::new(0.8, 0.001).unwrap().coeffs();
        assert_relative_eq!(coeffs.k2(), -2.0, epsilon = 1e-12);
        let spec = VectorFieldSpec::gl23(coeffs).unwrap();
        let reports = equilibria_on_axes(&spec).unwrap();
        let xi2 = &reports[1];
        // r^2 = mu / (-K2) = 0.5, and the R^4 norm is r sqrt(2) = 1.
        assert_relative_eq!(xi2.position.norm(), 1.0, epsilon = 1e-12);
        assert!(xi2.residual <= FIELD_RESIDUAL_TOL);
        assert_relative_eq!(xi2.radial, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn gl_double_expansion_scales_linearly_in_h2() {
        // The double expanding eigenvalue is 6 sqrt(2) h2 r2^2 with
        // r2^2 = 1/2, hence 3 sqrt(2) h2.
        for h2 in [0.001, 0.002, 0.0028] {
            let spec =
                VectorFieldSpec::gl23(GlParametrization::new(0.8, h2).unwrap().coeffs()).unwrap();
            let at2 = analytic_eigenvalues(&spec, WhichEquilibrium::Xi2).unwrap();
            assert_relative_eq!(at2.double, 3.0 * 2.0_f64.sqrt() * h2, epsilon = 1e-12);
        }
    }

    #[test]
    fn gl_equilibria_lie_on_the_enumerated_axes() {
        let spec = gl_spec();
        let inventory = enumerate_isotropy_gl23(spec.group()).unwrap();
        let reports = equilibria_on_axes(&spec).unwrap();
        let l1 = inventory.l1_axis(0, 0);
        let l2 = inventory.l2_axis(0, 0);
        assert!(l1.contains(&reports[0].position, 1e-9));
        assert!(l2.contains(&reports[1].position, 1e-9));
    }

    #[test]
    fn gl_spectrum_matches_closed_forms_across_the_slice() {
        for (h1, h2) in [(0.55, 0.001), (0.7, 0.002), (0.8, 0.0028), (0.92, 0.001)] {
            let spec =
                VectorFieldSpec::gl23(GlParametrization::new(h1, h2).unwrap().coeffs()).unwrap();
            // equilibria_on_axes verifies the numeric spectrum internally.
            let reports = equilibria_on_axes(&spec).unwrap();
            let rates = cycle_rates(&spec).unwrap();
            assert!(rates.e2 > 0.0 && rates.c1 > 0.0);
            assert_eq!(reports[0].eigenvalues[2].multiplicity, 2);
        }
    }

    #[test]
    fn existence_report_is_honest_for_the_d3_example() {
        let report = existence_report(&d3_spec());
        let by_name = |n: &str| report.checks.iter().find(|c| c.name == n).unwrap();
        assert!(by_name("alpha > 0").satisfied);
        assert!(by_name("a3 + a4 > 0").satisfied);
        assert!(by_name("a3 - a4 > 0").satisfied);
        let third = by_name("a3 - a4 + sqrt((a3 - a4)^2 + alpha') < sqrt(alpha)");
        assert!((third.lhs - 0.9179).abs() < 1e-3);
        assert!((third.rhs - 0.5477).abs() < 1e-3);
        assert!(!third.satisfied);
        let stab = by_name("3 c1 > e1");
        assert!((stab.lhs - 0.6122).abs() < 1e-3);
        assert!((stab.rhs - 0.2834).abs() < 1e-3);
        assert!(stab.satisfied);
        assert!(!report.all_satisfied);
    }

    #[test]
    fn existence_report_passes_for_the_gl_slice() {
        let report = existence_report(&gl_spec());
        assert!(report.all_satisfied, "failed: {:?}", report.checks);
    }

    #[test]
    fn gl_slice_with_nonpositive_h1_loses_the_single_expansion() {
        let spec =
            VectorFieldSpec::gl23(GlParametrization::new(-0.5, 0.001).unwrap().coeffs()).unwrap();
        let report = existence_report(&spec);
        let sgl = report
            .checks
            .iter()
            .find(|c| c.name == "lambda1_sgl > 0")
            .unwrap();
        assert!(!sgl.satisfied);
    }

    #[test]
    fn restriction_to_the_first_plane_matches_the_reduced_equations() {
        let spec = d3_spec();
        let c = CoeffsD3::example();
        let [_, _, a3, a4, _, _, _, _, _, _] = *c.a();
        let plane = LinearSubspace::from_basis(vec![
            Vector4::new(1.0, 0.0, 0.0, 0.0),
            Vector4::new(0.0, 1.0, 0.0, 0.0),
        ])
        .unwrap();
        let restricted = spec.restrict(&plane).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let (x1, y1) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let f = restricted.eval(&[x1, y1]).unwrap();
            let fx = c.alpha() * x1 - 2.0 * (a3 + a4) * y1 * y1 - x1 * (x1 * x1 + y1 * y1);
            let fy = c.alpha_prime() * y1 + 2.0 * (a3 - a4) * x1 * y1
                - y1 * (x1 * x1 + y1 * y1);
            assert_relative_eq!(f[0], fx, epsilon = 1e-13);
            assert_relative_eq!(f[1], fy, epsilon = 1e-13);
        }
    }

    #[test]
    fn restriction_to_the_second_plane_matches_the_reduced_equations() {
        let spec = d3_spec();
        let c = CoeffsD3::example();
        let [_, _, _, _, _, a6, _, _, a9, a10] = *c.a();
        let [b1, b2, b3, b4, b5, b6] = *c.b();
        let plane = LinearSubspace::from_basis(vec![
            Vector4::new(1.0, 0.0, 0.0, 0.0),
            Vector4::new(0.0, 0.0, 1.0, 0.0),
        ])
        .unwrap();
        let restricted = spec.restrict(&plane).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let (x1, x2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let f = restricted.eval(&[x1, x2]).unwrap();
            let fx1 = c.alpha() * x1 + a6 * x2 * x2 - x1.powi(3) - x1 * x2 * x2
                + (a9 + a10) * x2.powi(3);
            let fx2 = b1 * x2 + (b2 + b3) * x1 * x2 + b4 * x2 * x2 + b5 * x1 * x1 * x2
                + b6 * x2.powi(3);
            assert_relative_eq!(f[0], fx1, epsilon = 1e-13);
            assert_relative_eq!(f[1], fx2, epsilon = 1e-13);
        }
    }

    #[test]
    fn restriction_to_the_reflection_3_space_matches_the_reduced_equations() {
        let spec = tilde_spec();
        let c = CoeffsD3::example_tilde();
        let [_, _, _, _, _, a6, _, _, a9, _] = *c.a();
        let [b1, b2, _, b4, b5, b6] = *c.b();
        let space = LinearSubspace::from_basis(vec![
            Vector4::new(1.0, 0.0, 0.0, 0.0),
            Vector4::new(0.0, 0.0, 1.0, 0.0),
            Vector4::new(0.0, 0.0, 0.0, 1.0),
        ])
        .unwrap();
        let restricted = spec.restrict(&space).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let (x1, x2, y2) = (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let f = restricted.eval(&[x1, x2, y2]).unwrap();
            let r2 = x2 * x2 + y2 * y2;
            // The quadratic z2-term carries a6, as in the full system.
            let fx1 =
                c.alpha() * x1 + a6 * r2 - x1.powi(3) - x1 * r2 + 2.0 * a9 * (x2.powi(3) - 3.0 * x2 * y2 * y2);
            let fx2 = b1 * x2 + 2.0 * b2 * x1 * x2 + b4 * (x2 * x2 - y2 * y2)
                + b5 * x2 * x1 * x1
                + b6 * x2 * r2;
            let fy2 = b1 * y2 + 2.0 * b2 * x1 * y2 - 2.0 * b4 * x2 * y2 + b5 * y2 * x1 * x1
                + b6 * y2 * r2;
            assert_relative_eq!(f[0], fx1, epsilon = 1e-13);
            assert_relative_eq!(f[1], fx2, epsilon = 1e-13);
            assert_relative_eq!(f[2], fy2, epsilon = 1e-13);
        }
    }

    #[test]
    fn every_plane_through_the_axis_is_invariant_without_the_quadratic_term() {
        // With b4 = 0 the reduced system on the 3-space is rotation-free
        // around the axis, so each tilted plane through it is invariant.
        let coeffs = CoeffsD3::new_tilde(
            [0.25, 0.05, 0.3, -0.05, -0.25, 0.6, -1.0, -1.0, 0.1, 0.1],
            [0.2, -0.6, -0.6, 0.0, -1.0, -1.0],
        )
        .unwrap();
        let spec = VectorFieldSpec::d3(coeffs).unwrap();
        for phi in [0.0_f64, 0.4, 1.1, 2.5] {
            let plane = LinearSubspace::from_basis(vec![
                Vector4::new(1.0, 0.0, 0.0, 0.0),
                Vector4::new(0.0, 0.0, phi.cos(), phi.sin()),
            ])
            .unwrap();
            assert!(spec.restrict(&plane).is_ok(), "phi = {phi}");
        }
        // Switching the quadratic term back on keeps only the coordinate
        // plane invariant.
        let spec = tilde_spec();
        let tilted = LinearSubspace::from_basis(vec![
            Vector4::new(1.0, 0.0, 0.0, 0.0),
            Vector4::new(0.0, 0.0, 0.5_f64.sqrt(), 0.5_f64.sqrt()),
        ])
        .unwrap();
        assert!(matches!(
            spec.restrict(&tilted),
            Err(Error::NotFlowInvariant { .. })
        ));
    }

    #[test]
    fn restriction_rejects_a_generic_plane() {
        let spec = d3_spec();
        let plane = LinearSubspace::from_basis(vec![
            Vector4::new(0.0, 1.0, 0.0, 0.0),
            Vector4::new(0.0, 0.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(
            spec.restrict(&plane),
            Err(Error::NotFlowInvariant { .. })
        ));
    }

    #[test]
    fn eval_field_checks_dimensions() {
        let spec = d3_spec();
        assert!(matches!(
            spec.eval_field(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 2
            })
        ));
        let planar = planar_spec();
        assert!(matches!(
            planar.eval_field(&[1.0, 2.0, 3.0, 4.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 4
            })
        ));
        let f = planar.eval_field(&[0.3, 0.1]).unwrap();
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn missing_equilibrium_is_reported() {
        let coeffs = CoeffsD3::new(
            [-0.25, 0.05, 0.3, -0.05, -0.25, 0.6, -1.0, -1.0, 0.1, 0.15],
            [0.2, -0.1, -0.09, -0.1, -1.0, -1.0],
        )
        .unwrap();
        let spec = VectorFieldSpec::d3(coeffs).unwrap();
        assert!(matches!(
            equilibria_on_axes(&spec),
            Err(Error::MissingEquilibrium(_))
        ));
    }

    #[test]
    fn parametrization_rejects_out_of_range_values() {
        assert!(GlParametrization::new(1.0, 0.001).is_err());
        assert!(GlParametrization::new(-1.0, 0.001).is_err());
        assert!(GlParametrization::new(0.5, 0.0).is_err());
        assert!(GlParametrization::new(0.5, -0.1).is_err());
    }
}
