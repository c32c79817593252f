//! Finite subgroups of O(4): closure tables, fixed-point subspaces, and the
//! isotropy inventory of the order-48 group used by the four-dimensional
//! normal form.

use nalgebra::{DMatrix, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::quat::{dim_fix_two_predicate, Orthogonal4, Quaternion, Rotation4};

/// Two elements closer than this (Frobenius) are the same element.
pub const ELEMENT_IDENTIFICATION_TOL: f64 = 1e-6;
/// A product must match a stored element this closely for the set to count
/// as closed.
pub const CLOSURE_TOL: f64 = 1e-9;
/// Cap on closure growth; every group in scope has order at most 48.
pub const MAX_ORDER_DEFAULT: usize = 512;
/// Basis vectors of a subspace are orthonormal within this.
const BASIS_TOL: f64 = 1e-10;

/// Multiplication table of a finite subgroup of O(4).
#[derive(Debug, Clone)]
pub struct GroupTable {
    elements: Vec<Orthogonal4>,
    product: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Orthogonal4] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Orthogonal4 {
        &self.elements[i]
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    pub fn product_index(&self, i: usize, j: usize) -> usize {
        self.product[i][j]
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverse[i]
    }

    /// Index of the stored element matching `g`, if any.
    pub fn find(&self, g: &Orthogonal4) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.dist(g) <= ELEMENT_IDENTIFICATION_TOL)
    }

    /// Order of the cyclic subgroup generated by element `i`.
    pub fn element_order(&self, i: usize) -> usize {
        let mut k = i;
        let mut n = 1;
        while k != self.identity {
            k = self.product[k][i];
            n += 1;
        }
        n
    }

    /// Indices of the cyclic subgroup generated by element `i`
    /// (identity included).
    pub fn cyclic_subgroup(&self, i: usize) -> Vec<usize> {
        let mut out = vec![self.identity];
        let mut k = i;
        while k != self.identity {
            out.push(k);
            k = self.product[k][i];
        }
        out
    }
}

fn sort_key(m: &Matrix4<f64>) -> [i64; 16] {
    let mut key = [0i64; 16];
    // Row-major walk; rounding to 1e-6 separates distinct elements, whose
    // pairwise distance is far larger in every group in scope.
    for (k, v) in m.transpose().iter().enumerate() {
        key[k] = (v * 1e6).round() as i64;
    }
    key
}

/// Closure of `generators` under composition, as a multiplication table.
///
/// Elements are deduplicated at `ELEMENT_IDENTIFICATION_TOL` and ordered by
/// lexicographic comparison of rounded matrix entries, so the table layout
/// is reproducible across runs and platforms.
pub fn generate_group(generators: &[Orthogonal4], max_order: usize) -> Result<GroupTable> {
    let mut elements: Vec<Orthogonal4> = vec![Orthogonal4::identity()];
    let mut frontier: Vec<usize> = vec![0];
    let add = |elements: &mut Vec<Orthogonal4>, g: Orthogonal4| -> Option<usize> {
        if elements
            .iter()
            .any(|e| e.dist(&g) <= ELEMENT_IDENTIFICATION_TOL)
        {
            None
        } else {
            elements.push(g);
            Some(elements.len() - 1)
        }
    };
    for g in generators {
        add(&mut elements, *g);
    }
    frontier.extend(1..elements.len());

    while !frontier.is_empty() {
        let mut fresh = Vec::new();
        for &i in &frontier {
            for j in 0..elements.len() {
                for prod in [
                    elements[i].compose(&elements[j]),
                    elements[j].compose(&elements[i]),
                ] {
                    if let Some(idx) = add(&mut elements, prod) {
                        fresh.push(idx);
                    }
                    if elements.len() > max_order {
                        return Err(Error::GroupClosureOverflow { max_order });
                    }
                }
            }
        }
        frontier = fresh;
    }

    elements.sort_by_key(|e| sort_key(e.matrix()));

    let n = elements.len();
    let mut product = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            let p = elements[i].compose(&elements[j]);
            let (k, defect) = elements
                .iter()
                .enumerate()
                .map(|(k, e)| (k, e.dist(&p)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty group");
            if defect > CLOSURE_TOL {
                return Err(Error::GroupNotClosed { i, j, defect });
            }
            product[i][j] = k;
        }
    }

    let identity = elements
        .iter()
        .position(|e| e.dist(&Orthogonal4::identity()) <= ELEMENT_IDENTIFICATION_TOL)
        .expect("closure contains the identity");
    let mut inverse = vec![0usize; n];
    for i in 0..n {
        inverse[i] = (0..n)
            .find(|&j| product[i][j] == identity)
            .expect("every element has an inverse in a closed finite set");
    }

    Ok(GroupTable {
        elements,
        product,
        inverse,
        identity,
    })
}

/// A linear subspace of R^4 with an orthonormal basis.
#[derive(Debug, Clone)]
pub struct LinearSubspace {
    basis: Vec<Vector4<f64>>,
}

impl LinearSubspace {
    pub fn from_basis(basis: Vec<Vector4<f64>>) -> Result<Self> {
        for (i, u) in basis.iter().enumerate() {
            if (u.norm() - 1.0).abs() > BASIS_TOL {
                return Err(Error::ParameterDomain(format!(
                    "subspace basis vector {i} is not unit"
                )));
            }
            for v in basis.iter().skip(i + 1) {
                if u.dot(v).abs() > BASIS_TOL {
                    return Err(Error::ParameterDomain(
                        "subspace basis is not orthogonal".into(),
                    ));
                }
            }
        }
        Ok(LinearSubspace { basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector4<f64>] {
        &self.basis
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, v: &Vector4<f64>) -> Vector4<f64> {
        let mut out = Vector4::zeros();
        for b in &self.basis {
            out += b * b.dot(v);
        }
        out
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &Vector4<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    pub fn contains(&self, v: &Vector4<f64>, tol: f64) -> bool {
        self.distance(v) <= tol
    }

    /// Largest principal angle between two subspaces of equal dimension;
    /// zero means they coincide.
    pub fn max_principal_angle(&self, other: &LinearSubspace) -> f64 {
        if self.dim() == 0 && other.dim() == 0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for b in &self.basis {
            let cos = other.project(b).norm().clamp(0.0, 1.0);
            worst = worst.max(cos.acos());
        }
        for b in &other.basis {
            let cos = self.project(b).norm().clamp(0.0, 1.0);
            worst = worst.max(cos.acos());
        }
        worst
    }

    /// Intersection of two subspaces: the common null space of the two
    /// complement projectors, extracted by SVD.
    pub fn intersect(&self, other: &LinearSubspace) -> LinearSubspace {
        let pa = self.projector();
        let pb = other.projector();
        let mut stacked = DMatrix::<f64>::zeros(8, 4);
        let ca = Matrix4::identity() - pa;
        let cb = Matrix4::identity() - pb;
        for r in 0..4 {
            for c in 0..4 {
                stacked[(r, c)] = ca[(r, c)];
                stacked[(r + 4, c)] = cb[(r, c)];
            }
        }
        let svd = stacked.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let mut basis = Vec::new();
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s < 1e-8 {
                let row = vt.row(k);
                basis.push(Vector4::new(row[0], row[1], row[2], row[3]));
            }
        }
        // Singular vectors are orthonormal already.
        LinearSubspace { basis }
    }

    fn projector(&self) -> Matrix4<f64> {
        let mut p = Matrix4::zeros();
        for b in &self.basis {
            p += b * b.transpose();
        }
        p
    }
}

/// Fixed-point subspace of a subgroup: the 1-eigenspace of the averaging
/// projector (1/|H|) sum of the element matrices.
///
/// The input must be closed under composition (a subgroup); otherwise the
/// average is not a projector and the call is rejected.
pub fn fixed_subspace(elements: &[Orthogonal4]) -> Result<LinearSubspace> {
    if elements.is_empty() {
        return Err(Error::ParameterDomain(
            "fixed_subspace of an empty set".into(),
        ));
    }
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            let p = a.compose(b);
            if !elements.iter().any(|e| e.dist(&p) <= CLOSURE_TOL) {
                return Err(Error::ParameterDomain(format!(
                    "fixed_subspace input is not a subgroup: product of elements {i} and {j} escapes the set"
                )));
            }
        }
    }

    let mut avg = Matrix4::zeros();
    for e in elements {
        avg += e.matrix();
    }
    avg /= elements.len() as f64;

    let idem = (avg * avg - avg).norm();
    if idem > 1e-10 {
        return Err(Error::ParameterDomain(format!(
            "averaging operator is not idempotent (residual {idem:.3e}); input is not a subgroup"
        )));
    }

    // The averaged projector of an orthogonal representation is symmetric;
    // symmetrize to shed rounding noise before the eigendecomposition.
    let sym = (avg + avg.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut basis = Vec::new();
    for (k, ev) in eig.eigenvalues.iter().enumerate() {
        if *ev > 0.5 {
            basis.push(Vector4::from(eig.eigenvectors.column(k)));
        }
    }
    basis.sort_by_key(|v| {
        let mut key = [0i64; 4];
        for (k, c) in v.iter().enumerate() {
            key[k] = (c * 1e6).round() as i64;
        }
        key
    });
    LinearSubspace::from_basis(basis)
}

/// Generators rho (z2 phase rotation by 2pi/3) and kappa (componentwise
/// conjugation) of the order-6 symmetry group of the plain cubic family.
pub fn d3_generators() -> Vec<Orthogonal4> {
    let (c, s) = ((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
    let rho = Matrix4::new(
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, c, -s, //
        0.0, 0.0, s, c,
    );
    let kappa = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, 1.0, -1.0));
    vec![
        Orthogonal4::new(rho).expect("rho is orthogonal"),
        Orthogonal4::new(kappa).expect("kappa is orthogonal"),
    ]
}

/// Generators of the order-12 extension: rho, kappa and the reflection
/// sigma (z1, z2) -> (z1, conj z2), which lies outside SO(4).
pub fn d3_sigma_generators() -> Vec<Orthogonal4> {
    let mut gens = d3_generators();
    let sigma = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0));
    gens.push(Orthogonal4::new(sigma).expect("sigma is orthogonal"));
    gens
}

/// The order-3 pair generator epsilon(s,r) of the order-48 group.
pub fn gl23_epsilon(s: u8, r: u8) -> Rotation4 {
    let left = Quaternion::new(0.5, 0.0, 0.0, 3f64.sqrt() / 2.0);
    let sg = |k: u8| if k % 2 == 0 { 1.0 } else { -1.0 };
    let right = Quaternion::new(1.0, sg(s), sg(r), sg(s + r)).scale(0.5);
    Rotation4::new(left, right).expect("epsilon components are unit")
}

/// The permutation p(a,b,c,d) = (a,c,d,b) used by the kappa(q,n,t) labels.
fn perm_p(q: Quaternion) -> Quaternion {
    Quaternion::new(q.q1, q.q3, q.q4, q.q2)
}

/// The plane reflection kappa(q,n,t) of the order-48 group.
///
/// The sign (-1)^q multiplies the right quaternion only; on both factors it
/// would be the kernel of the double cover and q would label nothing.
pub fn gl23_kappa(q: u8, n: u8, t: u8) -> Rotation4 {
    let a = n as f64 * std::f64::consts::PI / 3.0;
    let left = Quaternion::new(0.0, a.cos(), a.sin(), 0.0);
    let tsign = if t % 2 == 0 { 1.0 } else { -1.0 };
    let mut right = Quaternion::new(0.0, 0.0, tsign, 1.0).scale(std::f64::consts::FRAC_1_SQRT_2);
    for _ in 0..n {
        right = perm_p(right);
    }
    if q % 2 == 1 {
        right = right.neg();
    }
    Rotation4::new(left, right).expect("kappa components are unit")
}

/// Quaternion-pair generators whose closure is the order-48 group: an
/// order-8 element ((0,1,0,0);(1,1,0,0)/sqrt2), the order-3 element
/// epsilon(0,0), and the V-element (1; i).
pub fn gl23_generators() -> Vec<Orthogonal4> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g8 = Rotation4::new(
        Quaternion::new(0.0, 1.0, 0.0, 0.0),
        Quaternion::new(s, s, 0.0, 0.0),
    )
    .expect("unit");
    let v = Rotation4::new(Quaternion::ONE, Quaternion::new(0.0, 1.0, 0.0, 0.0)).expect("unit");
    vec![g8.matrix(), gl23_epsilon(0, 0).matrix(), v.matrix()]
}

/// Labelled isotropy planes and axes of the order-48 group.
#[derive(Debug, Clone)]
pub struct Gl23Inventory {
    /// Planes fixed by the order-3 subgroups, labelled (s, r).
    pub p1: Vec<((u8, u8), LinearSubspace)>,
    /// Planes fixed by the plane reflections, labelled (q, n, t).
    pub p2: Vec<((u8, u8, u8), LinearSubspace)>,
    /// Symmetry axes of the first type, labelled (s, r).
    pub l1: Vec<((u8, u8), LinearSubspace)>,
    /// Symmetry axes of the second type, labelled (s, r).
    pub l2: Vec<((u8, u8), LinearSubspace)>,
}

impl Gl23Inventory {
    pub fn p1_plane(&self, s: u8, r: u8) -> &LinearSubspace {
        &self.p1.iter().find(|(k, _)| *k == (s, r)).expect("label").1
    }

    pub fn p2_plane(&self, q: u8, n: u8, t: u8) -> &LinearSubspace {
        &self
            .p2
            .iter()
            .find(|(k, _)| *k == (q, n, t))
            .expect("label")
            .1
    }

    pub fn l1_axis(&self, s: u8, r: u8) -> &LinearSubspace {
        &self.l1.iter().find(|(k, _)| *k == (s, r)).expect("label").1
    }

    pub fn l2_axis(&self, s: u8, r: u8) -> &LinearSubspace {
        &self.l2.iter().find(|(k, _)| *k == (s, r)).expect("label").1
    }
}

/// Builds the full plane/axis inventory of the order-48 group and checks it
/// against the group table.
///
/// The axes come out as intersections of the four planes listed for each
/// label; L1(s,r) and L2(s,r) must intersect orthogonally.
pub fn enumerate_isotropy_gl23(table: &GroupTable) -> Result<Gl23Inventory> {
    if table.order() != 48 {
        return Err(Error::ParameterDomain(format!(
            "isotropy inventory needs the order-48 group; got order {}",
            table.order()
        )));
    }

    let mut p1 = Vec::new();
    for s in 0..2u8 {
        for r in 0..2u8 {
            let eps = gl23_epsilon(s, r);
            let m = eps.matrix();
            if table.find(&m).is_none() {
                return Err(Error::ParameterDomain(format!(
                    "epsilon({s},{r}) is not an element of the supplied group"
                )));
            }
            if !dim_fix_two_predicate(&eps) {
                return Err(Error::ParameterDomain(format!(
                    "epsilon({s},{r}) does not fix a plane"
                )));
            }
            let m2 = m.compose(&m);
            let sub = fixed_subspace(&[Orthogonal4::identity(), m, m2])?;
            if sub.dim() != 2 {
                return Err(Error::ParameterDomain(format!(
                    "fixed space of epsilon({s},{r}) has dim {} instead of 2",
                    sub.dim()
                )));
            }
            p1.push(((s, r), sub));
        }
    }

    let mut p2 = Vec::new();
    for q in 0..2u8 {
        for n in 0..3u8 {
            for t in 0..2u8 {
                let kap = gl23_kappa(q, n, t);
                let m = kap.matrix();
                if table.find(&m).is_none() {
                    return Err(Error::ParameterDomain(format!(
                        "kappa({q},{n},{t}) is not an element of the supplied group"
                    )));
                }
                let sub = fixed_subspace(&[Orthogonal4::identity(), m])?;
                if sub.dim() != 2 {
                    return Err(Error::ParameterDomain(format!(
                        "fixed space of kappa({q},{n},{t}) has dim {} instead of 2",
                        sub.dim()
                    )));
                }
                p2.push(((q, n, t), sub));
            }
        }
    }

    let lookup_p1 = |s: u8, r: u8| -> &LinearSubspace {
        &p1.iter().find(|(k, _)| *k == (s, r)).expect("p1 label").1
    };
    let lookup_p2 = |q: u8, n: u8, t: u8| -> &LinearSubspace {
        &p2.iter()
            .find(|(k, _)| *k == (q % 2, n % 3, t % 2))
            .expect("p2 label")
            .1
    };

    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    for s in 0..2u8 {
        for r in 0..2u8 {
            // The t-index of the n = 1 plane is s + r + 1: with that choice
            // every axis below lands in all three of its named planes, which
            // pins the convention together with the action table at n = 0.
            let a1 = lookup_p1(s, r)
                .intersect(lookup_p2(0, 0, s + 1))
                .intersect(lookup_p2(s + 1, 1, s + r + 1))
                .intersect(lookup_p2(r, 2, r + 1));
            let a2 = lookup_p1(s, r)
                .intersect(lookup_p2(1, 0, s + 1))
                .intersect(lookup_p2(s, 1, s + r + 1))
                .intersect(lookup_p2(r + 1, 2, r + 1));
            if a1.dim() != 1 || a2.dim() != 1 {
                return Err(Error::ParameterDomain(format!(
                    "axes L1/L2({s},{r}) have dims {}/{} instead of 1",
                    a1.dim(),
                    a2.dim()
                )));
            }
            let dot = a1.basis()[0].dot(&a2.basis()[0]).abs();
            if dot > 1e-9 {
                return Err(Error::ParameterDomain(format!(
                    "axes L1({s},{r}) and L2({s},{r}) are not orthogonal: |cos| = {dot:.3e}"
                )));
            }
            l1.push(((s, r), a1));
            l2.push(((s, r), a2));
        }
    }

    Ok(Gl23Inventory { p1, p2, l1, l2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d3_group_has_order_6() {
        let g = generate_group(&d3_generators(), MAX_ORDER_DEFAULT).unwrap();
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn d3_sigma_group_has_order_12() {
        let g = generate_group(&d3_sigma_generators(), MAX_ORDER_DEFAULT).unwrap();
        assert_eq!(g.order(), 12);
        // sigma-coset elements reverse orientation
        let reversing = g.elements().iter().filter(|e| !e.is_rotation()).count();
        assert_eq!(reversing, 6);
    }

    #[test]
    fn gl23_group_has_order_48() {
        let g = generate_group(&gl23_generators(), MAX_ORDER_DEFAULT).unwrap();
        assert_eq!(g.order(), 48);
        assert!(g.elements().iter().all(|e| e.is_rotation()));
    }

    #[test]
    fn rho_fixes_the_z1_plane() {
        let gens = d3_generators();
        let rho = gens[0];
        let rho2 = rho.compose(&rho);
        let sub = fixed_subspace(&[Orthogonal4::identity(), rho, rho2]).unwrap();
        assert_eq!(sub.dim(), 2);
        assert!(sub.contains(&Vector4::new(1.0, 0.0, 0.0, 0.0), 1e-12));
        assert!(sub.contains(&Vector4::new(0.0, 1.0, 0.0, 0.0), 1e-12));
    }

    #[test]
    fn full_gl23_group_fixes_only_origin() {
        let g = generate_group(&gl23_generators(), MAX_ORDER_DEFAULT).unwrap();
        let sub = fixed_subspace(g.elements()).unwrap();
        assert_eq!(sub.dim(), 0);
    }

    #[test]
    fn non_subgroup_rejected() {
        let gens = d3_generators();
        // {I, rho} is not closed (rho^2 missing)
        let err = fixed_subspace(&[Orthogonal4::identity(), gens[0]]);
        assert!(err.is_err());
    }

    #[test]
    fn closure_overflow_detected() {
        // An irrational rotation angle generates an infinite group.
        let theta: f64 = 1.0;
        let m = Matrix4::new(
            theta.cos(),
            -theta.sin(),
            0.0,
            0.0,
            theta.sin(),
            theta.cos(),
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
        let g = Orthogonal4::new(m).unwrap();
        assert!(matches!(
            generate_group(&[g], 64),
            Err(Error::GroupClosureOverflow { .. })
        ));
    }

    #[test]
    fn table_is_deterministic() {
        let a = generate_group(&gl23_generators(), MAX_ORDER_DEFAULT).unwrap();
        let b = generate_group(&gl23_generators(), MAX_ORDER_DEFAULT).unwrap();
        for (x, y) in a.elements().iter().zip(b.elements().iter()) {
            assert!(x.dist(y) < 1e-14);
        }
    }

    #[test]
    fn p2_101_matches_explicit_span() {
        // P2(1,0,1) = span{(e^{3 pi i/4} w, w)}: for w = 1 and w = i.
        let g = generate_group(&gl23_generators(), MAX_ORDER_DEFAULT).unwrap();
        let inv = enumerate_isotropy_gl23(&g).unwrap();
        let plane = inv.p2_plane(1, 0, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v1 = Vector4::new(-s, s, 1.0, 0.0) / 2f64.sqrt();
        let v2 = Vector4::new(-s, -s, 0.0, 1.0) / 2f64.sqrt();
        assert!(plane.contains(&v1, 1e-10));
        assert!(plane.contains(&v2, 1e-10));
    }

    #[test]
    fn axes_match_explicit_directions() {
        // L1(0,0) direction (-e^{3 pi i/4} e^{a1}, e^{a1}) with
        // e^{2 a1} = ((-1 + sqrt2 i)/sqrt3) e^{i pi/4}, and L2(0,0) the same
        // with +e^{3 pi i/4} and e^{2 a2} = ((1 + sqrt2 i)/sqrt3) e^{i pi/4}.
        use num_complex::Complex64;
        let g = generate_group(&gl23_generators(), MAX_ORDER_DEFAULT).unwrap();
        let inv = enumerate_isotropy_gl23(&g).unwrap();

        let e34 = Complex64::from_polar(1.0, 3.0 * std::f64::consts::FRAC_PI_4);
        let e14 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let sq = |c: Complex64| Complex64::from_polar(c.norm().sqrt(), c.arg() / 2.0);

        let a1 = sq(Complex64::new(-1.0, 2f64.sqrt()) / 3f64.sqrt() * e14);
        let dir1 = {
            let z1 = -e34 * a1;
            Vector4::new(z1.re, z1.im, a1.re, a1.im) / 2f64.sqrt()
        };
        let a2 = sq(Complex64::new(1.0, 2f64.sqrt()) / 3f64.sqrt() * e14);
        let dir2 = {
            let z1 = e34 * a2;
            Vector4::new(z1.re, z1.im, a2.re, a2.im) / 2f64.sqrt()
        };

        assert!(inv.l1_axis(0, 0).contains(&dir1, 1e-9));
        assert!(inv.l2_axis(0, 0).contains(&dir2, 1e-9));
        assert!(dir1.dot(&dir2).abs() < 1e-12);
    }
}
