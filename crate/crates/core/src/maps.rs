//! Poincaré-section map models around the heteroclinic cycle: local
//! passage maps past each equilibrium, global maps along the connecting
//! orbits, the composed return maps, the complete-instability margin, the
//! bifurcating periodic orbit with its stability exponent, and the
//! contraction criterion for fragmentary asymptotic stability.
//!
//! These are leading-order models. Comparisons against the full flow are
//! qualitative (regime, scaling exponent), not pointwise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{CycleRates, PlanarCoeffs};
use crate::planar::{exit_angle_implicit, s_integral, transit, SectorState, SECTOR_END};

/// Everything the section maps need to know about one cycle: the four
/// eigenvalue magnitudes (radial rates are irrelevant at leading order),
/// the global-map gain, rotation angle and matrix coefficients, the base
/// points of the incoming sections, the planar quadratic coefficient, and
/// the dihedral order of the transverse symmetry group.
#[derive(Clone, Copy, Debug)]
pub struct CycleData {
    pub c1: f64,
    pub e1: f64,
    pub c2: f64,
    pub e2: f64,
    /// Radial gain of the global maps.
    pub gain: f64,
    /// Rotation angle of the first global map.
    pub rotation: f64,
    pub b11: f64,
    pub b12: f64,
    pub b21: f64,
    pub b22: f64,
    /// Base-point coordinates of the incoming sections.
    pub v01: f64,
    pub v02: f64,
    /// Quadratic coefficient of the planar system on the expanding plane.
    pub beta: f64,
    /// Order of the cyclic isotropy group of the connection planes.
    pub k: u32,
}

impl CycleData {
    /// Enforce the structural invariants; returns the data unchanged when
    /// they hold.
    pub fn validated(self) -> Result<Self> {
        for (name, value) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("e1", self.e1),
        ] {
            if !(value > 0.0) {
                return Err(Error::ParameterDomain(format!(
                    "cycle rate {name} must be positive, got {value}"
                )));
            }
        }
        if self.k < 3 {
            return Err(Error::ParameterDomain(format!(
                "dihedral order must be at least 3, got {}",
                self.k
            )));
        }
        for (name, value) in [("v01", self.v01), ("v02", self.v02)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::ParameterDomain(format!(
                    "base coordinate {name} must lie in (0, 1], got {value}"
                )));
            }
        }
        Ok(self)
    }

    /// Copy the four eigenvalue magnitudes from computed cycle rates.
    pub fn with_rates(mut self, rates: &CycleRates) -> Self {
        self.c1 = rates.c1;
        self.e1 = rates.e1;
        self.c2 = rates.c2;
        self.e2 = rates.e2;
        self
    }
}

/// Local passage map past the first equilibrium, incoming Cartesian
/// `(w, q)` to outgoing polar `(rho, theta)`:
/// `(v01 w^{c1/e1}, arctan(q / v01))`.
pub fn phi1(cd: &CycleData, w: f64, q: f64) -> Result<(f64, f64)> {
    if w <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "local passage needs w > 0 (the trajectory is on the wrong side of the invariant plane), got {w}"
        )));
    }
    if q.abs() > 1.0 {
        return Err(Error::ParameterDomain(format!(
            "local passage needs |q| <= 1, got {q}"
        )));
    }
    Ok((cd.v01 * w.powf(cd.c1 / cd.e1), (q / cd.v01).atan()))
}

/// Local passage map past the second equilibrium under a pure linear flow,
/// incoming polar `(rho, theta)` to outgoing Cartesian `(v, q)`:
/// `(v02 (rho cos theta)^{c2/e2}, tan theta)`.
pub fn phi2_simple(cd: &CycleData, rho: f64, theta: f64) -> Result<(f64, f64)> {
    if !(rho * theta.cos() > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "linear passage needs rho cos(theta) > 0, got rho = {rho}, theta = {theta}"
        )));
    }
    if cd.e2 <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "linear passage needs a positive expanding rate, got e2 = {}",
            cd.e2
        )));
    }
    Ok((
        cd.v02 * (rho * theta.cos()).powf(cd.c2 / cd.e2),
        theta.tan(),
    ))
}

/// Angular output convention of the nonlinear passage map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleOutput {
    /// `sin` of the exit angle (periodic-orbit composition).
    Sine,
    /// `tan` of the exit angle (reflection-symmetric composition).
    Tangent,
}

/// Local passage map past the second equilibrium when the expanding plane
/// carries the triangular planar dynamics: the trajectory crosses the
/// sector in time `tau` and exits at angle `vartheta`, giving
/// `(v02 e^{-c2 tau}, sin(vartheta))` or the `tan` variant.
///
/// The expansion rate `e2` plays the role of the planar linear
/// coefficient. Negative entry angles fold through the conjugation
/// symmetry of the planar system. The exit angle comes from the conserved
/// quantity, which keeps full relative precision when it is far below the
/// integrator's absolute tolerance.
pub fn phi2_d3(cd: &CycleData, rho: f64, theta: f64, out: AngleOutput) -> Result<(f64, f64)> {
    let params = PlanarCoeffs::new(cd.e2, cd.beta)?;
    let start = SectorState::new(rho, theta.abs())?;
    let t = transit(&params, start)?;
    let exit = exit_angle_implicit(&params, start)?.copysign(theta);
    let angular = match out {
        AngleOutput::Sine => (exit).sin(),
        AngleOutput::Tangent => (exit).tan(),
    };
    Ok((cd.v02 * (-cd.c2 * t.tau).exp(), angular))
}

/// The global-map forms taken along the connecting orbits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GlobalMapVariant {
    /// Polar: `(gain rho, theta + rotation)`.
    Rotation,
    /// Polar, with the symmetry copy folded in: the angular image is the
    /// constant `(-1)^l (rotation + 2 pi s / 3)`, independent of the
    /// incoming angle at leading order.
    DihedralAdjusted { l: u32, s: u32 },
    /// Cartesian action of the matrix `[[b11, b12], [b21, b22]]`.
    Linear,
    /// Polar, with the rotation suppressed by the reflection symmetry:
    /// `(gain rho, theta)`.
    ReflectionConstrained,
}

/// Apply a global map to a section point (polar or Cartesian per variant).
pub fn psi_global(cd: &CycleData, variant: GlobalMapVariant, point: (f64, f64)) -> (f64, f64) {
    match variant {
        GlobalMapVariant::Rotation => (cd.gain * point.0, point.1 + cd.rotation),
        GlobalMapVariant::DihedralAdjusted { l, s } => {
            let folded = wrap_angle(cd.rotation + 2.0 * PI * s as f64 / 3.0);
            (cd.gain * point.0, if l % 2 == 0 { folded } else { -folded })
        }
        GlobalMapVariant::Linear => (
            cd.b11 * point.0 + cd.b12 * point.1,
            cd.b21 * point.0 + cd.b22 * point.1,
        ),
        GlobalMapVariant::ReflectionConstrained => (cd.gain * point.0, point.1),
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Pick the symmetry copy for the dihedral-adjusted global map: `s` is the
/// unique rotation copy folding the angle into `(-pi/3, pi/3)`, and `l` is
/// the reflection choice making the `w`-image positive for small radii
/// (the sign of `b12` times the folded angle).
pub fn choose_dihedral_adjustment(cd: &CycleData) -> Result<(u32, u32)> {
    for s in 0..3u32 {
        let folded = wrap_angle(cd.rotation + 2.0 * PI * s as f64 / 3.0);
        if folded.abs() < SECTOR_END - 1e-12 {
            let l = if cd.b12 * folded < 0.0 { 1 } else { 0 };
            return Ok((l, s));
        }
    }
    Err(Error::ResonantAngle {
        theta: cd.rotation,
        k: cd.k,
    })
}

/// The complete-instability margin: the angular distance `alpha` of the
/// global rotation from the connection rays, and the section radius below
/// which every image keeps angular distance `alpha / 2` from all of them.
#[derive(Clone, Copy, Debug)]
pub struct InstabilityMargin {
    pub alpha: f64,
    /// Admissible section radii are strictly below this bound,
    /// `min(tan(alpha/2), v01 tan(alpha/2))`.
    pub epsilon: f64,
}

/// Compute the instability margin `alpha = min_{1 <= N <= 2k}
/// |rotation - N pi / k|; a rotation on a connection ray is degenerate.
pub fn theorem1_epsilon(cd: &CycleData) -> Result<InstabilityMargin> {
    let theta = cd.rotation.rem_euclid(2.0 * PI);
    let mut alpha = f64::INFINITY;
    for n in 1..=2 * cd.k {
        alpha = alpha.min((theta - n as f64 * PI / cd.k as f64).abs());
    }
    if alpha < 1e-12 {
        return Err(Error::ResonantAngle {
            theta: cd.rotation,
            k: cd.k,
        });
    }
    Ok(InstabilityMargin {
        alpha,
        epsilon: (0.5 * alpha).tan() * cd.v01.min(1.0),
    })
}

/// Stability regime of the cycle read off from the rate comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `3 c1 < e1`: almost all nearby trajectories escape.
    Escape,
    /// `3 c1 > e1`: an asymptotically stable periodic orbit bifurcates.
    Periodic,
    /// `3 c1 = e1`: no verdict.
    Degenerate,
}

/// Outcome of the periodic-orbit analysis of the composed return map.
#[derive(Clone, Copy, Debug)]
pub struct Theorem2Report {
    pub regime: Regime,
    /// Leading-order fixed point
    /// `(C1 (mu S)^{3c1/e1}, C2 mu S)` of the printed map.
    pub closed_form: Option<(f64, f64)>,
    /// Fixed point of the assembled map under direct iteration.
    pub fixed_point: Option<(f64, f64)>,
    /// Residual of the assembled map at the returned fixed point.
    pub residual: Option<f64>,
    /// Contraction exponent `min((3c1 - e1) / (2e1), 1)`.
    pub exponent: Option<f64>,
}

/// One leg of the periodic-orbit return map: dihedral-adjusted global map,
/// nonlinear passage with expansion `mu`, linear global map, local passage.
fn theorem2_step(cd: &CycleData, mu: f64, l: u32, s: u32, rho: f64) -> Result<(f64, f64)> {
    let leg = psi_global(cd, GlobalMapVariant::DihedralAdjusted { l, s }, (rho, 0.0));
    let local = CycleData { e2: mu, ..*cd };
    let (v2, q2) = phi2_d3(&local, leg.0, leg.1, AngleOutput::Sine)?;
    let (w1, q1) = psi_global(cd, GlobalMapVariant::Linear, (v2, q2));
    phi1(cd, w1, q1)
}

/// Analyze the return map for a parameter `mu >= 0`: regime from the sign
/// of `3c1 - e1`, and for the periodic regime the fixed point (leading
/// order and iterated to convergence) with the contraction exponent.
pub fn theorem2_analysis(cd: &CycleData, mu: f64) -> Result<Theorem2Report> {
    if mu < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "the expansion parameter must be non-negative, got {mu}"
        )));
    }
    let gap = 3.0 * cd.c1 - cd.e1;
    let regime = if gap.abs() <= 1e-12 * cd.e1.abs() {
        Regime::Degenerate
    } else if gap < 0.0 {
        Regime::Escape
    } else {
        Regime::Periodic
    };
    if regime != Regime::Periodic {
        return Ok(Theorem2Report {
            regime,
            closed_form: None,
            fixed_point: None,
            residual: None,
            exponent: None,
        });
    }
    let exponent = (gap / (2.0 * cd.e1)).min(1.0);
    let (l, s) = choose_dihedral_adjustment(cd)?;
    let folded = wrap_angle(cd.rotation + 2.0 * PI * s as f64 / 3.0).abs();
    let sweep = s_integral(folded)?;
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let c1_const = cd.v01 / 3.0 / cd.beta.powi(3) * cd.b12.abs().powf(cd.c1 / cd.e1);
    let c2_const = sign / cd.v01 / 3.0 / cd.beta.powi(3) * cd.b22;
    let closed_form = (
        c1_const * (mu * sweep).powf(3.0 * cd.c1 / cd.e1),
        c2_const * mu * sweep,
    );
    if mu == 0.0 {
        return Ok(Theorem2Report {
            regime,
            closed_form: Some((0.0, 0.0)),
            fixed_point: Some((0.0, 0.0)),
            residual: Some(0.0),
            exponent: Some(exponent),
        });
    }
    let mut point = (closed_form.0, closed_form.1);
    for _ in 0..500 {
        let next = theorem2_step(cd, mu, l, s, point.0)?;
        let moved = (next.0 - point.0).hypot(next.1 - point.1);
        point = next;
        if moved <= 1e-14 * point.0.max(1e-30) {
            break;
        }
    }
    let check = theorem2_step(cd, mu, l, s, point.0)?;
    let residual = (check.0 - point.0).hypot(check.1 - point.1);
    Ok(Theorem2Report {
        regime,
        closed_form: Some(closed_form),
        fixed_point: Some(point),
        residual: Some(residual),
        exponent: Some(exponent),
    })
}

/// Contraction diagnostics of the reflection-symmetric return map.
#[derive(Clone, Copy, Debug)]
pub struct Theorem3Report {
    /// Rate ratio `c1 c2 / (e1 e2)`.
    pub h: f64,
    /// Radial contraction holds when `h > 1`.
    pub contracts_rho: bool,
    /// Angular multiplier
    /// `b22 ((rho beta cos 3theta + e2) / (beta cos 3theta + e2))^3`.
    pub theta_factor: f64,
    pub contracts_theta: bool,
}

/// Evaluate the contraction criteria of the reflection-symmetric return
/// map at a section point; the cycle data must have the rotation and the
/// off-diagonal global coefficients suppressed by the symmetry.
pub fn theorem3_contraction(cd: &CycleData, rho: f64, theta: f64) -> Result<Theorem3Report> {
    if cd.rotation != 0.0 || cd.b12 != 0.0 || cd.b21 != 0.0 {
        return Err(Error::ParameterDomain(
            "the contraction criterion needs reflection-constrained data (rotation = b12 = b21 = 0)"
                .into(),
        ));
    }
    if cd.e2 <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "the rate ratio needs e2 > 0, got {}",
            cd.e2
        )));
    }
    let h = cd.c1 * cd.c2 / (cd.e1 * cd.e2);
    let c3 = (3.0 * theta).cos();
    let theta_factor =
        cd.b22 * ((rho * cd.beta * c3 + cd.e2) / (cd.beta * c3 + cd.e2)).powi(3);
    Ok(Theorem3Report {
        h,
        contracts_rho: h > 1.0,
        theta_factor,
        contracts_theta: theta_factor.abs() < 1.0,
    })
}

/// Which composed return map to iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReturnModel {
    /// Cartesian `(w, q)` on the incoming section, rotation global map,
    /// linear local passage.
    Instability,
    /// Polar `(rho, theta)` on the outgoing section, dihedral-adjusted
    /// global map, nonlinear passage with expansion `mu`.
    Periodic { mu: f64, l: u32, s: u32 },
    /// Polar `(rho, theta)` on the incoming section of the second
    /// equilibrium, reflection-constrained global maps.
    ReflectionSymmetric,
}

/// Why an iteration sequence stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum ExitReason {
    /// All requested iterates were computed.
    Completed,
    /// The section radius left `[0, 1]` at the given iterate.
    LeftSection { at: usize, rho: f64 },
    /// A map piece rejected its input at the given iterate.
    InvalidDomain { at: usize, reason: String },
}

/// An iterated return-map orbit; `points` starts with the initial point.
#[derive(Clone, Debug)]
pub struct MapOrbit {
    pub points: Vec<(f64, f64)>,
    pub exit: ExitReason,
}

fn section_radius(model: &ReturnModel, point: (f64, f64)) -> f64 {
    match model {
        ReturnModel::Instability => point.0.hypot(point.1),
        _ => point.0,
    }
}

/// Iterate a composed return map for up to `n` steps, stopping early when
/// the section radius leaves `[0, 1]` or a map piece rejects its input;
/// domain exits are recorded, not thrown.
pub fn iterate_return_map(
    cd: &CycleData,
    model: &ReturnModel,
    start: (f64, f64),
    n: usize,
) -> MapOrbit {
    let mut points = vec![start];
    let mut current = start;
    for step in 0..n {
        let next = match model {
            ReturnModel::Instability => phi1(cd, current.0, current.1).and_then(|p| {
                let rotated = psi_global(cd, GlobalMapVariant::Rotation, p);
                phi2_simple(cd, rotated.0, rotated.1)
            }),
            ReturnModel::Periodic { mu, l, s } => theorem2_step(cd, *mu, *l, *s, current.0),
            ReturnModel::ReflectionSymmetric => {
                phi2_d3(cd, current.0, current.1, AngleOutput::Tangent).and_then(|p| {
                    let crossed = psi_global(cd, GlobalMapVariant::Linear, p);
                    let local = phi1(cd, crossed.0, crossed.1)?;
                    Ok(psi_global(cd, GlobalMapVariant::ReflectionConstrained, local))
                })
            }
        };
        match next {
            Ok(point) => {
                points.push(point);
                current = point;
                let rho = section_radius(model, point);
                if !(0.0..=1.0).contains(&rho) {
                    return MapOrbit {
                        points,
                        exit: ExitReason::LeftSection { at: step + 1, rho },
                    };
                }
            }
            Err(err) => {
                return MapOrbit {
                    points,
                    exit: ExitReason::InvalidDomain {
                        at: step + 1,
                        reason: err.to_string(),
                    },
                };
            }
        }
    }
    MapOrbit {
        points,
        exit: ExitReason::Completed,
    }
}
