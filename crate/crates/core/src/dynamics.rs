//! Full nonlinear trajectory machinery for the four-dimensional families:
//! integration, heteroclinic-connection geometry, distance-to-cycle metrics,
//! attractor classification, escape censuses and parameter sweeps.
//!
//! The planar family participates in [`integrate`] by embedding its two
//! coordinates in the first two slots of the four-dimensional state; the
//! trailing two components stay zero.

use std::f64::consts::PI;
use std::io;

use nalgebra::{Vector2, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{
    cycle_rates, equilibria_on_axes, EigenRole, Family, GlParametrization, VectorFieldSpec,
    WhichEquilibrium,
};
use crate::group::{enumerate_isotropy_gl23, LinearSubspace};
use crate::ode::{locate_event, Integrator, IntegratorConfig, StepStats};

/// Offset along the unstable eigenvector when shooting a connection.
pub const CONNECTION_SHOOT_OFFSET: f64 = 1e-7;

/// A connection shot counts as arrived once within this distance of a sink.
pub const CONNECTION_ARRIVAL_TOL: f64 = 1e-6;

/// Connection polylines must start and end this close to their equilibria.
pub const ENDPOINT_TOL: f64 = 1e-4;

/// Connection polylines must stay this close to their invariant plane.
pub const PLANE_DRIFT_TOL: f64 = 1e-7;

/// Relative time window for section-crossing bisection.
pub const SECTION_TIME_TOL: f64 = 1e-12;

/// Evaluate the field as a four-dimensional right-hand side. The planar
/// family acts on the first two coordinates and leaves the rest at zero.
fn field4(spec: &VectorFieldSpec, x: &Vector4<f64>) -> Vector4<f64> {
    if spec.dim() == 4 {
        spec.eval4(x)
    } else {
        let f = spec.eval2(&Vector2::new(x.x, x.y));
        Vector4::new(f.x, f.y, 0.0, 0.0)
    }
}

/// Why an integration run stopped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    /// Ran to the configured end time.
    MaxTime,
    /// The state norm crossed the configured escape radius.
    EscapeRadius { norm: f64 },
    /// Came within tolerance of the target with this index.
    Converged { target: usize },
}

/// A sampled trajectory with step statistics and the reason it stopped.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vector4<f64>>,
    pub stats: StepStats,
    pub termination: Termination,
}

impl TrajectoryRecord {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("record holds at least the start")
    }

    pub fn final_state(&self) -> &Vector4<f64> {
        self.states.last().expect("record holds at least the start")
    }

    /// Write the trajectory as CSV with header `t,x1,y1,x2,y2` and
    /// 17 significant digits per value.
    pub fn write_csv<W: io::Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t,x1,y1,x2,y2")?;
        for (t, y) in self.times.iter().zip(&self.states) {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, y.x, y.y, y.z, y.w
            )?;
        }
        Ok(())
    }
}

/// Integrate the field from `x0` under `cfg`, recording every accepted step.
pub fn integrate(
    spec: &VectorFieldSpec,
    x0: &Vector4<f64>,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    integrate_toward(spec, x0, cfg, &[], CONNECTION_ARRIVAL_TOL)
}

/// Integrate, additionally stopping once the state comes within `tol` of
/// any of the listed target points.
pub fn integrate_toward(
    spec: &VectorFieldSpec,
    x0: &Vector4<f64>,
    cfg: &IntegratorConfig,
    targets: &[Vector4<f64>],
    tol: f64,
) -> Result<TrajectoryRecord> {
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::ParameterDomain(
            "initial state has non-finite components".into(),
        ));
    }
    let mut it = Integrator::new(|_, y| field4(spec, y), 0.0, *x0, *cfg)?;
    let t_end = cfg.max_time;
    let mut times = vec![0.0];
    let mut states = vec![*x0];
    let mut termination = Termination::MaxTime;
    'run: while it.t() < t_end {
        let step = it.advance(t_end)?;
        if cfg.dense {
            times.push(step.t1);
            states.push(step.y1);
        }
        if let Some(radius) = cfg.escape_radius {
            let norm = step.y1.norm();
            if norm > radius {
                termination = Termination::EscapeRadius { norm };
                break 'run;
            }
        }
        for (i, target) in targets.iter().enumerate() {
            if (step.y1 - target).norm() <= tol {
                termination = Termination::Converged { target: i };
                break 'run;
            }
        }
    }
    if !cfg.dense || *times.last().unwrap() < it.t() {
        times.push(it.t());
        states.push(*it.y());
    }
    Ok(TrajectoryRecord {
        times,
        states,
        stats: it.stats(),
        termination,
    })
}

/// One saddle-sink connection as a sampled polyline inside its invariant
/// plane. `source_kind` tags the connection type: polylines leaving a
/// first-kind equilibrium travel its simple unstable direction, polylines
/// leaving a second-kind equilibrium travel inside the double eigenspace.
#[derive(Clone, Debug)]
pub struct ConnectionPolyline {
    pub points: Vec<Vector4<f64>>,
    pub source: usize,
    pub target: usize,
    pub source_kind: WhichEquilibrium,
    pub plane: LinearSubspace,
}

impl ConnectionPolyline {
    pub fn arclength(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Point at the given arclength fraction in [0, 1].
    pub fn point_at_fraction(&self, fraction: f64) -> Vector4<f64> {
        let goal = self.arclength() * fraction.clamp(0.0, 1.0);
        let mut acc = 0.0;
        for w in self.points.windows(2) {
            let seg = (w[1] - w[0]).norm();
            if acc + seg >= goal && seg > 0.0 {
                return w[0] + (w[1] - w[0]) * ((goal - acc) / seg);
            }
            acc += seg;
        }
        *self.points.last().expect("polyline has points")
    }

    fn distance(&self, x: &Vector4<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for w in self.points.windows(2) {
            best = best.min(point_segment_distance(x, &w[0], &w[1]));
        }
        best
    }
}

fn point_segment_distance(x: &Vector4<f64>, a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    let ab = b - a;
    let denom = ab.norm_squared();
    if denom == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a).dot(&ab) / denom).clamp(0.0, 1.0);
    (x - (a + ab * t)).norm()
}

/// The heteroclinic cycle as a geometric object: every equilibrium copy and
/// the full group orbit of both connection polylines.
#[derive(Clone, Debug)]
pub struct CycleGeometry {
    pub equilibria: Vec<Vector4<f64>>,
    pub kinds: Vec<WhichEquilibrium>,
    pub connections: Vec<ConnectionPolyline>,
}

impl CycleGeometry {
    /// Minimum Euclidean distance from `x` to the cycle (all polyline
    /// segments and all equilibria).
    pub fn distance(&self, x: &Vector4<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for e in &self.equilibria {
            best = best.min((x - e).norm());
        }
        for c in &self.connections {
            best = best.min(c.distance(x));
        }
        best
    }

    /// Distance from `x` to one connection polyline.
    pub fn distance_to_connection(&self, index: usize, x: &Vector4<f64>) -> f64 {
        self.connections[index].distance(x)
    }

    /// Copy with each polyline resampled down to about `per_connection`
    /// points, for cheap distance monitoring along long runs.
    pub fn decimated(&self, per_connection: usize) -> CycleGeometry {
        let connections = self
            .connections
            .iter()
            .map(|c| {
                let n = c.points.len();
                let stride = (n.saturating_sub(1) / per_connection.max(1)).max(1);
                let mut points: Vec<Vector4<f64>> = c.points.iter().step_by(stride).copied().collect();
                if *points.last().unwrap() != *c.points.last().unwrap() {
                    points.push(*c.points.last().unwrap());
                }
                ConnectionPolyline {
                    points,
                    ..c.clone()
                }
            })
            .collect();
        CycleGeometry {
            equilibria: self.equilibria.clone(),
            kinds: self.kinds.clone(),
            connections,
        }
    }

    /// Largest equilibrium norm, the natural length scale of the cycle.
    pub fn scale(&self) -> f64 {
        self.equilibria
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    /// Distinct invariant planes hosting the connections.
    pub fn planes(&self) -> Vec<LinearSubspace> {
        let mut out: Vec<LinearSubspace> = Vec::new();
        for c in &self.connections {
            if !out.iter().any(|p| p.max_principal_angle(&c.plane) < 1e-9) {
                out.push(c.plane.clone());
            }
        }
        out
    }

    /// Shortest source-to-target distance over the connections.
    fn min_leg_span(&self) -> f64 {
        self.connections
            .iter()
            .map(|c| (self.equilibria[c.source] - self.equilibria[c.target]).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Minimum distance from a point to the cycle.
pub fn distance_to_cycle(x: &Vector4<f64>, geometry: &CycleGeometry) -> f64 {
    geometry.distance(x)
}

/// Two-dimensional invariant planes that can host connections, in a fixed
/// deterministic order: the order-3-fixed planes first, then the
/// reflection-fixed planes.
fn invariant_planes(spec: &VectorFieldSpec) -> Result<Vec<LinearSubspace>> {
    let span =
        |a: Vector4<f64>, b: Vector4<f64>| LinearSubspace::from_basis(vec![a, b]);
    match spec.family() {
        Family::D3Cubic | Family::D3TildeCubic => {
            let e1 = Vector4::new(1.0, 0.0, 0.0, 0.0);
            let e2 = Vector4::new(0.0, 1.0, 0.0, 0.0);
            let mut planes = vec![span(e1, e2)?];
            for theta in [0.0, PI / 3.0, 2.0 * PI / 3.0] {
                planes.push(span(e1, Vector4::new(0.0, 0.0, theta.cos(), theta.sin()))?);
            }
            Ok(planes)
        }
        Family::Gl23Cubic => {
            let inventory = enumerate_isotropy_gl23(spec.group())?;
            Ok(inventory
                .p1
                .iter()
                .map(|(_, p)| p.clone())
                .chain(inventory.p2.iter().map(|(_, p)| p.clone()))
                .collect())
        }
        Family::PlanarD3 => Err(Error::InvalidScenario(
            "cycle geometry is defined for the four-dimensional families".into(),
        )),
    }
}

struct Shot {
    points: Vec<Vector4<f64>>,
    target: usize,
}

/// Integrate both unstable-manifold branches in exact plane coordinates
/// until one lands on a target. The reduction to two dimensions is exact
/// because the plane is flow-invariant; shooting in the ambient space
/// instead would let roundoff grow along transverse expanding directions
/// and eject the orbit before it reaches the arrival tolerance.
fn shoot_in_plane(
    spec: &VectorFieldSpec,
    plane: &LinearSubspace,
    source: &Vector4<f64>,
    direction: &Vector4<f64>,
    targets: &[(usize, Vector4<f64>)],
    max_time: f64,
    escape_radius: f64,
) -> Option<Shot> {
    let basis = plane.basis();
    let (b0, b1) = (basis[0], basis[1]);
    let reduce = |y: &Vector4<f64>| Vector2::new(b0.dot(y), b1.dot(y));
    let lift = |z: &Vector2<f64>| b0 * z.x + b1 * z.y;
    let in_plane_targets: Vec<(usize, Vector2<f64>)> =
        targets.iter().map(|(i, t)| (*i, reduce(t))).collect();
    let cfg = IntegratorConfig {
        max_time,
        escape_radius: Some(escape_radius),
        ..IntegratorConfig::default()
    };
    for sign in [1.0, -1.0] {
        let z0 = reduce(&(source + direction * (sign * CONNECTION_SHOOT_OFFSET)));
        let Ok(mut it) = Integrator::new(
            |_, z: &Vector2<f64>| {
                let f = field4(spec, &lift(z));
                Vector2::new(b0.dot(&f), b1.dot(&f))
            },
            0.0,
            z0,
            cfg,
        ) else {
            continue;
        };
        let mut zs = vec![z0];
        while it.t() < max_time {
            let Ok(step) = it.advance(max_time) else { break };
            zs.push(step.y1);
            for (index, target) in &in_plane_targets {
                if (step.y1 - target).norm() <= CONNECTION_ARRIVAL_TOL {
                    return Some(Shot {
                        points: zs.iter().map(&lift).collect(),
                        target: *index,
                    });
                }
            }
        }
    }
    None
}

/// Whether any of the listed equilibria attracts within the plane, judged
/// by the in-plane restriction of the Jacobian. A connection can only land
/// on such a point.
fn hosts_in_plane_sink(
    spec: &VectorFieldSpec,
    plane: &LinearSubspace,
    candidates: &[(usize, Vector4<f64>)],
) -> bool {
    let basis = plane.basis();
    let (b0, b1) = (basis[0], basis[1]);
    candidates.iter().any(|(_, p)| {
        let j = spec.jacobian4(p);
        let trace = b0.dot(&(j * b0)) + b1.dot(&(j * b1));
        let det = b0.dot(&(j * b0)) * b1.dot(&(j * b1))
            - b0.dot(&(j * b1)) * b1.dot(&(j * b0));
        trace < 0.0 && det > 0.0
    })
}

/// Compute the heteroclinic cycle of the family: locate the axis equilibria,
/// shoot the one-dimensional unstable manifold of the first kind inside its
/// invariant plane and the in-plane branch of the double eigenspace of the
/// second kind, then replicate both connections over the symmetry group.
pub fn compute_connections(spec: &VectorFieldSpec) -> Result<CycleGeometry> {
    let reports = equilibria_on_axes(spec)?;
    let rates = cycle_rates(spec)?;
    let group = spec.group();

    // Every group copy of the two equilibria.
    let mut equilibria: Vec<Vector4<f64>> = Vec::new();
    let mut kinds: Vec<WhichEquilibrium> = Vec::new();
    for report in &reports {
        for g in group.elements() {
            let p = g.apply(&report.position);
            if !equilibria.iter().any(|q| (q - p).norm() < 1e-6) {
                equilibria.push(p);
                kinds.push(report.which);
            }
        }
    }
    let scale = equilibria.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let escape_radius = 5.0 * scale;

    let sinks_of = |kind: WhichEquilibrium, exclude: &Vector4<f64>| -> Vec<(usize, Vector4<f64>)> {
        equilibria
            .iter()
            .enumerate()
            .filter(|(i, p)| kinds[*i] == kind && (*p - exclude).norm() > 1e-6)
            .map(|(i, p)| (i, *p))
            .collect()
    };

    let eigen = |which: WhichEquilibrium, role: EigenRole| -> Result<Vec<Vector4<f64>>> {
        let report = reports
            .iter()
            .find(|r| r.which == which)
            .expect("both equilibria reported");
        report
            .eigenvalues
            .iter()
            .find(|ev| ev.role == role)
            .map(|ev| ev.basis.clone())
            .ok_or_else(|| {
                Error::MissingConnection(format!(
                    "equilibrium lacks a {role:?} eigenvalue; no cycle can leave it"
                ))
            })
    };

    // First connection: out of the simple unstable direction of the first
    // equilibrium, inside the plane spanned by its axis and that direction.
    let rep1 = reports
        .iter()
        .find(|r| r.which == WhichEquilibrium::Xi1)
        .expect("first equilibrium reported");
    let v1 = eigen(WhichEquilibrium::Xi1, EigenRole::Expanding)?[0];
    let plane1 = orthonormal_span(&rep1.position, &v1)?;
    let plane_tol = 1e-8 * scale.max(1.0);
    let targets1: Vec<(usize, Vector4<f64>)> = sinks_of(WhichEquilibrium::Xi2, &rep1.position)
        .into_iter()
        .filter(|(_, p)| plane1.distance(p) < plane_tol)
        .collect();
    let max_time1 = 200.0 + 30.0 / rates.e1 + 30.0 / rates.c2;
    let shot1 = shoot_in_plane(
        spec,
        &plane1,
        &rep1.position,
        &v1,
        &targets1,
        max_time1,
        escape_radius,
    )
    .ok_or_else(|| {
        Error::MissingConnection(
            "no branch of the simple unstable manifold reached a sink copy".into(),
        )
    })?;
    let kappa1 = ConnectionPolyline {
        points: shot1.points,
        source: nearest_index(&equilibria, &rep1.position),
        target: shot1.target,
        source_kind: WhichEquilibrium::Xi1,
        plane: plane1,
    };

    // Second connection: the double eigenspace of the second equilibrium
    // meets each invariant plane through it in at most a line; shoot every
    // such in-plane direction until one lands on a copy of the first kind.
    let rep2 = reports
        .iter()
        .find(|r| r.which == WhichEquilibrium::Xi2)
        .expect("second equilibrium reported");
    let double = LinearSubspace::from_basis(eigen(WhichEquilibrium::Xi2, EigenRole::Double)?)?;
    let targets2 = sinks_of(WhichEquilibrium::Xi1, &rep2.position);
    let max_time2 = 200.0 + 30.0 / rates.e2 + 30.0 / rates.c1;
    let mut kappa2 = None;
    for plane in invariant_planes(spec)? {
        if plane.distance(&rep2.position) > plane_tol {
            continue;
        }
        let line = plane.intersect(&double);
        if line.dim() != 1 {
            continue;
        }
        let in_plane_targets: Vec<(usize, Vector4<f64>)> = targets2
            .iter()
            .copied()
            .filter(|(_, p)| plane.distance(p) < plane_tol)
            .collect();
        if in_plane_targets.is_empty() || !hosts_in_plane_sink(spec, &plane, &in_plane_targets) {
            continue;
        }
        if let Some(shot) = shoot_in_plane(
            spec,
            &plane,
            &rep2.position,
            &line.basis()[0],
            &in_plane_targets,
            max_time2,
            escape_radius,
        ) {
            kappa2 = Some(ConnectionPolyline {
                points: shot.points,
                source: nearest_index(&equilibria, &rep2.position),
                target: shot.target,
                source_kind: WhichEquilibrium::Xi2,
                plane,
            });
            break;
        }
    }
    let kappa2 = kappa2.ok_or_else(|| {
        Error::MissingConnection(
            "no in-plane branch of the double unstable eigenspace reached a sink copy".into(),
        )
    })?;

    for kappa in [&kappa1, &kappa2] {
        let drift = kappa
            .points
            .iter()
            .map(|p| kappa.plane.distance(p))
            .fold(0.0, f64::max);
        if drift > PLANE_DRIFT_TOL {
            return Err(Error::MissingConnection(format!(
                "connection drifted {drift:.2e} out of its invariant plane"
            )));
        }
    }
    // Replicate both connections over the group, deduplicating coincident
    // images by their endpoints and midpoint.
    let mut connections: Vec<ConnectionPolyline> = Vec::new();
    for original in [&kappa1, &kappa2] {
        for g in group.elements() {
            let points: Vec<Vector4<f64>> =
                original.points.iter().map(|p| g.apply(p)).collect();
            let mid = points[points.len() / 2];
            let duplicate = connections.iter().any(|c| {
                c.points.len() == points.len()
                    && (c.points[0] - points[0]).norm() < 1e-8
                    && (c.points[c.points.len() / 2] - mid).norm() < 1e-8
                    && (c.points[c.points.len() - 1] - points[points.len() - 1]).norm() < 1e-8
            });
            if duplicate {
                continue;
            }
            let basis = original.plane.basis();
            connections.push(ConnectionPolyline {
                source: nearest_index(&equilibria, &points[0]),
                target: nearest_index(&equilibria, &points[points.len() - 1]),
                source_kind: original.source_kind,
                plane: LinearSubspace::from_basis(vec![
                    g.apply(&basis[0]),
                    g.apply(&basis[1]),
                ])?,
                points,
            });
        }
    }

    let geometry = CycleGeometry {
        equilibria,
        kinds,
        connections,
    };
    for c in &geometry.connections {
        let start = (c.points[0] - geometry.equilibria[c.source]).norm();
        let end = (c.points[c.points.len() - 1] - geometry.equilibria[c.target]).norm();
        if start > ENDPOINT_TOL || end > ENDPOINT_TOL {
            return Err(Error::MissingConnection(format!(
                "replicated connection endpoints miss their equilibria by {start:.2e} and {end:.2e}"
            )));
        }
    }
    Ok(geometry)
}

fn orthonormal_span(a: &Vector4<f64>, b: &Vector4<f64>) -> Result<LinearSubspace> {
    let u = a / a.norm();
    let w = b - u * u.dot(b);
    LinearSubspace::from_basis(vec![u, w / w.norm()])
}

fn nearest_index(points: &[Vector4<f64>], x: &Vector4<f64>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = (p - x).norm();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Outcome kind of a classification run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    EscapesNeighborhood,
    PeriodicOrbit,
    ConvergesToCycle,
    NonPeriodicBounded,
    /// The horizon ended before any of the four signatures was established.
    Inconclusive,
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            VerdictKind::EscapesNeighborhood => "EscapesNeighborhood",
            VerdictKind::PeriodicOrbit => "PeriodicOrbit",
            VerdictKind::ConvergesToCycle => "ConvergesToCycle",
            VerdictKind::NonPeriodicBounded => "NonPeriodicBounded",
            VerdictKind::Inconclusive => "Inconclusive",
        };
        f.write_str(name)
    }
}

/// One stay inside the dwell ball of an equilibrium copy.
#[derive(Clone, Copy, Debug)]
pub struct DwellEpisode {
    pub equilibrium: usize,
    pub t_enter: f64,
    pub t_exit: f64,
    pub duration: f64,
    pub min_dist: f64,
    /// False when the run ended while still inside the ball.
    pub complete: bool,
}

/// Which connection a between-dwell flight shadowed.
#[derive(Clone, Copy, Debug)]
pub struct LegShadow {
    pub from: usize,
    pub to: usize,
    pub connection: usize,
}

/// Classification of a trajectory relative to the cycle, with the evidence
/// backing the verdict.
#[derive(Clone, Debug)]
pub struct ClassificationVerdict {
    pub kind: VerdictKind,
    pub period: Option<f64>,
    /// Section returns per period of the matched orbit.
    pub period_multiplicity: Option<usize>,
    pub dwells: Vec<DwellEpisode>,
    pub legs: Vec<LegShadow>,
    pub min_dist: f64,
    pub max_dist: f64,
    pub final_dist: f64,
    pub section_returns: Vec<(f64, Vector4<f64>)>,
    pub section_dispersion: Option<f64>,
    pub escape_time: Option<f64>,
    pub note: String,
}

impl ClassificationVerdict {
    pub fn dwell_times(&self) -> Vec<f64> {
        self.dwells.iter().map(|d| d.duration).collect()
    }
}

/// Knobs of [`classify_attractor`]. Defaults follow the documented design:
/// escape distance 0.5, transient skip 20 % of the horizon, dwell radius
/// 15 % of the shortest connection span.
#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub integrator: IntegratorConfig,
    pub delta_escape: f64,
    pub transient_fraction: f64,
    /// Radius of the dwell ball around each equilibrium; `None` derives it
    /// from the cycle geometry.
    pub dwell_radius: Option<f64>,
    /// Dwell visits with increasing durations required for a convergence
    /// verdict.
    pub min_dwells: usize,
    /// Distance to the cycle the final state must reach for a convergence
    /// verdict.
    pub converge_dist: f64,
    /// Distance within which consecutive section returns count as matched.
    pub section_tol: f64,
    /// Points kept per connection in the monitoring geometry.
    pub monitor_points: usize,
    /// Distance to the cycle is sampled every this many accepted steps.
    pub monitor_stride: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            integrator: IntegratorConfig {
                max_time: 10_000.0,
                ..IntegratorConfig::default()
            },
            delta_escape: 0.5,
            transient_fraction: 0.2,
            dwell_radius: None,
            min_dwells: 5,
            converge_dist: 1e-3,
            section_tol: 1e-6,
            monitor_points: 80,
            monitor_stride: 4,
        }
    }
}

struct DwellTracker {
    radius: f64,
    exit_radius: f64,
    current: Option<(usize, f64, f64)>,
    prev: Option<(f64, Vec<f64>)>,
    episodes: Vec<DwellEpisode>,
}

impl DwellTracker {
    fn new(radius: f64) -> Self {
        DwellTracker {
            radius,
            exit_radius: 1.2 * radius,
            current: None,
            prev: None,
            episodes: Vec::new(),
        }
    }

    fn inside(&self) -> bool {
        self.current.is_some()
    }

    fn update(&mut self, t: f64, y: &Vector4<f64>, equilibria: &[Vector4<f64>]) -> Option<usize> {
        let dists: Vec<f64> = equilibria.iter().map(|e| (y - e).norm()).collect();
        let mut entered = None;
        match self.current {
            Some((eq, t_enter, min_dist)) => {
                let d = dists[eq];
                if d > self.exit_radius {
                    let t_exit = self
                        .prev
                        .as_ref()
                        .map(|(tp, dp)| cross_time(*tp, dp[eq], t, d, self.exit_radius))
                        .unwrap_or(t);
                    self.episodes.push(DwellEpisode {
                        equilibrium: eq,
                        t_enter,
                        t_exit,
                        duration: t_exit - t_enter,
                        min_dist,
                        complete: true,
                    });
                    self.current = None;
                } else {
                    self.current = Some((eq, t_enter, min_dist.min(d)));
                }
            }
            None => {
                let (eq, d) = dists
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("at least one equilibrium");
                if *d < self.radius {
                    let t_enter = self
                        .prev
                        .as_ref()
                        .map(|(tp, dp)| cross_time(*tp, dp[eq], t, *d, self.radius))
                        .unwrap_or(t);
                    self.current = Some((eq, t_enter, *d));
                    entered = Some(eq);
                }
            }
        }
        self.prev = Some((t, dists));
        entered
    }

    fn finish(&mut self, t_end: f64) {
        if let Some((eq, t_enter, min_dist)) = self.current.take() {
            self.episodes.push(DwellEpisode {
                equilibrium: eq,
                t_enter,
                t_exit: t_end,
                duration: t_end - t_enter,
                min_dist,
                complete: false,
            });
        }
    }
}

fn cross_time(t0: f64, d0: f64, t1: f64, d1: f64, level: f64) -> f64 {
    if (d1 - d0).abs() < f64::EPSILON * level.abs().max(1.0) {
        return t1;
    }
    let s = ((level - d0) / (d1 - d0)).clamp(0.0, 1.0);
    t0 + s * (t1 - t0)
}

/// Longest run of consecutive strictly increasing dwell durations. An
/// incomplete final episode counts only when its partial duration already
/// exceeds its predecessor; its eventual length is unknown otherwise.
fn longest_increasing_dwell_run(episodes: &[DwellEpisode]) -> usize {
    let durations: Vec<(f64, bool)> = episodes.iter().map(|e| (e.duration, e.complete)).collect();
    let mut usable = durations.len();
    if let Some((last, complete)) = durations.last() {
        if !complete && durations.len() >= 2 && *last <= durations[durations.len() - 2].0 {
            usable -= 1;
        }
    }
    let mut best = 0;
    let mut run = 0;
    for i in 0..usable {
        if run == 0 || durations[i - 1].0 < durations[i].0 {
            run += 1;
        } else {
            run = 1;
        }
        best = best.max(run);
    }
    best
}

/// Classify the long-run behaviour of the trajectory from `x0` relative to
/// the cycle: escape from its neighbourhood, convergence to it, a nearby
/// periodic orbit, bounded non-periodic motion, or explicitly inconclusive.
pub fn classify_attractor(
    spec: &VectorFieldSpec,
    x0: &Vector4<f64>,
    geometry: &CycleGeometry,
    cfg: &ClassifyConfig,
) -> Result<ClassificationVerdict> {
    if spec.dim() != 4 {
        return Err(Error::InvalidScenario(
            "classification runs on the four-dimensional families".into(),
        ));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::ParameterDomain(
            "initial state has non-finite components".into(),
        ));
    }
    let monitor = geometry.decimated(cfg.monitor_points);
    let dwell_radius = cfg
        .dwell_radius
        .unwrap_or_else(|| 0.15 * geometry.min_leg_span());
    let mut dwell = DwellTracker::new(dwell_radius);

    // Poincare section: the hyperplane through the arclength midpoint of the
    // first second-kind connection, orthogonal to the flow there. Crossings
    // are refined by bisection and counted in the flow direction only.
    let section_reference = geometry
        .connections
        .iter()
        .find(|c| c.source_kind == WhichEquilibrium::Xi2)
        .ok_or_else(|| {
            Error::MissingConnection("cycle geometry has no second-kind connection".into())
        })?;
    let sec_point = section_reference.point_at_fraction(0.5);
    let flow = field4(spec, &sec_point);
    if flow.norm() == 0.0 {
        return Err(Error::MissingConnection(
            "flow vanishes at the section reference point".into(),
        ));
    }
    let sec_normal = flow / flow.norm();

    let t_end = cfg.integrator.max_time;
    let transient_end = cfg.transient_fraction * t_end;
    let escape_backstop = 10.0 * geometry.scale().max(1.0);

    let mut it = Integrator::new(|_, y| field4(spec, y), 0.0, *x0, cfg.integrator)?;
    let mut returns: Vec<(f64, Vector4<f64>)> = Vec::new();
    let mut legs: Vec<LegShadow> = Vec::new();
    let mut leg_plane_acc: Vec<f64> = vec![0.0; geometry.connections.len()];
    let mut leg_poly_acc: Vec<f64> = vec![0.0; geometry.connections.len()];
    let mut leg_samples = 0usize;
    let mut min_dist = f64::INFINITY;
    let mut max_dist: f64 = 0.0;
    let mut argmin = *x0;
    let mut argmax = *x0;
    let mut escape: Option<(f64, f64)> = None;
    let mut step_index = 0usize;

    while it.t() < t_end {
        let step = it.advance(t_end)?;
        step_index += 1;

        if let Some((ts, ys)) =
            locate_event(&step, |_, y| (y - sec_point).dot(&sec_normal), 1, SECTION_TIME_TOL)
        {
            if ts >= transient_end {
                returns.push((ts, ys));
            }
        }

        let was_inside = dwell.inside();
        let entered = dwell.update(step.t1, &step.y1, &geometry.equilibria);
        if let Some(eq) = entered {
            if leg_samples > 0 && !dwell.episodes.is_empty() {
                let from = dwell
                    .episodes
                    .last()
                    .map(|e| e.equilibrium)
                    .unwrap_or(eq);
                legs.push(LegShadow {
                    from,
                    to: eq,
                    connection: attribute_leg(&leg_plane_acc, &leg_poly_acc, leg_samples),
                });
            }
            leg_plane_acc.fill(0.0);
            leg_poly_acc.fill(0.0);
            leg_samples = 0;
        }

        if step_index % cfg.monitor_stride == 0 {
            let d = monitor.distance(&step.y1);
            if !was_inside && !dwell.inside() {
                for (i, c) in geometry.connections.iter().enumerate() {
                    leg_plane_acc[i] += c.plane.distance(&step.y1);
                    leg_poly_acc[i] += monitor.distance_to_connection(i, &step.y1);
                }
                leg_samples += 1;
            }
            if step.t1 >= transient_end {
                if d < min_dist {
                    min_dist = d;
                    argmin = step.y1;
                }
                if d > max_dist {
                    max_dist = d;
                    argmax = step.y1;
                }
            }
            if d > cfg.delta_escape * 1.05 || step.y1.norm() > escape_backstop {
                let exact = geometry.distance(&step.y1);
                if exact > cfg.delta_escape {
                    escape = Some((step.t1, exact));
                    break;
                }
            }
        }
    }
    let t_final = it.t();
    let y_final = *it.y();
    dwell.finish(t_final);

    let final_dist = geometry.distance(&y_final);
    min_dist = min_dist.min(geometry.distance(&argmin)).min(final_dist);
    max_dist = max_dist.max(geometry.distance(&argmax)).max(final_dist);

    let episodes = dwell.episodes;

    let mut verdict = ClassificationVerdict {
        kind: VerdictKind::Inconclusive,
        period: None,
        period_multiplicity: None,
        dwells: episodes.clone(),
        legs,
        min_dist,
        max_dist,
        final_dist,
        section_returns: returns.clone(),
        section_dispersion: None,
        escape_time: None,
        note: String::new(),
    };

    if let Some((t, dist)) = escape {
        verdict.kind = VerdictKind::EscapesNeighborhood;
        verdict.escape_time = Some(t);
        verdict.note = format!("distance to the cycle reached {dist:.3} at t = {t:.1}");
        return Ok(verdict);
    }

    let increasing = longest_increasing_dwell_run(&episodes);
    if increasing >= cfg.min_dwells && final_dist <= cfg.converge_dist {
        verdict.kind = VerdictKind::ConvergesToCycle;
        verdict.note = format!(
            "{increasing} consecutive dwell durations strictly increasing; \
             final distance {final_dist:.2e}"
        );
        return Ok(verdict);
    }

    if let Some((m, period)) = match_returns(&returns, cfg.section_tol) {
        verdict.kind = VerdictKind::PeriodicOrbit;
        verdict.period = Some(period);
        verdict.period_multiplicity = Some(m);
        verdict.note = format!("section returns matched with multiplicity {m}");
        return Ok(verdict);
    }

    if returns.len() >= 5 {
        let window = &returns[returns.len().saturating_sub(12)..];
        let mut dispersion: f64 = 0.0;
        for (i, (_, a)) in window.iter().enumerate() {
            for (_, b) in &window[i + 1..] {
                dispersion = dispersion.max((a - b).norm());
            }
        }
        verdict.kind = VerdictKind::NonPeriodicBounded;
        verdict.section_dispersion = Some(dispersion);
        verdict.note = format!(
            "{} section returns without convergence; dispersion {dispersion:.3e}",
            returns.len()
        );
        return Ok(verdict);
    }

    verdict.note = format!(
        "horizon {t_end} gave {} dwells and {} post-transient section returns; \
         no signature established",
        episodes.len(),
        returns.len()
    );
    Ok(verdict)
}

/// Connection a flight shadowed: smallest accumulated distance to the
/// connection's invariant plane, with the accumulated polyline distance
/// breaking ties between connections sharing one plane. The plane decides
/// because a trajectory can track a plane faithfully while staying well
/// away from the sampled heteroclinic path inside it.
fn attribute_leg(plane_acc: &[f64], poly_acc: &[f64], samples: usize) -> usize {
    let best_plane = plane_acc.iter().copied().fold(f64::INFINITY, f64::min);
    let tie = 1e-9 * samples as f64 + 1e-12;
    (0..plane_acc.len())
        .filter(|&i| plane_acc[i] <= best_plane + tie)
        .min_by(|&a, &b| poly_acc[a].total_cmp(&poly_acc[b]))
        .unwrap_or(0)
}

/// Smallest multiplicity m whose last two return pairs both match within
/// `tol`; the period is the time between the matched returns.
fn match_returns(returns: &[(f64, Vector4<f64>)], tol: f64) -> Option<(usize, f64)> {
    let n = returns.len();
    for m in 1..=6 {
        if n < m + 2 {
            return None;
        }
        let (t_last, p_last) = returns[n - 1];
        let (_, p_prev) = returns[n - 1 - m];
        let (_, q_last) = returns[n - 2];
        let (_, q_prev) = returns[n - 2 - m];
        if (p_last - p_prev).norm() <= tol && (q_last - q_prev).norm() <= tol {
            return Some((m, t_last - returns[n - 1 - m].0));
        }
    }
    None
}

/// Knobs of [`escape_census`]. The tolerances are looser than the
/// connection-shooting defaults because a census integrates hundreds of
/// trajectories and only asks whether each leaves a neighbourhood.
#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub integrator: IntegratorConfig,
    pub delta_escape: f64,
    /// Samples are redrawn while closer than this fraction of the tube
    /// radius to any invariant plane of the cycle.
    pub clearance_fraction: f64,
    pub monitor_points: usize,
    pub monitor_stride: usize,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            integrator: IntegratorConfig {
                rel_tol: 1e-8,
                abs_tol: 1e-10,
                max_time: 20_000.0,
                ..IntegratorConfig::default()
            },
            delta_escape: 0.5,
            clearance_fraction: 0.05,
            monitor_points: 80,
            monitor_stride: 4,
        }
    }
}

/// Outcome of one census sample.
#[derive(Clone, Copy, Debug)]
pub struct CensusSample {
    pub x0: Vector4<f64>,
    pub escape_time: Option<f64>,
}

/// Result of an escape census over a tube around the cycle.
#[derive(Clone, Debug)]
pub struct EscapeCensus {
    pub samples: Vec<CensusSample>,
    pub escaped: usize,
    pub fraction: f64,
    pub seed: u64,
    /// Whether every symmetry of the family is a rotation; the
    /// measure-zero escape claim is stated only for such groups.
    pub rotation_group: bool,
}

/// Time at which the trajectory from `x0` leaves the `delta_escape`
/// neighbourhood of the cycle, or `None` if it stays inside for the whole
/// horizon.
pub fn escape_time(
    spec: &VectorFieldSpec,
    geometry: &CycleGeometry,
    x0: &Vector4<f64>,
    cfg: &CensusConfig,
) -> Result<Option<f64>> {
    let monitor = geometry.decimated(cfg.monitor_points);
    let backstop = 10.0 * geometry.scale().max(1.0);
    let t_end = cfg.integrator.max_time;
    let mut it = Integrator::new(|_, y| field4(spec, y), 0.0, *x0, cfg.integrator)?;
    let mut step_index = 0usize;
    while it.t() < t_end {
        let step = it.advance(t_end)?;
        step_index += 1;
        if step_index % cfg.monitor_stride != 0 {
            continue;
        }
        if step.y1.norm() > backstop {
            return Ok(Some(step.t1));
        }
        if monitor.distance(&step.y1) > cfg.delta_escape * 1.05
            && geometry.distance(&step.y1) > cfg.delta_escape
        {
            return Ok(Some(step.t1));
        }
    }
    Ok(None)
}

/// Sample `n_samples` initial conditions uniformly in the `delta`-tube
/// around the cycle, kept clear of its invariant planes, and report the
/// fraction that leaves the neighbourhood. Deterministic for a given seed:
/// the sample points are drawn sequentially before the integrations run.
pub fn escape_census(
    spec: &VectorFieldSpec,
    geometry: &CycleGeometry,
    delta: f64,
    n_samples: usize,
    seed: u64,
    cfg: &CensusConfig,
) -> Result<EscapeCensus> {
    if delta <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "tube radius must be positive, got {delta}"
        )));
    }
    let planes = geometry.planes();
    let clearance = cfg.clearance_fraction * delta;
    let lengths: Vec<f64> = geometry.connections.iter().map(|c| c.arclength()).collect();
    let total: f64 = lengths.iter().sum();
    if total == 0.0 {
        return Err(Error::MissingConnection(
            "cycle geometry has no connection arclength to sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = Vec::with_capacity(n_samples);
    while starts.len() < n_samples {
        let mut pick = rng.gen_range(0.0..total);
        let mut index = 0;
        for (i, len) in lengths.iter().enumerate() {
            if pick <= *len || i == lengths.len() - 1 {
                index = i;
                break;
            }
            pick -= len;
        }
        let base = geometry.connections[index].point_at_fraction(pick / lengths[index]);
        let offset = loop {
            let u = Vector4::from_fn(|_, _| rng.gen_range(-1.0_f64..1.0));
            if u.norm_squared() <= 1.0 && u.norm_squared() > 0.0 {
                break u;
            }
        };
        let x0 = base + offset * delta;
        if planes.iter().any(|p| p.distance(&x0) < clearance) {
            continue;
        }
        starts.push(x0);
    }

    let samples: Vec<Result<CensusSample>> = starts
        .par_iter()
        .map(|x0| {
            escape_time(spec, geometry, x0, cfg).map(|escape_time| CensusSample {
                x0: *x0,
                escape_time,
            })
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let escaped = samples.iter().filter(|s| s.escape_time.is_some()).count();
    let rotation_group = spec
        .group()
        .elements()
        .iter()
        .all(|g| g.is_rotation());
    Ok(EscapeCensus {
        fraction: escaped as f64 / n_samples.max(1) as f64,
        samples,
        escaped,
        seed,
        rotation_group,
    })
}

/// One grid point of a parameter sweep over the order-48 family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub h1: f64,
    pub h2: f64,
}

/// Verdict (or inline error) for one sweep row.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub verdict: std::result::Result<ClassificationVerdict, String>,
}

/// Protocol of a sweep: classification knobs, the size of the off-plane
/// offset of the initial condition, and the seed of its direction draw.
#[derive(Clone, Debug)]
pub struct SweepProtocol {
    pub classify: ClassifyConfig,
    pub offset: f64,
    pub seed: u64,
}

impl Default for SweepProtocol {
    fn default() -> Self {
        SweepProtocol {
            classify: ClassifyConfig::default(),
            offset: 1e-3,
            seed: 0,
        }
    }
}

/// Classify the attractor of the order-48 family at every grid point. Rows
/// run concurrently; the output order matches the grid, and each row is
/// reproducible from the protocol seed alone.
pub fn sweep_gl(grid: &[SweepPoint], protocol: &SweepProtocol) -> Vec<SweepRow> {
    grid.par_iter()
        .enumerate()
        .map(|(row, point)| SweepRow {
            point: *point,
            verdict: sweep_row(point, row as u64, protocol).map_err(|e| e.to_string()),
        })
        .collect()
}

fn sweep_row(
    point: &SweepPoint,
    row: u64,
    protocol: &SweepProtocol,
) -> Result<ClassificationVerdict> {
    let spec =
        VectorFieldSpec::gl23(GlParametrization::new(point.h1, point.h2)?.coeffs())?;
    let geometry = compute_connections(&spec)?;
    let x0 = offset_start(&geometry, protocol.offset, protocol.seed ^ row);
    classify_attractor(&spec, &x0, &geometry, &protocol.classify)
}

/// Distance profile of a classified periodic orbit, measured over exactly
/// one period re-integrated from the last section return.
#[derive(Clone, Copy, Debug)]
pub struct OrbitProfile {
    pub min_dist: f64,
    pub max_dist: f64,
    /// How far the state lands from its start after one period.
    pub closure_gap: f64,
}

/// Re-integrate one reported period from the last section return and
/// measure the orbit's distance band around the cycle. Unlike the
/// whole-run extrema of the verdict this is free of transient
/// contamination, so it is the right quantity for comparing orbits across
/// parameters.
pub fn periodic_orbit_profile(
    spec: &VectorFieldSpec,
    geometry: &CycleGeometry,
    verdict: &ClassificationVerdict,
    cfg: &IntegratorConfig,
) -> Result<OrbitProfile> {
    let period = verdict.period.ok_or_else(|| {
        Error::InvalidScenario("verdict carries no period to re-integrate".into())
    })?;
    let (_, start) = verdict.section_returns.last().ok_or_else(|| {
        Error::InvalidScenario("verdict carries no section return to start from".into())
    })?;
    let run = IntegratorConfig {
        max_time: period,
        escape_radius: None,
        dense: true,
        ..*cfg
    };
    let record = integrate(spec, start, &run)?;
    let mut min_dist = f64::INFINITY;
    let mut max_dist: f64 = 0.0;
    for y in &record.states {
        let d = geometry.distance(y);
        min_dist = min_dist.min(d);
        max_dist = max_dist.max(d);
    }
    Ok(OrbitProfile {
        min_dist,
        max_dist,
        closure_gap: (record.final_state() - start).norm(),
    })
}

/// Deterministic start near the midpoint of the first second-kind
/// connection, pushed off every invariant plane of the cycle.
pub fn offset_start(geometry: &CycleGeometry, offset: f64, seed: u64) -> Vector4<f64> {
    let reference = geometry
        .connections
        .iter()
        .find(|c| c.source_kind == WhichEquilibrium::Xi2)
        .unwrap_or(&geometry.connections[0]);
    let base = reference.point_at_fraction(0.5);
    let planes = geometry.planes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let u = Vector4::from_fn(|_, _| rng.gen_range(-1.0_f64..1.0));
        if u.norm_squared() > 1.0 || u.norm_squared() == 0.0 {
            continue;
        }
        let x0 = base + u * (offset / u.norm());
        if planes.iter().all(|p| p.distance(&x0) >= 0.05 * offset) {
            return x0;
        }
    }
}
