//! Steiner symmetrization.
//!
//! [`Symmetral`] is an oracle for `S_u K` built on the chords of its base.
//! Iterating it in the plane ([`symmetrize_to_ball`]) materializes each round
//! as a polygon from the chord graph, so the oracle never nests deeper than
//! one level.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::body::{scan_chord, ConvexBody, Polytope, QBody};
use crate::error::{bail, Result};
use crate::linalg::{dot, norm, normalized};
use crate::measure::{sphere_sample, unit_ball_volume, volume, Estimate, RngPlan};
use crate::table::{direction_grid, SupportTable};
use crate::zonoid::mz_table_direct;

const TAG_STEINER_DIR: u64 = 0x7374_6469;
const TAG_STEINER_VOL: u64 = 0x7374_766f;
const TAG_STEINER_Z: u64 = 0x7374_7a74;
const TAG_MIDPOINT: u64 = 0x6d69_6470;

/// The chord of `K` through `y'` along `u`: `K ∩ (y' + R u) = y' + [-lower, upper] u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordInfo {
    pub lower: f64,
    pub upper: f64,
    /// `(upper - lower) / 2`, the signed position of the chord's midpoint.
    pub midpoint: f64,
    /// `σ = upper + lower`.
    pub length: f64,
}

/// Chord of `K` along the unit vector `u` through `y'` (projected onto `u^⊥`).
/// `None` when the line misses `K`.
pub fn chord_bounds(k: &dyn ConvexBody, u: &[f64], y: &[f64]) -> Result<Option<ChordInfo>> {
    let d = k.dim();
    if u.len() != d || y.len() != d {
        bail!(InvalidArgument, "direction and point must lie in R^{d}");
    }
    let u = unit(u)?;
    let t = dot(y, &u);
    let yp: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a - t * b).collect();
    Ok(k.chord(&yp, &u).map(|(lo, hi)| ChordInfo {
        lower: -lo,
        upper: hi,
        midpoint: 0.5 * (hi + lo),
        length: hi - lo,
    }))
}

fn unit(u: &[f64]) -> Result<Vec<f64>> {
    if u.iter().any(|v| !v.is_finite()) {
        bail!(InvalidArgument, "direction must be finite");
    }
    match normalized(u) {
        Some(v) => Ok(v),
        None => bail!(InvalidArgument, "zero direction"),
    }
}

/// `S_u K = { y' + t u : y' ∈ K_u, |t| <= σ(y') / 2 }`. Support queries run a
/// golden-section search over the chord graph, which limits the oracle to
/// `n <= 2`.
#[derive(Debug, Clone)]
pub struct Symmetral {
    base: Arc<dyn ConvexBody>,
    u: Vec<f64>,
    center: Vec<f64>,
}

impl Symmetral {
    pub fn new(base: Arc<dyn ConvexBody>, u: &[f64]) -> Result<Self> {
        let d = base.dim();
        if d > 2 {
            bail!(
                UnsupportedBody,
                "the symmetral oracle supports n <= 2, got n = {d}"
            );
        }
        if u.len() != d {
            bail!(InvalidArgument, "direction must lie in R^{d}");
        }
        let u = unit(u)?;
        let c = base.interior_point();
        let t = dot(&c, &u);
        let center = c.iter().zip(&u).map(|(a, b)| a - t * b).collect();
        Ok(Self { base, u, center })
    }

    pub fn direction(&self) -> &[f64] {
        &self.u
    }

    pub fn base(&self) -> &Arc<dyn ConvexBody> {
        &self.base
    }

    /// `σ(y')` for `y'` already in `u^⊥`.
    fn sigma(&self, yp: &[f64]) -> f64 {
        self.base
            .chord(yp, &self.u)
            .map_or(0.0, |(lo, hi)| (hi - lo).max(0.0))
    }

    fn split(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let t = dot(x, &self.u);
        (x.iter().zip(&self.u).map(|(a, b)| a - t * b).collect(), t)
    }

    /// `e`, the unit vector spanning `u^⊥` in the plane.
    fn perp(&self) -> [f64; 2] {
        [-self.u[1], self.u[0]]
    }

    /// Range of `r` with `r e ∈ K_u`.
    fn shadow(&self) -> (f64, f64) {
        let e = self.perp();
        (-self.base.support(&[-e[0], -e[1]]), self.base.support(&e))
    }
}

impl ConvexBody for Symmetral {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn support(&self, w: &[f64]) -> f64 {
        if self.dim() == 1 {
            return 0.5 * self.sigma(&[0.0]) * w[0].abs();
        }
        let e = self.perp();
        let s = dot(w, &e);
        let c = dot(w, &self.u).abs();
        let (a, b) = self.shadow();
        let f = |r: f64| r * s + 0.5 * c * self.sigma(&[r * e[0], r * e[1]]);
        golden_max(f, a, b)
    }

    fn contains(&self, x: &[f64]) -> bool {
        let (yp, t) = self.split(x);
        match self.base.chord(&yp, &self.u) {
            Some((lo, hi)) => {
                let half = 0.5 * (hi - lo);
                t.abs() <= half + 1e-12 * self.base.outer_radius()
            }
            None => false,
        }
    }

    fn interior_point(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn inner_radius(&self) -> f64 {
        self.base.inner_radius()
    }

    fn outer_radius(&self) -> f64 {
        self.base.outer_radius()
    }

    fn has_exact_sampler(&self) -> bool {
        true
    }

    /// A uniform point of the base, moved along `u` by minus its chord's
    /// midpoint. The base is drawn exactly as a sampler of the base would
    /// draw it, so the two bodies can share random streams.
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> bool {
        if !self.base.sample_exact(rng, out) {
            let (lo, hi) = self.base.bounding_box();
            let mut hit = false;
            for _ in 0..BASE_TRIES {
                for ((o, a), b) in out.iter_mut().zip(&lo).zip(&hi) {
                    *o = a + (b - a) * rng.random::<f64>();
                }
                if self.base.contains(out) {
                    hit = true;
                    break;
                }
            }
            if !hit {
                return false;
            }
        }
        let (yp, t) = self.split(out);
        let Some((lo, hi)) = self.base.chord(&yp, &self.u) else {
            return false;
        };
        let t = t - 0.5 * (lo + hi);
        for ((o, y), u) in out.iter_mut().zip(&yp).zip(&self.u) {
            *o = y + t * u;
        }
        true
    }

    fn chord(&self, y: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        let dn = norm(dir);
        let along = dot(dir, &self.u);
        if dn > 0.0 && along.abs() >= (1.0 - 1e-12) * dn {
            let (yp, t) = self.split(y);
            let half = 0.5 * self.base.chord(&yp, &self.u).map(|(lo, hi)| hi - lo)?;
            // y + s dir has u-coordinate t + s along
            let (a, b) = ((-half - t) / along, (half - t) / along);
            return Some((a.min(b), a.max(b)));
        }
        scan_chord(self, y, dir)
    }
}

/// Rejection tries per transported sample before the sampler gives up.
const BASE_TRIES: usize = 100_000;

/// Maximum of a concave function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if !(b > a) {
        return f(a);
    }
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let tol = 1e-13 * (b - a).max(a.abs().max(b.abs()));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2).max(f(a)).max(f(b))
}

/// Chord-graph nodes used when a planar symmetral is turned into a polygon.
pub const DEFAULT_NODES: usize = 256;

/// The polygon through the chord endpoints of `S_u K` over the shadows of the
/// base's vertices (exact for a polygon with at most `nodes` vertices), or
/// else over `nodes + 1` Chebyshev-spaced points of the shadow `K_u`.
pub fn materialize(sym: &Symmetral, nodes: usize) -> Result<Polytope> {
    if sym.dim() != 2 {
        bail!(UnsupportedBody, "only planar symmetrals are materialized");
    }
    if nodes < 2 {
        bail!(InvalidArgument, "need at least two chord nodes");
    }
    let e = sym.perp();
    let u = &sym.u;
    let (a, b) = sym.shadow();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    // the chord length of a polygon kinks exactly over its vertices; past
    // `nodes` vertices the Chebyshev nodes alone keep the size bounded
    let rs: Vec<f64> = match sym.base.vertices() {
        Some(vs) if vs.len() <= nodes => vs
            .iter()
            .map(|v| v[0] * e[0] + v[1] * e[1])
            .chain([a, b])
            .collect(),
        _ => (0..=nodes)
            .map(|k| mid - half * libm::cos(core::f64::consts::PI * k as f64 / nodes as f64))
            .collect(),
    };
    let mut pts = Vec::with_capacity(2 * rs.len());
    for r in rs {
        let r = r.clamp(a, b);
        let s = 0.5 * sym.sigma(&[r * e[0], r * e[1]]);
        pts.push(vec![r * e[0] + s * u[0], r * e[1] + s * u[1]]);
        pts.push(vec![r * e[0] - s * u[0], r * e[1] - s * u[1]]);
    }
    Polytope::from_vertices(&pts)
}

/// Mean-zonoid settings for the per-round inclusion check.
#[derive(Debug, Clone)]
pub struct ZonoidProbe {
    pub q: QBody,
    pub p: f64,
    pub tuples: usize,
    pub grid: usize,
}

#[derive(Debug, Clone)]
pub struct SteinerConfig {
    pub rounds: usize,
    /// Directions used for the distance to the ball.
    pub grid: usize,
    pub volume_samples: usize,
    pub nodes: usize,
    pub probe: Option<ZonoidProbe>,
}

impl Default for SteinerConfig {
    fn default() -> Self {
        Self {
            rounds: 20,
            grid: 256,
            volume_samples: 200_000,
            nodes: DEFAULT_NODES,
            probe: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteinerRound {
    pub round: usize,
    pub direction: Vec<f64>,
    /// Monte-Carlo volume of the symmetral oracle.
    pub volume: Estimate,
    /// `sup_θ |h(θ) - r_B|` on the grid.
    pub distance: f64,
    pub best: f64,
    /// Graph excess of `Z(S_u K)` over `S_u Z(K)`, relative to the scale of `Z(K)`.
    pub graph_excess: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SteinerRun {
    pub target_volume: f64,
    pub ball_radius: f64,
    pub initial_distance: f64,
    pub rounds: Vec<SteinerRound>,
}

impl SteinerRun {
    /// Least-squares slope of distance against round index.
    pub fn slope(&self) -> f64 {
        let k = self.rounds.len() as f64;
        if k < 2.0 {
            return 0.0;
        }
        let mx = self.rounds.iter().map(|r| r.round as f64).sum::<f64>() / k;
        let my = self.rounds.iter().map(|r| r.distance).sum::<f64>() / k;
        let sxy: f64 = self
            .rounds
            .iter()
            .map(|r| (r.round as f64 - mx) * (r.distance - my))
            .sum();
        let sxx: f64 = self
            .rounds
            .iter()
            .map(|r| (r.round as f64 - mx) * (r.round as f64 - mx))
            .sum();
        sxy / sxx
    }

    pub fn final_best(&self) -> f64 {
        self.rounds.last().map_or(self.initial_distance, |r| r.best)
    }

    /// Best-so-far ends below the starting distance and the fitted trend is negative.
    pub fn trend_ok(&self) -> bool {
        self.final_best() < self.initial_distance && self.slope() < 0.0
    }

    /// Worst `|vol_j - vol K| / se_j` over the rounds.
    pub fn worst_volume_z(&self) -> f64 {
        self.rounds.iter().fold(0.0f64, |a, r| {
            let diff = (r.volume.value - self.target_volume).abs();
            a.max(if r.volume.std_err > 0.0 {
                diff / r.volume.std_err
            } else if diff > 1e-12 {
                f64::INFINITY
            } else {
                0.0
            })
        })
    }
}

/// Iterated Steiner symmetrization of a planar body along seeded random
/// directions, with per-round volume, distance to the ball of equal volume
/// and, with a probe, the mean-zonoid graph inclusion.
pub fn symmetrize_to_ball(
    k: Arc<dyn ConvexBody>,
    cfg: &SteinerConfig,
    plan: &RngPlan,
) -> Result<SteinerRun> {
    if k.dim() != 2 {
        bail!(UnsupportedBody, "the Steiner iteration runs in the plane");
    }
    let target = volume(
        k.as_ref(),
        &plan.derive(TAG_STEINER_VOL),
        cfg.volume_samples,
    )?
    .value;
    let r_b = libm::sqrt(target / unit_ball_volume(2));
    let grid = direction_grid(2, cfg.grid, plan)?;
    let dist =
        |b: &dyn ConvexBody| SupportTable::from_body(b, grid.clone()).map(|t| t.ball_distance(r_b));
    let initial = dist(k.as_ref())?;
    let mut current = k;
    let mut best = initial;
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut rng = plan.rng(TAG_STEINER_DIR, 0);
    for j in 0..cfg.rounds {
        let mut u = [0.0; 2];
        sphere_sample(2, &mut rng, &mut u);
        let sym = Symmetral::new(current.clone(), &u)?;
        let vol = volume(
            &sym,
            &plan.derive(TAG_STEINER_VOL ^ (j as u64 + 1)),
            cfg.volume_samples,
        )?;
        let next: Arc<dyn ConvexBody> = Arc::new(materialize(&sym, cfg.nodes)?);
        let distance = dist(next.as_ref())?;
        best = best.min(distance);
        let mut graph_excess = None;
        if let Some(pr) = &cfg.probe {
            // one stream for both tables: the symmetral's sampler transports the base's points
            let zk = probe_table(current.as_ref(), pr, plan, j + 1)?;
            let zs = probe_table(&sym, pr, plan, j + 1)?;
            graph_excess = Some(graph_excess_planar(&zk, &zs, &u)?);
        }
        rounds.push(SteinerRound {
            round: j + 1,
            direction: u.to_vec(),
            volume: vol,
            distance,
            best,
            graph_excess,
        });
        current = next;
    }
    Ok(SteinerRun {
        target_volume: target,
        ball_radius: r_b,
        initial_distance: initial,
        rounds,
    })
}

fn probe_table(
    k: &dyn ConvexBody,
    pr: &ZonoidProbe,
    plan: &RngPlan,
    round: usize,
) -> Result<SupportTable> {
    let grid = direction_grid(2, pr.grid, plan)?;
    mz_table_direct(
        k,
        &pr.q,
        pr.p,
        &grid,
        &plan.derive(TAG_STEINER_Z ^ round as u64),
        pr.tuples,
    )
}

/// Largest amount by which the chords of the inner table's polygon stick
/// out of `S_u` of the outer table's polygon along `u`, relative to the
/// outer table's scale. Negative or zero when the inclusion holds.
pub fn graph_excess_planar(outer: &SupportTable, inner: &SupportTable, u: &[f64]) -> Result<f64> {
    let p_out: Arc<dyn ConvexBody> = Arc::new(outer.outer_polygon()?);
    let p_in = inner.outer_polygon()?;
    let sym = Symmetral::new(p_out, u)?;
    let e = sym.perp();
    let uu = sym.u.clone();
    let (a, b) = (-p_in.support(&[-e[0], -e[1]]), p_in.support(&e));
    let scale = outer.scale().max(1e-300);
    let nodes = 401;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..nodes {
        // stay off the very ends of the shadow, where chords degenerate
        let r = a + (b - a) * (0.005 + 0.99 * k as f64 / (nodes - 1) as f64);
        let y = [r * e[0], r * e[1]];
        let Some((lo, hi)) = p_in.chord(&y, &uu) else {
            continue;
        };
        let half = 0.5 * sym.sigma(&y);
        worst = worst.max((hi - half).max(-lo - half) / scale);
    }
    if worst == f64::NEG_INFINITY {
        bail!(Degenerate, "the inner polygon has no chords along u");
    }
    Ok(worst)
}

/// `h_{Z(S_u K)}((y_1 + y_2)/2 + u·0, ±1)` against the average of
/// `h_{Z(K)}(y_1 + u)` and `h_{Z(K)}(y_2 - u)`: returns the worst
/// `(lhs - rhs) / scale` over `pairs` random `y_1, y_2 ∈ u^⊥` with coordinates
/// in `[-2, 2]`, with its joint standard error.
#[allow(clippy::too_many_arguments)]
pub fn midpoint_excess(
    k: &dyn ConvexBody,
    sym: &dyn ConvexBody,
    u: &[f64],
    q: &QBody,
    p: f64,
    pairs: usize,
    plan: &RngPlan,
    tuples: usize,
) -> Result<(f64, f64)> {
    if k.dim() != 2 || sym.dim() != 2 {
        bail!(UnsupportedBody, "the midpoint check is planar");
    }
    let u = unit(u)?;
    let e = [-u[1], u[0]];
    let mut rng = plan.rng(TAG_MIDPOINT, 0);
    let mut lhs_dirs = Vec::new();
    let mut rhs_dirs = Vec::new();
    for _ in 0..pairs {
        let s1 = rng.random_range(-2.0..2.0);
        let s2 = rng.random_range(-2.0..2.0);
        let sm = 0.5 * (s1 + s2);
        lhs_dirs.extend([sm * e[0] + u[0], sm * e[1] + u[1]]);
        rhs_dirs.extend([s1 * e[0] + u[0], s1 * e[1] + u[1]]);
        rhs_dirs.extend([s2 * e[0] - u[0], s2 * e[1] - u[1]]);
    }
    let lhs = mz_table_direct(sym, q, p, &lhs_dirs, &plan.derive(1), tuples)?;
    let rhs = mz_table_direct(k, q, p, &rhs_dirs, &plan.derive(2), tuples)?;
    let scale = rhs.scale().max(1e-300);
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for i in 0..pairs {
        let r = 0.5 * (rhs.value(2 * i) + rhs.value(2 * i + 1));
        let r_se = 0.5 * libm::hypot(rhs.std_err(2 * i), rhs.std_err(2 * i + 1));
        let gap = (lhs.value(i) - r) / scale;
        if gap > worst.0 {
            worst = (gap, libm::hypot(lhs.std_err(i), r_se) / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::Ball;

    fn triangle() -> Arc<dyn ConvexBody> {
        Arc::new(
            Polytope::from_vertices(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        )
    }

    #[test]
    fn chord_bounds_example() {
        let t = triangle();
        for x in [0.1, 0.4, 0.9] {
            let c = chord_bounds(t.as_ref(), &[0.0, 1.0], &[x, 0.0])
                .unwrap()
                .unwrap();
            assert!((c.length - (1.0 - x)).abs() < 1e-12);
            assert!((c.midpoint - 0.5 * (1.0 - x)).abs() < 1e-12);
            assert!(c.lower.abs() < 1e-12);
        }
        assert!(chord_bounds(t.as_ref(), &[0.0, 1.0], &[2.0, 0.0])
            .unwrap()
            .is_none());
        assert!(chord_bounds(t.as_ref(), &[0.0, 0.0], &[0.5, 0.0]).is_err());
    }

    #[test]
    fn transported_samples_land_in_the_symmetral() {
        let t = triangle();
        let s = Symmetral::new(t.clone(), &[0.0, 1.0]).unwrap();
        let plan = RngPlan::new(3, 1).unwrap();
        let (mut rng_a, mut rng_b) = (plan.rng(1, 0), plan.rng(1, 0));
        let base = crate::measure::UniformSampler::new(t.as_ref()).unwrap();
        let (mut x, mut y) = ([0.0; 2], [0.0; 2]);
        for _ in 0..200 {
            assert!(s.sample_exact(&mut rng_a, &mut x));
            base.sample(&mut rng_b, &mut y).unwrap();
            // same abscissa, chord midpoint (1 - x)/2 removed
            assert!((x[0] - y[0]).abs() < 1e-12);
            assert!((x[1] - (y[1] - 0.5 * (1.0 - y[0]))).abs() < 1e-9);
            assert!(s.contains(&x));
        }
    }

    #[test]
    fn symmetral_examples() {
        let s = Symmetral::new(triangle(), &[0.0, 1.0]).unwrap();
        for (x, t) in [(0.2, 0.39), (0.5, -0.24), (0.0, 0.49)] {
            assert!(s.contains(&[x, t]));
            assert!(!s.contains(&[x, 0.5 * (1.0 - x) + 0.02]));
        }
        // support of {(x, t) : |t| <= (1-x)/2, 0 <= x <= 1}
        assert!((s.support(&[1.0, 0.0]) - 1.0).abs() < 1e-9);
        assert!((s.support(&[0.0, 1.0]) - 0.5).abs() < 1e-9);
        assert!((s.support(&[-1.0, 0.0]) - 0.0).abs() < 1e-9);
        assert!((s.support(&[1.0, 1.0]) - 1.0).abs() < 1e-9);

        let sq: Arc<dyn ConvexBody> = Arc::new(Polytope::cube(&[0.0, 0.0], &[1.0, 1.0]).unwrap());
        let s = Symmetral::new(sq, &[1.0, 0.0]).unwrap();
        assert!((s.support(&[1.0, 0.0]) - 0.5).abs() < 1e-9);
        assert!((s.support(&[-1.0, 0.0]) - 0.5).abs() < 1e-9);
        assert!((s.support(&[0.0, 1.0]) - 1.0).abs() < 1e-9);
        assert!((s.support(&[0.0, -1.0])).abs() < 1e-9);
        assert!(s.contains(&[-0.49, 0.5]) && !s.contains(&[0.51, 0.5]));
    }

    #[test]
    fn symmetral_rejects_high_dimension() {
        let c: Arc<dyn ConvexBody> = Arc::new(Polytope::cube(&[0.0; 3], &[1.0; 3]).unwrap());
        assert!(matches!(
            Symmetral::new(c, &[0.0, 0.0, 1.0]),
            Err(crate::GeomError::UnsupportedBody(_))
        ));
    }

    #[test]
    fn one_dimensional_symmetral_centers() {
        let k: Arc<dyn ConvexBody> = Arc::new(Polytope::cube(&[2.0], &[5.0]).unwrap());
        let s = Symmetral::new(k, &[1.0]).unwrap();
        assert!((s.support(&[1.0]) - 1.5).abs() < 1e-12);
        assert!((s.support(&[-2.0]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn materialized_area_is_preserved() {
        let disk: Arc<dyn ConvexBody> = Arc::new(Ball::new(vec![0.4, -0.2], 1.0).unwrap());
        let s = Symmetral::new(disk, &[0.6, 0.8]).unwrap();
        let poly = materialize(&s, DEFAULT_NODES).unwrap();
        let pi = core::f64::consts::PI;
        assert!((poly.exact_volume().unwrap() - pi).abs() < 1e-4 * pi);
        let tri = triangle();
        let s = Symmetral::new(tri, &[0.3, -1.0]).unwrap();
        let poly = materialize(&s, 64).unwrap();
        assert!((poly.exact_volume().unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn square_run_approaches_the_ball() {
        let sq: Arc<dyn ConvexBody> = Arc::new(Polytope::cube(&[0.0, 0.0], &[1.0, 1.0]).unwrap());
        let cfg = SteinerConfig {
            rounds: 12,
            volume_samples: 50_000,
            ..Default::default()
        };
        let run = symmetrize_to_ball(sq, &cfg, &RngPlan::new(5, 4).unwrap()).unwrap();
        assert!(
            run.trend_ok(),
            "{:?}",
            run.rounds.iter().map(|r| r.distance).collect::<Vec<_>>()
        );
        assert!(run.worst_volume_z() < 4.0);
        assert!(run.rounds.windows(2).all(|w| w[1].best <= w[0].best));
    }

    #[test]
    fn graph_excess_of_an_exact_inclusion() {
        // Z of the centered square is already symmetric, so tables of the
        // body and of its symmetral coincide
        let sq = Polytope::cube(&[-0.5, -0.5], &[0.5, 0.5]).unwrap();
        let p = RngPlan::default();
        let t = SupportTable::from_body(&sq, direction_grid(2, 64, &p).unwrap()).unwrap();
        let ex = graph_excess_planar(&t, &t, &[0.0, 1.0]).unwrap();
        assert!(ex.abs() < 1e-9, "{ex}");
        let tri =
            Polytope::from_vertices(&[vec![-0.5, -0.5], vec![0.5, -0.5], vec![0.5, 0.5]]).unwrap();
        let tt = SupportTable::from_body(&tri, direction_grid(2, 64, &p).unwrap()).unwrap();
        // a triangle is not inside the symmetral of itself along e_1
        assert!(graph_excess_planar(&tt, &tt, &[1.0, 0.0]).unwrap() > 0.05);
    }
}
