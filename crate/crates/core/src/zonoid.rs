//! Higher-order `(L^p, Q)` mean zonoids `Z^m_{p,Q} K`.
//!
//! Three routes compute the same support function:
//!
//! * [`Route::Direct`] averages `h_Q(θ^t.(z_0 - z_i))^p` over uniform tuples
//!   `(z_0, ..., z_m)` from `K`;
//! * [`Route::Spherical`] integrates `h_Q(θ^t.u)^p` against the representing
//!   measure `ν`, whose density is `ρ_{R^m_{nm+p} K}^{nm+p} / ((nm + p) vol(K)^m)`;
//! * [`Route::Factored`] rescales the `(L^p, Q)` centroid body of
//!   `R^m_{nm+p} K`, tabulated on its own direction stream.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::body::{ConvexBody, QBody};
use crate::error::{bail, Result};
use crate::higher::{body_volume, PowerTable, RadialMeanBody, StarOracle};
use crate::linalg::{dot, Dims};
use crate::measure::{merge_all, Estimate, Moments, RngPlan, SphereRule, UniformSampler};
use crate::table::SupportTable;

const TAG_DIRECT: u64 = 0x6469_7263;
const TAG_SPHERICAL: u64 = 0x7370_6872;
const TAG_FACTORED: u64 = 0x6661_6374;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Direct,
    Spherical,
    Factored,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Direct, Route::Spherical, Route::Factored];

    pub fn name(self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Spherical => "spherical",
            Route::Factored => "factored",
        }
    }
}

/// Sample budgets for the three routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Tuples `(z_0, ..., z_m)` for the direct route.
    pub tuples: usize,
    /// Sphere directions for the radial-mean routes.
    pub directions: usize,
    /// Chord samples per direction. On `S^0` the whole
    /// `directions * chords` budget is split over the two directions.
    pub chords: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            tuples: 200_000,
            directions: 400_000,
            chords: 8,
        }
    }
}

impl Budget {
    /// The same budget with every count multiplied by `f` (at least 1).
    pub fn scaled(self, f: f64) -> Self {
        let s = |v: usize| ((v as f64 * f) as usize).max(1);
        Self {
            tuples: s(self.tuples),
            directions: s(self.directions).max(2),
            chords: self.chords,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        bail!(
            InvalidArgument,
            "p = {p} must be a finite number at least 1"
        );
    }
    Ok(())
}

fn check_thetas(n: usize, thetas: &[f64]) -> Result<usize> {
    if thetas.is_empty() || !thetas.len().is_multiple_of(n) {
        bail!(
            InvalidArgument,
            "directions must be a non-empty list of points of R^{n}"
        );
    }
    if thetas.iter().any(|v| !v.is_finite()) {
        bail!(InvalidArgument, "directions must be finite");
    }
    Ok(thetas.len() / n)
}

/// Direct-route support values at every `θ` in `thetas` (flattened, any
/// length), all from one shared set of tuples.
pub fn mz_table_direct(
    k: &dyn ConvexBody,
    q: &QBody,
    p: f64,
    thetas: &[f64],
    plan: &RngPlan,
    tuples: usize,
) -> Result<SupportTable> {
    check_p(p)?;
    let n = k.dim();
    let m = q.m();
    Dims::new(n, m)?;
    let g = check_thetas(n, thetas)?;
    if tuples == 0 {
        bail!(InvalidArgument, "need at least one tuple");
    }
    let sampler = UniformSampler::new(k)?;
    let parts = plan.sharded(TAG_DIRECT, tuples, |rng, count| -> Result<Vec<Moments>> {
        let mut z0 = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut diff = vec![0.0; n * m];
        let mut row = vec![0.0; m];
        let mut mo = vec![Moments::default(); g];
        for _ in 0..count {
            sampler.sample(rng, &mut z0)?;
            for col in diff.chunks_exact_mut(n) {
                sampler.sample(rng, &mut z)?;
                col.iter_mut()
                    .zip(z0.iter().zip(&z))
                    .for_each(|(c, (a, b))| *c = a - b);
            }
            for (theta, acc) in thetas.chunks_exact(n).zip(mo.iter_mut()) {
                for (r, col) in row.iter_mut().zip(diff.chunks_exact(n)) {
                    *r = dot(theta, col);
                }
                acc.push(libm::pow(q.support(&row), p));
            }
        }
        Ok(mo)
    });
    let parts: Vec<Vec<Moments>> = parts.into_iter().collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(g);
    let mut se = Vec::with_capacity(g);
    for j in 0..g {
        let est = merge_all(parts.iter().map(|v| &v[j])).estimate().root(p);
        values.push(est.value);
        se.push(est.std_err);
    }
    SupportTable::new(n, thetas.to_vec(), values, se)
}

/// `h_{Z^m_{p,Q} K}(θ)` by the direct route.
pub fn mz_support_direct(
    k: &dyn ConvexBody,
    q: &QBody,
    p: f64,
    theta: &[f64],
    plan: &RngPlan,
    tuples: usize,
) -> Result<Estimate> {
    let t = mz_table_direct(k, q, p, theta, plan, tuples)?;
    Ok(Estimate::new(t.value(0), t.std_err(0), tuples as u64))
}

/// `x / y^m` with independent relative errors.
fn over_volume_power(x: Estimate, vol: Estimate, m: usize) -> Estimate {
    let denom = libm::pow(vol.value, m as f64);
    let value = x.value / denom;
    let rel = libm::hypot(x.rel_err(), m as f64 * vol.rel_err());
    Estimate::new(value, (rel * value).abs(), x.n_samples)
}

/// The representing measure `ν` of the mean zonoid on `S^{nm-1}`, held as a
/// tabulated `R^m_{nm+p} K` together with `vol(K)`.
#[derive(Debug, Clone)]
pub struct RepresentationMeasure {
    n: usize,
    m: usize,
    p: f64,
    rmb: StarOracle,
    vol_k: Estimate,
    // ρ^{nm+p} and ρ^{nm} over the table, shared by every θ
    top: PowerTable,
    base: PowerTable,
    vol_r: Estimate,
}

impl RepresentationMeasure {
    pub fn build(
        k: Arc<dyn ConvexBody>,
        m: usize,
        p: f64,
        plan: &RngPlan,
        budget: &Budget,
    ) -> Result<Self> {
        Self::build_tagged(k, m, p, plan, budget, TAG_SPHERICAL)
    }

    fn build_tagged(
        k: Arc<dyn ConvexBody>,
        m: usize,
        p: f64,
        plan: &RngPlan,
        budget: &Budget,
        tag: u64,
    ) -> Result<Self> {
        check_p(p)?;
        let n = k.dim();
        let dims = Dims::new(n, m)?;
        let d = dims.nm();
        let sub = plan.derive(tag);
        let rule = SphereRule::new(d, budget.directions, &sub, 0)?;
        let per_dir = if rule.is_exact() {
            (budget.directions * budget.chords / 2).max(1)
        } else {
            budget.chords
        };
        let vol_k = body_volume(k.as_ref(), plan)?;
        let body = RadialMeanBody::new(k, m, d as f64 + p, &sub, per_dir)?;
        let rmb = StarOracle::tabulate(&body, rule)?;
        let top = rmb.power_table(d as f64 + p);
        let base = rmb.power_table(d as f64);
        let vol_r = rmb.volume();
        Ok(Self {
            n,
            m,
            p,
            rmb,
            vol_k,
            top,
            base,
            vol_r,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The tabulated `R^m_{nm+p} K`.
    pub fn radial_mean_body(&self) -> &StarOracle {
        &self.rmb
    }

    pub fn body_volume(&self) -> Estimate {
        self.vol_k
    }

    /// Density of `ν` with respect to spherical Lebesgue measure at grid direction `j`.
    pub fn density(&self, j: usize) -> f64 {
        let e = (self.n * self.m) as f64 + self.p;
        libm::pow(self.rmb.rho(j), e) / (e * libm::pow(self.vol_k.value, self.m as f64))
    }

    /// `ν(S^{nm-1})`.
    pub fn total_mass(&self) -> Estimate {
        let ones = self.rmb.moment_with(&vec![1.0; self.rmb.len()], &self.top);
        over_volume_power(ones, self.vol_k, self.m)
    }

    /// `(∫ h_Q(θ^t.u)^p dν(u))^{1/p}`.
    pub fn support(&self, q: &QBody, theta: &[f64]) -> Result<Estimate> {
        self.check_q(q, theta)?;
        let weights = self.rmb.q_weights(q, self.p, theta)?;
        let moment = self.rmb.moment_with(&weights, &self.top);
        Ok(over_volume_power(moment, self.vol_k, self.m).root(self.p))
    }

    /// `(vol(R^m_{nm+p} K) / vol(K)^m)^{1/p} · h_{Γ_{Q,p} R^m_{nm+p} K}(θ)`.
    pub fn factored_support(&self, q: &QBody, theta: &[f64]) -> Result<Estimate> {
        self.check_q(q, theta)?;
        let weights = self.rmb.q_weights(q, self.p, theta)?;
        let gamma = self
            .rmb
            .centroid_support_weights(&weights, self.p, &self.top, &self.base);
        let scale = libm::pow(
            self.vol_r.value / libm::pow(self.vol_k.value, self.m as f64),
            1.0 / self.p,
        );
        let value = scale * gamma.value;
        // the volume cancels against the centroid normalization, so the error
        // is that of the underlying moment
        let moment = self.rmb.moment_with(&weights, &self.top);
        let rel = libm::hypot(moment.rel_err(), self.m as f64 * self.vol_k.rel_err()) / self.p;
        Ok(Estimate::new(value, (rel * value).abs(), moment.n_samples))
    }

    fn check_q(&self, q: &QBody, theta: &[f64]) -> Result<()> {
        if q.m() != self.m {
            bail!(
                InvalidArgument,
                "Q lives in M[1, {}], the measure in M[{}, {}]",
                q.m(),
                self.n,
                self.m
            );
        }
        if theta.len() != self.n {
            bail!(InvalidArgument, "θ must have length {}", self.n);
        }
        Ok(())
    }
}

/// Support values on `thetas` by the chosen route.
pub fn mz_table(
    k: Arc<dyn ConvexBody>,
    q: &QBody,
    p: f64,
    route: Route,
    thetas: &[f64],
    plan: &RngPlan,
    budget: &Budget,
) -> Result<SupportTable> {
    let n = k.dim();
    let g = check_thetas(n, thetas)?;
    if route == Route::Direct {
        return mz_table_direct(k.as_ref(), q, p, thetas, plan, budget.tuples);
    }
    let tag = if route == Route::Spherical {
        TAG_SPHERICAL
    } else {
        TAG_FACTORED
    };
    let nu = RepresentationMeasure::build_tagged(k, q.m(), p, plan, budget, tag)?;
    let mut values = Vec::with_capacity(g);
    let mut se = Vec::with_capacity(g);
    for theta in thetas.chunks_exact(n) {
        let est = if route == Route::Spherical {
            nu.support(q, theta)?
        } else {
            nu.factored_support(q, theta)?
        };
        values.push(est.value);
        se.push(est.std_err);
    }
    SupportTable::new(n, thetas.to_vec(), values, se)
}

/// A mean zonoid tabulated on a grid.
#[derive(Debug, Clone)]
pub struct MeanZonoid {
    pub route: Route,
    pub p: f64,
    pub m: usize,
    pub table: SupportTable,
}

impl MeanZonoid {
    pub fn volume(&self, plan: &RngPlan, samples: usize) -> Result<Estimate> {
        self.table.outer_volume(plan, samples)
    }
}

pub fn mz_body(
    k: Arc<dyn ConvexBody>,
    q: &QBody,
    p: f64,
    route: Route,
    thetas: &[f64],
    plan: &RngPlan,
    budget: &Budget,
) -> Result<MeanZonoid> {
    let table = mz_table(k, q, p, route, thetas, plan, budget)?;
    Ok(MeanZonoid {
        route,
        p,
        m: q.m(),
        table,
    })
}

/// Direct-route values against `(∫ h_Q^p dν)^{1/p}` on a grid.
#[derive(Debug, Clone)]
pub struct RepresentationCheck {
    pub direct: SupportTable,
    pub represented: SupportTable,
    /// `max_k |direct_k - represented_k| / max_k direct_k`.
    pub max_residual: f64,
    /// `max_k |direct_k - represented_k| / sqrt(se_1^2 + se_2^2)`.
    pub max_z: f64,
}

pub fn zonoid_representation_check(
    k: Arc<dyn ConvexBody>,
    q: &QBody,
    p: f64,
    thetas: &[f64],
    plan: &RngPlan,
    budget: &Budget,
) -> Result<RepresentationCheck> {
    let direct = mz_table_direct(k.as_ref(), q, p, thetas, plan, budget.tuples)?;
    let represented = mz_table(k, q, p, Route::Spherical, thetas, plan, budget)?;
    let scale = direct.scale().max(1e-300);
    let mut max_residual = 0.0f64;
    let mut max_z = 0.0f64;
    for j in 0..direct.len() {
        let diff = (direct.value(j) - represented.value(j)).abs();
        max_residual = max_residual.max(diff / scale);
        let se = libm::hypot(direct.std_err(j), represented.std_err(j));
        if se > 0.0 {
            max_z = max_z.max(diff / se);
        } else if diff > 0.0 {
            max_z = f64::INFINITY;
        }
    }
    Ok(RepresentationCheck {
        direct,
        represented,
        max_residual,
        max_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{Ball, Polytope};

    fn plan() -> RngPlan {
        RngPlan::new(3, 4).unwrap()
    }

    fn interval() -> Arc<dyn ConvexBody> {
        Arc::new(Polytope::cube(&[0.0], &[1.0]).unwrap())
    }

    #[test]
    fn direct_examples() {
        let k = interval();
        let q = QBody::segment();
        let z1 = mz_support_direct(k.as_ref(), &q, 1.0, &[1.0], &plan(), 400_000).unwrap();
        assert!((z1.value - 1.0 / 3.0).abs() <= 3.0 * z1.std_err, "{z1:?}");
        let z2 = mz_support_direct(k.as_ref(), &q, 2.0, &[1.0], &plan(), 400_000).unwrap();
        assert!(
            (z2.value - libm::pow(6.0, -0.5)).abs() <= 3.0 * z2.std_err,
            "{z2:?}"
        );
        let cube = QBody::cube(2).unwrap();
        let zm = mz_support_direct(k.as_ref(), &cube, 1.0, &[1.0], &plan(), 400_000).unwrap();
        assert!((zm.value - 2.0 / 3.0).abs() <= 3.0 * zm.std_err, "{zm:?}");
    }

    #[test]
    fn spherical_and_factored_on_the_line() {
        let k = interval();
        let q = QBody::segment();
        let budget = Budget {
            tuples: 1000,
            directions: 20_000,
            chords: 10,
        };
        for route in [Route::Spherical, Route::Factored] {
            let t = mz_table(k.clone(), &q, 1.0, route, &[1.0, -1.0], &plan(), &budget).unwrap();
            for j in 0..2 {
                assert!(
                    (t.value(j) - 1.0 / 3.0).abs() <= 3.0 * t.std_err(j),
                    "{route:?}: {t:?}"
                );
            }
        }
        // the factored constant (2/√3)(√3/6)
        let nu = RepresentationMeasure::build(k, 1, 1.0, &plan(), &budget).unwrap();
        let vol_r = nu.radial_mean_body().volume();
        assert!(
            (vol_r.value - 2.0 / libm::sqrt(3.0)).abs() <= 3.0 * vol_r.std_err,
            "{vol_r:?}"
        );
        let gamma = nu
            .radial_mean_body()
            .centroid_support(&q, 1.0, &[1.0])
            .unwrap();
        assert!(
            (gamma.value - libm::sqrt(3.0) / 6.0).abs() <= 3.0 * gamma.std_err + 1e-3,
            "{gamma:?}"
        );
    }

    #[test]
    fn routes_agree_on_a_triangle() {
        let k: Arc<dyn ConvexBody> = Arc::new(
            Polytope::simplex(&[vec![-0.5, -0.3], vec![0.9, -0.1], vec![0.0, 0.8]]).unwrap(),
        );
        let q = QBody::cube(2).unwrap();
        let thetas = [1.0, 0.0, 0.0, 1.0, -0.6, 0.8];
        let budget = Budget {
            tuples: 200_000,
            directions: 40_000,
            chords: 8,
        };
        let tables: Vec<SupportTable> = Route::ALL
            .iter()
            .map(|r| mz_table(k.clone(), &q, 1.0, *r, &thetas, &plan(), &budget).unwrap())
            .collect();
        for j in 0..3 {
            for a in 0..3 {
                for b in a + 1..3 {
                    let (x, y) = (&tables[a], &tables[b]);
                    let band =
                        (3.0 * libm::hypot(x.std_err(j), y.std_err(j))).max(0.015 * x.value(j));
                    assert!(
                        (x.value(j) - y.value(j)).abs() <= band,
                        "{j} {a} {b}: {} {}",
                        x.value(j),
                        y.value(j)
                    );
                }
            }
        }
    }

    #[test]
    fn representation_on_disk() {
        let k: Arc<dyn ConvexBody> = Arc::new(Ball::unit(2));
        let q = QBody::segment();
        let thetas = crate::table::direction_grid(2, 8, &plan()).unwrap();
        let budget = Budget {
            tuples: 100_000,
            directions: 20_000,
            chords: 8,
        };
        let rep = zonoid_representation_check(k, &q, 2.0, &thetas, &plan(), &budget).unwrap();
        assert!(rep.max_residual < 0.02, "{}", rep.max_residual);
    }

    #[test]
    fn invalid_arguments() {
        let k = interval();
        let q = QBody::segment();
        assert!(mz_support_direct(k.as_ref(), &q, 0.5, &[1.0], &plan(), 10).is_err());
        assert!(mz_support_direct(k.as_ref(), &q, 1.0, &[], &plan(), 10).is_err());
        assert!(mz_support_direct(k.as_ref(), &q, 1.0, &[1.0], &plan(), 0).is_err());
    }
}
