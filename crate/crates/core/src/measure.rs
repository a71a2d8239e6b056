//! Volumes, uniform and spherical sampling, quadrature, and the seeded
//! sharding that every Monte-Carlo kernel runs on.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::body::ConvexBody;
use crate::error::{bail, GeomError, Result};
use crate::par;

pub type SampleRng = ChaCha8Rng;

/// Acceptance-rate floor for rejection sampling.
pub const ACCEPTANCE_FLOOR: f64 = 1e-4;

/// A Monte-Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: u64,
}

impl Estimate {
    pub fn new(value: f64, std_err: f64, n_samples: u64) -> Self {
        Self {
            value,
            std_err,
            n_samples,
        }
    }

    /// A value known in closed form.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_err: 0.0,
            n_samples: 0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.std_err == 0.0
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            std_err: self.std_err * c.abs(),
            ..self
        }
    }

    /// `value^(1/p)` with the standard error carried by the delta method.
    pub fn root(self, p: f64) -> Self {
        if self.value <= 0.0 {
            return Self { value: 0.0, ..self };
        }
        let value = libm::pow(self.value, 1.0 / p);
        let std_err = self.std_err * value / (p * self.value);
        Self {
            value,
            std_err,
            ..self
        }
    }

    /// `value^e` by the delta method.
    pub fn powf(self, e: f64) -> Self {
        if self.value <= 0.0 {
            return Self { value: 0.0, ..self };
        }
        let value = libm::pow(self.value, e);
        Self {
            value,
            std_err: self.std_err * (e * value / self.value).abs(),
            ..self
        }
    }

    /// Relative standard error, zero for exact values.
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.std_err / self.value.abs()
        }
    }
}

/// Product of two independent estimates.
impl core::ops::Mul for Estimate {
    type Output = Estimate;

    fn mul(self, other: Estimate) -> Estimate {
        let value = self.value * other.value;
        let std_err = libm::sqrt(
            (self.std_err * other.value) * (self.std_err * other.value)
                + (other.std_err * self.value) * (other.std_err * self.value),
        );
        Self {
            value,
            std_err,
            n_samples: self.n_samples.max(other.n_samples),
        }
    }
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n < 2 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.n as f64)
        };
        Estimate::new(self.mean, se, self.n)
    }
}

pub fn merge_all<'a>(parts: impl IntoIterator<Item = &'a Moments>) -> Moments {
    let mut out = Moments::default();
    for p in parts {
        out.merge(p);
    }
    out
}

/// Seed plus shard count. Identical plans give bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngPlan {
    pub seed: u64,
    pub shards: usize,
}

impl Default for RngPlan {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            shards: 8,
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngPlan {
    pub fn new(seed: u64, shards: usize) -> Result<Self> {
        if shards == 0 {
            bail!(InvalidArgument, "shard count must be at least 1");
        }
        Ok(Self { seed, shards })
    }

    /// A plan for a derived computation: same shard count, independent seed.
    pub fn derive(&self, tag: u64) -> RngPlan {
        RngPlan {
            seed: splitmix64(self.seed ^ splitmix64(tag)),
            shards: self.shards,
        }
    }

    /// Independent substream `index` of the computation labelled `tag`.
    pub fn rng(&self, tag: u64, index: u64) -> SampleRng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(tag)));
        rng.set_stream(index);
        rng
    }

    /// Splits `total` draws over the shards and runs `f(rng, count)` on each,
    /// returning the per-shard results in shard order.
    pub fn sharded<A, F>(&self, tag: u64, total: usize, f: F) -> Vec<A>
    where
        A: Send,
        F: Fn(&mut SampleRng, usize) -> A + Sync + Send,
    {
        let shards = self.shards.max(1);
        let base = total / shards;
        let extra = total % shards;
        par::map_indexed(shards, |s| {
            let count = base + usize::from(s < extra);
            let mut rng = self.rng(tag, s as u64);
            f(&mut rng, count)
        })
    }
}

/// Seeds a generator from an arbitrary point, for oracles queried at
/// directions that are not known in advance.
pub(crate) fn point_seed(seed: u64, tag: u64, x: &[f64]) -> SampleRng {
    let mut h = splitmix64(seed ^ splitmix64(tag));
    for v in x {
        h = splitmix64(h ^ v.to_bits());
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    libm::pow(core::f64::consts::PI, half) / libm::tgamma(half + 1.0)
}

/// Surface measure of `S^{d-1}` (2 for `d = 1`).
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Uniform direction on `S^{d-1}`; for `d = 1` this is `+1` or `-1`.
pub fn sphere_sample<R: Rng + ?Sized>(d: usize, rng: &mut R, out: &mut [f64]) {
    debug_assert_eq!(out.len(), d);
    if d == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut s = 0.0;
        for o in out.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *o = g;
            s += g * g;
        }
        if s > 1e-300 {
            let inv = 1.0 / libm::sqrt(s);
            out.iter_mut().for_each(|o| *o *= inv);
            return;
        }
    }
}

/// Uniform point in a ball of radius `r` centred at the origin.
pub(crate) fn ball_sample(rng: &mut dyn RngCore, r: f64, out: &mut [f64]) {
    let d = out.len();
    sphere_sample(d, rng, out);
    let u: f64 = rng.random();
    let scale = r * libm::pow(u, 1.0 / d as f64);
    out.iter_mut().for_each(|o| *o *= scale);
}

/// Uniform sampler for a body: its closed-form sampler when it has one,
/// otherwise rejection from its bounding box.
pub struct UniformSampler<'a> {
    body: &'a dyn ConvexBody,
    lo: Vec<f64>,
    width: Vec<f64>,
    max_tries: usize,
}

impl<'a> UniformSampler<'a> {
    pub fn new(body: &'a dyn ConvexBody) -> Result<Self> {
        Self::with_floor(body, ACCEPTANCE_FLOOR)
    }

    pub fn with_floor(body: &'a dyn ConvexBody, floor: f64) -> Result<Self> {
        let (lo, hi) = body.bounding_box();
        let width: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| b - a).collect();
        if width.iter().any(|w| !(*w > 0.0)) {
            bail!(Degenerate, "bounding box has zero width");
        }
        if !body.has_exact_sampler() {
            if let Some(v) = body.exact_volume() {
                let box_vol: f64 = width.iter().product();
                let rate = v / box_vol;
                if rate < floor {
                    bail!(
                        Efficiency,
                        "rejection acceptance rate {rate:.2e} is below {floor:.0e}; supply a tighter bounding box"
                    );
                }
            }
        }
        let max_tries = libm::ceil(10.0 / floor) as usize;
        Ok(Self {
            body,
            lo,
            width,
            max_tries,
        })
    }

    pub fn sample(&self, rng: &mut SampleRng, out: &mut [f64]) -> Result<()> {
        if self.body.sample_exact(rng, out) {
            return Ok(());
        }
        for _ in 0..self.max_tries {
            for ((o, lo), w) in out.iter_mut().zip(&self.lo).zip(&self.width) {
                *o = lo + w * rng.random::<f64>();
            }
            if self.body.contains(out) {
                return Ok(());
            }
        }
        Err(GeomError::Efficiency(format!(
            "no accepted point in {} rejection tries; supply a tighter bounding box",
            self.max_tries
        )))
    }
}

/// Tag for the volume stream.
const TAG_VOLUME: u64 = 0x766f_6c75;

/// Volume: closed form when the body knows it, else rejection Monte-Carlo in
/// the bounding box.
pub fn volume(body: &dyn ConvexBody, plan: &RngPlan, samples: usize) -> Result<Estimate> {
    if let Some(v) = body.exact_volume() {
        return Ok(Estimate::exact(v));
    }
    let (lo, hi) = body.bounding_box();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if !(box_vol > 0.0) {
        bail!(Degenerate, "bounding box has zero volume");
    }
    let d = body.dim();
    let hits: u64 = plan
        .sharded(TAG_VOLUME, samples, |rng, count| {
            let mut x = vec![0.0; d];
            let mut hits = 0u64;
            for _ in 0..count {
                for ((xi, a), b) in x.iter_mut().zip(&lo).zip(&hi) {
                    *xi = a + (b - a) * rng.random::<f64>();
                }
                hits += u64::from(body.contains(&x));
            }
            hits
        })
        .into_iter()
        .sum();
    let n = samples.max(1) as f64;
    let frac = hits as f64 / n;
    if hits == 0 {
        bail!(
            Efficiency,
            "no rejection sample landed in the body; supply a tighter bounding box"
        );
    }
    let se = libm::sqrt(frac * (1.0 - frac) / n);
    Ok(Estimate::new(frac * box_vol, se * box_vol, samples as u64))
}

/// Quadrature rule on `S^{d-1}`: the exact two-point rule for `d = 1`,
/// uniform Monte-Carlo directions otherwise.
#[derive(Debug, Clone)]
pub struct SphereRule {
    d: usize,
    dirs: Vec<f64>,
    weight: f64,
    exact: bool,
}

impl SphereRule {
    pub fn new(d: usize, count: usize, plan: &RngPlan, tag: u64) -> Result<Self> {
        if d == 0 {
            bail!(InvalidArgument, "sphere dimension must be positive");
        }
        if d == 1 {
            return Ok(Self {
                d,
                dirs: vec![1.0, -1.0],
                weight: 1.0,
                exact: true,
            });
        }
        if count < 2 {
            bail!(InvalidArgument, "need at least two sphere directions");
        }
        let chunks = plan.sharded(tag, count, |rng, c| {
            let mut dirs = vec![0.0; c * d];
            for chunk in dirs.chunks_exact_mut(d) {
                sphere_sample(d, rng, chunk);
            }
            dirs
        });
        let dirs: Vec<f64> = chunks.into_iter().flatten().collect();
        Ok(Self {
            d,
            weight: sphere_area(d) / count as f64,
            dirs,
            exact: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.dirs.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    #[inline]
    pub fn dir(&self, j: usize) -> &[f64] {
        &self.dirs[j * self.d..(j + 1) * self.d]
    }

    pub fn dirs(&self) -> impl Iterator<Item = &[f64]> {
        self.dirs.chunks_exact(self.d)
    }

    /// `∫ f du` from per-direction values. For the exact rule the error comes
    /// from the per-direction standard errors `inner_se`; for the Monte-Carlo
    /// rule the spread of `values` already contains it.
    pub fn integrate(&self, values: &[f64], inner_se: Option<&[f64]>) -> Estimate {
        debug_assert_eq!(values.len(), self.len());
        if self.exact {
            let value = values.iter().sum::<f64>() * self.weight;
            let se = inner_se.map_or(0.0, |s| {
                libm::sqrt(s.iter().map(|e| e * e).sum::<f64>()) * self.weight
            });
            return Estimate::new(value, se, values.len() as u64);
        }
        let mut m = Moments::default();
        values.iter().for_each(|v| m.push(*v));
        let area = sphere_area(self.d);
        m.estimate().scale(area)
    }
}

/// Adaptive Simpson quadrature on `[a, b]` with the default tolerance
/// `1e-8 * (b - a) * max|f|` (max estimated from five nodes).
pub fn quad_1d<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    quad_1d_rel(f, a, b, 1e-8, 48)
}

/// [`quad_1d`] with a caller-chosen relative tolerance and depth cap.
pub fn quad_1d_rel<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if !(a <= b) {
        bail!(
            InvalidArgument,
            "quadrature bounds out of order: [{a}, {b}]"
        );
    }
    if a == b {
        return Ok(0.0);
    }
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeomError::Evaluation(format!("integrand is {v} at {x}")))
        }
    };
    let c = 0.5 * (a + b);
    let fa = eval(a)?;
    let fb = eval(b)?;
    let fc = eval(c)?;
    let fq1 = eval(0.5 * (a + c))?;
    let fq3 = eval(0.5 * (c + b))?;
    let scale = [fa, fb, fc, fq1, fq3]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = (rel_tol * (b - a) * scale).max(1e-300);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    let left = (c - a) / 6.0 * (fa + 4.0 * fq1 + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fq3 + fb);
    if libm::fabs(left + right - whole) <= 15.0 * tol {
        return Ok(left + right + (left + right - whole) / 15.0);
    }
    Ok(
        simpson_step(&mut eval, a, c, fa, fq1, fc, left, 0.5 * tol, max_depth)?
            + simpson_step(&mut eval, c, b, fc, fq3, fb, right, 0.5 * tol, max_depth)?,
    )
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<E: FnMut(f64) -> Result<f64>>(
    eval: &mut E,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(lm)?;
    let frm = eval(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || libm::fabs(diff) <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(
        simpson_step(eval, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + simpson_step(eval, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{Ball, Polytope};

    fn plan() -> RngPlan {
        RngPlan::new(7, 4).unwrap()
    }

    #[test]
    fn exact_volumes() {
        let cube = Polytope::cube(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(volume(&cube, &plan(), 10).unwrap(), Estimate::exact(1.0));
        let disk = Ball::unit(2);
        assert!((volume(&disk, &plan(), 10).unwrap().value - core::f64::consts::PI).abs() < 1e-12);
        let simplex = Polytope::standard_simplex(3).unwrap();
        assert!((volume(&simplex, &plan(), 10).unwrap().value - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        assert!((quad_1d(|_| 1.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((quad_1d(|t| t, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((quad_1d(|t| 1.0 - t, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((quad_1d(libm::sin, 0.0, core::f64::consts::PI).unwrap() - 2.0).abs() < 1e-8);
        assert!(matches!(
            quad_1d(|t| 1.0 / (t - 0.5), 0.0, 1.0),
            Err(GeomError::Evaluation(_))
        ));
        assert!(quad_1d(|t| t, 1.0, 0.0).is_err());
    }

    #[test]
    fn sphere_sample_one_dimensional() {
        let mut rng = plan().rng(1, 0);
        let mut out = [0.0];
        let mut seen = [false, false];
        for _ in 0..64 {
            sphere_sample(1, &mut rng, &mut out);
            assert!(out[0] == 1.0 || out[0] == -1.0);
            seen[usize::from(out[0] > 0.0)] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn sphere_sample_moments() {
        let mut rng = plan().rng(2, 0);
        let n = 40_000;
        let mut m3 = [Moments::default(), Moments::default(), Moments::default()];
        let mut out = [0.0; 3];
        for _ in 0..n {
            sphere_sample(3, &mut rng, &mut out);
            assert!((out.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
            for (m, v) in m3.iter_mut().zip(out) {
                m.push(v);
            }
        }
        for m in &m3 {
            let e = m.estimate();
            assert!(e.value.abs() <= 3.0 * e.std_err + 1e-12, "{e:?}");
        }
        let mut m = Moments::default();
        let mut out2 = [0.0; 2];
        for _ in 0..n {
            sphere_sample(2, &mut rng, &mut out2);
            m.push(out2[0] * out2[0]);
        }
        let e = m.estimate();
        assert!((e.value - 0.5).abs() <= 3.0 * e.std_err, "{e:?}");
    }

    fn sample_moment(body: &dyn ConvexBody, f: impl Fn(&[f64]) -> f64, n: usize) -> Estimate {
        let sampler = UniformSampler::new(body).unwrap();
        let mut rng = plan().rng(3, 0);
        let mut x = vec![0.0; body.dim()];
        let mut m = Moments::default();
        for _ in 0..n {
            sampler.sample(&mut rng, &mut x).unwrap();
            assert!(body.contains(&x));
            m.push(f(&x));
        }
        m.estimate()
    }

    #[test]
    fn uniform_sampler_moments() {
        let cube = Polytope::cube(&[0.0; 3], &[1.0; 3]).unwrap();
        for i in 0..3 {
            let e = sample_moment(&cube, |x| x[i], 20_000);
            assert!((e.value - 0.5).abs() <= 3.0 * e.std_err, "{e:?}");
        }
        let disk = Ball::unit(2);
        let e = sample_moment(&disk, |x| x[0] * x[0] + x[1] * x[1], 20_000);
        assert!((e.value - 0.5).abs() <= 3.0 * e.std_err, "{e:?}");
        let tri = Polytope::standard_simplex(2).unwrap();
        let e = sample_moment(&tri, |x| x[0], 20_000);
        assert!((e.value - 1.0 / 3.0).abs() <= 3.0 * e.std_err, "{e:?}");
    }

    #[test]
    fn rejection_volume_matches_closed_form() {
        // a general polygon has no closed-form sampler; its area is exact from facets
        let hexagon = Polytope::from_vertices(&[
            vec![1.0, 0.0],
            vec![0.5, 0.9],
            vec![-0.5, 0.9],
            vec![-1.0, 0.0],
            vec![-0.5, -0.9],
            vec![0.5, -0.9],
        ])
        .unwrap();
        let exact = hexagon.exact_volume().unwrap();
        let sym =
            crate::steiner::Symmetral::new(alloc::sync::Arc::new(hexagon), &[0.0, 1.0]).unwrap();
        let est = volume(&sym, &plan(), 200_000).unwrap();
        assert!(
            (est.value - exact).abs() <= 3.0 * est.std_err,
            "{est:?} vs {exact}"
        );
    }

    #[test]
    fn sharding_is_deterministic() {
        let p = RngPlan::new(11, 3).unwrap();
        let run = || {
            p.sharded(5, 1001, |rng, c| {
                (0..c).map(|_| rng.random::<f64>()).sum::<f64>()
            })
        };
        assert_eq!(run(), run());
        let counts = p.sharded(5, 1001, |_, c| c);
        assert_eq!(counts, vec![334, 334, 333]);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| libm::sin(i as f64 * 0.37)).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|x| all.push(*x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..37].iter().for_each(|x| a.push(*x));
        xs[37..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn ball_volume_constants() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - core::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(1) - 2.0).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * core::f64::consts::PI).abs() < 1e-12);
    }
}
