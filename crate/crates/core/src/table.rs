//! Support functions tabulated on a direction grid, and the outer polytope
//! `{x : <x, θ_k> <= h_k}` they describe.

use alloc::vec;
use alloc::vec::Vec;

use crate::body::{ConvexBody, Polytope};
use crate::error::{bail, Result};
use crate::linalg::{dot, norm};
use crate::measure::{sphere_sample, Estimate, RngPlan};

const TAG_GRID: u64 = 0x6772_6964;
const TAG_TABLE_VOLUME: u64 = 0x7476_6f6c;

/// Grid size used when none is given: 64 directions for `d <= 2`, 256 up to
/// `d = 4`, 1024 above.
pub fn default_grid_size(d: usize) -> usize {
    match d {
        0..=2 => 64,
        3 | 4 => 256,
        _ => 1024,
    }
}

/// Unit directions in `R^d`, flattened. `d = 1` gives `{+1, -1}`; `d = 2`
/// gives `count` equally spaced angles starting at `e_1`; above that the
/// `2d` signed axes come first and seeded uniform directions fill the rest.
pub fn direction_grid(d: usize, count: usize, plan: &RngPlan) -> Result<Vec<f64>> {
    match d {
        0 => bail!(InvalidArgument, "dimension must be positive"),
        1 => Ok(vec![1.0, -1.0]),
        2 => {
            if count < 3 {
                bail!(InvalidArgument, "a planar grid needs at least 3 directions");
            }
            let step = core::f64::consts::TAU / count as f64;
            Ok((0..count)
                .flat_map(|k| [libm::cos(step * k as f64), libm::sin(step * k as f64)])
                .collect())
        }
        _ => {
            if count < 2 * d {
                bail!(
                    InvalidArgument,
                    "a grid in R^{d} needs at least {} directions",
                    2 * d
                );
            }
            let mut out = vec![0.0; count * d];
            for i in 0..d {
                out[2 * i * d + i] = 1.0;
                out[(2 * i + 1) * d + i] = -1.0;
            }
            let mut rng = plan.rng(TAG_GRID, d as u64);
            for chunk in out[2 * d * d..].chunks_exact_mut(d) {
                sphere_sample(d, &mut rng, chunk);
            }
            Ok(out)
        }
    }
}

/// `h(θ_k)` with standard errors on a grid of unit directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportTable {
    dim: usize,
    dirs: Vec<f64>,
    values: Vec<f64>,
    std_err: Vec<f64>,
}

impl SupportTable {
    pub fn new(dim: usize, dirs: Vec<f64>, values: Vec<f64>, std_err: Vec<f64>) -> Result<Self> {
        if dim == 0 || dirs.len() != dim * values.len() || std_err.len() != values.len() {
            bail!(InvalidArgument, "support table shapes do not match");
        }
        if values.iter().chain(&std_err).any(|v| !v.is_finite()) {
            bail!(Evaluation, "support table holds a non-finite value");
        }
        Ok(Self {
            dim,
            dirs,
            values,
            std_err,
        })
    }

    /// Tabulates an exact support function.
    pub fn from_body(body: &dyn ConvexBody, dirs: Vec<f64>) -> Result<Self> {
        let d = body.dim();
        let values: Vec<f64> = dirs.chunks_exact(d).map(|u| body.support(u)).collect();
        let se = vec![0.0; values.len()];
        Self::new(d, dirs, values, se)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dir(&self, k: usize) -> &[f64] {
        &self.dirs[k * self.dim..(k + 1) * self.dim]
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn std_err(&self, k: usize) -> f64 {
        self.std_err[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn std_errs(&self) -> &[f64] {
        &self.std_err
    }

    pub fn estimate(&self, k: usize) -> Estimate {
        Estimate::new(self.values[k], self.std_err[k], 0)
    }

    /// Largest `se_k / |h_k|` relative to the table's scale.
    pub fn max_rel_err(&self) -> f64 {
        let scale = self.scale();
        if scale == 0.0 {
            return 0.0;
        }
        self.std_err.iter().fold(0.0f64, |a, s| a.max(*s)) / scale
    }

    /// `max_k |h_k|`.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Worst violation of `h(θ_i + θ_j) <= h(θ_i) + h(θ_j)` among grid pairs
    /// whose sum points along another grid direction, relative to the scale.
    /// Only equally spaced planar grids have such pairs; other grids give `None`.
    pub fn sublinearity_excess(&self) -> Option<f64> {
        let g = self.len();
        if self.dim == 1 {
            return Some(((-self.values[0] - self.values[1]) / self.scale().max(1e-300)).max(0.0));
        }
        if self.dim != 2 || g < 3 || !self.is_uniform_planar() {
            return None;
        }
        let step = core::f64::consts::TAU / g as f64;
        let scale = self.scale().max(1e-300);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..g {
            for gap in (2..g).step_by(2) {
                if 2 * gap == g {
                    continue;
                }
                let j = (i + gap) % g;
                let mid = (i + gap / 2) % g;
                let c = 2.0 * libm::cos(0.5 * step * gap as f64);
                // past a half turn the bisector is the opposite grid direction
                let (k, len) = if c >= 0.0 {
                    (mid, c)
                } else if g.is_multiple_of(2) {
                    ((mid + g / 2) % g, -c)
                } else {
                    continue;
                };
                let excess = len * self.values[k] - self.values[i] - self.values[j];
                worst = worst.max(excess / scale);
            }
        }
        Some(worst.max(0.0))
    }

    fn is_uniform_planar(&self) -> bool {
        let g = self.len();
        let step = core::f64::consts::TAU / g as f64;
        (0..g).all(|k| {
            let u = self.dir(k);
            (u[0] - libm::cos(step * k as f64)).abs() < 1e-12
                && (u[1] - libm::sin(step * k as f64)).abs() < 1e-12
        })
    }

    /// The planar outer polygon `∩_k {x : <x, θ_k> <= h_k}`.
    pub fn outer_polygon(&self) -> Result<Polytope> {
        if self.dim != 2 {
            bail!(UnsupportedBody, "outer polygons are planar");
        }
        let g = self.len();
        let tol = 1e-10 * self.scale().max(1e-300);
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for a in 0..g {
            for b in a + 1..g {
                let (u, v) = (self.dir(a), self.dir(b));
                let det = u[0] * v[1] - u[1] * v[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let (ha, hb) = (self.values[a], self.values[b]);
                let x = [(ha * v[1] - hb * u[1]) / det, (u[0] * hb - v[0] * ha) / det];
                if (0..g).all(|k| dot(self.dir(k), &x) <= self.values[k] + tol) {
                    pts.push(x.to_vec());
                }
            }
        }
        if pts.len() < 3 {
            bail!(
                Degenerate,
                "the tabulated half-planes do not bound a polygon"
            );
        }
        Polytope::from_vertices(&pts)
    }

    /// Volume of the outer polytope. Exact for `d <= 2`; Monte-Carlo in the
    /// axis box for `d >= 3` (the grid must hold the signed axes). The error
    /// is `d · vol · max_rel_err`.
    pub fn outer_volume(&self, plan: &RngPlan, samples: usize) -> Result<Estimate> {
        let d = self.dim;
        let vol = match d {
            1 => {
                let w = self.values[0] + self.values[1];
                if !(w > 0.0) {
                    bail!(Degenerate, "empty tabulated interval");
                }
                Estimate::exact(w)
            }
            2 => Estimate::exact(self.outer_polygon()?.exact_volume().unwrap_or(0.0)),
            _ => self.mc_volume(plan, samples)?,
        };
        let se = libm::hypot(vol.std_err, d as f64 * vol.value * self.max_rel_err());
        Ok(Estimate::new(vol.value, se, vol.n_samples))
    }

    fn mc_volume(&self, plan: &RngPlan, samples: usize) -> Result<Estimate> {
        let d = self.dim;
        let mut lo = vec![f64::NAN; d];
        let mut hi = vec![f64::NAN; d];
        for k in 0..self.len() {
            let u = self.dir(k);
            for i in 0..d {
                if (u[i] - 1.0).abs() < 1e-12 {
                    hi[i] = self.values[k];
                } else if (u[i] + 1.0).abs() < 1e-12 {
                    lo[i] = -self.values[k];
                }
            }
        }
        if lo.iter().chain(&hi).any(|v| v.is_nan()) || lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
            bail!(
                InvalidArgument,
                "Monte-Carlo table volume needs all signed axes in the grid"
            );
        }
        let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let hits: u64 = plan
            .sharded(TAG_TABLE_VOLUME, samples, |rng, count| {
                use rand::Rng;
                let mut x = vec![0.0; d];
                let mut hits = 0u64;
                for _ in 0..count {
                    for ((xi, a), b) in x.iter_mut().zip(&lo).zip(&hi) {
                        *xi = a + (b - a) * rng.random::<f64>();
                    }
                    hits +=
                        u64::from((0..self.len()).all(|k| dot(self.dir(k), &x) <= self.values[k]));
                }
                hits
            })
            .into_iter()
            .sum();
        let n = samples.max(1) as f64;
        let f = hits as f64 / n;
        Ok(Estimate::new(
            f * box_vol,
            libm::sqrt(f * (1.0 - f) / n) * box_vol,
            samples as u64,
        ))
    }

    /// `max_k |h_k - g_k|` against another table on the same grid.
    pub fn sup_distance(&self, other: &SupportTable) -> Result<f64> {
        if self.dim != other.dim || self.len() != other.len() {
            bail!(InvalidArgument, "tables are on different grids");
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs())))
    }

    /// Largest `|h(θ) - r|` on the grid, the distance to the centered ball of radius `r`.
    pub fn ball_distance(&self, r: f64) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max((v - r).abs()))
    }

    /// Whether every grid direction is a unit vector.
    pub fn directions_normalized(&self) -> bool {
        self.dirs
            .chunks_exact(self.dim)
            .all(|u| (norm(u) - 1.0).abs() < 1e-9)
    }
}
