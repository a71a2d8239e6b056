use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::RngCore;

use super::{ConvexBody, Facet};
use crate::linalg::{dot, norm, Mat};

/// `A.K + t` for a body without a closed-form image.
#[derive(Debug, Clone)]
pub struct AffineImage {
    inner: Arc<dyn ConvexBody>,
    a: Mat,
    a_inv: Mat,
    det: f64,
    t: Vec<f64>,
    facets: Option<Vec<Facet>>,
    vertices: Option<Vec<Vec<f64>>>,
}

impl AffineImage {
    /// `a_inv` and `det` must belong to `a`; use [`super::affine_image`] for
    /// the checked constructor.
    pub fn new(inner: Arc<dyn ConvexBody>, a: Mat, a_inv: Mat, det: f64, t: Vec<f64>) -> Self {
        let map =
            |x: &[f64]| -> Vec<f64> { a.mul_vec(x).iter().zip(&t).map(|(v, s)| v + s).collect() };
        let vertices = inner
            .vertices()
            .map(|vs| vs.iter().map(|v| map(v)).collect());
        let facets = inner.facets().map(|fs| {
            fs.iter()
                .map(|f| {
                    let g = a_inv.tr_mul_vec(&f.normal);
                    let gn = norm(&g);
                    Facet {
                        normal: g.iter().map(|v| v / gn).collect(),
                        offset: (f.offset + dot(&g, &t)) / gn,
                        area: f.area * det.abs() * gn,
                    }
                })
                .collect()
        });
        Self {
            inner,
            a,
            a_inv,
            det: det.abs(),
            t,
            facets,
            vertices,
        }
    }

    fn pull_back(&self, x: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(&self.t).map(|(v, s)| v - s).collect();
        self.a_inv.mul_vec(&shifted)
    }

    fn frob(m: &Mat) -> f64 {
        libm::sqrt(m.as_slice().iter().map(|v| v * v).sum::<f64>())
    }
}

impl ConvexBody for AffineImage {
    fn dim(&self) -> usize {
        self.t.len()
    }

    fn support(&self, u: &[f64]) -> f64 {
        self.inner.support(&self.a.tr_mul_vec(u)) + dot(&self.t, u)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.inner.contains(&self.pull_back(x))
    }

    fn interior_point(&self) -> Vec<f64> {
        let c = self.a.mul_vec(&self.inner.interior_point());
        c.iter().zip(&self.t).map(|(v, s)| v + s).collect()
    }

    fn inner_radius(&self) -> f64 {
        self.inner.inner_radius() / Self::frob(&self.a_inv)
    }

    fn outer_radius(&self) -> f64 {
        self.inner.outer_radius() * Self::frob(&self.a) + norm(&self.t)
    }

    fn ray_exit(&self, x: &[f64], dir: &[f64]) -> f64 {
        self.inner
            .ray_exit(&self.pull_back(x), &self.a_inv.mul_vec(dir))
    }

    fn chord(&self, y: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        self.inner
            .chord(&self.pull_back(y), &self.a_inv.mul_vec(dir))
    }

    fn exact_volume(&self) -> Option<f64> {
        self.inner.exact_volume().map(|v| v * self.det)
    }

    fn has_exact_sampler(&self) -> bool {
        self.inner.has_exact_sampler()
    }

    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> bool {
        let mut z = [0.0f64; 16];
        let d = self.dim();
        if d > z.len() || !self.inner.sample_exact(rng, &mut z[..d]) {
            return false;
        }
        self.a.mul_vec_into(&z[..d], out);
        out.iter_mut().zip(&self.t).for_each(|(o, s)| *o += s);
        true
    }

    fn facets(&self) -> Option<&[Facet]> {
        self.facets.as_deref()
    }

    fn vertices(&self) -> Option<&[Vec<f64>]> {
        self.vertices.as_deref()
    }

    fn difference_reach(&self, cols: &[f64]) -> Option<f64> {
        let d = self.dim();
        let mapped: Vec<f64> = cols
            .chunks_exact(d)
            .flat_map(|c| self.a_inv.mul_vec(c))
            .collect();
        self.inner.difference_reach(&mapped)
    }
}
