//! Convex bodies as immutable oracles.
//!
//! A [`ConvexBody`] answers support, membership, ray-exit and chord queries.
//! The concrete bodies answer them exactly; the trait's default methods fall
//! back to bisection on membership, which is what composed bodies (Steiner
//! symmetrals, for instance) rely on.

mod affine;
mod ellipsoid;
mod polytope;
mod qbody;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::RngCore;

pub use affine::AffineImage;
pub use ellipsoid::{Ball, Ellipsoid};
pub use polytope::{random_gl, random_polygon, Facet, Polytope};
pub use qbody::{QBody, QKind};

use crate::error::{bail, Result};
use crate::linalg::{dot, norm, Mat, DET_TOL};

/// Relative bisection tolerance: `tol_radial = RADIAL_TOL * R_out`.
pub const RADIAL_TOL: f64 = 1e-9;

/// Number of probes used to find a point of a line inside a body.
const CHORD_SCAN: usize = 257;

pub trait ConvexBody: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `h(u) = sup_{x in K} <x, u>` for any (not necessarily unit) `u`.
    fn support(&self, u: &[f64]) -> f64;

    fn contains(&self, x: &[f64]) -> bool;

    /// A point at distance at least [`inner_radius`](Self::inner_radius) from the boundary.
    fn interior_point(&self) -> Vec<f64>;

    fn inner_radius(&self) -> f64;

    /// Radius of a ball about the origin containing the body.
    fn outer_radius(&self) -> f64;

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        let mut e = vec![0.0; d];
        for i in 0..d {
            e[i] = 1.0;
            hi[i] = self.support(&e);
            e[i] = -1.0;
            lo[i] = -self.support(&e);
            e[i] = 0.0;
        }
        (lo, hi)
    }

    /// `sup { s >= 0 : x + s * dir in K }` for `x` in the body (0 otherwise).
    fn ray_exit(&self, x: &[f64], dir: &[f64]) -> f64 {
        bisect_ray(self, x, dir)
    }

    /// The parameter interval `[lo, hi]` of `{ t : y + t * dir in K }`, if non-empty.
    fn chord(&self, y: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        scan_chord(self, y, dir)
    }

    fn exact_volume(&self) -> Option<f64> {
        None
    }

    fn has_exact_sampler(&self) -> bool {
        false
    }

    /// Draws a uniform point with a closed-form sampler; returns `false` when
    /// the body has none.
    fn sample_exact(&self, _rng: &mut dyn RngCore, _out: &mut [f64]) -> bool {
        false
    }

    fn facets(&self) -> Option<&[Facet]> {
        None
    }

    fn vertices(&self) -> Option<&[Vec<f64>]> {
        None
    }

    /// Radial function of the higher-order difference body at the column-major
    /// matrix `cols` (length `dim * m`), i.e. the largest `t` such that some
    /// `y` has `y` and every `y - t * cols_i` in the body.
    fn difference_reach(&self, _cols: &[f64]) -> Option<f64> {
        None
    }

    /// `(center, radius)` for Euclidean balls.
    fn as_ball(&self) -> Option<(&[f64], f64)> {
        None
    }

    /// `A.K + t` in closed form, when the body family is closed under it.
    fn affine_image_exact(
        &self,
        _a: &Mat,
        _a_inv: &Mat,
        _t: &[f64],
    ) -> Option<Arc<dyn ConvexBody>> {
        None
    }
}

pub(crate) fn bisect_ray<B: ConvexBody + ?Sized>(body: &B, x: &[f64], dir: &[f64]) -> f64 {
    let dn = norm(dir);
    if dn == 0.0 || !body.contains(x) {
        return 0.0;
    }
    let r_out = body.outer_radius();
    let mut lo = 0.0;
    let mut hi = (r_out + norm(x)) / dn * (1.0 + 1e-12) + 1e-300;
    let tol = RADIAL_TOL * r_out.max(1e-300) / dn;
    let mut p = vec![0.0; x.len()];
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        for ((pi, xi), di) in p.iter_mut().zip(x).zip(dir) {
            *pi = xi + mid * di;
        }
        if body.contains(&p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub(crate) fn scan_chord<B: ConvexBody + ?Sized>(
    body: &B,
    y: &[f64],
    dir: &[f64],
) -> Option<(f64, f64)> {
    let d2 = dot(dir, dir);
    if d2 == 0.0 {
        return None;
    }
    let at = |t: f64| -> Vec<f64> { y.iter().zip(dir).map(|(a, b)| a + t * b).collect() };
    let c = body.interior_point();
    let t0 = c
        .iter()
        .zip(y)
        .zip(dir)
        .map(|((ci, yi), di)| (ci - yi) * di)
        .sum::<f64>()
        / d2;
    let mut inside = if body.contains(&at(t0)) {
        Some(t0)
    } else {
        None
    };
    if inside.is_none() {
        let reach = (body.outer_radius() + norm(y)) / libm::sqrt(d2);
        for k in 0..CHORD_SCAN {
            let t = -reach + 2.0 * reach * (k as f64 + 0.5) / CHORD_SCAN as f64;
            if body.contains(&at(t)) {
                inside = Some(t);
                break;
            }
        }
    }
    let t_in = inside?;
    let p = at(t_in);
    let neg: Vec<f64> = dir.iter().map(|v| -v).collect();
    Some((
        t_in - body.ray_exit(&p, &neg),
        t_in + body.ray_exit(&p, dir),
    ))
}

fn check_direction(body: &dyn ConvexBody, u: &[f64]) -> Result<()> {
    if u.len() != body.dim() {
        bail!(
            InvalidArgument,
            "direction has length {}, body dimension is {}",
            u.len(),
            body.dim()
        );
    }
    if u.iter().any(|v| !v.is_finite()) {
        bail!(InvalidArgument, "direction must be finite");
    }
    if u.iter().all(|v| *v == 0.0) {
        bail!(InvalidArgument, "zero direction");
    }
    Ok(())
}

/// Checked support evaluation.
pub fn support_eval(body: &dyn ConvexBody, u: &[f64]) -> Result<f64> {
    check_direction(body, u)?;
    Ok(body.support(u))
}

/// Checked membership; non-finite or mis-sized points are never members.
pub fn membership(body: &dyn ConvexBody, x: &[f64]) -> bool {
    x.len() == body.dim() && x.iter().all(|v| v.is_finite()) && body.contains(x)
}

/// Whether the origin is an interior point (a small cross about it lies inside).
pub fn origin_interior(body: &dyn ConvexBody) -> bool {
    let d = body.dim();
    let o = vec![0.0; d];
    if !body.contains(&o) {
        return false;
    }
    let mut e = vec![0.0; d];
    let eps = RADIAL_TOL * body.outer_radius() * 10.0;
    for i in 0..d {
        for s in [1.0, -1.0] {
            e[i] = s;
            if !(body.ray_exit(&o, &e) > eps) {
                return false;
            }
        }
        e[i] = 0.0;
    }
    true
}

/// `rho(u) = sup { r > 0 : r u in K }` for a body with the origin in its interior.
pub fn radial_eval(body: &dyn ConvexBody, u: &[f64]) -> Result<f64> {
    check_direction(body, u)?;
    if !origin_interior(body) {
        bail!(
            Precondition,
            "radial function needs the origin in the interior"
        );
    }
    Ok(body.ray_exit(&vec![0.0; body.dim()], u))
}

/// Radial function of the polar body, `1 / h(u)`.
pub fn polar_radial(body: &dyn ConvexBody, u: &[f64]) -> Result<f64> {
    let h = support_eval(body, u)?;
    if !(h > 0.0) {
        bail!(
            Domain,
            "support value {h} is not positive; the origin is not interior"
        );
    }
    Ok(1.0 / h)
}

/// `A.K + t`.
pub fn affine_image(body: Arc<dyn ConvexBody>, a: &Mat, t: &[f64]) -> Result<Arc<dyn ConvexBody>> {
    let d = body.dim();
    if a.rows() != d || a.cols() != d || t.len() != d {
        bail!(
            InvalidArgument,
            "affine map shape does not match body dimension {d}"
        );
    }
    let det = a.det()?;
    if !(det.abs() > DET_TOL) {
        bail!(
            InvalidArgument,
            "affine map is singular (|det| = {:e})",
            det.abs()
        );
    }
    let a_inv = a.inverse()?;
    if let Some(img) = body.affine_image_exact(a, &a_inv, t) {
        return Ok(img);
    }
    Ok(Arc::new(AffineImage::new(
        body,
        a.clone(),
        a_inv,
        det,
        t.to_vec(),
    )))
}
