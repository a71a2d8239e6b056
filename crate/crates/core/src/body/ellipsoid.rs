use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use super::ConvexBody;
use crate::error::{bail, Result};
use crate::linalg::{dot, norm, solve, Mat, DET_TOL};
use crate::measure::{ball_sample, unit_ball_volume};

/// Euclidean ball `c + r B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            bail!(InvalidArgument, "ball needs a center");
        }
        if center.iter().any(|v| !v.is_finite()) || !radius.is_finite() {
            bail!(InvalidArgument, "ball parameters must be finite");
        }
        if !(radius > 0.0) {
            bail!(Degenerate, "ball radius must be positive");
        }
        Ok(Self { center, radius })
    }

    /// The unit ball centred at the origin.
    pub fn unit(d: usize) -> Self {
        Self {
            center: vec![0.0; d.max(1)],
            radius: 1.0,
        }
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Roots `(s0, s1)` of `|p + s d|^2 = 1`, if the line meets the unit ball.
fn unit_line_hits(p: &[f64], d: &[f64]) -> Option<(f64, f64)> {
    let a = dot(d, d);
    if a == 0.0 {
        return None;
    }
    let b = dot(p, d);
    let c = dot(p, p) - 1.0;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let s = libm::sqrt(disc);
    // numerically stable pair of roots
    let q = if b >= 0.0 { -(b + s) } else { -(b - s) };
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (r0, r1) = (q / a, c / q);
    Some((r0.min(r1), r0.max(r1)))
}

/// Radius of the smallest ball containing `points` (brute force over
/// subsets of at most `d + 1` points; fine for the handful we need).
pub(crate) fn enclosing_radius(points: &[Vec<f64>]) -> f64 {
    let k = points.len();
    if k == 0 {
        return 0.0;
    }
    let d = points[0].len();
    let scale = points.iter().map(|p| norm(p)).fold(0.0, f64::max);
    let slack = 1e-10 * scale.max(1e-300);
    let mut best = f64::INFINITY;
    let max_size = (d + 1).min(k);
    let mut subset: Vec<usize> = Vec::with_capacity(max_size);
    for mask in 1u32..(1u32 << k) {
        let size = mask.count_ones() as usize;
        if size > max_size {
            continue;
        }
        subset.clear();
        subset.extend((0..k).filter(|i| mask >> i & 1 == 1));
        let Some((c, r)) = circumsphere(points, &subset) else {
            continue;
        };
        if r >= best {
            continue;
        }
        if points
            .iter()
            .all(|p| norm(&crate::linalg::sub(p, &c)) <= r + slack)
        {
            best = r;
        }
    }
    best
}

/// Centre and radius of the smallest sphere through the chosen points,
/// centred in their affine hull.
fn circumsphere(points: &[Vec<f64>], subset: &[usize]) -> Option<(Vec<f64>, f64)> {
    let p0 = &points[subset[0]];
    if subset.len() == 1 {
        return Some((p0.clone(), 0.0));
    }
    let edges: Vec<Vec<f64>> = subset[1..]
        .iter()
        .map(|&i| crate::linalg::sub(&points[i], p0))
        .collect();
    let k = edges.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            gram[j * k + i] = 2.0 * dot(&edges[i], &edges[j]);
        }
        rhs[i] = dot(&edges[i], &edges[i]);
    }
    let lambda = solve(k, &gram, &rhs)?;
    let mut c = p0.clone();
    for (l, e) in lambda.iter().zip(&edges) {
        c.iter_mut().zip(e).for_each(|(ci, ei)| *ci += l * ei);
    }
    let r = norm(&crate::linalg::sub(&c, p0));
    Some((c, r))
}

/// `{0, cols_1, ..., cols_m}` as points.
fn with_origin(cols: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]];
    pts.extend(cols.chunks_exact(d).map(|c| c.to_vec()));
    pts
}

impl ConvexBody for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn support(&self, u: &[f64]) -> f64 {
        dot(&self.center, u) + self.radius * norm(u)
    }

    fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d2 <= self.radius * self.radius * (1.0 + 1e-12)
    }

    fn interior_point(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn inner_radius(&self) -> f64 {
        self.radius
    }

    fn outer_radius(&self) -> f64 {
        norm(&self.center) + self.radius
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.center.iter().map(|c| c - self.radius).collect(),
            self.center.iter().map(|c| c + self.radius).collect(),
        )
    }

    fn ray_exit(&self, x: &[f64], dir: &[f64]) -> f64 {
        self.chord(x, dir).map_or(0.0, |(lo, hi)| {
            if lo <= 1e-12 * hi.abs().max(1.0) {
                hi.max(0.0)
            } else {
                0.0
            }
        })
    }

    fn chord(&self, y: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        let p: Vec<f64> = y
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) / self.radius)
            .collect();
        let d: Vec<f64> = dir.iter().map(|v| v / self.radius).collect();
        unit_line_hits(&p, &d)
    }

    fn exact_volume(&self) -> Option<f64> {
        Some(unit_ball_volume(self.dim()) * libm::pow(self.radius, self.dim() as f64))
    }

    fn has_exact_sampler(&self) -> bool {
        true
    }

    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> bool {
        ball_sample(rng, self.radius, out);
        out.iter_mut().zip(&self.center).for_each(|(o, c)| *o += c);
        true
    }

    fn difference_reach(&self, cols: &[f64]) -> Option<f64> {
        let r = enclosing_radius(&with_origin(cols, self.dim()));
        Some(if r > 0.0 {
            self.radius / r
        } else {
            f64::INFINITY
        })
    }

    fn as_ball(&self) -> Option<(&[f64], f64)> {
        Some((&self.center, self.radius))
    }

    fn affine_image_exact(&self, a: &Mat, _a_inv: &Mat, t: &[f64]) -> Option<Arc<dyn ConvexBody>> {
        let center: Vec<f64> = a
            .mul_vec(&self.center)
            .iter()
            .zip(t)
            .map(|(x, s)| x + s)
            .collect();
        let shape = Mat::from_col_major(
            a.rows(),
            a.cols(),
            a.as_slice().iter().map(|v| v * self.radius).collect(),
        )
        .ok()?;
        Ellipsoid::new(center, shape)
            .ok()
            .map(|e| Arc::new(e) as Arc<dyn ConvexBody>)
    }
}

/// Ellipsoid `c + A B` for an invertible `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<f64>,
    a: Mat,
    a_inv: Mat,
    det: f64,
    inner: f64,
    outer: f64,
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, a: Mat) -> Result<Self> {
        let d = center.len();
        if d == 0 || a.rows() != d || a.cols() != d {
            bail!(InvalidArgument, "ellipsoid shape must be {d}x{d}");
        }
        if center.iter().any(|v| !v.is_finite()) {
            bail!(InvalidArgument, "ellipsoid center must be finite");
        }
        let det = a.det()?;
        if !(det.abs() > DET_TOL) {
            bail!(Degenerate, "ellipsoid shape matrix is singular");
        }
        let a_inv = a.inverse()?;
        let frob = |m: &Mat| libm::sqrt(m.as_slice().iter().map(|v| v * v).sum::<f64>());
        let inner = 1.0 / frob(&a_inv);
        let outer = norm(&center) + frob(&a);
        Ok(Self {
            center,
            a,
            a_inv,
            det: det.abs(),
            inner,
            outer,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn shape(&self) -> &Mat {
        &self.a
    }

    fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.a_inv.mul_vec(&shifted)
    }
}

impl ConvexBody for Ellipsoid {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn support(&self, u: &[f64]) -> f64 {
        dot(&self.center, u) + norm(&self.a.tr_mul_vec(u))
    }

    fn contains(&self, x: &[f64]) -> bool {
        let p = self.to_unit(x);
        dot(&p, &p) <= 1.0 + 1e-12
    }

    fn interior_point(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn inner_radius(&self) -> f64 {
        self.inner
    }

    fn outer_radius(&self) -> f64 {
        self.outer
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let half: Vec<f64> = (0..d)
            .map(|i| {
                libm::sqrt(
                    (0..d)
                        .map(|j| {
                            let v = self.a.get(i, j);
                            v * v
                        })
                        .sum(),
                )
            })
            .collect();
        (
            self.center.iter().zip(&half).map(|(c, h)| c - h).collect(),
            self.center.iter().zip(&half).map(|(c, h)| c + h).collect(),
        )
    }

    fn ray_exit(&self, x: &[f64], dir: &[f64]) -> f64 {
        self.chord(x, dir).map_or(0.0, |(lo, hi)| {
            if lo <= 1e-12 * hi.abs().max(1.0) {
                hi.max(0.0)
            } else {
                0.0
            }
        })
    }

    fn chord(&self, y: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        unit_line_hits(&self.to_unit(y), &self.a_inv.mul_vec(dir))
    }

    fn exact_volume(&self) -> Option<f64> {
        Some(self.det * unit_ball_volume(self.dim()))
    }

    fn has_exact_sampler(&self) -> bool {
        true
    }

    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> bool {
        let d = self.dim();
        let mut z = [0.0f64; 16];
        if d > z.len() {
            return false;
        }
        ball_sample(rng, 1.0, &mut z[..d]);
        self.a.mul_vec_into(&z[..d], out);
        out.iter_mut().zip(&self.center).for_each(|(o, c)| *o += c);
        true
    }

    fn difference_reach(&self, cols: &[f64]) -> Option<f64> {
        let d = self.dim();
        let mapped: Vec<f64> = cols
            .chunks_exact(d)
            .flat_map(|c| self.a_inv.mul_vec(c))
            .collect();
        let r = enclosing_radius(&with_origin(&mapped, d));
        Some(if r > 0.0 { 1.0 / r } else { f64::INFINITY })
    }

    fn affine_image_exact(&self, a: &Mat, _a_inv: &Mat, t: &[f64]) -> Option<Arc<dyn ConvexBody>> {
        let center: Vec<f64> = a
            .mul_vec(&self.center)
            .iter()
            .zip(t)
            .map(|(x, s)| x + s)
            .collect();
        let shape = a.mul(&self.a).ok()?;
        Ellipsoid::new(center, shape)
            .ok()
            .map(|e| Arc::new(e) as Arc<dyn ConvexBody>)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enclosing_radius_examples() {
        let r = enclosing_radius(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        assert!((r - 1.0).abs() < 1e-12);
        // right angle: the hypotenuse is a diameter
        let r = enclosing_radius(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((r - libm::sqrt(0.5)).abs() < 1e-12);
        // equilateral triangle: circumradius side / sqrt(3)
        let h = libm::sqrt(3.0) / 2.0;
        let r = enclosing_radius(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]);
        assert!((r - 1.0 / libm::sqrt(3.0)).abs() < 1e-12);
        // obtuse triangle: longest side is a diameter
        let r = enclosing_radius(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.2]]);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_difference_reach() {
        let b = Ball::unit(2);
        assert!((b.difference_reach(&[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((b.difference_reach(&[0.6, 0.8]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_queries() {
        let a = Mat::from_rows(&[&[2.0, 0.0], &[0.0, 0.5]]).unwrap();
        let e = Ellipsoid::new(vec![1.0, 1.0], a).unwrap();
        assert!((e.support(&[1.0, 0.0]) - 3.0).abs() < 1e-12);
        assert!((e.support(&[0.0, -1.0]) - -0.5).abs() < 1e-12);
        assert!(e.contains(&[2.9, 1.0]) && !e.contains(&[1.0, 1.6]));
        assert!((e.ray_exit(&[1.0, 1.0], &[1.0, 0.0]) - 2.0).abs() < 1e-12);
        assert!((e.exact_volume().unwrap() - core::f64::consts::PI).abs() < 1e-12);
        // D(E) = 2 (E - c): reach along e1 is 4, along e2 is 1
        assert!((e.difference_reach(&[1.0, 0.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!((e.difference_reach(&[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    }
}
