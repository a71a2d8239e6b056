use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::ConvexBody;
use crate::error::{bail, Result};
use crate::linalg::{dot, norm, rank, sub, Mat};

/// A facet: outer unit normal, offset `b = h_K(normal)` and `(d-1)`-measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    General,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Simplex,
}

/// A full-dimensional polytope with both vertex and facet descriptions.
///
/// Facets are computed for `d <= 2`; boxes and simplices get them in closed
/// form in any dimension. Other polytopes in `d >= 3` must come with facets.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
    shape: Shape,
    volume: f64,
    center: Vec<f64>,
    inner: f64,
    outer: f64,
    eps: f64,
}

/// Largest LP we enumerate by brute force: `C(facets, dim + 1)` bases.
const MAX_LP_BASES: u64 = 2_000_000;

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = points.first() else {
        bail!(InvalidArgument, "no vertices given");
    };
    let d = first.len();
    if d == 0 {
        bail!(InvalidArgument, "zero-dimensional points");
    }
    if points.iter().any(|p| p.len() != d) {
        bail!(InvalidArgument, "vertices have mixed dimensions");
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        bail!(InvalidArgument, "vertex coordinates must be finite");
    }
    Ok(d)
}

fn check_full_dimensional(points: &[Vec<f64>], d: usize) -> Result<()> {
    let scale = points.iter().map(|p| norm(p)).fold(1.0, f64::max);
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    if rank(&edges, d, 1e-10 * scale) < d {
        bail!(
            Degenerate,
            "vertices span a lower-dimensional affine subspace"
        );
    }
    Ok(())
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull without collinear points (monotone chain).
pub(crate) fn hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts.iter().map(|p| norm(p)).fold(1.0, f64::max);
    let tol = 1e-12 * scale * scale;
    let mut hull: Vec<Vec<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Vec<&Vec<f64>> = if pass == 0 {
            pts.iter().collect()
        } else {
            pts.iter().rev().collect()
        };
        for p in iter {
            while hull.len() >= start + 2
                && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol
            {
                hull.pop();
            }
            hull.push(p.clone());
        }
        hull.pop();
    }
    hull
}

fn polygon_facets(ccw: &[Vec<f64>]) -> Vec<Facet> {
    let k = ccw.len();
    (0..k)
        .map(|i| {
            let a = &ccw[i];
            let b = &ccw[(i + 1) % k];
            let e = [b[0] - a[0], b[1] - a[1]];
            let len = libm::hypot(e[0], e[1]);
            let normal = vec![e[1] / len, -e[0] / len];
            Facet {
                offset: dot(&normal, a),
                normal,
                area: len,
            }
        })
        .collect()
}

impl Polytope {
    fn finish(
        dim: usize,
        vertices: Vec<Vec<f64>>,
        facets: Vec<Facet>,
        shape: Shape,
    ) -> Result<Self> {
        let volume = facets.iter().map(|f| f.area * f.offset).sum::<f64>() / dim as f64;
        let mut center = vec![0.0; dim];
        for v in &vertices {
            center
                .iter_mut()
                .zip(v)
                .for_each(|(c, x)| *c += x / vertices.len() as f64);
        }
        let inner = facets
            .iter()
            .map(|f| f.offset - dot(&f.normal, &center))
            .fold(f64::INFINITY, f64::min);
        let outer = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let scale = vertices
            .iter()
            .map(|v| norm(v))
            .fold(0.0, f64::max)
            .max(1.0);
        if !(volume > 0.0) || !(inner > 0.0) {
            bail!(Degenerate, "polytope has no interior (volume {volume:e})");
        }
        Ok(Self {
            dim,
            vertices,
            facets,
            shape,
            volume,
            center,
            inner,
            outer,
            eps: 1e-12 * scale,
        })
    }

    /// Convex hull of points in dimension 1 or 2; vertices are pruned to the hull.
    pub fn from_vertices(points: &[Vec<f64>]) -> Result<Self> {
        let d = check_points(points)?;
        match d {
            1 => {
                let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = points
                    .iter()
                    .map(|p| p[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                Self::cube(&[lo], &[hi])
            }
            2 => {
                check_full_dimensional(points, 2)?;
                let hull = hull_2d(points);
                if hull.len() < 3 {
                    bail!(Degenerate, "points are collinear");
                }
                let facets = polygon_facets(&hull);
                Self::finish(2, hull, facets, Shape::General)
            }
            _ => bail!(
                UnsupportedBody,
                "facet enumeration is not available in dimension {d}; supply facets explicitly"
            ),
        }
    }

    /// Vertices plus an explicit facet list, validated against each other.
    pub fn with_facets(vertices: &[Vec<f64>], facets: &[Facet]) -> Result<Self> {
        let d = check_points(vertices)?;
        check_full_dimensional(vertices, d)?;
        if facets.len() < d + 1 {
            bail!(
                InvalidArgument,
                "a {d}-polytope needs at least {} facets",
                d + 1
            );
        }
        let scale = vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
        let tol = 1e-7 * scale;
        let mut out = Vec::with_capacity(facets.len());
        for (k, f) in facets.iter().enumerate() {
            if f.normal.len() != d {
                bail!(InvalidArgument, "facet {k} normal has the wrong dimension");
            }
            let len = norm(&f.normal);
            if !(len > 0.0) || !f.offset.is_finite() || !(f.area > 0.0) || !f.area.is_finite() {
                bail!(
                    InvalidArgument,
                    "facet {k} needs a non-zero normal, finite offset and positive area"
                );
            }
            let normal: Vec<f64> = f.normal.iter().map(|v| v / len).collect();
            let offset = f.offset / len;
            let h = vertices
                .iter()
                .map(|v| dot(&normal, v))
                .fold(f64::NEG_INFINITY, f64::max);
            if (h - offset).abs() > tol {
                bail!(
                    InvalidArgument,
                    "facet {k} offset {offset} does not match the vertex support {h}"
                );
            }
            out.push(Facet {
                normal,
                offset,
                area: f.area,
            });
        }
        for (i, v) in vertices.iter().enumerate() {
            let tight = out
                .iter()
                .filter(|f| (dot(&f.normal, v) - f.offset).abs() <= tol)
                .count();
            if tight < d {
                bail!(
                    InvalidArgument,
                    "vertex {i} lies on {tight} facets, a vertex needs at least {d}"
                );
            }
        }
        let total: f64 = out.iter().map(|f| f.area).sum();
        let mut closure = vec![0.0; d];
        for f in &out {
            closure
                .iter_mut()
                .zip(&f.normal)
                .for_each(|(c, u)| *c += f.area * u);
        }
        if norm(&closure) > 1e-6 * total {
            bail!(
                InvalidArgument,
                "facet areas are not closed (|sum a_F u_F| = {:e})",
                norm(&closure)
            );
        }
        Self::finish(d, vertices.to_vec(), out, Shape::General)
    }

    /// The box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
    pub fn cube(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let d = lo.len();
        if d == 0 || hi.len() != d {
            bail!(
                InvalidArgument,
                "box bounds must be non-empty and of equal length"
            );
        }
        if lo.iter().chain(hi).any(|v| !v.is_finite()) {
            bail!(InvalidArgument, "box bounds must be finite");
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            bail!(Degenerate, "box has an empty or zero-width side");
        }
        if d > 20 {
            bail!(
                InvalidArgument,
                "box dimension {d} is too large to enumerate vertices"
            );
        }
        let vertices: Vec<Vec<f64>> = (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                    .collect()
            })
            .collect();
        let widths: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
        let mut facets = Vec::with_capacity(2 * d);
        for i in 0..d {
            let area: f64 = widths
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, w)| w)
                .product();
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            facets.push(Facet {
                normal: e.clone(),
                offset: hi[i],
                area,
            });
            e[i] = -1.0;
            facets.push(Facet {
                normal: e,
                offset: -lo[i],
                area,
            });
        }
        Self::finish(
            d,
            vertices,
            facets,
            Shape::Box {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
        )
    }

    /// The simplex with the given `d + 1` vertices.
    pub fn simplex(vertices: &[Vec<f64>]) -> Result<Self> {
        let d = check_points(vertices)?;
        if vertices.len() != d + 1 {
            bail!(
                InvalidArgument,
                "a {d}-simplex needs {} vertices, got {}",
                d + 1,
                vertices.len()
            );
        }
        check_full_dimensional(vertices, d)?;
        let mut data = Vec::with_capacity(d * d);
        for v in &vertices[1..] {
            data.extend(sub(v, &vertices[0]));
        }
        let edges = Mat::from_col_major(d, d, data)?;
        let det = edges.det()?;
        let inv = edges.inverse()?;
        let mut fact = 1.0;
        (1..=d).for_each(|k| fact *= k as f64);
        let vol = det.abs() / fact;
        // gradients of the barycentric coordinates: rows of the inverse, and minus their sum
        let mut grads: Vec<Vec<f64>> = vec![vec![0.0; d]; d + 1];
        for j in 0..d {
            for c in 0..d {
                grads[j + 1][c] = inv.get(j, c);
                grads[0][c] -= inv.get(j, c);
            }
        }
        let facets = grads
            .iter()
            .enumerate()
            .map(|(j, g)| {
                let gn = norm(g);
                let normal: Vec<f64> = g.iter().map(|v| -v / gn).collect();
                let on = &vertices[(j + 1) % (d + 1)];
                Facet {
                    offset: dot(&normal, on),
                    normal,
                    area: d as f64 * vol * gn,
                }
            })
            .collect();
        Self::finish(d, vertices.to_vec(), facets, Shape::Simplex)
    }

    /// `conv{0, e_1, ..., e_d}`.
    pub fn standard_simplex(d: usize) -> Result<Self> {
        if d == 0 {
            bail!(InvalidArgument, "dimension must be positive");
        }
        let mut vertices = vec![vec![0.0; d]];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            vertices.push(e);
        }
        Self::simplex(&vertices)
    }

    pub fn is_simplex(&self) -> bool {
        self.shape == Shape::Simplex
    }

    pub fn vertex_list(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facet_list(&self) -> &[Facet] {
        &self.facets
    }

    /// Same polytope with every vertex moved by `delta * g`, `g` standard normal
    /// (dimension 2 only, hull recomputed).
    pub fn jitter(&self, delta: f64, rng: &mut dyn RngCore) -> Result<Self> {
        let pts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| {
                        let g: f64 = StandardNormal.sample(rng);
                        x + delta * g
                    })
                    .collect()
            })
            .collect();
        Self::from_vertices(&pts)
    }

    fn box_reach(lo: &[f64], hi: &[f64], cols: &[f64]) -> f64 {
        let d = lo.len();
        let mut t = f64::INFINITY;
        for j in 0..d {
            let (mut mx, mut mn) = (0.0f64, 0.0f64);
            for col in cols.chunks_exact(d) {
                mx = mx.max(col[j]);
                mn = mn.min(col[j]);
            }
            let spread = mx - mn;
            if spread > 0.0 {
                t = t.min((hi[j] - lo[j]) / spread);
            }
        }
        t
    }

    /// `max t` subject to `<a_F, y> + c_F t <= b_F`, by enumerating bases.
    fn lp_reach(&self, cols: &[f64]) -> f64 {
        let d = self.dim;
        let nf = self.facets.len();
        let c: Vec<f64> = self
            .facets
            .iter()
            .map(|f| {
                cols.chunks_exact(d)
                    .map(|col| -dot(&f.normal, col))
                    .fold(0.0, f64::max)
            })
            .collect();
        if c.iter().all(|v| *v == 0.0) {
            return f64::INFINITY;
        }
        let k = d + 1;
        let mut idx: Vec<usize> = (0..k).collect();
        let mut best = 0.0f64;
        let mut a = [0.0f64; 81];
        let mut rhs = [0.0f64; 9];
        let slack = 1e-9 * (1.0 + self.outer);
        loop {
            for (r, &fi) in idx.iter().enumerate() {
                let f = &self.facets[fi];
                for col in 0..d {
                    a[r * k + col] = f.normal[col];
                }
                a[r * k + d] = c[fi];
                rhs[r] = f.offset;
            }
            if let Some(z) = solve_small(&mut a[..k * k], &mut rhs[..k], k) {
                let t = z[d];
                if t > best {
                    let y = &z[..d];
                    let feasible = (0..nf).all(|j| {
                        dot(&self.facets[j].normal, y) + c[j] * t <= self.facets[j].offset + slack
                    });
                    if feasible {
                        best = t;
                    }
                }
            }
            // next combination
            let mut i = k;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] < nf - k + i {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn binom_bases(&self) -> u64 {
        let (n, k) = (self.facets.len() as u64, self.dim as u64 + 1);
        let mut c = 1u64;
        for i in 0..k.min(n) {
            c = c.saturating_mul(n - i) / (i + 1);
        }
        c
    }
}

/// Gaussian elimination with partial pivoting on a row-major `k x k` system.
fn solve_small(a: &mut [f64], b: &mut [f64], k: usize) -> Option<[f64; 9]> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..k {
        let piv =
            (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))?;
        if a[piv * k + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..k {
            let f = a[r * k + col] / a[col * k + col];
            if f != 0.0 {
                for c in col..k {
                    a[r * k + c] -= f * a[col * k + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = [0.0f64; 9];
    for r in (0..k).rev() {
        let mut s = b[r];
        for c in r + 1..k {
            s -= a[r * k + c] * x[c];
        }
        x[r] = s / a[r * k + r];
    }
    Some(x)
}

impl ConvexBody for Polytope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, u: &[f64]) -> f64 {
        if let Shape::Box { lo, hi } = &self.shape {
            return u
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(ui, (a, b))| if *ui >= 0.0 { ui * b } else { ui * a })
                .sum();
        }
        self.vertices
            .iter()
            .map(|v| dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.facets
            .iter()
            .all(|f| dot(&f.normal, x) <= f.offset + self.eps)
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
        if let Shape::Box { lo, hi } = &self.shape {
            return (lo.clone(), hi.clone());
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    fn ray_exit(&self, x: &[f64], dir: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        let mut s = f64::INFINITY;
        for f in &self.facets {
            let rate = dot(&f.normal, dir);
            if rate > 0.0 {
                s = s.min(((f.offset - dot(&f.normal, x)) / rate).max(0.0));
            }
        }
        if s.is_finite() {
            s
        } else {
            0.0
        }
    }

    fn chord(&self, y: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for f in &self.facets {
            let rate = dot(&f.normal, dir);
            let room = f.offset - dot(&f.normal, y);
            if rate > 0.0 {
                hi = hi.min(room / rate);
            } else if rate < 0.0 {
                lo = lo.max(room / rate);
            } else if room < -self.eps {
                return None;
            }
        }
        if lo <= hi && lo.is_finite() && hi.is_finite() {
            Some((lo, hi))
        } else {
            None
        }
    }

    fn exact_volume(&self) -> Option<f64> {
        Some(self.volume)
    }

    fn has_exact_sampler(&self) -> bool {
        !matches!(self.shape, Shape::General)
    }

    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) -> bool {
        match &self.shape {
            Shape::General => false,
            Shape::Box { lo, hi } => {
                for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *o = a + (b - a) * rng.random::<f64>();
                }
                true
            }
            Shape::Simplex => {
                // Dirichlet(1, ..., 1) weights from normalized exponentials
                let mut w = [0.0f64; 64];
                let k = self.vertices.len();
                if k > w.len() {
                    return false;
                }
                let mut total = 0.0;
                for wi in w[..k].iter_mut() {
                    let e: f64 = Exp1.sample(rng);
                    *wi = e;
                    total += e;
                }
                out.iter_mut().for_each(|o| *o = 0.0);
                for (v, wi) in self.vertices.iter().zip(&w[..k]) {
                    out.iter_mut()
                        .zip(v)
                        .for_each(|(o, x)| *o += wi / total * x);
                }
                true
            }
        }
    }

    fn facets(&self) -> Option<&[Facet]> {
        Some(&self.facets)
    }

    fn vertices(&self) -> Option<&[Vec<f64>]> {
        Some(&self.vertices)
    }

    fn difference_reach(&self, cols: &[f64]) -> Option<f64> {
        if let Shape::Box { lo, hi } = &self.shape {
            return Some(Self::box_reach(lo, hi, cols));
        }
        if self.dim + 1 > 9 || self.binom_bases() > MAX_LP_BASES {
            return None;
        }
        Some(self.lp_reach(cols))
    }

    fn affine_image_exact(&self, a: &Mat, a_inv: &Mat, t: &[f64]) -> Option<Arc<dyn ConvexBody>> {
        let det = a.det().ok()?.abs();
        let vertices: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| a.mul_vec(v).iter().zip(t).map(|(x, s)| x + s).collect())
            .collect();
        let facets: Vec<Facet> = self
            .facets
            .iter()
            .map(|f| {
                let g = a_inv.tr_mul_vec(&f.normal);
                let gn = norm(&g);
                Facet {
                    normal: g.iter().map(|v| v / gn).collect(),
                    offset: (f.offset + dot(&g, t)) / gn,
                    area: f.area * det * gn,
                }
            })
            .collect();
        let shape = if self.shape == Shape::Simplex {
            Shape::Simplex
        } else {
            Shape::General
        };
        Self::finish(self.dim, vertices, facets, shape)
            .ok()
            .map(|p| Arc::new(p) as Arc<dyn ConvexBody>)
    }
}

/// A random convex polygon: `k` points at jittered angles and radii on a
/// circle, then the hull.
pub fn random_polygon(k: usize, rng: &mut dyn RngCore) -> Result<Polytope> {
    if k < 3 {
        bail!(InvalidArgument, "a polygon needs at least 3 points");
    }
    for _ in 0..64 {
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let ang =
                    core::f64::consts::TAU * (i as f64 + 0.8 * rng.random::<f64>()) / k as f64;
                let r = 0.6 + 0.6 * rng.random::<f64>();
                vec![r * libm::cos(ang), r * libm::sin(ang)]
            })
            .collect();
        let hull = hull_2d(&pts);
        if hull.len() >= 3 {
            if let Ok(p) = Polytope::from_vertices(&hull) {
                return Ok(p);
            }
        }
    }
    bail!(Degenerate, "could not draw a non-degenerate polygon")
}

/// A random well-conditioned matrix in `GL_d` with Gaussian entries.
pub fn random_gl(d: usize, rng: &mut dyn RngCore) -> Result<Mat> {
    for _ in 0..256 {
        let data: Vec<f64> = (0..d * d)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                g
            })
            .collect();
        let a = Mat::from_col_major(d, d, data)?;
        let det = a.det()?.abs();
        let frob = libm::sqrt(a.as_slice().iter().map(|v| v * v).sum::<f64>());
        // det / frob^d bounds the condition number from below
        if det > 0.3 && det / libm::pow(frob / libm::sqrt(d as f64), d as f64) > 0.1 {
            return Ok(a);
        }
    }
    bail!(Degenerate, "could not draw a well-conditioned matrix")
}
