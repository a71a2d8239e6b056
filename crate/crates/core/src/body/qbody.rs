use alloc::sync::Arc;

use super::ConvexBody;
use crate::error::{bail, Result};
use crate::linalg::norm;

/// The built-in row bodies `Q` in `M[1, m]`, plus arbitrary ones.
#[derive(Debug, Clone)]
pub enum QKind {
    /// `[-1, 1]`, only for `m = 1`.
    Segment,
    /// `[-1, 1]^m`.
    Cube,
    /// `conv{o, e_1, ..., e_m}`.
    Simplex,
    /// `-conv{o, e_1, ..., e_m}`.
    NegSimplex,
    /// The Euclidean unit ball of `R^m`.
    Ball,
    Custom(Arc<dyn ConvexBody>),
}

/// A convex body `Q` in the row space containing the origin, used only
/// through `h_Q`.
#[derive(Debug, Clone)]
pub struct QBody {
    kind: QKind,
    m: usize,
    strictly_convex: bool,
}

impl QBody {
    pub fn new(kind: QKind, m: usize) -> Result<Self> {
        if m == 0 {
            bail!(InvalidArgument, "Q needs m >= 1");
        }
        let strictly_convex = match &kind {
            QKind::Segment => {
                if m != 1 {
                    bail!(InvalidArgument, "the segment Q is only defined for m = 1");
                }
                // a segment has no boundary segments in R^1
                true
            }
            QKind::Cube | QKind::Simplex | QKind::NegSimplex => m == 1,
            QKind::Ball => true,
            QKind::Custom(body) => {
                if body.dim() != m {
                    bail!(
                        InvalidArgument,
                        "custom Q has dimension {}, expected {m}",
                        body.dim()
                    );
                }
                if !body.contains(&alloc::vec![0.0; m]) {
                    bail!(Precondition, "Q must contain the origin");
                }
                false
            }
        };
        Ok(Self {
            kind,
            m,
            strictly_convex,
        })
    }

    pub fn segment() -> Self {
        Self {
            kind: QKind::Segment,
            m: 1,
            strictly_convex: true,
        }
    }

    pub fn cube(m: usize) -> Result<Self> {
        Self::new(QKind::Cube, m)
    }

    pub fn simplex(m: usize) -> Result<Self> {
        Self::new(QKind::Simplex, m)
    }

    pub fn neg_simplex(m: usize) -> Result<Self> {
        Self::new(QKind::NegSimplex, m)
    }

    pub fn ball(m: usize) -> Result<Self> {
        Self::new(QKind::Ball, m)
    }

    /// Marks a custom `Q` as strictly convex.
    pub fn with_strict_convexity(mut self, strict: bool) -> Self {
        self.strictly_convex = strict;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &QKind {
        &self.kind
    }

    pub fn strictly_convex(&self) -> bool {
        self.strictly_convex
    }

    /// Whether `Q = -Q`.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, QKind::Segment | QKind::Cube | QKind::Ball)
    }

    /// `h_Q(w)`, clamped at zero (the origin lies in `Q`).
    #[inline]
    pub fn support(&self, w: &[f64]) -> f64 {
        let h = match &self.kind {
            QKind::Segment | QKind::Cube => w.iter().map(|v| v.abs()).sum(),
            QKind::Simplex => w.iter().fold(0.0, |a: f64, v| a.max(*v)),
            QKind::NegSimplex => w.iter().fold(0.0, |a: f64, v| a.max(-*v)),
            QKind::Ball => norm(w),
            QKind::Custom(body) => body.support(w),
        };
        h.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::Polytope;

    #[test]
    fn built_in_supports() {
        assert_eq!(QBody::segment().support(&[-0.3]), 0.3);
        assert_eq!(QBody::cube(2).unwrap().support(&[1.0, -2.0]), 3.0);
        assert_eq!(QBody::simplex(2).unwrap().support(&[-1.0, 0.5]), 0.5);
        assert_eq!(QBody::simplex(2).unwrap().support(&[-1.0, -0.5]), 0.0);
        assert_eq!(QBody::neg_simplex(2).unwrap().support(&[-1.0, 0.5]), 1.0);
        assert!((QBody::ball(2).unwrap().support(&[3.0, 4.0]) - 5.0).abs() < 1e-12);
        assert!(QBody::new(QKind::Segment, 2).is_err());
    }

    #[test]
    fn custom_q_must_contain_origin() {
        let off = Polytope::cube(&[1.0], &[2.0]).unwrap();
        assert!(QBody::new(QKind::Custom(Arc::new(off)), 1).is_err());
        let ok = Polytope::cube(&[-1.0, 0.0], &[2.0, 1.0]).unwrap();
        let q = QBody::new(QKind::Custom(Arc::new(ok)), 2).unwrap();
        assert_eq!(q.support(&[1.0, 1.0]), 3.0);
        assert!(!q.strictly_convex());
    }

    #[test]
    fn convexity_flags() {
        assert!(QBody::ball(3).unwrap().strictly_convex());
        assert!(!QBody::cube(2).unwrap().strictly_convex());
        assert!(QBody::cube(1).unwrap().strictly_convex());
    }
}
