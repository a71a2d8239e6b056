//! JSON documents describing bodies and row bodies `Q`.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use hozon_core::body::{random_gl, random_polygon};
use hozon_core::{Ball, ConvexBody, Ellipsoid, Facet, Mat, Polytope, QBody, QKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Polytope {
        dim: usize,
        vertices: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        facets: Option<Vec<FacetSpec>>,
    },
    Box {
        dim: usize,
        bounds: Vec<[f64; 2]>,
    },
    Simplex {
        dim: usize,
        vertices: Vec<Vec<f64>>,
    },
    Ball {
        dim: usize,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
    },
    Ellipsoid {
        dim: usize,
        #[serde(default)]
        center: Option<Vec<f64>>,
        /// Rows of `A` in `E = A.B + c`.
        shape: Vec<Vec<f64>>,
    },
    /// A seeded random polygon (jittered angles, hull).
    RandomPolygon {
        vertices: usize,
        seed: u64,
    },
    /// `A.B` for a seeded random `A ∈ GL_2`.
    RandomEllipse {
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

fn check_dim(dim: usize, got: usize, what: &str) -> Result<()> {
    if dim != got {
        bail!("{what} has dimension {got}, but \"dim\" is {dim}");
    }
    Ok(())
}

impl BodySpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading body spec {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing body spec {}", path.display()))
    }

    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Polytope { dim, .. }
            | BodySpec::Box { dim, .. }
            | BodySpec::Simplex { dim, .. }
            | BodySpec::Ball { dim, .. }
            | BodySpec::Ellipsoid { dim, .. } => *dim,
            BodySpec::RandomPolygon { .. } | BodySpec::RandomEllipse { .. } => 2,
        }
    }

    /// Whether the body is a simplex (the equality case of several inclusions).
    pub fn is_simplex(&self) -> bool {
        match self {
            BodySpec::Simplex { .. } => true,
            BodySpec::Box { dim, .. } => *dim == 1,
            BodySpec::Polytope { dim, vertices, .. } => vertices.len() == dim + 1,
            _ => false,
        }
    }

    /// Whether the body is an ellipsoid (the equality case of the volume ratio).
    pub fn is_ellipsoid(&self) -> bool {
        matches!(
            self,
            BodySpec::Ball { .. } | BodySpec::Ellipsoid { .. } | BodySpec::RandomEllipse { .. }
        )
    }

    pub fn build(&self) -> Result<Arc<dyn ConvexBody>> {
        let body: Arc<dyn ConvexBody> = match self {
            BodySpec::Polytope {
                dim,
                vertices,
                facets,
            } => {
                for v in vertices {
                    check_dim(*dim, v.len(), "a vertex")?;
                }
                match facets {
                    Some(fs) => {
                        let fs: Vec<Facet> = fs
                            .iter()
                            .map(|f| Facet {
                                normal: f.normal.clone(),
                                offset: f.offset,
                                area: f.area,
                            })
                            .collect();
                        Arc::new(Polytope::with_facets(vertices, &fs)?)
                    }
                    None => Arc::new(Polytope::from_vertices(vertices)?),
                }
            }
            BodySpec::Box { dim, bounds } => {
                check_dim(*dim, bounds.len(), "\"bounds\"")?;
                let lo: Vec<f64> = bounds.iter().map(|b| b[0]).collect();
                let hi: Vec<f64> = bounds.iter().map(|b| b[1]).collect();
                Arc::new(Polytope::cube(&lo, &hi)?)
            }
            BodySpec::Simplex { dim, vertices } => {
                for v in vertices {
                    check_dim(*dim, v.len(), "a vertex")?;
                }
                Arc::new(Polytope::simplex(vertices)?)
            }
            BodySpec::Ball {
                dim,
                center,
                radius,
            } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; *dim]);
                check_dim(*dim, c.len(), "\"center\"")?;
                Arc::new(Ball::new(c, *radius)?)
            }
            BodySpec::Ellipsoid { dim, center, shape } => {
                let c = center.clone().unwrap_or_else(|| vec![0.0; *dim]);
                check_dim(*dim, c.len(), "\"center\"")?;
                check_dim(*dim, shape.len(), "\"shape\"")?;
                let rows: Vec<&[f64]> = shape.iter().map(|r| r.as_slice()).collect();
                Arc::new(Ellipsoid::new(c, Mat::from_rows(&rows)?)?)
            }
            BodySpec::RandomPolygon { vertices, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Arc::new(random_polygon(*vertices, &mut rng)?)
            }
            BodySpec::RandomEllipse { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let a = random_gl(2, &mut rng)?;
                Arc::new(Ellipsoid::new(vec![0.0, 0.0], a)?)
            }
        };
        Ok(body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QType {
    Segment,
    Cube,
    Simplex,
    NegSimplex,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSpec {
    #[serde(rename = "type")]
    pub kind: QType,
    /// When absent, `m` comes from the experiment's `m` list.
    #[serde(default)]
    pub m: Option<usize>,
}

impl QSpec {
    pub fn new(kind: QType) -> Self {
        Self { kind, m: None }
    }

    /// Builds `Q` in `M[1, m]`. A segment asked for `m > 1` is the cube `[-1, 1]^m`.
    pub fn build(&self, m: usize) -> Result<QBody> {
        if let Some(fixed) = self.m {
            if fixed != m {
                bail!("Q spec fixes m = {fixed}, but the experiment asks for m = {m}");
            }
        }
        let kind = match (self.kind, m) {
            (QType::Segment, 1) => QKind::Segment,
            (QType::Segment | QType::Cube, _) => QKind::Cube,
            (QType::Simplex, _) => QKind::Simplex,
            (QType::NegSimplex, _) => QKind::NegSimplex,
            (QType::Ball, _) => QKind::Ball,
        };
        Ok(QBody::new(kind, m)?)
    }

    pub fn label(&self, m: usize) -> String {
        let name = match (self.kind, m) {
            (QType::Segment, 1) => "segment",
            (QType::Segment | QType::Cube, _) => "cube",
            (QType::Simplex, _) => "simplex",
            (QType::NegSimplex, _) => "neg_simplex",
            (QType::Ball, _) => "ball",
        };
        name.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_body_type() {
        let docs = [
            r#"{"type":"polytope","dim":2,"vertices":[[0,0],[1,0],[1,1],[0,1]]}"#,
            r#"{"type":"box","dim":2,"bounds":[[0,1],[0,2]]}"#,
            r#"{"type":"simplex","dim":2,"vertices":[[0,0],[1,0],[0,1]]}"#,
            r#"{"type":"ball","dim":3}"#,
            r#"{"type":"ellipsoid","dim":2,"shape":[[2,0],[0.5,1]]}"#,
            r#"{"type":"random_polygon","vertices":5,"seed":3}"#,
            r#"{"type":"random_ellipse","seed":4}"#,
        ];
        for d in docs {
            let spec: BodySpec = serde_json::from_str(d).unwrap();
            let body = spec.build().unwrap();
            assert_eq!(body.dim(), spec.dim());
        }
    }

    #[test]
    fn rejects_bad_documents() {
        let bad = [
            r#"{"type":"box","dim":3,"bounds":[[0,1],[0,2]]}"#,
            r#"{"type":"polytope","dim":2,"vertices":[[0,0],[1,0],[2,0]]}"#,
            r#"{"type":"ball","dim":2,"radius":-1}"#,
            r#"{"type":"ellipsoid","dim":2,"shape":[[1,1],[1,1]]}"#,
        ];
        for d in bad {
            let spec: BodySpec = serde_json::from_str(d).unwrap();
            assert!(spec.build().is_err(), "{d}");
        }
        assert!(serde_json::from_str::<BodySpec>(r#"{"type":"torus","dim":2}"#).is_err());
    }

    #[test]
    fn three_dimensional_polytopes_need_facets() {
        let v = r#"{"type":"polytope","dim":3,"vertices":[[0,0,0],[1,0,0],[0,1,0],[0,0,1]]}"#;
        let spec: BodySpec = serde_json::from_str(v).unwrap();
        assert!(spec.build().is_err());
    }

    #[test]
    fn q_specs() {
        let q: QSpec = serde_json::from_str(r#"{"type":"segment","m":1}"#).unwrap();
        assert_eq!(q.build(1).unwrap().support(&[-2.0]), 2.0);
        assert!(q.build(2).is_err());
        let q: QSpec = serde_json::from_str(r#"{"type":"neg_simplex"}"#).unwrap();
        assert_eq!(q.build(2).unwrap().support(&[-1.0, 3.0]), 1.0);
        assert_eq!(
            QSpec::new(QType::Segment)
                .build(2)
                .unwrap()
                .support(&[1.0, -1.0]),
            2.0
        );
    }
}
