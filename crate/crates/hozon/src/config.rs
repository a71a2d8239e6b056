//! Experiment configuration: the JSON file plus command-line overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use hozon_core::linalg::DEFAULT_MAX_NM;
use hozon_core::table::default_grid_size;
use hozon_core::zonoid::Budget;
use hozon_core::{ConvexBody, RngPlan};
use serde::{Deserialize, Serialize};

use crate::spec::{BodySpec, QSpec, QType};

/// A body in the config, inline or as a path relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyEntry {
    pub name: String,
    #[serde(default)]
    pub body: Option<BodySpec>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
    /// Tuples for the direct mean-zonoid route.
    pub tuples: usize,
    /// Sphere directions for the representation measure (spherical and factored routes).
    pub directions: usize,
    /// Chord samples per sphere direction.
    pub chords: usize,
    /// Samples per radial-mean evaluation in the inclusion suite.
    pub radial: usize,
    /// Rejection samples for Monte-Carlo volumes.
    pub volume: usize,
    /// Sphere directions for tabulated star bodies: difference bodies, polar
    /// projection bodies, and the centroid/projection spot check.
    pub star_directions: usize,
}

impl Default for Samples {
    fn default() -> Self {
        let b = Budget::default();
        Self {
            tuples: b.tuples,
            directions: b.directions,
            chords: b.chords,
            radial: 20_000,
            volume: 200_000,
            star_directions: 50_000,
        }
    }
}

/// Which star body the centroid/projection spot check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarChoice {
    /// `R^m_{nm+p} K`.
    RadialMean,
    /// `K` itself, which must contain the origin in its interior.
    Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub bodies: Vec<BodyEntry>,
    pub q: QSpec,
    pub p: Vec<f64>,
    pub m: Vec<usize>,
    /// Radial-mean order pairs `[p, q]` with `-1 < p <= q`.
    pub orders: Vec<[f64; 2]>,
    pub grid: Option<usize>,
    pub seed: u64,
    pub shards: usize,
    pub samples: Samples,
    /// Relative floor of the acceptance bands.
    pub rel_tol: f64,
    /// Relative floor for route-agreement rows.
    pub route_tol: f64,
    pub rounds: usize,
    pub star: StarChoice,
    pub max_nm: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            bodies: Vec::new(),
            q: QSpec::new(QType::Segment),
            p: vec![1.0],
            m: vec![1],
            orders: vec![[1.0, 2.0]],
            grid: None,
            seed: 1,
            shards: 8,
            samples: Samples::default(),
            rel_tol: 0.02,
            route_tol: 0.015,
            rounds: 20,
            star: StarChoice::RadialMean,
            max_nm: DEFAULT_MAX_NM,
            out: None,
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub shards: Option<usize>,
    pub rel_tol: Option<f64>,
    pub out: Option<PathBuf>,
}

/// A body ready for the suites.
#[derive(Debug, Clone)]
pub struct NamedBody {
    pub name: String,
    pub spec: BodySpec,
    pub body: Arc<dyn ConvexBody>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in &mut cfg.bodies {
            if let Some(p) = &entry.path {
                if p.is_relative() {
                    entry.path = Some(base.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.samples {
            self.samples.tuples = n;
            self.samples.directions = n;
        }
        if let Some(g) = o.grid {
            self.grid = Some(g);
        }
        if let Some(s) = o.shards {
            self.shards = s;
        }
        if let Some(t) = o.rel_tol {
            self.rel_tol = t;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
    }

    pub fn plan(&self) -> Result<RngPlan> {
        Ok(RngPlan::new(self.seed, self.shards)?)
    }

    pub fn budget(&self) -> Budget {
        Budget {
            tuples: self.samples.tuples,
            directions: self.samples.directions,
            chords: self.samples.chords,
        }
    }

    /// Grid size in `R^d`.
    pub fn grid_for(&self, d: usize) -> usize {
        match (d, self.grid) {
            (1, _) => 2,
            (2, Some(g)) => g,
            _ => default_grid_size(d),
        }
    }

    /// Checks the invariants and builds every body.
    pub fn validate(&self) -> Result<Vec<NamedBody>> {
        if self.bodies.is_empty() {
            bail!("the config lists no bodies");
        }
        if self.p.iter().any(|p| !(*p >= 1.0) || !p.is_finite()) {
            bail!("every p must be a finite number at least 1");
        }
        if self.m.is_empty() || self.m.contains(&0) {
            bail!("m must be a non-empty list of positive integers");
        }
        for [p, q] in &self.orders {
            if !(*p > -1.0) || !(*q > -1.0) || *p == 0.0 || *q == 0.0 || p > q || !q.is_finite() {
                bail!("radial-mean orders [{p}, {q}] must satisfy -1 < p <= q, both non-zero");
            }
        }
        if !(self.rel_tol > 0.0) || !(self.route_tol > 0.0) {
            bail!("tolerances must be positive");
        }
        if self.shards == 0 {
            bail!("shards must be at least 1");
        }
        if let Some(g) = self.grid {
            if g < 3 {
                bail!("grid must hold at least 3 directions");
            }
        }
        let s = &self.samples;
        if s.tuples == 0
            || s.directions < 2
            || s.chords == 0
            || s.radial == 0
            || s.volume == 0
            || s.star_directions < 2
        {
            bail!("sample budgets must be positive");
        }
        let mut out = Vec::with_capacity(self.bodies.len());
        for entry in &self.bodies {
            let spec = match (&entry.body, &entry.path) {
                (Some(b), None) => b.clone(),
                (None, Some(p)) => BodySpec::from_path(p)?,
                _ => bail!(
                    "body \"{}\" needs exactly one of \"body\" or \"path\"",
                    entry.name
                ),
            };
            let body = spec
                .build()
                .with_context(|| format!("building body \"{}\"", entry.name))?;
            for m in &self.m {
                if body.dim() * m > self.max_nm {
                    bail!(
                        "body \"{}\" has n·m = {} above the cap {}",
                        entry.name,
                        body.dim() * m,
                        self.max_nm
                    );
                }
                self.q.build(*m)?;
            }
            out.push(NamedBody {
                name: entry.name.clone(),
                spec,
                body,
            });
        }
        Ok(out)
    }
}
