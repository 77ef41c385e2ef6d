//! JSON run configuration. Matrices are nested row lists of `[re, im]`
//! pairs; complex vectors are lists of `[re, im]` pairs.

use std::fs;
use std::path::Path;

use disd_core::evolve::uniform_times;
use disd_core::model::{build_canonical, random_initial, InitialSpec, ModelSpec, ModelTerms};
use disd_core::qcore::linalg::{c64, CMatrix, CVector};
use disd_core::qcore::state::Dims;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsConfig {
    pub a: usize,
    pub c: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrices {
    pub h_a: Vec<Vec<Pair>>,
    pub h_c: Vec<Vec<Pair>>,
    pub h_b: Vec<Vec<Pair>>,
    pub h_ac: Vec<Vec<Pair>>,
    pub h_cb: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    #[default]
    DisdCanonical,
    Explicit {
        matrices: Matrices,
        /// Rescale `h_ac` and `h_cb` to unit spectral norm on load.
        #[serde(default)]
        normalize_shapes: bool,
    },
    /// `(I⊗W)(V⊗I)` from seeded Haar factors, applied once. Valid only for
    /// the `locality` command.
    PlantedSequential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub alpha: Vec<Pair>,
    pub chi: Vec<Pair>,
    #[serde(default)]
    pub robust_index: usize,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalityConfig {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_threshold")]
    pub threshold_bits: f64,
}

fn default_samples() -> usize {
    disd_core::locality::DEFAULT_SAMPLES
}

fn default_threshold() -> f64 {
    disd_core::locality::DEFAULT_THRESHOLD_BITS
}

impl Default for LocalityConfig {
    fn default() -> Self {
        Self {
            n_samples: default_samples(),
            threshold_bits: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1_values: Option<Vec<f64>>,
    /// `c2/c1` values at the configured `c2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dims: DimsConfig,
    #[serde(default)]
    pub seed: u64,
    pub couplings: Couplings,
    #[serde(default)]
    pub model: ModelConfig,
    /// Seeded random `α`, `χ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    pub time: TimeConfig,
    #[serde(default)]
    pub locality: LocalityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            context: "reading config",
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        self.core_dims()?;
        if !(self.time.t_max > 0.0) || !self.time.t_max.is_finite() {
            return Err(config_err("time.t_max must be positive and finite"));
        }
        if self.time.steps < 2 {
            return Err(config_err("time.steps must be at least 2"));
        }
        if !(self.couplings.c1 > 0.0) || !self.couplings.c1.is_finite() {
            return Err(config_err("couplings.c1 must be positive and finite"));
        }
        if !(self.couplings.c2 >= 0.0) || !self.couplings.c2.is_finite() {
            return Err(config_err("couplings.c2 must be non-negative and finite"));
        }
        if self.locality.n_samples == 0 {
            return Err(config_err("locality.n_samples must be at least 1"));
        }
        if !(self.locality.threshold_bits > 0.0) {
            return Err(config_err("locality.threshold_bits must be positive"));
        }
        if let Some(out) = &self.output {
            if out.format != "csv" {
                return Err(config_err(format!("unsupported output format {:?}", out.format)));
            }
        }
        Ok(())
    }

    pub fn core_dims(&self) -> CliResult<Dims> {
        Ok(Dims::new(self.dims.a, self.dims.c, self.dims.b)?)
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_times(self.time.t_max, self.time.steps)
    }

    pub fn robust_index(&self) -> usize {
        self.initial.as_ref().map_or(0, |i| i.robust_index)
    }

    /// The Hamiltonian model. Fails for the planted-sequential family.
    pub fn model_spec(&self) -> CliResult<ModelSpec> {
        let dims = self.core_dims()?;
        let Couplings { c1, c2 } = self.couplings;
        match &self.model {
            ModelConfig::DisdCanonical => {
                if self.robust_index() != 0 {
                    return Err(config_err("the canonical family uses robust_index 0"));
                }
                Ok(build_canonical(dims, self.seed, c1, c2)?)
            }
            ModelConfig::Explicit {
                matrices,
                normalize_shapes,
            } => {
                let terms = ModelTerms {
                    h_a: matrix("h_a", &matrices.h_a, dims.a)?,
                    h_c: matrix("h_c", &matrices.h_c, dims.c)?,
                    h_b: matrix("h_b", &matrices.h_b, dims.b)?,
                    h_ac: matrix("h_ac", &matrices.h_ac, dims.ac())?,
                    h_cb: matrix("h_cb", &matrices.h_cb, dims.cb())?,
                };
                let terms = if *normalize_shapes { terms.normalize_shapes() } else { terms };
                Ok(ModelSpec::new(dims, terms, c1, c2, self.robust_index())?)
            }
            ModelConfig::PlantedSequential => Err(config_err(
                "the planted-sequential family has no Hamiltonian; it is accepted by `locality` only",
            )),
        }
    }

    pub fn initial_spec(&self) -> CliResult<InitialSpec> {
        let dims = self.core_dims()?;
        let Some(init) = &self.initial else {
            return Ok(random_initial(dims, self.seed));
        };
        if init.alpha.len() != dims.a || init.chi.len() != dims.b {
            return Err(config_err(format!(
                "initial amplitudes need {} alpha and {} chi entries, got {} and {}",
                dims.a,
                dims.b,
                init.alpha.len(),
                init.chi.len()
            )));
        }
        if init.robust_index >= dims.c {
            return Err(config_err("initial.robust_index out of range"));
        }
        let alpha = vector(&init.alpha);
        let chi = vector(&init.chi);
        let spec = if init.normalize {
            InitialSpec::normalized(alpha, chi, init.robust_index)
        } else {
            InitialSpec::new(alpha, chi, init.robust_index)
        };
        Ok(spec?)
    }

    /// `(c1, c2)` for every sweep point, in grid order.
    pub fn sweep_points(&self) -> CliResult<Vec<(f64, f64)>> {
        let sweep = self.sweep.as_ref().ok_or_else(|| config_err("missing sweep block"))?;
        let c2 = self.couplings.c2;
        let points: Vec<(f64, f64)> = match (&sweep.c1_values, &sweep.ratio_values) {
            (Some(c1s), None) => c1s.iter().map(|&c1| (c1, c2)).collect(),
            (None, Some(ratios)) => {
                if !(c2 > 0.0) {
                    return Err(config_err("ratio_values needs a positive couplings.c2"));
                }
                ratios.iter().map(|&r| (c2 / r, c2)).collect()
            }
            _ => return Err(config_err("sweep needs exactly one of c1_values or ratio_values")),
        };
        if points.is_empty() {
            return Err(config_err("sweep list is empty"));
        }
        if points.iter().any(|&(c1, _)| !(c1 > 0.0) || !c1.is_finite()) {
            return Err(config_err("sweep values must give positive finite c1"));
        }
        Ok(points)
    }
}

pub fn vector(pairs: &[Pair]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|p| c64(p[0], p[1])))
}

pub fn matrix(name: &str, rows: &[Vec<Pair>], dim: usize) -> CliResult<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(config_err(format!("{name} must be {dim}x{dim}")));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| c64(rows[r][c][0], rows[r][c][1])))
}

pub fn pairs(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

impl Matrices {
    pub fn from_terms(terms: &ModelTerms) -> Self {
        Self {
            h_a: pairs(&terms.h_a),
            h_c: pairs(&terms.h_c),
            h_b: pairs(&terms.h_b),
            h_ac: pairs(&terms.h_ac),
            h_cb: pairs(&terms.h_cb),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dims": {"a": 2, "c": 2, "b": 2},
        "seed": 3,
        "couplings": {"c1": 4.0, "c2": 0.1},
        "time": {"t_max": 1.0, "steps": 3}
    }"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.model, ModelConfig::DisdCanonical);
        assert_eq!(cfg.locality, LocalityConfig::default());
        assert_eq!(cfg.times(), vec![0.0, 0.5, 1.0]);
        assert!(cfg.model_spec().is_ok());
        assert!(cfg.initial_spec().is_ok());
    }

    #[test]
    fn invariants_rejected() {
        for (from, to) in [
            ("\"steps\": 3", "\"steps\": 1"),
            ("\"t_max\": 1.0", "\"t_max\": 0.0"),
            ("\"c1\": 4.0", "\"c1\": -1.0"),
            ("\"a\": 2", "\"a\": 1"),
        ] {
            let bad = MINIMAL.replace(from, to);
            assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Config(_))), "{to}");
        }
        assert!(RunConfig::from_json("{").is_err());
        assert!(RunConfig::from_json(&MINIMAL.replace("\"seed\"", "\"sead\"")).is_err());
    }

    #[test]
    fn sweep_points_follow_grid() {
        let mut cfg = RunConfig::from_json(MINIMAL).unwrap();
        cfg.sweep = Some(SweepConfig {
            c1_values: None,
            ratio_values: Some(vec![0.1, 0.01]),
        });
        let pts = cfg.sweep_points().unwrap();
        assert!((pts[0].0 - 1.0).abs() < 1e-12 && (pts[1].0 - 10.0).abs() < 1e-12);
        cfg.sweep = Some(SweepConfig {
            c1_values: Some(vec![]),
            ratio_values: None,
        });
        assert!(cfg.sweep_points().is_err());
    }

    #[test]
    fn explicit_matrices_round_trip() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let spec = cfg.model_spec().unwrap();
        let mut explicit = cfg.clone();
        explicit.model = ModelConfig::Explicit {
            matrices: Matrices::from_terms(spec.terms()),
            normalize_shapes: false,
        };
        let reloaded = RunConfig::from_json(&explicit.to_json()).unwrap();
        assert_eq!(reloaded.model_spec().unwrap(), spec);
    }
}
