//! Subcommand bodies. Each returns the full output document as a string;
//! rows are computed in parallel and emitted in grid order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use disd_core::decompose::{planted_sequential, sequential_residual, DecompositionOptions};
use disd_core::evolve::{eq4_approx, perturbation_data, phase_aligned_distance, Dynamics, Evolution, OneShotUnitary};
use disd_core::locality::{elementwise_max, signaling_sample, tau_estimate, Direction};
use disd_core::model::{initial_state, InitialSpec, ModelSpec};
use disd_core::qcore::info::{mutual_information, vn_entropy};
use disd_core::qcore::linalg::{identity, CMatrix};
use disd_core::qcore::random::{haar_unitary, mix_seed, tags};
use disd_core::qcore::state::{reduced_from_pure, Dims, StateVector, SUBSYSTEM_A, SUBSYSTEM_B};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{matrix, pairs, DimsConfig, Matrices, ModelConfig, Pair, RunConfig};
use crate::error::{CliError, CliResult};

pub const SIMULATE_HEADER: &str = "t,mi_ab_bits,entropy_a_bits,entropy_b_bits,residual_eq4,norm_error";
pub const SWEEP_HEADER: &str = "c1,c2,ratio,lambda_sup,max_residual,tau_est,gap_warnings";
pub const LOCALITY_HEADER: &str = "t,signal_b_to_a,signal_a_to_b,mi_ab_bits";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Observables {
    mi_ab: f64,
    entropy_a: f64,
    entropy_b: f64,
}

fn observables(psi: &StateVector, dims: Dims) -> CliResult<Observables> {
    let f = dims.factors();
    let amps = psi.amplitudes();
    let rho_ab = reduced_from_pure(amps, &f, &[SUBSYSTEM_A, SUBSYSTEM_B])?;
    Ok(Observables {
        mi_ab: mutual_information(&rho_ab, dims.a, dims.b)?,
        entropy_a: vn_entropy(&reduced_from_pure(amps, &f, &[SUBSYSTEM_A])?),
        entropy_b: vn_entropy(&reduced_from_pure(amps, &f, &[SUBSYSTEM_B])?),
    })
}

struct SimRow {
    t: f64,
    obs: Observables,
    residual: f64,
    norm_error: f64,
}

struct Simulation {
    rows: Vec<SimRow>,
    lambda_sup: f64,
    gap_warnings: usize,
}

fn run_simulation(spec: &ModelSpec, init: &InitialSpec, times: &[f64]) -> CliResult<Simulation> {
    let dims = spec.dims();
    let pd = perturbation_data(spec)?;
    let evo = Evolution::new(spec)?;
    let psi0 = initial_state(init, dims)?;
    let rows = times
        .par_iter()
        .map(|&t| {
            let psi = evo.state_at(&psi0, t)?;
            let approx = eq4_approx(spec, init, &pd, t)?;
            Ok(SimRow {
                t,
                obs: observables(&psi, dims)?,
                residual: phase_aligned_distance(&psi, &approx),
                norm_error: (psi.norm() - 1.0).abs(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Simulation {
        rows,
        lambda_sup: pd.lambda_sup,
        gap_warnings: pd.gap_warnings.len(),
    })
}

pub fn simulate(cfg: &RunConfig) -> CliResult<String> {
    let sim = run_simulation(&cfg.model_spec()?, &cfg.initial_spec()?, &cfg.times())?;
    let warn = sim.gap_warnings > 0;
    let mut out = String::from(SIMULATE_HEADER);
    out.push_str(if warn { ",warn\n" } else { "\n" });
    for r in &sim.rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            num(r.t),
            num(r.obs.mi_ab),
            num(r.obs.entropy_a),
            num(r.obs.entropy_b),
            num(r.residual),
            num(r.norm_error)
        );
        out.push_str(if warn { ",1\n" } else { "\n" });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c1: f64,
    pub c2: f64,
    pub ratio: f64,
    pub lambda_sup: f64,
    pub max_residual: f64,
    pub tau_est: Option<f64>,
    pub gap_warnings: usize,
}

pub fn sweep_rows(cfg: &RunConfig) -> CliResult<Vec<SweepRow>> {
    let base = cfg.model_spec()?;
    let init = cfg.initial_spec()?;
    let times = cfg.times();
    let threshold = cfg.locality.threshold_bits;
    cfg.sweep_points()?
        .into_par_iter()
        .map(|(c1, c2)| {
            let spec = base.with_couplings(c1, c2)?;
            let sim = run_simulation(&spec, &init, &times)?;
            let mi: Vec<f64> = sim.rows.iter().map(|r| r.obs.mi_ab).collect();
            Ok(SweepRow {
                c1,
                c2,
                ratio: c2 / c1,
                lambda_sup: sim.lambda_sup,
                max_residual: sim.rows.iter().map(|r| r.residual).fold(0.0, f64::max),
                tau_est: tau_estimate(&times, &mi, threshold)?,
                gap_warnings: sim.gap_warnings,
            })
        })
        .collect()
}

pub fn sweep(cfg: &RunConfig) -> CliResult<String> {
    let rows = sweep_rows(cfg)?;
    let warn = rows.iter().any(|r| r.gap_warnings > 0);
    let mut out = String::from(SWEEP_HEADER);
    out.push_str(if warn { ",warn\n" } else { "\n" });
    for r in &rows {
        let tau = r.tau_est.map(num).unwrap_or_default();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.c1),
            num(r.c2),
            num(r.ratio),
            num(r.lambda_sup),
            num(r.max_residual),
            tau,
            r.gap_warnings
        );
        if warn {
            out.push_str(if r.gap_warnings > 0 { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityRows {
    pub times: Vec<f64>,
    pub signal_b_to_a: Vec<f64>,
    pub signal_a_to_b: Vec<f64>,
    pub mi_ab_bits: Vec<f64>,
}

fn max_signal<D: Dynamics + Sync>(
    dynamics: &D,
    psi0: &StateVector,
    times: &[f64],
    direction: Direction,
    n_samples: usize,
    seed: u64,
) -> CliResult<Vec<f64>> {
    let samples = (0..n_samples as u64)
        .into_par_iter()
        .map(|k| signaling_sample(dynamics, psi0, times, direction, seed, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(elementwise_max(samples))
}

fn locality_on<D: Dynamics + Sync>(dynamics: &D, cfg: &RunConfig) -> CliResult<LocalityRows> {
    let dims = dynamics.dims();
    let psi0 = initial_state(&cfg.initial_spec()?, dims)?;
    let times = cfg.times();
    let (n, seed) = (cfg.locality.n_samples, cfg.seed);
    let mi_ab_bits = times
        .par_iter()
        .map(|&t| Ok(observables(&dynamics.evolve(&psi0, t)?, dims)?.mi_ab))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(LocalityRows {
        signal_b_to_a: max_signal(dynamics, &psi0, &times, Direction::BToA, n, seed)?,
        signal_a_to_b: max_signal(dynamics, &psi0, &times, Direction::AToB, n, seed)?,
        mi_ab_bits,
        times,
    })
}

pub fn locality_rows(cfg: &RunConfig) -> CliResult<LocalityRows> {
    if cfg.model == ModelConfig::PlantedSequential {
        let dims = cfg.core_dims()?;
        let dynamics = OneShotUnitary::new(dims, planted_sequential(dims, cfg.seed))?;
        locality_on(&dynamics, cfg)
    } else {
        locality_on(&Evolution::new(&cfg.model_spec()?)?, cfg)
    }
}

pub fn locality(cfg: &RunConfig) -> CliResult<String> {
    let rows = locality_rows(cfg)?;
    let mut out = String::from(LOCALITY_HEADER);
    out.push('\n');
    for k in 0..rows.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(rows.times[k]),
            num(rows.signal_b_to_a[k]),
            num(rows.signal_a_to_b[k]),
            num(rows.mi_ab_bits[k])
        );
    }
    Ok(out)
}

/// A dense unitary on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<DimsConfig>,
    pub matrix: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySource {
    File(std::path::PathBuf),
    Plant(u64),
    Haar(u64),
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposeReport {
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_ac: Option<Vec<Vec<Pair>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_cb: Option<Vec<Vec<Pair>>>,
}

fn load_unitary(path: &Path, dims: Dims) -> CliResult<(CMatrix, Dims)> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        context: "reading unitary",
        path: path.to_path_buf(),
        source,
    })?;
    let file: UnitaryFile = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let dims = match file.dims {
        Some(d) => Dims::new(d.a, d.c, d.b)?,
        None => dims,
    };
    Ok((matrix("matrix", &file.matrix, dims.total())?, dims))
}

pub fn decompose(
    source: &UnitarySource,
    dims: Dims,
    opts: &DecompositionOptions,
    dump_factors: bool,
) -> CliResult<String> {
    let (u, dims) = match source {
        UnitarySource::File(p) => load_unitary(p, dims)?,
        UnitarySource::Plant(seed) => (planted_sequential(dims, *seed), dims),
        UnitarySource::Haar(seed) => (haar_unitary(dims.total(), mix_seed(*seed, tags::HAAR, 0)), dims),
        UnitarySource::Identity => (identity(dims.total()), dims),
    };
    let r = sequential_residual(&u, dims, opts)?;
    let report = DecomposeReport {
        residual: r.residual,
        iterations: r.iterations,
        converged: r.converged,
        restarts_used: r.restarts_used,
        v_ac: dump_factors.then(|| pairs(&r.v_ac)),
        w_cb: dump_factors.then(|| pairs(&r.w_cb)),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok(text)
}

/// The configured model as an `explicit` config document.
pub fn make_model(cfg: &RunConfig) -> CliResult<String> {
    let spec = cfg.model_spec()?;
    let mut dumped = cfg.clone();
    dumped.model = ModelConfig::Explicit {
        matrices: Matrices::from_terms(spec.terms()),
        normalize_shapes: false,
    };
    dumped.sweep = None;
    let mut text = dumped.to_json();
    text.push('\n');
    Ok(text)
}

/// Writes to `path`, or standard output when absent.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            context: "writing output",
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                context: "writing output",
                path: "<stdout>".into(),
                source,
            })
        }
    }
}
