//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances are pinned below.

use std::process::{Command, ExitCode};

use disd::commands::{locality_rows, simulate, sweep_rows};
use disd::RunConfig;
use disd_core::decompose::{planted_sequential, sequential_residual, DecompositionOptions};
use disd_core::evolve::{perturbation_data, uniform_times, Evolution, OneShotUnitary};
use disd_core::locality::{signaling_test, Direction};
use disd_core::model::{build_canonical, initial_state, random_initial, ModelSpec};
use disd_core::qcore::linalg::unitarity_deviation;
use disd_core::qcore::random::{haar_unitary, mix_seed, tags};
use disd_core::qcore::state::Dims;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde_json::json;
use tempfile::TempDir;

/// Seed used by every canonical-model criterion.
const DEFAULT_SEED: u64 = 0;

const SLOPE_RANGE: (f64, f64) = (-1.3, -0.7);
const EXACT_MI_TOL: f64 = 1e-10;
const EXACT_SIGNAL_TOL: f64 = 1e-10;
const EXACT_RESIDUAL_TOL: f64 = 1e-9;
const MI_THRESHOLD_BITS: f64 = 0.01;
const ONE_WAY_SIGNAL: f64 = 1e-3;
const SEQUENTIAL_TOL: f64 = 1e-6;
/// Floor from 100 Haar unitaries on (2,2,2) (observed minimum 0.190).
const HAAR_RESIDUAL_FLOOR: f64 = 0.15;
const ORACLE_TOL: f64 = 1e-9;
const UNITARITY_TOL: f64 = 1e-10;
const NORM_DRIFT_TOL: f64 = 1e-9;
const ENERGY_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(dims: (usize, usize, usize), c1: f64, c2: f64, t_max: f64, steps: usize) -> RunConfig {
    let v = json!({
        "dims": {"a": dims.0, "c": dims.1, "b": dims.2},
        "seed": DEFAULT_SEED,
        "couplings": {"c1": c1, "c2": c2},
        "time": {"t_max": t_max, "steps": steps},
        "locality": {"n_samples": 64, "threshold_bits": MI_THRESHOLD_BITS},
    });
    RunConfig::from_json(&v.to_string()).unwrap()
}

fn with_c1_sweep(mut cfg: RunConfig, c1s: &[f64]) -> RunConfig {
    cfg.sweep = Some(disd::config::SweepConfig {
        c1_values: Some(c1s.to_vec()),
        ratio_values: None,
    });
    cfg
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

fn in_slope_range(s: f64) -> bool {
    (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&s)
}

/// Average ranks, ties shared.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut r = vec![0.0; v.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut end = k;
        while end + 1 < idx.len() && v[idx[end + 1]] == v[idx[k]] {
            end += 1;
        }
        for &i in &idx[k..=end] {
            r[i] = (k + end) as f64 / 2.0 + 1.0;
        }
        k = end + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

const SCALING_GRID: [f64; 5] = [1.0, 4.0, 16.0, 64.0, 256.0];

fn scaling_sweep() -> Vec<disd::commands::SweepRow> {
    let cfg = with_c1_sweep(config((2, 3, 3), 1.0, 0.05, 5.0, 200), &SCALING_GRID);
    sweep_rows(&cfg).unwrap()
}

fn residual_scaling() -> Outcome {
    let rows = scaling_sweep();
    let res: Vec<f64> = rows.iter().map(|r| r.max_residual).collect();
    let slope = loglog_slope(&SCALING_GRID, &res);
    outcome(
        in_slope_range(slope),
        format!("slope of max residual vs c1 = {slope:.3}; max residuals {}", sci(&res)),
    )
}

fn lambda_scaling() -> Outcome {
    let rows = scaling_sweep();
    let lam: Vec<f64> = rows.iter().map(|r| r.lambda_sup).collect();
    let warnings: usize = rows.iter().map(|r| r.gap_warnings).sum();
    let slope = loglog_slope(&SCALING_GRID, &lam);
    outcome(
        in_slope_range(slope) && warnings == 0,
        format!("slope of lambda_sup vs c1 = {slope:.3}; gap warnings = {warnings}"),
    )
}

fn exact_decoupling() -> Outcome {
    let cfg = config((2, 3, 3), 4.0, 0.0, 20.0, 101);
    let csv = simulate(&cfg).unwrap();
    let mut max_mi = 0.0f64;
    let mut max_res = 0.0f64;
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        max_mi = max_mi.max(f[1]);
        max_res = max_res.max(f[4]);
    }
    let loc = locality_rows(&cfg).unwrap();
    let max_sig = loc.signal_b_to_a.iter().cloned().fold(0.0, f64::max);
    outcome(
        max_mi <= EXACT_MI_TOL && max_sig <= EXACT_SIGNAL_TOL && max_res <= EXACT_RESIDUAL_TOL,
        format!("max I(A:B) = {max_mi:.2e}, max signal B->A = {max_sig:.2e}, max residual = {max_res:.2e}"),
    )
}

fn correlation_onset() -> Outcome {
    let c1s = [1.0, 2.0, 4.0, 8.0, 16.0];
    let cfg = with_c1_sweep(config((2, 3, 3), 1.0, 0.2, 4000.0, 20001), &c1s);
    let taus: Vec<Option<f64>> = sweep_rows(&cfg).unwrap().iter().map(|r| r.tau_est).collect();
    let keyed: Vec<f64> = taus.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
    let rho = spearman(&c1s, &keyed);

    let short = config((2, 3, 3), 1.0, 0.2, 50.0, 501);
    let spec = short.model_spec().unwrap();
    let evo = Evolution::new(&spec).unwrap();
    let psi0 = initial_state(&short.initial_spec().unwrap(), spec.dims()).unwrap();
    let traj = evo.propagate(&psi0, &short.times()).unwrap();
    let max_mi = disd_core::locality::mi_trajectory(&traj)
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max);
    let shown: Vec<String> = taus
        .iter()
        .map(|t| t.map_or("none".into(), |v| format!("{v:.1}")))
        .collect();
    outcome(
        rho == 1.0 && max_mi > MI_THRESHOLD_BITS,
        format!(
            "tau(c1 = 1,2,4,8,16) = [{}], Spearman = {rho:.2}; max I(A:B) on T = 50 at c1 = 1: {max_mi:.3} bits",
            shown.join(", ")
        ),
    )
}

fn sequential_locality() -> Outcome {
    let dims = Dims::new(2, 2, 2).unwrap();
    let mut worst_ba = 0.0f64;
    let mut best_ab = 0.0f64;
    for seed in 0..10 {
        let dynamics = OneShotUnitary::new(dims, planted_sequential(dims, seed)).unwrap();
        let psi0 = initial_state(&random_initial(dims, seed), dims).unwrap();
        let ba = signaling_test(&dynamics, &psi0, &[0.0], Direction::BToA, 64, seed).unwrap();
        let ab = signaling_test(&dynamics, &psi0, &[0.0], Direction::AToB, 64, seed).unwrap();
        worst_ba = worst_ba.max(ba[0]);
        best_ab = best_ab.max(ab[0]);
    }
    outcome(
        worst_ba <= EXACT_SIGNAL_TOL && best_ab > ONE_WAY_SIGNAL,
        format!("max signal B->A = {worst_ba:.2e} over 10x64 samples; max signal A->B = {best_ab:.3}"),
    )
}

fn decomposition_recovery() -> Outcome {
    let dims = Dims::new(2, 2, 2).unwrap();
    let opts = DecompositionOptions::default();
    let planted_worst = (0..20)
        .map(|s| sequential_residual(&planted_sequential(dims, s), dims, &opts).unwrap().residual)
        .fold(0.0, f64::max);
    // Seeds 100..119 lie outside the 0..99 range used to fix the floor.
    let haar_min = (100..120)
        .map(|s| {
            let u = haar_unitary(8, mix_seed(s, tags::HAAR, 0));
            sequential_residual(&u, dims, &opts).unwrap().residual
        })
        .fold(f64::INFINITY, f64::min);
    outcome(
        planted_worst <= SEQUENTIAL_TOL && haar_min > HAAR_RESIDUAL_FLOOR,
        format!("worst planted residual = {planted_worst:.2e}; min Haar residual = {haar_min:.3} (floor {HAAR_RESIDUAL_FLOOR})"),
    )
}

type M = DMatrix<Complex64>;

fn sorted_eigen(m: &M) -> (Vec<f64>, M) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = M::from_fn(m.nrows(), m.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Second-order sum over the degenerate eigenspaces of `c1·(I⊗h_cb)`.
fn brute_force_lambda(spec: &ModelSpec) -> Vec<Vec<f64>> {
    let d = spec.dims();
    let h0 = M::identity(d.a, d.a).kronecker(spec.h_cb()) * Complex64::new(spec.c1(), 0.0);
    let v = spec.h_ac().kronecker(&M::identity(d.b, d.b)) * Complex64::new(spec.c2(), 0.0);
    let a0 = M::from_fn(d.a, d.a, |x, y| spec.h_ac()[(x * d.c, y * d.c)]);
    let b0 = M::from_fn(d.b, d.b, |x, y| spec.h_cb()[(x, y)]);
    let (_, a_vecs) = sorted_eigen(&a0);
    let (b_vals, b_vecs) = sorted_eigen(&b0);
    let (h_vals, h_vecs) = sorted_eigen(&h0);
    let mut spaces: Vec<(f64, M)> = Vec::new();
    for (k, &e) in h_vals.iter().enumerate() {
        let col = h_vecs.column(k).into_owned();
        let proj = &col * col.adjoint();
        match spaces.last_mut() {
            Some((e0, p)) if (*e0 - e).abs() < 1e-9 => *p += proj,
            _ => spaces.push((e, proj)),
        }
    }
    let mut c0 = DVector::<Complex64>::zeros(d.c);
    c0[0] = Complex64::new(1.0, 0.0);
    (0..d.a)
        .map(|i| {
            (0..d.b)
                .map(|j| {
                    let psi = a_vecs.column(i).into_owned().kronecker(&c0).kronecker(&b_vecs.column(j).into_owned());
                    let e = spec.c1() * b_vals[j];
                    let vpsi = &v * &psi;
                    spaces
                        .iter()
                        .filter(|(ek, _)| (ek - e).abs() >= 1e-9)
                        .map(|(ek, p)| vpsi.dotc(&(p * &vpsi)).re / (e - ek))
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let dims = Dims::new(2, 2, 2).unwrap();
    let spec = build_canonical(dims, DEFAULT_SEED, 2.0, 0.3).unwrap();
    let pd = perturbation_data(&spec).unwrap();
    let oracle = brute_force_lambda(&spec);
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((pd.lambda(i, j) - oracle[i][j]).abs());
        }
    }
    outcome(
        worst <= ORACLE_TOL,
        format!("max |lambda - oracle| = {worst:.2e} (lambda_sup = {:.3e})", pd.lambda_sup),
    )
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_disd")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn numerical_hygiene() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let (mut unitarity, mut drift, mut energy) = (0.0f64, 0.0f64, 0.0f64);
    let (mut min_entropy, mut mi_excess) = (f64::INFINITY, f64::NEG_INFINITY);
    for (dims, c1) in [((2, 3, 3), 1.0), ((2, 3, 3), 256.0), ((2, 2, 2), 16.0), ((3, 2, 3), 4.0)] {
        let cfg = config(dims, c1, 0.2, 30.0, 61);
        let spec = cfg.model_spec().unwrap();
        let evo = Evolution::new(&spec).unwrap();
        let psi0 = initial_state(&cfg.initial_spec().unwrap(), spec.dims()).unwrap();
        let e0 = evo.energy(&psi0);
        for &t in &uniform_times(30.0, 7) {
            unitarity = unitarity.max(unitarity_deviation(&evo.propagator().unitary(t)));
        }
        let traj = evo.propagate(&psi0, &cfg.times()).unwrap();
        for psi in traj.states() {
            drift = drift.max((psi.norm() - 1.0).abs());
            energy = energy.max((evo.energy(psi) - e0).abs());
        }
        let csv = simulate(&cfg).unwrap();
        let bound = 2.0 * (dims.0.min(dims.2) as f64).log2();
        for line in csv.lines().skip(1) {
            let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            min_entropy = min_entropy.min(f[2]).min(f[3]).min(f[1]);
            mi_excess = mi_excess.max(f[1] - bound);
        }
    }
    pass &= unitarity <= UNITARITY_TOL && drift <= NORM_DRIFT_TOL && energy <= ENERGY_TOL;
    pass &= min_entropy >= 0.0 && mi_excess <= 0.0;
    notes.push(format!(
        "unitarity {unitarity:.1e}, norm drift {drift:.1e}, energy drift {energy:.1e}, min entropy/MI {min_entropy:.1e}, MI - bound <= {mi_excess:.2}"
    ));

    let dir = TempDir::new().unwrap();
    let mut cfg = with_c1_sweep(config((2, 3, 3), 4.0, 0.1, 10.0, 41), &[2.0, 8.0]);
    cfg.locality.n_samples = 8;
    let path = dir.path().join("run.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    let p = path.to_str().unwrap();
    let mut identical = true;
    for args in [
        vec!["simulate", "--config", p],
        vec!["sweep", "--config", p],
        vec!["locality", "--config", p],
        vec!["make-model", "--config", p],
        vec!["decompose", "--haar", "seed=3"],
    ] {
        identical &= run_cli(&args) == run_cli(&args);
    }
    pass &= identical;
    notes.push(format!("byte-identical reruns: {identical}"));
    outcome(pass, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 residual scaling", residual_scaling),
        ("2 lambda scaling", lambda_scaling),
        ("3 exact decoupling at c2 = 0", exact_decoupling),
        ("4 correlation onset", correlation_onset),
        ("5 sequential locality", sequential_locality),
        ("6 decomposition recovery", decomposition_recovery),
        ("7 perturbation oracle", oracle_equivalence),
        ("8 numerical hygiene", numerical_hygiene),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
