//! Acceptance suite. Each test checks one criterion, prints a single
//! `PASS` / `FAIL` line to the terminal (bypassing output capture) and then
//! asserts. A process-wide lock keeps the timed criteria from competing for
//! the CPU.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use plrnet::commands::{run_sweep, run_train};
use plrnet::parallel::Threaded;
use plrnet::LoadedConfig;
use plrnet_core::couplings::ModelKind;
use plrnet_core::datagen::bessel::bessel_jy_all;
use plrnet_core::datagen::microstrip::{
    self, effective_permittivity, guided_wavelength_mm, microstrip_return_loss, reflection_coefficient,
};
use plrnet_core::datagen::rcs::{self, cylinder_rcs, cylinder_rcs_with_terms, electrical_size, n_terms};
use plrnet_core::datagen::sample_box;
use plrnet_core::tensor::{matrix_chain_contract, multi_mode_contract, ring_contract};
use plrnet_core::{Architecture, Dataset, EmbedArch, ModelSpec, SurrogateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

static LOCK: Mutex<()> = Mutex::new(());

type Outcome = Result<String, String>;

fn criterion(id: u32, name: &str, budget: Duration, check: impl FnOnce() -> Outcome) {
    let _guard = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.1?}, budget {budget:?}")),
        other => other,
    };
    let (status, detail) = match &outcome {
        Ok(d) => ("PASS", d.as_str()),
        Err(d) => ("FAIL", d.as_str()),
    };
    let line = format!("[acceptance] criterion {id} {status}: {name} ({detail}; {elapsed:.1?})\n");
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    if let Err(e) = outcome {
        panic!("criterion {id} failed: {e}");
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn criterion_1_gradients_match_finite_differences() {
    criterion(1, "gradient suite", Duration::from_secs(60), || {
        let mut worst = 0.0f64;
        let mut checked = 0;
        for (k, kind) in ModelKind::ALL.into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(200 + k as u64);
            for n in [3, 5] {
                for instance in 0..20 {
                    let spec = random_spec_with_omega(&mut rng, kind, n, &[3, 4], 10.0);
                    let model = random_model(&mut rng, spec);
                    let x = random_vec(&mut rng, n);
                    let (err, at) = gradient_check(&model, &x, 1e-5, 1e-8);
                    ensure(err <= 1e-5, || format!("{kind} N={n} instance {instance}: {err:e} at {at}"))?;
                    worst = worst.max(err);
                    checked += 1;
                }
            }
        }
        Ok(format!("{checked} instances, worst relative error {worst:.1e}"))
    });
}

#[test]
fn criterion_2_contractions_and_forwards_match_loops() {
    criterion(2, "contraction oracles", Duration::from_secs(60), || {
        const TOL: f64 = 1e-12;
        let mut rng = ChaCha8Rng::seed_from_u64(2000);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let order = rng.random_range(1..6);
            let shape: Vec<usize> = (0..order).map(|_| rng.random_range(1..5)).collect();
            let core = random_tensor(&mut rng, &shape);
            let factors: Vec<Vec<f64>> = shape.iter().map(|&n| random_vec(&mut rng, n)).collect();
            let e = rel_err(multi_mode_contract(&core, &factors).unwrap(), naive_full_contract(&core, &factors));
            ensure(e <= TOL, || format!("multi_mode_contract {shape:?}: {e:e}"))?;
            worst = worst.max(e);
        }
        for _ in 0..100 {
            let n = rng.random_range(1..7);
            let mut bonds: Vec<usize> = (0..=n).map(|_| rng.random_range(1..5)).collect();
            let mut train = bonds.clone();
            train[0] = 1;
            train[n] = 1;
            bonds[n] = bonds[0];
            let tt: Vec<_> = train.windows(2).map(|w| random_matrix(&mut rng, w[0], w[1])).collect();
            let tr: Vec<_> = bonds.windows(2).map(|w| random_matrix(&mut rng, w[0], w[1])).collect();
            let tt_ref = naive_chain(&tt.iter().map(rows_of).collect::<Vec<_>>())[0][0];
            let tr_ref = naive_trace(&naive_chain(&tr.iter().map(rows_of).collect::<Vec<_>>()));
            let e1 = rel_err(matrix_chain_contract(&tt).unwrap(), tt_ref);
            let e2 = rel_err(ring_contract(&tr).unwrap(), tr_ref);
            ensure(e1 <= TOL && e2 <= TOL, || format!("chain {e1:e}, ring {e2:e} for bonds {bonds:?}"))?;
            worst = worst.max(e1).max(e2);
        }
        for kind in ModelKind::ALL {
            for _ in 0..100 {
                let n = rng.random_range(2..6);
                let spec = random_spec(&mut rng, kind, n, &[2, 3, 4]);
                let model = random_model(&mut rng, spec);
                let x = random_vec(&mut rng, n);
                let (reference, scale) = naive_forward_with_scale(&model, &x);
                let e = scaled_rel_err(model.predict(&x).unwrap(), reference, scale);
                ensure(e <= TOL, || format!("{kind} forward: {e:e}"))?;
                worst = worst.max(e);
            }
        }
        Ok(format!("800 instances, worst relative gap {worst:.1e}"))
    });
}

#[test]
fn criterion_3_models_recover_their_own_class() {
    criterion(3, "self-consistency recovery", Duration::from_secs(600), || {
        let tmp = tempfile::tempdir().unwrap();
        let evaluator = Threaded::from_env().map_err(|e| e.to_string())?;
        let mut summary = Vec::new();
        for kind in ["tucker", "tt", "tr", "pairwise"] {
            let cfg = LoadedConfig::load(&repo_root().join(format!("configs/synthetic/{kind}.toml"))).map_err(|e| e.to_string())?;
            ensure(cfg.config.train.batch_size.is_none(), || format!("{kind}: config is not full-batch"))?;
            ensure(cfg.config.train.max_epochs <= 5000, || format!("{kind}: more than 5000 epochs"))?;
            ensure(cfg.config.dataset.count == Some(500), || format!("{kind}: not 500 samples"))?;
            let out = run_train(&cfg, &tmp.path().join(kind), &evaluator, evaluator.threads()).map_err(|e| e.to_string())?;
            let m = out.report.metrics.expect("metrics");
            ensure(m.test_mre <= 1e-3, || format!("{kind}: test MRE {:e}", m.test_mre))?;
            summary.push(format!("{kind} {:.1e}", m.test_mre));
        }
        Ok(format!("test MRE {}", summary.join(", ")))
    });
}

#[test]
fn criterion_4_parameter_counts() {
    criterion(4, "parameter-count formulas", Duration::from_secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(4000);
        for i in 0..50 {
            let kind = ModelKind::ALL[i % 5];
            let n = rng.random_range(2..6);
            let spec = random_spec(&mut rng, kind, n, &[1, 2, 3, 4, 5]);
            let model = SurrogateModel::init(spec.clone(), i as u64).unwrap();
            let flat = model.params().len();
            ensure(model.param_count() == flat && spec.param_count() == flat, || {
                format!("{kind}: reported {} / {} vs flat {flat}", model.param_count(), spec.param_count())
            })?;
            ensure(independent_param_count(&spec) == flat, || format!("{kind}: layer walk disagrees"))?;
            if let Architecture::Lrtfr { ranks, .. } = &spec.architecture {
                let core = model.core().unwrap().len();
                ensure(core == ranks.iter().product::<usize>(), || format!("core {core} for {ranks:?}"))?;
            }
        }
        let spec = ModelSpec::new(5, Architecture::Lrtfr { ranks: vec![6; 5], embed: EmbedArch::new(vec![4], 1.0) });
        let core = SurrogateModel::zeros(spec).unwrap().core().unwrap().len();
        ensure(core == 7776, || format!("N=5, r=6 core has {core} entries"))?;
        Ok("50 configs exact; N=5, r=6 core = 7776".into())
    });
}

#[test]
fn criterion_5_microstrip_physics() {
    criterion(5, "microstrip physics", Duration::from_secs(120), || {
        let eps = effective_permittivity(1.0, 2.2);
        let expect = 1.6 + 0.6 / 13f64.sqrt();
        ensure((eps - expect).abs() <= 1e-12 * expect, || format!("eps_eff {eps} vs {expect}"))?;

        let pbox = microstrip::default_box();
        let mut worst_period = 0.0f64;
        let rows = sample_box(&pbox, 2000, 51).unwrap();
        for r in rows.chunks(6) {
            let half = guided_wavelength_mm(r[0], r[1], r[2], r[4]) / 2.0;
            let a = microstrip_return_loss(r[0], r[1], r[2], r[3], r[4], r[5]).unwrap();
            let b = microstrip_return_loss(r[0], r[1], r[2], r[3] + half, r[4], r[5]).unwrap();
            worst_period = worst_period.max(rel_err(a, b));
        }
        ensure(worst_period <= 1e-9, || format!("half-wave periodicity gap {worst_period:e}"))?;

        let rows = sample_box(&pbox, 100_000, 52).unwrap();
        let mut max_gamma = 0.0f64;
        for r in rows.chunks(6) {
            let g = reflection_coefficient(r[0], r[1], r[2], r[3], r[4], r[5]).unwrap().norm();
            max_gamma = max_gamma.max(g);
        }
        ensure(max_gamma <= 1.0, || format!("|Γ| reached {max_gamma}"))?;
        Ok(format!(
            "eps_eff = {eps:.12}; periodicity gap {worst_period:.1e}; max |Γ| {max_gamma:.4} over 1e5 points"
        ))
    });
}

#[test]
fn criterion_6_rcs_generator() {
    criterion(6, "RCS generator", Duration::from_secs(120), || {
        let mut rng = ChaCha8Rng::seed_from_u64(6000);
        let mut worst_sym = 0.0f64;
        let mut worst_trunc = 0.0f64;
        for _ in 0..500 {
            let a = rng.random_range(0.05..2.5);
            let f = rng.random_range(0.1..1.0);
            let ka = electrical_size(a, f);
            if !(ka > rcs::KA_MIN && ka <= 20.0) {
                continue;
            }
            let phi = rng.random_range(-180.0..180.0);
            let p = cylinder_rcs(a, f, phi).unwrap();
            let m = cylinder_rcs(a, f, -phi).unwrap();
            worst_sym = worst_sym.max(rel_err(p, m));
            let n = n_terms(ka);
            let base = 10f64.powf(cylinder_rcs_with_terms(a, f, phi, n).unwrap() / 10.0);
            let double = 10f64.powf(cylinder_rcs_with_terms(a, f, phi, 2 * n).unwrap() / 10.0);
            worst_trunc = worst_trunc.max(rel_err(base, double));
        }
        ensure(worst_sym <= 1e-12, || format!("symmetry gap {worst_sym:e}"))?;
        ensure(worst_trunc <= 1e-10, || format!("truncation change {worst_trunc:e}"))?;

        let mut worst_bessel = 0.0f64;
        for &x in &BESSEL_POINTS {
            let (j, y) = bessel_jy_all(30, x).unwrap();
            for &n in &BESSEL_ORDERS {
                worst_bessel = worst_bessel
                    .max(rel_err(j[n as usize], bessel_j_series(n, x)))
                    .max(rel_err(y[n as usize], bessel_y_series(n, x)));
            }
        }
        ensure(worst_bessel <= 1e-10, || format!("Bessel gap {worst_bessel:e}"))?;
        Ok(format!(
            "symmetry {worst_sym:.1e}, truncation {worst_trunc:.1e}, Bessel vs series {worst_bessel:.1e}"
        ))
    });
}

#[test]
fn criterion_7_plrnet_beats_mlp_on_microstrip() {
    criterion(7, "PLRNet versus MLP on microstrip", Duration::from_secs(30 * 60), || {
        let tmp = tempfile::tempdir().unwrap();
        let dir = repo_root().join("configs/microstrip");
        let paths: Vec<PathBuf> = ["plrnet", "tr", "mlp", "tt", "lrtfr"].iter().map(|k| dir.join(format!("{k}.toml"))).collect();
        let evaluator = Threaded::from_env().map_err(|e| e.to_string())?;
        let sweep = run_sweep(&paths, None, tmp.path(), &evaluator, evaluator.threads()).map_err(|e| e.to_string())?;
        let table = sweep.table.render_text();
        let _ = std::io::stderr().lock().write_all(format!("\n{table}\n").as_bytes());
        ensure(sweep.table.failed().is_empty(), || format!("failed runs:\n{table}"))?;
        for p in &paths {
            let cfg = LoadedConfig::load(p).map_err(|e| e.to_string())?;
            ensure(cfg.config.dataset.count == Some(6000), || format!("{}: not 6000 samples", p.display()))?;
        }
        let row = |kind: ModelKind| sweep.table.rows().iter().find(|r| r.model_kind == kind).expect("row present");
        let plr = row(ModelKind::Plrnet);
        let mlp = row(ModelKind::Mlp);
        for kind in [ModelKind::Lrtfr, ModelKind::Tt, ModelKind::Tr] {
            let r = row(kind);
            let ratio = r.param_count as f64 / plr.param_count as f64;
            ensure((0.75..=1.25).contains(&ratio), || {
                format!("{kind} has {} params, {:.0}% of PLRNet", r.param_count, 100.0 * ratio)
            })?;
        }
        ensure(plr.test_mre <= mlp.test_mre, || format!("PLRNet {:e} > MLP {:e}", plr.test_mre, mlp.test_mre))?;
        Ok(format!("PLRNet MRE {:.2e} <= MLP {:.2e}; low-rank budgets within 25%", plr.test_mre, mlp.test_mre))
    });
}

fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "timing.txt" {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn criterion_8_pipeline_is_byte_reproducible() {
    criterion(8, "determinism", Duration::from_secs(300), || {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = tmp.path().join("run.toml");
        fs::write(
            &cfg,
            r#"
[dataset]
source = "microstrip"
count = 600
seed = 11
split_seed = 12

[model]
kind = "plrnet"
rank = 3
embed = { hidden = [8], omega0 = 1.0 }
predictor = { hidden = [16], omega0 = 1.0 }

[train]
learning_rate = 1e-3
max_epochs = 40
batch_size = 64
seed = 13
"#,
        )
        .unwrap();
        let cfg = cfg.to_str().unwrap();
        let bin = env!("CARGO_BIN_EXE_plrnet");
        let mut trees = Vec::new();
        for run in ["first", "second"] {
            let out = tmp.path().join(run);
            let out = out.to_str().unwrap();
            for args in [
                vec!["generate", "--config", cfg, "--out", out],
                vec!["train", "--config", cfg, "--out", out],
                vec!["eval", "--config", cfg, "--out", out],
            ] {
                let o = Command::new(bin).args(&args).env("PLRNET_THREADS", "2").output().unwrap();
                ensure(o.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))?;
            }
            trees.push(tree_bytes(Path::new(out)));
        }
        let names: Vec<_> = trees[0].iter().map(|(p, _)| p.display().to_string()).collect();
        ensure(trees[0].len() == 6, || format!("too few artifacts: {names:?}"))?;
        ensure(trees[0] == trees[1], || "runs differ".into())?;
        Ok(format!("{} artifacts byte-identical: {}", names.len(), names.join(", ")))
    });
}

#[test]
fn criterion_9_split_contract() {
    criterion(9, "split contract", Duration::from_secs(60), || {
        let raw = microstrip::dataset(&microstrip::default_box(), 6000, 1).unwrap();
        let data = Dataset::split_and_standardize(raw, 2).unwrap();
        let (train, test) = (data.train(), data.test());
        ensure(train.len() == 4200 && test.len() == 1800, || format!("{}/{}", train.len(), test.len()))?;
        let all: BTreeSet<usize> = train.iter().chain(test).copied().collect();
        ensure(all.len() == 6000 && all.iter().next_back() == Some(&5999), || "split does not partition the rows".into())?;
        Ok("6000 rows -> 4200 train / 1800 test, disjoint and covering".into())
    });
}
