//! One function per command. Random draws happen sequentially from the job
//! seed before any parallel work, so artifacts do not depend on thread count.

use std::fmt::Write as _;
use std::path::PathBuf;

use hypstab::boundary::{negative_space, Frequency};
use hypstab::classify::{classify_glancing, classify_regularity, multiplicities, real_roots, ClassifyOptions, GlancingReport};
use hypstab::estimate::{estimate_probe, Forcing, ProbeOptions};
use hypstab::grid::FrequencyGrid;
use hypstab::lopatinski::{uniform_scan, uniform_scan_with, BoundaryProblem, ScanConfig, ScanResult};
use hypstab::models::shock::{majda_lopatinski, ShockProblem, FIELD_DIRECTION};
use hypstab::models::mhd_system_in_frame;
use hypstab::normal_form::two_by_two_problem;
use hypstab::symbol::checks::{check_friedrichs, check_hyperbolic, check_noncharacteristic};
use hypstab::symmetrizer::{friedrichs_identity_defect, sign_check, SymmetrizerCandidate};
use hypstab::{CVec, Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{CommandKind, JobConfig};
use crate::output::{emit_plot_data, num, write_json, write_table};
use crate::registry::{resolve, Model};
use crate::{CliError, Outcome, Status};

pub fn dispatch(command: CommandKind, cfg: &JobConfig) -> Result<Outcome, CliError> {
    match command {
        CommandKind::Classify => classify(cfg),
        CommandKind::Scan => scan(cfg),
        CommandKind::Shock => shock(cfg),
        CommandKind::Verify => verify(cfg),
        CommandKind::Probe => probe(cfg),
        CommandKind::Demo => demo(cfg),
    }
}

fn metadata(cfg: &JobConfig, command: CommandKind) -> serde_json::Value {
    json!({
        "tool": "hypstab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "model": cfg.model,
        "seed": cfg.seed,
    })
}

pub fn grid_for(total: usize) -> FrequencyGrid {
    if total == 0 {
        FrequencyGrid { directions: 0, gammas: FrequencyGrid::with_total(5).gammas }
    } else {
        FrequencyGrid::with_total(total)
    }
}

fn scan_config(cfg: &JobConfig) -> ScanConfig {
    ScanConfig { grid: grid_for(cfg.grid), gamma_floor: cfg.gamma_floor, refine: cfg.refine, ..ScanConfig::default() }
}

fn shock_scan(sp: &ShockProblem, sc: &ScanConfig) -> ScanResult {
    let opts = sc.options.clone();
    let eval = move |z: &Frequency| majda_lopatinski(sp, z, &opts);
    uniform_scan_with(&eval, 2, sc)
}

fn scan_model(model: &Model, sc: &ScanConfig) -> (ScanResult, usize) {
    match model {
        Model::Boundary { problem, .. } => (uniform_scan(problem, sc), problem.dim_eta()),
        Model::Shock { shock, .. } => (shock_scan(shock, sc), 2),
    }
}

fn fmt_opt(x: f64) -> String {
    if x.is_finite() { format!("{x:.6e}") } else { "none".into() }
}

fn scan(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let model = resolve(&cfg.model, &cfg.params)?;
    let sc = scan_config(cfg);
    let (r, dim_eta) = scan_model(&model, &sc);
    let dir = cfg.out_dir();
    let artifacts = emit_plot_data(&r, dim_eta, &dir, "scan", metadata(cfg, CommandKind::Scan))?;
    let failed = r.points.iter().filter(|p| p.error.is_some()).count();
    let min = r.overall_min();
    let mut s = String::new();
    let _ = writeln!(s, "model            {}", model.name());
    let _ = writeln!(s, "grid points      {}", r.points.len());
    let _ = writeln!(s, "failed points    {failed}");
    let _ = writeln!(s, "min |D|          {}", fmt_opt(min));
    if let Some(z) = &r.argmin {
        let _ = writeln!(s, "argmin           tau={:.6} eta={:?} gamma={:.3e}", z.tau, z.eta, z.gamma);
    }
    let negative = !r.points.is_empty() && !(min > cfg.threshold);
    let _ = writeln!(s, "uniform          {}", if negative { "FAILS" } else { "holds" });
    let status = if negative { Status::Negative } else { Status::Success };
    Ok(Outcome { status, summary: s, artifacts })
}

#[derive(Serialize)]
struct RootRow {
    tau: f64,
    xi: Vec<f64>,
    algebraic: Option<usize>,
    geometric: Option<usize>,
    semi_simple: Option<bool>,
    regularity: Option<hypstab::classify::Regularity>,
    glancing: Option<GlancingReport>,
    errors: Vec<String>,
}

fn classify(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let point = cfg.point.as_ref().ok_or_else(|| CliError::Config("point: classify needs a point".into()))?;
    let model = resolve(&cfg.model, &cfg.params)?;
    let sys = match (&model, &point.state) {
        (Model::Boundary { state: Some(_), .. }, Some(st)) => {
            st.validate()?;
            mhd_system_in_frame(st, cfg.params.frame_speed.unwrap_or(0.0), [0.0; 2])
        }
        (_, Some(_)) => return Err(CliError::Config("point.U: this model has no fluid state".into())),
        _ => model.system(),
    };
    if point.xi.len() != sys.space_dim() {
        return Err(CliError::Config(format!("point.xi: expected {} components, found {}", sys.space_dim(), point.xi.len())));
    }
    let opts = ClassifyOptions::default();
    let roots: Vec<f64> = match point.tau {
        Some(t) => vec![t],
        None => real_roots(&sys, &point.xi, opts.cluster_tol)?.into_iter().map(|(t, _)| t).collect(),
    };
    let rows: Vec<RootRow> = roots
        .par_iter()
        .map(|&tau| {
            let mut errors = Vec::new();
            let m = multiplicities(&sys, tau, &point.xi, &opts).map_err(|e| errors.push(format!("multiplicity: {e}"))).ok();
            let reg = classify_regularity(&sys, tau, &point.xi, &opts)
                .map_err(|e| errors.push(format!("regularity: {e}")))
                .ok();
            let gl = match &m {
                Some(m) if m.algebraic > 1 => {
                    classify_glancing(&sys, tau, &point.xi, &opts).map_err(|e| errors.push(format!("glancing: {e}"))).ok()
                }
                _ => None,
            };
            RootRow {
                tau,
                xi: point.xi.clone(),
                algebraic: m.as_ref().map(|m| m.algebraic),
                geometric: m.as_ref().map(|m| m.geometric),
                semi_simple: m.as_ref().map(|m| m.semi_simple),
                regularity: reg.map(|r| r.regularity),
                glancing: gl,
                errors,
            }
        })
        .collect();
    let dir = cfg.out_dir();
    let path = dir.join("classify.json");
    write_json(&path, &json!({ "roots": rows, "metadata": metadata(cfg, CommandKind::Classify) }))?;
    let mut s = String::new();
    let _ = writeln!(s, "{:>22} {:>4} {:>4} {:<28} {}", "tau", "alg", "geo", "regularity", "glancing");
    let mut fatal = false;
    for r in &rows {
        let reg = r.regularity.map(|g| format!("{g:?}")).unwrap_or_else(|| "error".into());
        let gl = r.glancing.as_ref().map(|g| format!("{:?}", g.class)).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:>22.15e} {:>4} {:>4} {:<28} {}",
            r.tau,
            r.algebraic.map(|v| v.to_string()).unwrap_or("?".into()),
            r.geometric.map(|v| v.to_string()).unwrap_or("?".into()),
            reg,
            gl
        );
        for e in &r.errors {
            let _ = writeln!(s, "    {e}");
        }
        fatal |= r.regularity.is_none();
    }
    if roots.is_empty() {
        let _ = writeln!(s, "no real roots over xi");
    }
    let status = if fatal { Status::Failure } else { Status::Success };
    Ok(Outcome { status, summary: s, artifacts: vec![path] })
}

fn shock(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let model = resolve(&cfg.model, &cfg.params)?;
    let Model::Shock { shock: sp, euler, family, .. } = &model else {
        return Err(CliError::Config(format!("model: '{}' is not a shock model", cfg.model)));
    };
    let sc = scan_config(cfg);
    let dir = cfg.out_dir();
    let base = shock_scan(sp, &sc);
    let mut artifacts = emit_plot_data(&base, 2, &dir, "shock_scan", metadata(cfg, CommandKind::Shock))?;
    let mut s = String::new();
    let _ = writeln!(s, "model            {}", model.name());
    let _ = writeln!(s, "sigma            {:.12}", sp.sigma);
    let _ = writeln!(s, "RH defect        {:.3e}", sp.rh_defect());
    let _ = writeln!(s, "Lax count        {:?}", sp.lax_count());
    let _ = writeln!(s, "min |D|          {}", fmt_opt(base.overall_min()));
    let mut negative = !base.points.is_empty() && !(base.overall_min() > cfg.threshold);
    let mut sweep_rows = Vec::new();
    if let Some(sw) = &cfg.sweep {
        let reference = if cfg.compare_euler { Some(shock_scan(euler, &sc)) } else { None };
        let _ = writeln!(s, "\n{:>10} {:>12} {:>14} {:>16}", "|H|", "RH defect", "min |D|", "sup ||D|-|D0||");
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for &h in &sw.values {
            let sh = euler.with_field(*family, FIELD_DIRECTION.map(|x| x * h))?;
            let r = shock_scan(&sh, &sc);
            let sup = reference.as_ref().map(|e| {
                r.points.iter().zip(&e.points).map(|(a, b)| (a.abs_d - b.abs_d).abs()).fold(0.0, f64::max)
            });
            if let Some(v) = sup {
                monotone &= v < prev;
                prev = v;
            }
            negative |= !r.points.is_empty() && !(r.overall_min() > cfg.threshold);
            let _ = writeln!(
                s,
                "{:>10.1e} {:>12.3e} {:>14} {:>16}",
                h,
                sh.rh_defect(),
                fmt_opt(r.overall_min()),
                sup.map(|v| format!("{v:.6e}")).unwrap_or("-".into())
            );
            sweep_rows.push(vec![
                num(h),
                num(sh.rh_defect()),
                num(r.overall_min()),
                sup.map(num).unwrap_or_default(),
            ]);
        }
        if cfg.compare_euler {
            let _ = writeln!(s, "monotone         {monotone}");
            negative |= !monotone;
        }
        let path = dir.join("sweep.csv");
        write_table(&path, &["H", "rh_defect", "min_abs_d", "sup_diff_euler"], &sweep_rows)?;
        artifacts.push(path);
    }
    let path = dir.join("shock.json");
    write_json(
        &path,
        &json!({
            "shock": sp,
            "rh_defect": sp.rh_defect(),
            "lax_count": sp.lax_count(),
            "noncharacteristic_margin": sp.noncharacteristic_margin(),
            "min_abs_d": if base.overall_min().is_finite() { Some(base.overall_min()) } else { None },
            "metadata": metadata(cfg, CommandKind::Shock),
        }),
    )?;
    artifacts.push(path);
    let status = if negative { Status::Negative } else { Status::Success };
    Ok(Outcome { status, summary: s, artifacts })
}

/// Uniform point on the open upper half sphere with `gamma >= 1e-3`.
fn random_frequency(rng: &mut ChaCha8Rng, dim_eta: usize) -> Frequency {
    loop {
        let v: Vec<f64> = (0..dim_eta + 2).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1.0 || n < 1e-3 {
            continue;
        }
        let mut z = Frequency::from_vec(&v.iter().map(|x| x / n).collect::<Vec<_>>());
        z.gamma = z.gamma.abs();
        if z.gamma >= 1e-3 {
            return z;
        }
    }
}

fn verify(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let model = resolve(&cfg.model, &cfg.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = String::new();
    let mut checks: Vec<(String, bool, String)> = Vec::new();
    let report = match &model {
        Model::Boundary { problem, .. } => {
            let sys = problem.system();
            let sym = problem.symbol();
            let samples: Vec<Frequency> = (0..cfg.samples).map(|_| random_frequency(&mut rng, sym.dim_eta())).collect();
            let hyp = check_hyperbolic(sys, 200)?;
            checks.push(("hyperbolic".into(), hyp.passed, format!("{:.3e}", hyp.worst_imag)));
            let fr = check_friedrichs(sys)?;
            checks.push(("friedrichs".into(), fr.passed, format!("{:.3e}", fr.asymmetry)));
            let nc = check_noncharacteristic(sys);
            checks.push(("noncharacteristic".into(), nc.passed, format!("{:.3e}", nc.relative_gap)));
            let defect = friedrichs_identity_defect(sym, &samples)?;
            checks.push(("Im(-S A_d G) = gamma S".into(), defect < 1e-12, format!("{defect:.3e}")));
            let cand = SymmetrizerCandidate::friedrichs(sym)?;
            let g = |z: &Frequency| sym.g(z);
            let sign = sign_check(&cand, &g, &samples)?;
            checks.push(("negative on E_-".into(), sign.passed, format!("{:.3e}", sign.max_eig)));
            let dims: Vec<usize> =
                samples.iter().map(|z| negative_space(sym, z, 1e-14).map(|e| e.dim())).collect::<Result<_, Error>>()?;
            let ok = dims.iter().all(|&d| d == sym.incoming());
            checks.push(("dim E_- = N_+".into(), ok, format!("N_+ = {}", sym.incoming())));
            json!({ "hyperbolic": hyp, "friedrichs": fr, "noncharacteristic": nc, "identity_defect": defect, "sign": sign, "dims": dims })
        }
        Model::Shock { shock: sp, .. } => {
            let samples: Vec<Frequency> = (0..cfg.samples).map(|_| random_frequency(&mut rng, 2)).collect();
            let rh = sp.rh_defect();
            checks.push(("Rankine-Hugoniot".into(), rh < 1e-9, format!("{rh:.3e}")));
            let margin = sp.noncharacteristic_margin();
            checks.push(("noncharacteristic".into(), margin > 1e-10, format!("{margin:.3e}")));
            let counts: Vec<(usize, usize)> = samples.iter().map(|z| sp.lax_count_at(z)).collect::<Result<_, Error>>()?;
            let ok = counts.iter().all(|(a, b)| a + b == 6);
            checks.push(("Lax count 6".into(), ok, format!("{:?}", counts.first())));
            json!({ "rh_defect": rh, "noncharacteristic_margin": margin, "lax_counts": counts })
        }
    };
    let _ = writeln!(s, "model            {}", model.name());
    for (name, ok, detail) in &checks {
        let _ = writeln!(s, "{:<26} {:<5} {}", name, if *ok { "PASS" } else { "FAIL" }, detail);
    }
    let path = cfg.out_dir().join("verify.json");
    write_json(&path, &json!({ "report": report, "metadata": metadata(cfg, CommandKind::Verify) }))?;
    let all = checks.iter().all(|c| c.1);
    Ok(Outcome { status: if all { Status::Success } else { Status::Negative }, summary: s, artifacts: vec![path] })
}

fn complex_vec(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp))
}

/// Random exponential forcing: one or two terms, log-uniform amplitude over three decades.
pub fn random_forcing(rng: &mut ChaCha8Rng, n: usize) -> Forcing {
    let k = rng.gen_range(1..=2);
    let terms = (0..k)
        .map(|_| {
            let amp = 10f64.powf(rng.gen_range(-3.0..0.0));
            (complex_vec(rng, n, amp), rng.gen_range(0.1..3.0))
        })
        .collect();
    Forcing { terms }
}

fn probe(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let model = resolve(&cfg.model, &cfg.params)?;
    let Model::Boundary { problem, .. } = &model else {
        return Err(CliError::Config(format!("model: probe needs a half-space model, '{}' is a shock", cfg.model)));
    };
    let sym = problem.symbol();
    let (n, k, de) = (sym.dim(), sym.incoming(), sym.dim_eta());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut jobs = Vec::new();
    for &g in &cfg.gammas {
        for _ in 0..cfg.samples {
            let dir = random_frequency(&mut rng, de);
            let t = (1.0 - g * g).sqrt() / (dir.tau * dir.tau + dir.eta.iter().map(|x| x * x).sum::<f64>()).sqrt();
            let z = Frequency::new(dir.tau * t, dir.eta.iter().map(|x| x * t).collect(), g);
            let f = random_forcing(&mut rng, n);
            let gv = complex_vec(&mut rng, k, 1.0);
            jobs.push((z, f, gv));
        }
    }
    let opts = ProbeOptions::default();
    let results: Vec<_> = jobs.par_iter().map(|(z, f, g)| estimate_probe(problem, z, f, g, &opts)).collect();
    let mut rows = Vec::new();
    let mut failure = false;
    let mut sup: Vec<f64> = vec![0.0; cfg.gammas.len()];
    for (i, ((z, _, _), r)) in jobs.iter().zip(&results).enumerate() {
        let gi = i / cfg.samples.max(1);
        let mut row = vec![num(z.tau)];
        row.extend(z.eta.iter().map(|x| num(*x)));
        row.push(num(z.gamma));
        match r {
            Ok(p) => {
                sup[gi] = sup[gi].max(p.ratio);
                row.extend([num(p.ratio), num(p.u_norm_sq), num(p.u0_norm_sq), num(p.f_norm_sq), num(p.g_norm_sq)]);
            }
            Err(Error::LopatinskiFailureAtPoint(_)) => {
                failure = true;
                sup[gi] = f64::INFINITY;
                row.extend(["inf".to_string(), String::new(), String::new(), String::new(), String::new()]);
            }
            Err(e) => return Err(CliError::Core(e.clone())),
        }
        rows.push(row);
    }
    let mut header: Vec<String> = vec!["tau".into()];
    header.extend((1..=de).map(|k| format!("eta_{k}")));
    header.extend(["gamma", "ratio", "u_norm_sq", "u0_norm_sq", "f_norm_sq", "g_norm_sq"].map(String::from));
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let dir = cfg.out_dir();
    let csv = dir.join("probe.csv");
    write_table(&csv, &header, &rows)?;
    let json_path = dir.join("probe.json");
    let levels: Vec<_> = cfg
        .gammas
        .iter()
        .zip(&sup)
        .map(|(g, v)| json!({ "gamma": g, "sup_ratio": if v.is_finite() { Some(*v) } else { None } }))
        .collect();
    write_json(&json_path, &json!({ "levels": levels, "metadata": metadata(cfg, CommandKind::Probe) }))?;
    let mut s = String::new();
    let _ = writeln!(s, "model            {}", model.name());
    let _ = writeln!(s, "{:>10} {:>16}", "gamma", "sup ratio");
    for (g, v) in cfg.gammas.iter().zip(&sup) {
        let _ = writeln!(s, "{:>10.1e} {:>16}", g, fmt_opt(*v));
    }
    if failure {
        let _ = writeln!(s, "Lopatinski failure at a sampled frequency");
    }
    Ok(Outcome { status: if failure { Status::Negative } else { Status::Success }, summary: s, artifacts: vec![csv, json_path] })
}

/// 2x2 `(a, c)` sweep: closed-form verdict against the scan verdict.
fn demo(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let na = 10;
    let nc = 10;
    let sc = ScanConfig { refine: cfg.refine.max(3), ..scan_config(cfg) };
    let mut cells = Vec::new();
    for i in 0..na {
        for j in 0..nc {
            let a = 0.25 + 2.25 * i as f64 / (na - 1) as f64;
            let c = 1.5 * j as f64 / (nc - 1) as f64;
            cells.push((a, c));
        }
    }
    let results: Vec<Result<f64, Error>> = cells
        .par_iter()
        .map(|&(a, c)| {
            let bp: BoundaryProblem = two_by_two_problem(a, c)?;
            Ok(uniform_scan(&bp, &sc).overall_min())
        })
        .collect();
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for (&(a, c), r) in cells.iter().zip(results) {
        let m = r?;
        let closed = a * c < 1.0;
        let scanned = m > cfg.threshold;
        if (a * c - 1.0).abs() > 1e-3 && closed != scanned {
            mismatches += 1;
        }
        rows.push(vec![num(a), num(c), num(a * c), num(m), (closed as u8).to_string(), (scanned as u8).to_string()]);
    }
    let path: PathBuf = cfg.out_dir().join("demo.csv");
    write_table(&path, &["a", "c", "a_abs_c", "min_abs_d", "closed_form_stable", "scan_stable"], &rows)?;
    let mut s = String::new();
    let _ = writeln!(s, "2x2 normal form, M = (1, -c)");
    let _ = writeln!(s, "cells            {}", cells.len());
    let _ = writeln!(s, "stable (a|c|<1)  {}", cells.iter().filter(|(a, c)| a * c < 1.0).count());
    let _ = writeln!(s, "mismatches       {mismatches}");
    Ok(Outcome { status: if mismatches == 0 { Status::Success } else { Status::Negative }, summary: s, artifacts: vec![path] })
}
