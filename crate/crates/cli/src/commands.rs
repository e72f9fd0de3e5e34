//! `kernel`, `verify`, `adjoint` and `recover`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use reduced_bergman::holobasis::pullback_weight;
use reduced_bergman::transform::{
    adjoint_sides, operator_bound_check, recover_map, verify_correspondence, verify_proper, verify_weighted, Pairing,
    RecoverOptions,
};
use reduced_bergman::{KernelEvaluator, WeightFn, C64};

use crate::build::{self, pt, Space};
use crate::config::{
    AdjointKind, ChecksSpec, Command, DomainSpec, ExperimentConfig, OracleSpec, RecoverSpec, VerifyKind,
};
use crate::oracles;
use crate::output::{num, run_dir, Status, Summary, Table};
use crate::RunError;

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub dir: PathBuf,
    pub gated_value: Option<f64>,
}

struct Gate {
    value: Option<f64>,
    pass: bool,
}

/// Runs one subcommand and writes its artifacts under `<out_root>/<name>-<hash8>`.
///
/// `summary.toml` is written whether the run passes, fails its gate, or
/// stops on a numerical error; config errors found before the run directory
/// exists are returned without artifacts.
pub fn run(command: Command, config: &ExperimentConfig, out_root: &Path) -> Result<Outcome, RunError> {
    config.require(command)?;
    let dir = run_dir(out_root, config)?;
    let mut summary = Summary::new(command.as_str(), config.tolerance.threshold);
    let result = match command {
        Command::Kernel => kernel(config, &dir, &mut summary),
        Command::Verify => verify(config, &dir, &mut summary),
        Command::Adjoint => adjoint(config, &dir, &mut summary),
        Command::Recover => recover(config, &dir, &mut summary),
    };
    match &result {
        Ok(gate) => {
            summary.status = if gate.pass { Status::Pass } else { Status::Fail };
            summary.gated_value = gate.value;
        }
        Err(e) => summary.message = Some(e.to_string()),
    }
    summary.write(&dir, config)?;
    let gate = result?;
    Ok(Outcome { status: summary.status, dir, gated_value: gate.value })
}

fn below(value: f64, threshold: f64) -> bool {
    value < threshold
}

fn write_table(table: &Table, dir: &Path, file: &str, summary: &mut Summary) -> Result<(), RunError> {
    table.write(&dir.join(file))?;
    summary.artifacts.push(file.to_string());
    Ok(())
}

fn record_space(summary: &mut Summary, side: &str, s: &Space) {
    let onb = s.evaluator.onb();
    summary.set(&format!("{side}_raw_count"), s.raw_count as i64);
    summary.set(&format!("{side}_basis_count"), onb.raw().len() as i64);
    summary.set(&format!("{side}_retained_count"), onb.retained_count() as i64);
    summary.set(&format!("{side}_gram_condition"), onb.gram_condition());
}

fn kernel(config: &ExperimentConfig, dir: &Path, summary: &mut Summary) -> Result<Gate, RunError> {
    let nu = build::weight(&config.weight)?;
    let space = build::space("source", &config.source, nu, config.tolerance.drop_tol)?;
    let ev = &space.evaluator;
    record_space(summary, "source", &space);
    summary.set("orthonormality_residual", ev.orthonormality_residual());

    let zs = build::grid(&config.grid.z, config.seed);
    let ws = build::grid(config.w_grid(), config.seed);
    let phi_z: Vec<Vec<C64>> = zs.iter().map(|&z| ev.features(z)).collect();
    let phi_w: Vec<Vec<C64>> = ws.iter().map(|&w| ev.features(w)).collect();
    let oracle = oracle_fn(config)?;

    let mut table = Table::new(&["re_z", "im_z", "re_w", "im_w", "re_k", "im_k"]);
    let (mut max_rel, mut max_abs) = (0.0f64, 0.0f64);
    for (z, fz) in zs.iter().zip(&phi_z) {
        for (w, fw) in ws.iter().zip(&phi_w) {
            let k = KernelEvaluator::pair(fz, fw);
            table.push_nums(&[z.re, z.im, w.re, w.im, k.re, k.im]);
            if let Some(o) = &oracle {
                let exact = o(*z, *w);
                let err = (k - exact).norm();
                max_abs = max_abs.max(err);
                max_rel = max_rel.max(err / exact.norm().max(1e-300));
            }
        }
    }
    summary.set("n_pairs", table.len() as i64);
    write_table(&table, dir, "kernel.csv", summary)?;

    let mut pass = true;
    let mut value = None;
    if oracle.is_some() {
        summary.set("oracle_max_abs_error", max_abs);
        summary.set("oracle_max_rel_error", max_rel);
        pass &= below(max_rel, config.tolerance.threshold);
        value = Some(max_rel);
    }
    if let Some(checks) = &config.checks {
        pass &= structural_checks(ev, checks, &zs, summary)?;
    }
    Ok(Gate { value, pass })
}

type Oracle = Box<dyn Fn(C64, C64) -> C64>;

fn oracle_fn(config: &ExperimentConfig) -> Result<Option<Oracle>, RunError> {
    let Some(spec) = &config.oracle else { return Ok(None) };
    Ok(Some(match *spec {
        OracleSpec::Disc => Box::new(oracles::disc),
        OracleSpec::DiscPowerWeight { alpha } => Box::new(move |z, w| oracles::disc_power_weight(z, w, alpha)),
        OracleSpec::AnnulusSeries { n_min, n_max, include_residue } => {
            let DomainSpec::Annulus { r_inner, r_outer, .. } = config.source.domain else {
                return Err(RunError::Config("oracle.type: annulus_series needs an annulus".into()));
            };
            let (lo, hi) = match config.source.basis {
                crate::config::BasisSpec::Laurent { n_min, n_max, .. } => (n_min, n_max),
                crate::config::BasisSpec::Monomial { degree, .. } => (0, degree as i32),
            };
            let (lo, hi) = (n_min.unwrap_or(lo), n_max.unwrap_or(hi));
            Box::new(move |z, w| oracles::annulus_series(z, w, r_inner, r_outer, lo, hi, include_residue))
        }
    }))
}

/// At most `n` points spread evenly over `points`.
fn spread(points: &[C64], n: usize) -> Vec<C64> {
    if points.len() <= n {
        return points.to_vec();
    }
    (0..n).map(|k| points[k * points.len() / n]).collect()
}

const CHECK_POINTS: usize = 40;

fn structural_checks(ev: &KernelEvaluator, spec: &ChecksSpec, zs: &[C64], summary: &mut Summary) -> Result<bool, RunError> {
    let pts = spread(zs, CHECK_POINTS);
    let mut pass = true;

    let mut symmetry = 0.0f64;
    let mut min_diag = f64::INFINITY;
    let mut max_diag_im = 0.0f64;
    for &a in &pts {
        let kaa = ev.eval_kernel(a, a);
        min_diag = min_diag.min(kaa.re);
        max_diag_im = max_diag_im.max(kaa.im.abs() / kaa.re.abs().max(1e-300));
        for &b in &pts {
            let (kab, kba) = (ev.eval_kernel(a, b), ev.eval_kernel(b, a));
            symmetry = symmetry.max((kab - kba.conj()).norm() / kab.norm().max(1.0));
        }
    }
    summary.set("check_symmetry", symmetry);
    summary.set("check_min_diagonal", min_diag);
    summary.set("check_diagonal_imag_ratio", max_diag_im);
    pass &= symmetry < spec.symmetry_tol && min_diag > 0.0;

    let elements = &ev.onb().raw().elements()[..spec.reproduce_elements.min(ev.onb().raw().len())];
    let mut reproduce = 0.0f64;
    for e in elements {
        let samples = ev.sample(|z| e.eval(z));
        for &zeta in &pts {
            let got = ev.reproduce(&samples, zeta).map_err(|e| RunError::from_core("checks", e))?;
            let want = e.eval(zeta);
            reproduce = reproduce.max((got - want).norm() / want.norm().max(1.0));
        }
    }
    summary.set("check_reproduce", reproduce);
    pass &= reproduce < spec.reproduce_tol;

    let mut self_rep = 0.0f64;
    for (k, &a) in pts.iter().enumerate() {
        let b = pts[(k * 7 + 3) % pts.len()];
        self_rep = self_rep.max(ev.self_reproduction_residual(a, b) / ev.eval_kernel(a, b).norm().max(1.0));
    }
    summary.set("check_self_reproduce", self_rep);
    pass &= self_rep < spec.self_reproduce_tol;

    if let Some(xi) = spec.sakai_xi {
        let xi = pt(xi);
        let got = sakai_pairing(ev, xi)?;
        let err = (got - 2.0 * xi).norm();
        summary.set("check_sakai_pairing", vec![got.re, got.im]);
        summary.set("check_sakai_error", err);
        pass &= err < spec.sakai_tol;
    }
    Ok(pass)
}

/// `⟨z², M(·, ξ)⟩` in the Dirichlet pairing `∫ f′ conj(g′) ν dA`, with `∂M/∂z`
/// taken by central differences of the primitive at each node.
pub fn sakai_pairing(ev: &KernelEvaluator, xi: C64) -> Result<C64, RunError> {
    let h = 1e-5;
    let mut total = C64::new(0.0, 0.0);
    for (&z, &wt) in ev.rule().nodes().iter().zip(ev.node_weights()) {
        let plus = ev.sakai_primitive(xi, z + h).map_err(|e| RunError::from_core("checks.sakai_xi", e))?;
        let minus = ev.sakai_primitive(xi, z - h).map_err(|e| RunError::from_core("checks.sakai_xi", e))?;
        let dm = (plus - minus) / (2.0 * h);
        total += 2.0 * z * dm.conj() * wt;
    }
    Ok(total)
}

fn verify(config: &ExperimentConfig, dir: &Path, summary: &mut Summary) -> Result<Gate, RunError> {
    let spec = config.verify.as_ref().expect("checked by require");
    let tol = config.tolerance.drop_tol;
    let d1 = build::domain("source", &config.source.domain)?;
    let d2 = build::domain("target", &config.target_spec().domain)?;
    let zs = build::grid(&config.grid.z, config.seed);
    let ws = build::grid(config.w_grid(), config.seed);

    let (verification, s1, s2) = match spec.kind {
        VerifyKind::Correspondence => {
            let c = build::correspondence(config.correspondence.as_ref().expect("validated"), d1.clone(), d2.clone())?;
            summary.set("p", c.p() as i64);
            summary.set("q", c.q() as i64);
            let s1 = build::space_on("source", &config.source, d1, WeightFn::Constant, tol)?;
            let s2 = build::space_on("target", config.target_spec(), d2, WeightFn::Constant, tol)?;
            let v = verify_correspondence(&c, &s1.evaluator, &s2.evaluator, &zs, &ws);
            (v, s1, s2)
        }
        VerifyKind::Proper | VerifyKind::Weighted => {
            let f = build::map(config.map.as_ref().expect("validated"), d1.clone(), d2.clone())?;
            summary.set("multiplicity", f.multiplicity() as i64);
            let nu = build::weight(&config.weight)?;
            let s1 = build::space_on("source", &config.source, d1, pullback_weight(&nu, &f), tol)?;
            let s2 = build::space_on("target", config.target_spec(), d2, nu.clone(), tol)?;
            let v = if spec.kind == VerifyKind::Proper {
                verify_proper(&f, &s1.evaluator, &s2.evaluator, &zs, &ws)
            } else {
                verify_weighted(&f, &nu, &s1.evaluator, &s2.evaluator, &zs, &ws)
            };
            (v, s1, s2)
        }
    };
    record_space(summary, "source", &s1);
    record_space(summary, "target", &s2);
    let v = verification.map_err(|e| RunError::from_core("verify", e))?;
    summary.set_serialized("transform", &v.report);

    if spec.write_samples {
        let mut table = Table::new(&["re_z", "im_z", "re_w", "im_w", "abs_residual", "abs_lhs"]);
        for s in &v.samples {
            table.push_nums(&[s.z.re, s.z.im, s.w.re, s.w.im, s.abs_residual, s.lhs.norm()]);
        }
        write_table(&table, dir, "samples.csv", summary)?;
    }
    let value = v.report.max_rel_residual;
    Ok(Gate { value: Some(value), pass: below(value, config.tolerance.threshold) })
}

fn first_elements(ev: &KernelEvaluator, n: usize) -> Vec<usize> {
    (0..n.min(ev.onb().retained_count())).collect()
}

fn adjoint(config: &ExperimentConfig, dir: &Path, summary: &mut Summary) -> Result<Gate, RunError> {
    let spec = config.adjoint.as_ref().expect("checked by require");
    let tol = config.tolerance.drop_tol;
    let d1 = build::domain("source", &config.source.domain)?;
    let d2 = build::domain("target", &config.target_spec().domain)?;
    let core = |e| RunError::from_core("adjoint", e);

    let mut pairs = Table::new(&["i", "j", "re_lhs", "im_lhs", "re_rhs", "im_rhs", "abs_residual"]);
    let mut bounds = Table::new(&["j", "lhs", "rhs", "ratio"]);
    let mut max_residual = 0.0f64;
    let mut max_ratio = 0.0f64;

    let mut run_pairs = |pairing: Pairing<'_>, ev1: &KernelEvaluator, ev2: &KernelEvaluator| -> Result<(), RunError> {
        for i in first_elements(ev2, spec.n_elements) {
            let u = |w: C64| ev2.onb().eval(w)[i];
            for j in first_elements(ev1, spec.n_elements) {
                let v = |z: C64| ev1.onb().eval(z)[j];
                let (lhs, rhs) = adjoint_sides(pairing, &u, &v, ev1.rule(), ev2.rule()).map_err(core)?;
                let r = (lhs - rhs).norm();
                max_residual = max_residual.max(r);
                pairs.push(vec![i.to_string(), j.to_string(), num(lhs.re), num(lhs.im), num(rhs.re), num(rhs.im), num(r)]);
            }
        }
        Ok(())
    };

    let (s1, s2) = match spec.kind {
        AdjointKind::Correspondence => {
            let c = build::correspondence(config.correspondence.as_ref().expect("validated"), d1.clone(), d2.clone())?;
            let s1 = build::space_on("source", &config.source, d1, WeightFn::Constant, tol)?;
            let s2 = build::space_on("target", config.target_spec(), d2, WeightFn::Constant, tol)?;
            run_pairs(Pairing::Correspondence(&c), &s1.evaluator, &s2.evaluator)?;
            let ev1 = &s1.evaluator;
            for j in first_elements(ev1, spec.n_elements) {
                let v = |z: C64| ev1.onb().eval(z)[j];
                let (lhs, rhs) = operator_bound_check(&c, v, ev1.rule(), s2.evaluator.rule()).map_err(core)?;
                let ratio = lhs / rhs;
                max_ratio = max_ratio.max(ratio);
                bounds.push(vec![j.to_string(), num(lhs), num(rhs), num(ratio)]);
            }
            summary.set("pq", (c.p() * c.q()) as i64);
            (s1, s2)
        }
        AdjointKind::Weighted => {
            let f = build::map(config.map.as_ref().expect("validated"), d1.clone(), d2.clone())?;
            let nu = build::weight(&config.weight)?;
            let s1 = build::space_on("source", &config.source, d1, pullback_weight(&nu, &f), tol)?;
            let s2 = build::space_on("target", config.target_spec(), d2, nu.clone(), tol)?;
            run_pairs(Pairing::Map { map: &f, weight: &nu }, &s1.evaluator, &s2.evaluator)?;
            (s1, s2)
        }
    };
    record_space(summary, "source", &s1);
    record_space(summary, "target", &s2);
    summary.set("n_pairs", pairs.len() as i64);
    summary.set("max_adjoint_residual", max_residual);
    write_table(&pairs, dir, "adjoint.csv", summary)?;

    let mut pass = below(max_residual, config.tolerance.threshold);
    if !bounds.is_empty() {
        let bound_ok = max_ratio <= 1.0 + spec.bound_slack;
        summary.set("max_bound_ratio", max_ratio);
        summary.set("bound_holds", bound_ok);
        write_table(&bounds, dir, "bound.csv", summary)?;
        pass &= bound_ok;
    }
    Ok(Gate { value: Some(max_residual), pass })
}

fn recover(config: &ExperimentConfig, dir: &Path, summary: &mut Summary) -> Result<Gate, RunError> {
    let spec = config.recover.clone().unwrap_or_default();
    let RecoverSpec { probe, fallback_probe, stencil_radius } = spec;
    let d1 = build::domain("source", &config.source.domain)?;
    let d2 = build::domain("target", &config.target_spec().domain)?;
    let f: Arc<_> = build::map(config.map.as_ref().expect("checked by require"), d1.clone(), d2)?;
    let s1 = build::space_on("source", &config.source, d1, WeightFn::Constant, config.tolerance.drop_tol)?;
    record_space(summary, "source", &s1);
    let zs = build::grid(&config.grid.z, config.seed);
    let opts = RecoverOptions { probe: pt(probe), fallback_probe: pt(fallback_probe), stencil_radius };
    let r = recover_map(&f, &s1.evaluator, &zs, opts).map_err(|e| RunError::from_core("recover", e))?;

    let mut table = Table::new(&["re_z", "im_z", "re_g", "im_g", "re_f", "im_f", "abs_error"]);
    for p in &r.points {
        let (g, err) = match (p.estimate, p.error()) {
            (Some(g), Some(e)) => ([num(g.re), num(g.im)], num(e)),
            _ => ([String::new(), String::new()], String::new()),
        };
        let [gr, gi] = g;
        table.push(vec![num(p.z.re), num(p.z.im), gr, gi, num(p.truth.re), num(p.truth.im), err]);
    }
    write_table(&table, dir, "recovery.csv", summary)?;
    summary.set("probe", vec![r.probe.re, r.probe.im]);
    summary.set("n_samples", r.points.len() as i64);
    summary.set("excluded", r.excluded as i64);
    summary.set("sup_error", r.sup_error);
    Ok(Gate { value: Some(r.sup_error), pass: below(r.sup_error, config.tolerance.threshold) })
}
