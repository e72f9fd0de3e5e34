//! Acceptance suite: one PASS/FAIL line per criterion, driven by the shipped presets.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use rbk::build;
use rbk::config::ExperimentConfig;
use rbk::{presets, Outcome, Status};
use reduced_bergman::holobasis::pullback_weight;
use reduced_bergman::transform::{proper_lhs, proper_rhs};
use reduced_bergman::{WeightFn, C64};

struct Criterion {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, what: &str, ok: bool, detail: String) {
        if ok {
            self.notes.push(format!("{what} {detail}"));
        } else {
            self.failures.push(format!("{what} {detail}"));
        }
    }

    /// `value < bound`, reported with both numbers.
    fn below(&mut self, what: &str, value: f64, bound: f64) {
        self.check(what, value < bound, format!("{value:.3e} < {bound:.0e}"));
    }
}

fn run_preset(out: &Path, name: &str, overrides: &[&str]) -> Result<(Outcome, toml::Table), String> {
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let (command, config) = presets::load(name, &overrides).map_err(|e| e.to_string())?;
    let outcome = rbk::run(command, &config, out).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(outcome.dir.join("summary.toml")).map_err(|e| e.to_string())?;
    let summary: toml::Table = toml::from_str(&text).map_err(|e| e.to_string())?;
    Ok((outcome, summary))
}

fn report_f64(summary: &toml::Table, path: &[&str]) -> f64 {
    let mut node = summary.get("report").expect("report table");
    for key in path {
        node = node.get(key).unwrap_or_else(|| panic!("missing report field {path:?}"));
    }
    node.as_float().or_else(|| node.as_integer().map(|i| i as f64)).expect("numeric field")
}

/// Runs a preset and gates on its own threshold, recording the gated value under `what`.
fn gated(c: &mut Criterion, out: &Path, name: &str, overrides: &[&str], what: &str) -> Option<(Outcome, toml::Table)> {
    match run_preset(out, name, overrides) {
        Ok((o, s)) => {
            let threshold = s["threshold"].as_float().unwrap();
            let value = o.gated_value.unwrap_or(f64::NAN);
            let pass = o.status == Status::Pass;
            let detail = match o.gated_value {
                Some(_) => format!("{value:.3e} < {threshold:.0e}"),
                None => "all structural gates".to_string(),
            };
            c.check(what, pass, detail);
            Some((o, s))
        }
        Err(e) => {
            c.check(what, false, format!("run error: {e}"));
            None
        }
    }
}

fn criterion_1(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    let start = Instant::now();
    if let Some((_, s)) = gated(&mut c, out, "c1-disc-kernel", &[], "disc oracle max rel") {
        c.check("grid", report_f64(&s, &["n_pairs"]) > 300.0 * 300.0, "21x21 lattice in |z|,|w| <= 0.7".into());
    }
    let elapsed = start.elapsed();
    c.check("runtime", elapsed < Duration::from_secs(10), format!("{:.2}s < 10s", elapsed.as_secs_f64()));
    c
}

fn criterion_2(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    if let Some((_, s)) = gated(&mut c, out, "c2-annulus-reduced", &[], "reduced series max rel") {
        let raw = report_f64(&s, &["source_raw_count"]);
        let kept = report_f64(&s, &["source_retained_count"]);
        c.check("z^-1 filtered", kept == raw - 1.0, format!("retained {kept} of {raw}"));
    }
    gated(&mut c, out, "c2-annulus-full", &[], "full series max rel");

    let load = |name: &str| presets::load(name, &[]).unwrap().1;
    let (full, reduced) = (load("c2-annulus-full"), load("c2-annulus-reduced"));
    let space = |cfg: &ExperimentConfig| build::space("source", &cfg.source, WeightFn::Constant, cfg.tolerance.drop_tol);
    match (space(&full), space(&reduced)) {
        (Ok(f), Ok(r)) => {
            let grid = build::grid(&full.grid.z, full.seed);
            let mut worst = 0.0f64;
            for &z in &grid {
                for &w in &grid {
                    let diff = f.evaluator.eval_kernel(z, w) - r.evaluator.eval_kernel(z, w);
                    let exact = 1.0 / (z * w.conj() * 2.0 * PI * 2f64.ln());
                    worst = worst.max((diff - exact).norm());
                }
            }
            c.below("full - reduced vs (z conj w)^-1 / (2 pi ln 2)", worst, 1e-5);
        }
        (a, b) => c.check("full - reduced", false, format!("{:?} {:?}", a.err(), b.err())),
    }
    c
}

fn criterion_3(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    gated(&mut c, out, "c3-square-map", &[], "power(2) max rel residual");

    let cfg = presets::load("c3-square-map", &[]).unwrap().1;
    let d = build::domain("source", &cfg.source.domain).unwrap();
    let f = build::map(cfg.map.as_ref().unwrap(), d.clone(), d.clone()).unwrap();
    let ev = build::space_on("source", &cfg.source, d, WeightFn::Constant, cfg.tolerance.drop_tol)
        .unwrap()
        .evaluator;
    let (z, w) = (C64::new(0.5, 0.0), C64::new(0.3, 0.0));
    let exact = 1.0 / (PI * (1.0 - 0.075f64).powi(2));
    let lhs = proper_lhs(&f, &ev, z, w);
    let rhs = proper_rhs(&f, &ev, z, w).unwrap();
    c.below(&format!("spot LHS(0.5, 0.3) = {:.7} vs closed form {exact:.7}", lhs.re), (lhs - exact).norm(), 1e-6);
    c.below(&format!("spot RHS(0.5, 0.3) = {:.7} vs closed form {exact:.7}", rhs.re), (rhs - exact).norm(), 1e-6);
    c
}

fn criterion_4(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    gated(&mut c, out, "c4-annulus-square-map", &[], "annulus power(2) max rel residual");
    // keeping z^-1 on either side must break the identity
    for side in ["source", "target"] {
        let key = format!("{side}.basis.reduced=false");
        let name = format!("name=c4-unfiltered-{side}");
        match run_preset(out, "c4-annulus-square-map", &[&key, &name]) {
            Ok((o, _)) => {
                let v = o.gated_value.unwrap_or(f64::NAN);
                c.check(&format!("unfiltered {side} detected"), v > 1e-5, format!("{v:.3e} > 1e-5"));
            }
            Err(e) => c.check(&format!("unfiltered {side}"), false, e),
        }
    }
    c
}

fn criterion_5(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    for (name, what) in [("c5-correspondence-sign", "w^2 - z^2"), ("c5-correspondence-sqrt", "w^2 - z")] {
        if let Some((_, s)) = gated(&mut c, out, name, &[], &format!("{what} max rel residual")) {
            let excluded = report_f64(&s, &["transform", "excluded"]);
            c.check(&format!("{what} discriminant exclusions"), excluded > 0.0, format!("{excluded} samples"));
        }
    }
    c
}

fn criterion_6(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    gated(&mut c, out, "c6-weighted-kernel-target", &[], "(2-x)/(pi(1-x)^2) max rel");
    gated(&mut c, out, "c6-weighted-kernel-source", &[], "(3-2x)/(pi(1-x)^2) max rel");
    gated(&mut c, out, "c6-weighted-square-map", &[], "weighted residual");

    // the pulled-back weight must be the one the source oracle describes
    let cfg = presets::load("c6-weighted-square-map", &[]).unwrap().1;
    let d = build::domain("source", &cfg.source.domain).unwrap();
    let f = build::map(cfg.map.as_ref().unwrap(), d.clone(), d).unwrap();
    let nu = build::weight(&cfg.weight).unwrap();
    let z = C64::new(0.3, -0.4);
    let pulled = pullback_weight(&nu, &f).eval(z);
    c.below("nu o f = |z|^4", (pulled - z.norm().powi(4)).abs(), 1e-15);

    let plain = run_preset(out, "c3-square-map", &[]);
    let weighted = run_preset(out, "c3-square-map", &["verify.kind=weighted", "name=c6-unit-weight"]);
    match (plain, weighted) {
        (Ok((a, sa)), Ok((b, sb))) => {
            let bytes = |o: &Outcome| std::fs::read(o.dir.join("samples.csv")).unwrap();
            let same_csv = bytes(&a) == bytes(&b);
            let same_report = sa["report"]["transform"] == sb["report"]["transform"];
            c.check("nu = 1 reproduces criterion 3 bit-for-bit", same_csv && same_report, format!("csv {same_csv}, report {same_report}"));
        }
        (a, b) => c.check("nu = 1 run", false, format!("{:?} {:?}", a.err(), b.err())),
    }
    c
}

fn criterion_7(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    if let Some((_, s)) = gated(&mut c, out, "c7-adjoint-correspondence", &[], "Gamma adjoint, w^2 - z^2") {
        let r = report_f64(&s, &["max_bound_ratio"]);
        c.check("bound w^2 - z^2", r <= 1.0 + 1e-6, format!("max ratio {r:.6} <= 1 + 1e-6"));
    }
    let sqrt = ["correspondence.terms=[[0, 2, 1.0, 0.0], [1, 0, -1.0, 0.0]]", "name=c7-adjoint-sqrt"];
    if let Some((_, s)) = gated(&mut c, out, "c7-adjoint-correspondence", &sqrt, "Gamma adjoint, w^2 - z") {
        let r = report_f64(&s, &["max_bound_ratio"]);
        c.check("bound w^2 - z", r <= 1.0 + 1e-6, format!("max ratio {r:.6} <= 1 + 1e-6"));
    }
    if let Some((_, s)) = gated(&mut c, out, "c7-adjoint-weighted", &[], "weighted Lambda adjoint") {
        let n = report_f64(&s, &["n_pairs"]);
        c.check("pairs", n == 25.0, format!("{n} of 5 x 5"));
    }
    c
}

fn criterion_8(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    if let Some((o, _)) = gated(&mut c, out, "c8-recover-blaschke", &[], "Blaschke {0.3, -0.2} sup error") {
        let summary = std::fs::read_to_string(o.dir.join("summary.toml")).unwrap();
        c.check("probe", summary.contains("probe = [0.0, 0.0]"), "w0 = 0".into());
    }
    gated(&mut c, out, "c8-recover-identity", &[], "identity sup error");
    c
}

fn criterion_9(out: &Path) -> Criterion {
    let mut c = Criterion::new();
    for name in ["c9-structural-disc", "c9-structural-annulus"] {
        if let Some((_, s)) = gated(&mut c, out, name, &[], name) {
            let f = |k: &str| report_f64(&s, &[k]);
            c.below("  conjugate symmetry", f("check_symmetry"), 1e-12);
            c.check("  diagonal positivity", f("check_min_diagonal") > 0.0, format!("min {:.3e} > 0", f("check_min_diagonal")));
            c.below("  reproducing property", f("check_reproduce"), 1e-6);
            c.below("  self reproduction", f("check_self_reproduce"), 1e-8);
            c.below("  Dirichlet pairing", f("check_sakai_error"), 1e-5);
        }
    }
    c
}

type Check = fn(&Path) -> Criterion;

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let out = dir.path();
    let suite_start = Instant::now();
    let criteria: [(&str, Check); 9] = [
        ("disc kernel oracle", criterion_1),
        ("annulus reduced kernel oracle", criterion_2),
        ("proper map residual on the disc", criterion_3),
        ("proper map residual on annuli", criterion_4),
        ("correspondence residuals", criterion_5),
        ("weighted kernels and residual", criterion_6),
        ("adjointness and operator bound", criterion_7),
        ("map recovery", criterion_8),
        ("structural invariants", criterion_9),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = run(out);
        let ok = c.failures.is_empty();
        failed += usize::from(!ok);
        println!(
            "criterion {} [{}]: {} ({:.2}s)",
            k + 1,
            title,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for n in &c.notes {
            println!("    ok   {n}");
        }
        for f in &c.failures {
            println!("    FAIL {f}");
        }
    }
    let total = suite_start.elapsed();
    let fast = total < Duration::from_secs(120);
    println!("suite runtime: {:.2}s (< 120s: {})", total.as_secs_f64(), if fast { "PASS" } else { "FAIL" });
    if failed > 0 || !fast {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
