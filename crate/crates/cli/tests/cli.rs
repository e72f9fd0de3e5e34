use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const DISC: &str = r#"
name = "small-disc"
[source]
domain = { type = "disc", radius = 1.0 }
basis = { type = "monomial", degree = 20 }
quadrature = { n_radial = 24, n_angular = 64 }
[grid.z]
type = "random"
r_max = 0.6
n = 12
[oracle]
type = "disc"
[tolerance]
threshold = 1e-6
"#;

fn rbk(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbk"))
        .args(args)
        .env("RBK_OUTPUT_DIR", out)
        .output()
        .expect("run rbk")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn only_run_dir(out: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

#[test]
fn kernel_run_passes_and_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DISC);
    let out = tmp.path().join("out");
    let o = rbk(&["kernel", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_run_dir(&out);
    assert!(dir.file_name().unwrap().to_str().unwrap().starts_with("small-disc-"));
    let summary = fs::read_to_string(dir.join("summary.toml")).unwrap();
    assert!(summary.contains("status = \"pass\""));
    let csv = fs::read_to_string(dir.join("kernel.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re_z,im_z,re_w,im_w,re_k,im_k"));
    assert_eq!(lines.count(), 144);
}

#[test]
fn zero_threshold_fails_gate_but_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DISC);
    let out = tmp.path().join("out");
    let o = rbk(&["kernel", cfg.to_str().unwrap(), "--set", "tolerance.threshold=0"], &out);
    assert_eq!(o.status.code(), Some(1));
    let summary = fs::read_to_string(only_run_dir(&out).join("summary.toml")).unwrap();
    assert!(summary.contains("status = \"fail\""));
    assert!(summary.contains("oracle_max_rel_error"));
}

#[test]
fn malformed_config_exits_2_with_field_message() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = DISC.replace(r#"{ type = "monomial", degree = 20 }"#, r#"{ type = "laurent", n_min = -3, n_max = 3 }"#);
    let cfg = write_config(tmp.path(), &bad);
    let out = tmp.path().join("out");
    let o = rbk(&["kernel", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("source.basis.type") && err.contains("annulus"), "{err}");

    let o = rbk(&["kernel", tmp.path().join("missing.toml").to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = rbk(&["verify", cfg.to_str().unwrap(), "--set", "source.basis.type=\"monomial\""], &out);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // every w sits on the critical value of z^2, so nothing is left to compare
    let text = format!(
        "{DISC}\n[map]\ntype = \"power\"\nm = 2\n[verify]\nkind = \"proper\"\n[grid.w]\ntype = \"points\"\npoints = [[0.0, 0.0]]\n"
    );
    let text = text.replace("[oracle]\ntype = \"disc\"\n", "");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let o = rbk(&["verify", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(only_run_dir(&out).join("summary.toml")).unwrap();
    assert!(summary.contains("status = \"error\""));
}

#[test]
fn identical_configs_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let read = |out: &Path| {
        let o = rbk(&["presets", "run", "c3-square-map", "--out", out.to_str().unwrap()], Path::new("/nonexistent"));
        assert_eq!(o.status.code(), Some(0));
        fs::read(only_run_dir(out).join("samples.csv")).unwrap()
    };
    let a = read(&tmp.path().join("a"));
    let b = read(&tmp.path().join("b"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn seeds_namespace_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DISC);
    let out = tmp.path().join("out");
    for seed in ["seed=1", "seed=2"] {
        assert_eq!(rbk(&["kernel", cfg.to_str().unwrap(), "--set", seed], &out).status.code(), Some(0));
    }
    assert_eq!(fs::read_dir(&out).unwrap().count(), 2);
}

#[test]
fn presets_list_and_export() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rbk(&["presets", "list"], tmp.path());
    let list = String::from_utf8(o.stdout).unwrap();
    assert!(list.lines().count() >= 9);
    assert!(list.contains("c1-disc-kernel"));

    let o = rbk(&["presets", "export", "c8-recover-blaschke"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let cfg = write_config(tmp.path(), &String::from_utf8(o.stdout).unwrap());
    let out = tmp.path().join("out");
    let o = rbk(&["recover", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(only_run_dir(&out).join("recovery.csv")).unwrap();
    assert!(csv.starts_with("re_z,im_z,re_g,im_g,re_f,im_f,abs_error"));

    assert_eq!(rbk(&["presets", "export", "nope"], tmp.path()).status.code(), Some(2));
}

#[test]
fn weighted_verify_preset_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = rbk(&["presets", "run", "c6-weighted-square-map", "c7-adjoint-weighted"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
