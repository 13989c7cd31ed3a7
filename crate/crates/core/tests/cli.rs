use std::path::Path;

use l1homotopy::cli::run;

fn l1h(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("l1h").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn gen(dir: &Path, n: usize, m: usize, seed: u64) {
    let (code, _, err) = l1h(&[
        "gen",
        "--kind",
        "blocks",
        "--n",
        &n.to_string(),
        "--m",
        &m.to_string(),
        "--snr",
        "40",
        "--seed",
        &seed.to_string(),
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
}

fn field(line: &str, key: &str) -> f64 {
    let tag = format!("{key}=");
    line.split_whitespace()
        .find_map(|t| t.strip_prefix(&tag))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .parse()
        .unwrap()
}

#[test]
fn gen_writes_four_files_and_repeats_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    gen(&a, 256, 128, 7);
    gen(&b, 256, 128, 7);
    for f in ["A.mtx", "y.mtx", "xbar.mtx", "meta.toml"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let meta = l1homotopy::cli::read_meta(&a).unwrap().unwrap();
    assert!(meta.sigma > 0.0 && meta.tau > 0.0);
}

#[test]
fn gen_rejects_non_power_of_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, err) = l1h(&["gen", "--n", "100", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("power of two"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(l1h(&["solve", "--bogus"]).0, 1);
    assert_eq!(l1h(&["--help"]).0, 0);
}

#[test]
fn arw_solve_prints_small_residual_and_writes_solution() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), 256, 128, 3);
    let x_path = tmp.path().join("x.mtx");
    let (code, out, err) = l1h(&[
        "solve",
        tmp.path().to_str().unwrap(),
        "--solver",
        "arw",
        "--tau",
        "auto",
        "-o",
        x_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let line = out.lines().next().unwrap();
    assert!(field(line, "kkt") <= 1e-8, "{line}");
    assert!(field(line, "ser_db") > 0.0);
    let x = l1homotopy::linalg::mmio::read_vector(&x_path).unwrap();
    assert_eq!(x.len(), 256);
}

#[test]
fn irw_solve_prints_one_line_per_round() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), 128, 64, 4);
    let dir = tmp.path().to_str().unwrap();
    let (code, out, err) = l1h(&["solve", dir, "--solver", "irw", "--reweight-iters", "5"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 6);
    for (k, line) in lines.iter().enumerate() {
        assert_eq!(field(line, "iter") as usize, k);
    }
}

#[test]
fn prox_and_lasso_objectives_agree() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), 64, 32, 5);
    let dir = tmp.path().to_str().unwrap();
    let (c1, prox, e1) = l1h(&[
        "solve", dir, "--solver", "prox", "--reweight-iters", "0", "--grad-tol", "1e-12",
    ]);
    let (c2, lasso, e2) = l1h(&["solve", dir, "--solver", "lasso"]);
    assert_eq!((c1, c2), (0, 0), "{e1}{e2}");
    let f_prox = field(prox.lines().next().unwrap(), "objective");
    let f_lasso = field(lasso.lines().next().unwrap(), "objective");
    assert!((f_prox - f_lasso).abs() <= 1e-8 * f_lasso.abs().max(1.0), "{f_prox} vs {f_lasso}");
}

#[test]
fn mismatched_files_are_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), 64, 32, 6);
    let other = tmp.path().join("other");
    gen(&other, 64, 16, 6);
    std::fs::copy(other.join("y.mtx"), tmp.path().join("y.mtx")).unwrap();
    let (code, _, err) = l1h(&["solve", tmp.path().to_str().unwrap(), "--solver", "lasso"]);
    assert_eq!(code, 2, "{err}");

    let (code, _, _) = l1h(&["solve", tmp.path().join("missing").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn tau_auto_without_metadata_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), 64, 32, 8);
    std::fs::remove_file(tmp.path().join("meta.toml")).unwrap();
    let dir = tmp.path().to_str().unwrap();
    assert_eq!(l1h(&["solve", dir, "--solver", "lasso"]).0, 2);
    assert_eq!(l1h(&["solve", dir, "--solver", "lasso", "--tau", "0.05"]).0, 0);
}

const SMOKE: &str = r#"
kind = "blocks"
n = [64]
m_divisors = [2.0]
trials = 2
reweight_iters = 2
"#;

fn bench(dir: &Path, seed: &str) -> (i32, String) {
    let cfg = dir.join("smoke.toml");
    std::fs::write(&cfg, SMOKE).unwrap();
    let out = dir.join(format!("out-{seed}"));
    let (code, stdout, err) = l1h(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        seed,
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    (code, stdout)
}

fn without_wall_ms(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let col = rdr.headers().unwrap().iter().position(|h| h == "wall_ms").unwrap();
    rdr.records()
        .map(|r| {
            r.unwrap()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != col)
                .map(|(_, v)| v.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn bench_smoke_writes_one_group_per_trial_and_solver() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, stdout) = bench(tmp.path(), "1");
    assert!(stdout.contains("0 failed"), "{stdout}");
    let rows = without_wall_ms(&tmp.path().join("out-1/trials.csv"));
    let mut groups: Vec<(String, String)> = rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    groups.dedup();
    assert_eq!(groups.len(), 2 * 5);
    assert!(tmp.path().join("out-1/summary.csv").exists());
}

#[test]
fn bench_is_repeatable_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    bench(tmp.path(), "1");
    let first = without_wall_ms(&tmp.path().join("out-1/trials.csv"));
    std::fs::rename(tmp.path().join("out-1"), tmp.path().join("prev")).unwrap();
    bench(tmp.path(), "1");
    assert_eq!(first, without_wall_ms(&tmp.path().join("out-1/trials.csv")));
    bench(tmp.path(), "2");
    assert_ne!(first, without_wall_ms(&tmp.path().join("out-2/trials.csv")));
}
