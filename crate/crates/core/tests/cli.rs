use std::path::Path;
use std::process::{Command, Output};

fn mlq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlq")).args(args).output().expect("spawn mlq")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn verify_default_and_lambda_edges_pass() {
    for lam in ["0.5", "0", "1"] {
        let o = mlq(&["--lambda", lam, "verify"]);
        assert_eq!(o.status.code(), Some(0), "lambda={lam}\n{}", stdout(&o));
        assert!(stdout(&o).contains("0 failed"));
    }
}

#[test]
fn verify_small_grid_marks_skips() {
    let o = mlq(&["--grid", "8", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("SKIP"));
    assert!(text.contains("insufficient resolution"));
}

#[test]
fn verify_json_schema() {
    let o = mlq(&["--grid", "33", "--json", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        for key in ["name", "measured", "tolerance", "pass"] {
            assert!(e.get(key).is_some(), "{key} missing in {e}");
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mlq(&["--beta=-1", "verify"]).status.code(), Some(2));
    assert_eq!(mlq(&["--lambda", "1.5", "verify"]).status.code(), Some(2));
    assert_eq!(mlq(&["--tol-scale", "0", "verify"]).status.code(), Some(2));
    assert_eq!(mlq(&["frobnicate"]).status.code(), Some(2));
    let o = mlq(&["formal", "q*(", "p"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 3"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(mlq(&["--out", out, "star", "rho0", "gauss"]).status.code(), Some(2));
    assert_eq!(mlq(&["--out", out, "star", "q", "q^2"]).status.code(), Some(2));
}

#[test]
fn formal_outputs() {
    let o = mlq(&["formal", "q", "p", "--commutator"]);
    assert_eq!(stdout(&o), "i*hbar*(1 + beta*p^2)\nterminated: true\n");
    let o = mlq(&["formal", "p", "p"]);
    assert_eq!(stdout(&o), "p^2\nterminated: true\n");
    let o = mlq(&["formal", "q", "q"]);
    assert_eq!(stdout(&o), "q^2\nterminated: true\n");
    let o = mlq(&["formal", "q", "q", "--pair", "alt"]);
    assert_eq!(
        stdout(&o),
        "q^2 - i*beta*hbar*q*p + 2*i*beta*hbar*lambda*q*p + beta^2*hbar^2*lambda*p^2 - beta^2*hbar^2*lambda^2*p^2\nterminated: true\n"
    );
    let o = mlq(&["--json", "formal", "q", "p"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["pair"], "main");
    assert_eq!(v["result"]["terminated"], true);
}

#[test]
fn mlstate_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mlq(&["--out", out, "--grid", "65", "mlstate", "--points", "41"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let fig1 = read_csv(&dir.path().join("ml_lambda_half.csv"));
    assert_eq!(fig1.len(), 41 * 41);
    assert!(fig1.iter().all(|r| r.len() == 4 && r[3].abs() < 1e-12));
    // (0, 0) is the middle of the window
    let mid = &fig1[20 * 41 + 20];
    assert_eq!((mid[0], mid[1]), (0.0, 0.0));
    assert!((mid[2] - (1.0 + 2.0 / std::f64::consts::PI)).abs() < 1e-10);
    let im = read_csv(&dir.path().join("ml_lambda0_im.csv"));
    let re = read_csv(&dir.path().join("ml_lambda0_re.csv"));
    assert!(im.iter().any(|r| r[2].abs() > 1e-3));
    assert!(re.iter().any(|r| r[2].abs() > 1e-3));
    // grid 65 is below the spectral threshold: no Wigner files
    assert!(!dir.path().join("ml_lambda_half_wigner.csv").exists());
}

#[test]
fn mlstate_unwritable_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = mlq(&["--out", out.to_str().unwrap(), "--grid", "9", "mlstate", "--points", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        assert_eq!(mlq(&["--out", out, "--grid", "33", "--seed", "7", "star", "random:3", "bump"]).status.code(), Some(0));
        assert_eq!(mlq(&["--out", out, "--grid", "33", "mlstate", "--points", "21"]).status.code(), Some(0));
    }
    for name in ["star_torus.csv", "star_lattice.csv", "ml_lambda_half.csv", "ml_lambda0_im.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let j1 = mlq(&["--grid", "33", "--json", "verify"]).stdout;
    let j2 = mlq(&["--grid", "33", "--json", "verify"]).stdout;
    assert_eq!(j1, j2);
}

fn star_json(args: &[&str]) -> (serde_json::Value, Vec<Vec<f64>>) {
    let dir = tempfile::tempdir().unwrap();
    let mut full = vec!["--out", dir.path().to_str().unwrap(), "--grid", "65", "--json"];
    full.extend_from_slice(args);
    let o = mlq(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let name = if args.contains(&"star") { "star_torus.csv" } else { "export_torus.csv" };
    (v, read_csv(&dir.path().join(name)))
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>], scale: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x[2] - scale * y[2]).hypot(x[3] - scale * y[3])).fold(0.0, f64::max)
}

#[test]
fn star_rho0_is_idempotent() {
    let (_, prod) = star_json(&["star", "rho0", "rho0"]);
    let (_, rho) = star_json(&["export", "rho0"]);
    assert!(max_diff(&prod, &rho, 1.0) < 1e-10);
}

#[test]
fn star_q_with_eigenvector() {
    let (_, prod) = star_json(&["star", "q", "rho:3"]);
    let (_, rho) = star_json(&["export", "rho:3"]);
    assert!(max_diff(&prod, &rho, 3.0) < 1e-9);
}

#[test]
fn star_bump_depends_on_ordering() {
    let (half, f_half) = star_json(&["--lambda", "0.5", "star", "bump", "bump"]);
    let (zero, f_zero) = star_json(&["--lambda", "0", "star", "bump", "bump"]);
    assert!(max_diff(&f_half, &f_zero, 1.0) > 1e-3);
    // regression pins, grid 65
    let pin = |v: &serde_json::Value, key: &str, want: f64| {
        let got = v["result"][key].as_f64().unwrap();
        assert!((got - want).abs() < 1e-10, "{key}: {got} vs {want}");
    };
    pin(&half, "norm_2", 0.3734667511292018);
    pin(&half, "trace_re", 0.3887368135679319);
    pin(&zero, "norm_2", 0.33600600572357436);
    pin(&zero, "trace_re", 0.29300304650482556);
}
