use std::path::Path;
use std::process::{Command, Output};

use oofdm_cli::config::{parse_config, validate_config};

const HYBRID: &str = "[[modem]]\nscheme = \"HYBRID-ACO\"\nn = 32\nl = 4\nm1 = 4\nm2 = 4\n";

fn oofdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oofdm"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn repo_config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn rows(csv: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(csv)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn selftest_needs_no_config() {
    let out = oofdm(&["--scenario", "selftest"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 9);
}

#[test]
fn se_sweep_config_reports_reference_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = oofdm(&[
        "--config",
        &repo_config("se_sweep.toml"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = rows(&dir.path().join("se-sweep.csv"));
    assert_eq!(
        table[0].join(","),
        "scenario,scheme,N,L,M1,M2,kappa,alpha,channel,ebn0_db,ber,se_bits_per_s_per_hz,seed,status"
    );
    let se = |kappa: &str, alpha: &str| -> f64 {
        table
            .iter()
            .find(|r| r[1] == "HYBRID-ACO" && r[6] == kappa && r[7] == alpha)
            .unwrap()[11]
            .parse()
            .unwrap()
    };
    assert!((se("6", "0") - 2.065).abs() < 0.001);
    // Seven active subcarriers carry one more bit than the closed-form six.
    assert!(se("7", "0") > se("6", "0"));
    let aco_256_peak = table
        .iter()
        .filter(|r| r[1] == "ACO-IM" && r[4] == "256")
        .map(|r| r[11].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(aco_256_peak, 2.0);
    assert!(dir.path().join("plot_se-sweep.py").exists());
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("[run]\nscenario = \"ber-curve\"\n[ebn0]\npoints_db = [6, 10]\nmin_errors = 50\nmax_bits = 100000\n{HYBRID}alpha = [0, 8]\n"),
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (d, jobs) in [(&a, "1"), (&b, "1"), (&c, "3")] {
        let out = oofdm(&[
            "--config",
            &cfg,
            "--seed",
            "11",
            "--jobs",
            jobs,
            "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &Path| std::fs::read(d.join("ber-curve.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
    let table = rows(&a.join("ber-curve.csv"));
    assert_eq!(table.len(), 5);
    assert!(table[1..].iter().all(|r| r[12] == "11"));
}

#[test]
fn unreachable_target_is_a_status_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("[run]\nscenario = \"se-ee\"\n[ebn0]\nsearch_start_db = 0\nsearch_stop_db = 3\nmin_errors = 50\n{HYBRID}"),
    );
    let out = oofdm(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = rows(&dir.path().join("se-ee.csv"));
    assert_eq!(table[1][9], "");
    assert_eq!(table[1][13], "unreachable");
}

#[test]
fn config_errors_exit_2_with_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("[run]\nscenario = \"se-sweep\"\nbogus = 1\n{HYBRID}"),
    );
    let out = oofdm(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("bogus"), "{err}");

    let cfg = write(
        dir.path(),
        "d.toml",
        &format!("{HYBRID}kappa = 9\nalpha = 32\n"),
    );
    let out = oofdm(&["--config", &cfg, "--scenario", "se-sweep"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 7") && err.contains("kappa = 9"), "{err}");
    assert!(
        err.contains("line 8") && err.contains("alpha = 32"),
        "{err}"
    );

    assert_eq!(oofdm(&["--scenario", "se-ee"]).status.code(), Some(2));
    assert_eq!(oofdm(&["--scenario", "nope"]).status.code(), Some(2));
    assert_eq!(
        oofdm(&["--config", "/nonexistent.toml", "--scenario", "se-ee"])
            .status
            .code(),
        Some(2)
    );
    let cfg = write(dir.path(), "e.toml", "[run]\nscenario = \"se-ee\"\n");
    assert_eq!(oofdm(&["--config", &cfg]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("[run]\nscenario = \"se-sweep\"\n{HYBRID}"),
    );
    let blocker = write(dir.path(), "file", "");
    assert_eq!(
        oofdm(&["--config", &cfg, "--out", &blocker]).status.code(),
        Some(3)
    );
}

#[test]
fn validate_reports_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", HYBRID);
    assert!(validate_config(Path::new(&good)).unwrap().is_empty());
    let bad = write(
        dir.path(),
        "bad.toml",
        "[run]\ntarget_ber = 0.7\n[[modem]]\nscheme = \"HYBRID-ACO\"\nn = 24\nl = 4\nm1 = 3\nm2 = 4\n[[modem]]\nscheme = \"ACO-IM\"\nn = 32\nl = 4\nm1 = 4\nm2 = 4\nkappa = 9\nalpha = 2\n",
    );
    let diags = validate_config(Path::new(&bad)).unwrap();
    let lines: Vec<Option<usize>> = diags.iter().map(|d| d.line).collect();
    assert_eq!(
        lines,
        vec![Some(2), Some(5), Some(7), Some(15), Some(16)],
        "{diags:?}"
    );
    assert!(validate_config(Path::new("/nonexistent.toml")).is_err());
}

#[test]
fn channel_section_rules() {
    let cb = "[channel]\nmodel = \"ceiling-bounce\"\nrms_delay_spread_ns = 10\n";
    let errs = parse_config(&format!("{cb}{HYBRID}")).unwrap_err();
    assert_eq!(errs.len(), 1);
    assert!(errs[0].message.contains("data_rate_bps"));
    let ok = parse_config(&format!("{cb}data_rate_bps = 5e8\n{HYBRID}")).unwrap();
    assert!((ok.modems[0].base.symbol_period - 64e-9).abs() < 1e-18);
    assert!(parse_config("[channel]\nmodel = \"rayleigh\"\n").is_err());
}

#[test]
fn shipped_configs_are_valid() {
    for name in [
        "se_sweep.toml",
        "se_ee.toml",
        "ber_los.toml",
        "ber_dispersive.toml",
    ] {
        let diags = validate_config(Path::new(&repo_config(name))).unwrap();
        assert!(diags.is_empty(), "{name}: {diags:?}");
    }
}
