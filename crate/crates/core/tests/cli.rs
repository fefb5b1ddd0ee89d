//! End-to-end runs of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thin-obstacle"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("thin_obstacle_cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn list_presets_is_stable() {
    let out1 = bin().arg("list-presets").output().unwrap();
    let out2 = bin().arg("list-presets").output().unwrap();
    assert!(out1.status.success());
    assert_eq!(out1.stdout, out2.stdout);
    let text = String::from_utf8(out1.stdout).unwrap();
    let names: Vec<&str> = text
        .lines()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(
        names,
        vec!["he", "abs-x2", "harmonic-affine", "random-trace", "file"]
    );
    assert!(text.contains("Re((x'·e + i|x_{n+1}|)^{3/2})"));
}

#[test]
fn epi_check_suite_passes_and_is_deterministic() {
    let dir = tmp("epi_suite");
    let run = |out: &Path| {
        let status = bin()
            .args(["epi-check", "--n", "1", "--seed", "7", "--cases", "40"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        read(&out.join("epi_report.txt"))
    };
    let a = run(&dir.join("a"));
    let b = run(&dir.join("b"));
    assert_eq!(a, b, "reruns with the same seed must be byte-identical");
    assert!(a.contains("all_passed=true"));
    assert_eq!(a.lines().count(), 41);
}

#[test]
fn epi_check_trace_file_modes() {
    let dir = tmp("epi_trace");
    // a saved u₀ trace reaches the equality case
    let basis = thin_obstacle::spharm::build_basis(1, 12).unwrap();
    let u0 = thin_obstacle::homog::u0_trace(&basis);
    let trace_path = dir.join("u0.trace");
    thin_obstacle::spharm::save_trace(&u0, &trace_path).unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["epi-check", "--trace"])
        .arg(&trace_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report = read(&out.join("epi_report.txt"));
    // the file carries samples, so the verifier works on the basis
    // projection of u0: the inequality passes, C and c0 are recovered, and
    // the remainder is the (small) truncation tail
    assert!(report.contains("passed=true"), "{report}");
    let c: f64 = field(&report, "C=").parse().unwrap();
    let c0: f64 = field(&report, "c0=").parse().unwrap();
    let phi: f64 = field(&report, "phi_norm=").parse().unwrap();
    assert_eq!(c, 0.0);
    assert!((c0 - 1.0).abs() < 1e-10);
    assert!(phi < 0.05, "tail norm {phi}");

    // an uneven trace is rejected without --symmetrize
    let raw: Vec<f64> = basis
        .quad
        .nodes
        .iter()
        .map(|n| 1.0 + 0.5 * n.angles[0].sin())
        .collect();
    let uneven_path = dir.join("uneven.trace");
    let mut text = String::from("1,12\n");
    for (node, v) in basis.quad.nodes.iter().zip(&raw) {
        text.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", node.angles[0], node.weight, v));
    }
    std::fs::write(&uneven_path, text).unwrap();
    let out2 = dir.join("out2");
    let output = bin()
        .args(["epi-check", "--trace"])
        .arg(&uneven_path)
        .arg("--out")
        .arg(&out2)
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("symmetrize"));
    // and accepted with the flag
    let status = bin()
        .args(["epi-check", "--symmetrize", "--trace"])
        .arg(&uneven_path)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn decompose_reports_the_split() {
    let dir = tmp("decompose");
    let basis = thin_obstacle::spharm::build_basis(1, 12).unwrap();
    // band-limited admissible trace: 2·φ₀ + 0.5·cosθ/√π + 0.3·cos2θ/√π
    let mut coeffs = vec![0.0; basis.num_modes()];
    coeffs[0] = 2.0;
    coeffs[1] = 0.5;
    coeffs[3] = 0.3;
    let trace = thin_obstacle::spharm::synthesize(&coeffs, &basis).unwrap();
    let path = dir.join("c.trace");
    thin_obstacle::spharm::save_trace(&trace, &path).unwrap();
    let out = dir.join("out");
    let output = bin()
        .args(["decompose", "--trace"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = read(&out.join("decompose.txt"));
    let c: f64 = field(&text, "C=").parse().unwrap();
    let rec: f64 = field(&text, "reconstruction_residual=").parse().unwrap();
    // the degree-1 coefficient of h_e is 12/(5√π), so C = 0.5/(12/(5√π))
    let expected_c = 0.5 * 5.0 * std::f64::consts::PI.sqrt() / 12.0;
    assert!((c - expected_c).abs() < 1e-9, "{text}");
    assert!(rec < 1e-10, "{text}");
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    let start = text.find(key).unwrap_or_else(|| panic!("no {key} in {text}")) + key.len();
    text[start..].split_whitespace().next().unwrap()
}

#[test]
fn solve_writes_grid_and_report() {
    let dir = tmp("solve");
    let status = bin()
        .args([
            "solve", "--preset", "he", "--h", "1/64", "--omega", "opt", "--tol", "1e-12",
        ])
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let report = read(&dir.join("solve_report.txt"));
    assert!(report.contains("converged=true"));
    let sup: f64 = field(&report, "sup_error=").parse().unwrap();
    assert!(sup < 1e-3, "{report}");
    let grid = thin_obstacle::signorini::load_grid(&dir.join("solution.grid")).unwrap();
    assert_eq!(grid.nx, 129);
    // manifest carries the config echo
    let manifest = read(&dir.join("manifest.txt"));
    assert!(manifest.contains("subcommand=solve"));
    assert!(manifest.contains("preset=he"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tmp("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "preset=he\nh=1/64\ntol=1e-10\nomega=opt\n").unwrap();
    let out = dir.join("out");
    // flag overrides the preset in the file
    let status = bin()
        .arg("solve")
        .arg("--config")
        .arg(&cfg)
        .args(["--preset", "abs-x2"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report = read(&out.join("solve_report.txt"));
    assert!(report.contains("preset=abs-x2"), "{report}");
}

#[test]
fn gap_scan_certifies_and_detects_endpoints() {
    let dir = tmp("gap");
    let status = bin()
        .args(["gap-scan", "--lo", "1.01", "--hi", "1.49"])
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let cert = read(&dir.join("gap_certificate.txt"));
    assert!(cert.contains("certified=true"));
    assert!(cert.contains("admissible_in_window=0"));

    let wide = tmp("gap_wide");
    let status = bin()
        .args(["gap-scan", "--lo", "0.5", "--hi", "2.5", "--step", "1e-3"])
        .arg("--out")
        .arg(&wide)
        .status()
        .unwrap();
    assert!(status.success());
    let cert = read(&wide.join("gap_certificate.txt"));
    assert!(cert.contains("cases=contact-contact"));
    assert!(cert.contains("cases=free-free"));
    assert!(cert.contains("contact-free+free-contact"));
}

#[test]
fn frequency_curve_csv() {
    let dir = tmp("frequency");
    let status = bin()
        .args([
            "frequency",
            "--preset",
            "he",
            "--closed-form",
            "--h",
            "1/128",
            "--center",
            "0",
            "--radii",
            "0.1,0.2,0.3,0.4",
        ])
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&dir.join("frequency.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "r,D,H,N");
    for line in lines {
        let n: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((n - 1.5).abs() < 0.02, "{line}");
    }
}

#[test]
fn unknown_inputs_fail_cleanly() {
    let out = bin().args(["solve", "--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));

    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
