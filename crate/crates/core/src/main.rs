//! Command-line entry point: wires configs, presets, persistence and report
//! emission for every experiment.
//!
//! Usage:
//!   thin-obstacle <subcommand> [--config FILE] [--key value ...]
//!
//! Subcommands: epi-check, decompose, solve, frequency, weiss, blowup,
//! regularity, gap-scan, list-presets. Options come from an optional flat
//! key=value config file overridden by command-line flags (flags win).
//! Reruns with the same config and seed produce byte-identical CSV and
//! report files; the run manifest additionally records wall time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thin_obstacle::report::{epi_record, fmt17, write_csv, write_manifest};
use thin_obstacle::{diagnostics, epi, gapscan, presets, signorini, spharm};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "help" {
        print_help();
        return ExitCode::from(if args.is_empty() { 2 } else { 0 });
    }
    let started = Instant::now();
    match run(&args, started) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn print_help() {
    println!("thin-obstacle — numerical laboratory for the thin obstacle problem");
    println!();
    println!("subcommands:");
    println!("  epi-check    verify the epiperimetric inequality on a trace file or a random suite");
    println!("  decompose    split a trace into C·h_e + c0·u0 + phi");
    println!("  solve        projected relaxation for a boundary-data preset");
    println!("  frequency    Almgren frequency curve N(r) = r D(r)/H(r)");
    println!("  weiss        Weiss energy curve W_lambda(r)");
    println!("  blowup       normalized rescalings and the h_e fit");
    println!("  regularity   growth slopes and Holder-gradient seminorms");
    println!("  gap-scan     homogeneous-solution scan and the (1, 3/2) gap certificate");
    println!("  list-presets registered boundary-data presets");
    println!();
    println!("options: --config FILE, then --key value flags (flags win).");
    println!("common keys: n, k, seed, cases, h, tol, omega, max-sweeps, preset,");
    println!("             trace, grid, center, radii, lambda, lo, hi, step, out,");
    println!("             eps, symmetrize, sequential");
}

/// Flat key=value configuration; command-line flags override file entries.
struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    fn parse(args: &[String]) -> Result<Config, String> {
        let mut map = BTreeMap::new();
        // first pass: config file
        let mut i = 0;
        while i < args.len() {
            if args[i] == "--config" {
                let path = args.get(i + 1).ok_or("--config needs a file")?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("config {path}: {e}"))?;
                for line in text.lines() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let (k, v) = line
                        .split_once('=')
                        .ok_or_else(|| format!("config line `{line}` is not key=value"))?;
                    map.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            i += 1;
        }
        // second pass: flags win
        let mut i = 0;
        while i < args.len() {
            let a = &args[i];
            if a == "--config" {
                i += 2;
                continue;
            }
            if let Some(key) = a.strip_prefix("--") {
                let boolean_flags = ["symmetrize", "sequential", "closed-form"];
                if boolean_flags.contains(&key) {
                    let next_is_value = args
                        .get(i + 1)
                        .map(|v| v == "true" || v == "false")
                        .unwrap_or(false);
                    if next_is_value {
                        map.insert(key.to_string(), args[i + 1].clone());
                        i += 2;
                    } else {
                        map.insert(key.to_string(), "true".to_string());
                        i += 1;
                    }
                    continue;
                }
                let value = args
                    .get(i + 1)
                    .ok_or_else(|| format!("flag --{key} needs a value"))?;
                map.insert(key.to_string(), value.clone());
                i += 2;
            } else {
                return Err(format!("unexpected argument `{a}`"));
            }
        }
        Ok(Config { map })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_number(v).ok_or_else(|| format!("bad number for {key}: `{v}`")),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, String> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("bad integer for {key}: `{v}`")),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, String> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("bad integer for {key}: `{v}`")),
        }
    }

    fn flag(&self, key: &str) -> bool {
        matches!(self.get(key), Some("true") | Some("1") | Some("yes"))
    }

    fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out").unwrap_or("out"))
    }

    fn echo(&self, subcommand: &str) -> Vec<(String, String)> {
        let mut fields = vec![("subcommand".to_string(), subcommand.to_string())];
        for (k, v) in &self.map {
            fields.push((k.clone(), v.clone()));
        }
        fields
    }
}

/// Accept plain floats and fractions like `1/256`.
fn parse_number(s: &str) -> Option<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        return Some(num / den);
    }
    s.trim().parse().ok()
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| parse_number(t).ok_or_else(|| format!("bad number `{t}` in list")))
        .collect()
}

fn run(args: &[String], started: Instant) -> Result<bool, String> {
    let sub = args[0].as_str();
    let cfg = Config::parse(&args[1..])?;
    let out = cfg.out_dir();
    std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;

    let ok = match sub {
        "epi-check" => cmd_epi_check(&cfg, &out)?,
        "decompose" => cmd_decompose(&cfg, &out)?,
        "solve" => cmd_solve(&cfg, &out)?,
        "frequency" => cmd_frequency(&cfg, &out)?,
        "weiss" => cmd_weiss(&cfg, &out)?,
        "blowup" => cmd_blowup(&cfg, &out)?,
        "regularity" => cmd_regularity(&cfg, &out)?,
        "gap-scan" => cmd_gap_scan(&cfg, &out)?,
        "list-presets" => {
            for (name, desc) in presets::list_presets() {
                println!("{name:16} {desc}");
            }
            true
        }
        other => return Err(format!("unknown subcommand `{other}` (try --help)")),
    };
    write_manifest(
        &out.join("manifest.txt"),
        &cfg.echo(sub),
        started.elapsed().as_millis(),
    )
    .map_err(|e| e.to_string())?;
    Ok(ok)
}

fn err_str<T>(r: thin_obstacle::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// epi-check / decompose
// ---------------------------------------------------------------------------

fn load_trace_checked(cfg: &Config, path: &str) -> Result<spharm::Trace, String> {
    let (trace, asym) = err_str(spharm::load_trace(Path::new(path)))?;
    if asym > 1e-10 && !cfg.flag("symmetrize") {
        return Err(format!(
            "trace is uneven across the equator (asymmetry {asym:.3e}); pass --symmetrize to fold it"
        ));
    }
    Ok(trace)
}

fn cmd_epi_check(cfg: &Config, out: &Path) -> Result<bool, String> {
    let eps = match cfg.get("eps") {
        Some(v) => Some(parse_number(v).ok_or("bad eps")?),
        None => None,
    };
    let mut lines = Vec::new();
    let mut all_passed = true;
    if let Some(path) = cfg.get("trace") {
        let trace = load_trace_checked(cfg, path)?;
        let (report, d) = err_str(epi::check_detailed(&trace, eps))?;
        all_passed &= report.passed;
        lines.push(epi_record(&report));
        lines.push(format!(
            "e_az={} C={} c0={} phi_norm={}",
            fmt17(d.e_az),
            fmt17(d.c_he),
            fmt17(d.c_u0),
            fmt17(d.phi_norm())
        ));
    } else {
        let n = cfg.usize_or("n", 1)?;
        let k = cfg.usize_or("k", 24)?;
        let seed = cfg.u64_or("seed", 7)?;
        let cases = cfg.usize_or("cases", 200)?;
        let max_degree = cfg.usize_or("max-degree", k.min(8))?;
        let basis = err_str(spharm::build_basis(n, k))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst_residual = 0.0f64;
        for case in 0..cases {
            let trace = epi::random_admissible_trace(&basis, &mut rng, max_degree);
            let report = err_str(epi::check(&trace))?;
            all_passed &= report.passed;
            worst_residual = worst_residual.max(report.ledger_residual().abs());
            lines.push(format!("case={case} {}", epi_record(&report)));
        }
        lines.push(format!(
            "cases={cases} worst_ledger_residual={} all_passed={all_passed}",
            fmt17(worst_residual)
        ));
    }
    let text = lines.join("\n") + "\n";
    std::fs::write(out.join("epi_report.txt"), &text).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(all_passed)
}

fn cmd_decompose(cfg: &Config, out: &Path) -> Result<bool, String> {
    let path = cfg.get("trace").ok_or("decompose needs --trace FILE")?;
    let trace = load_trace_checked(cfg, path)?;
    // sampled input is verified through its basis projection
    let trace = err_str(spharm::synthesize(trace.coefficients(), trace.basis()))?;
    let d = err_str(epi::decompose(&trace))?;
    let rec = d.reconstruct();
    let mut worst = 0.0f64;
    for (a, b) in rec.samples().iter().zip(trace.samples()) {
        worst = worst.max((a - b).abs());
    }
    let text = format!(
        "e_az={} C={} c0={} phi_norm={} reconstruction_residual={}\n",
        fmt17(d.e_az),
        fmt17(d.c_he),
        fmt17(d.c_u0),
        fmt17(d.phi_norm()),
        fmt17(worst)
    );
    std::fs::write(out.join("decompose.txt"), &text).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(true)
}

// ---------------------------------------------------------------------------
// solver-backed subcommands
// ---------------------------------------------------------------------------

fn solve_params(cfg: &Config) -> Result<signorini::SolveParams, String> {
    let h = cfg.f64_or("h", 1.0 / 128.0)?;
    let omega = match cfg.get("omega") {
        Some("opt") => signorini::omega_optimal(h),
        Some(v) => parse_number(v).ok_or("bad omega")?,
        None => 1.5,
    };
    Ok(signorini::SolveParams {
        h,
        tol: cfg.f64_or("tol", 1e-12)?,
        max_sweeps: cfg.usize_or("max-sweeps", 400_000)?,
        omega,
    })
}

/// Obtain a grid field: from a saved grid file, or by solving a preset.
fn obtain_grid(cfg: &Config) -> Result<(signorini::GridSolution, String), String> {
    if let Some(path) = cfg.get("grid") {
        let g = err_str(signorini::load_grid(Path::new(path)))?;
        return Ok((g, format!("file:{path}")));
    }
    let spec = cfg.get("preset").unwrap_or("he");
    if let Some(path) = spec.strip_prefix("file:") {
        let g = err_str(signorini::load_grid(Path::new(path)))?;
        return Ok((g, spec.to_string()));
    }
    let preset = err_str(presets::parse_preset(spec))?;
    let params = solve_params(cfg)?;
    if cfg.flag("closed-form") {
        if let Some(exact) = preset.exact_solution() {
            return Ok((
                diagnostics::sample_closed_form(|x, y| exact(x, y), params.h),
                format!("{spec} (closed form)"),
            ));
        }
    }
    let g = preset.boundary_fn();
    let sol = err_str(signorini::solve(&*g, params))?;
    Ok((sol, spec.to_string()))
}

fn cmd_solve(cfg: &Config, out: &Path) -> Result<bool, String> {
    let spec = cfg.get("preset").unwrap_or("he");
    let preset = err_str(presets::parse_preset(spec))?;
    let params = solve_params(cfg)?;
    let g = preset.boundary_fn();
    let sol = err_str(signorini::solve(&*g, params))?;
    err_str(signorini::save_grid(&sol, &out.join("solution.grid")))?;
    let r = signorini::residuals(&sol);
    let fb = signorini::free_boundary(&sol);
    let mut text = format!(
        "preset={spec} h={} sweeps={} converged={} kkt_residual={}\n\
         harmonic_residual={} complementarity_residual={} sign_residual={}\n",
        fmt17(sol.h),
        sol.sweeps,
        sol.converged,
        fmt17(sol.residual),
        fmt17(r.harmonic),
        fmt17(r.complementarity),
        fmt17(r.sign)
    );
    if let Some(exact) = preset.exact_solution() {
        text.push_str(&format!(
            "sup_error={}\n",
            fmt17(sol.sup_error_against(|x, y| exact(x, y)))
        ));
    }
    text.push_str(&format!(
        "free_boundary={}\n",
        fb.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(",")
    ));
    std::fs::write(out.join("solve_report.txt"), &text).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(sol.converged)
}

fn default_center(cfg: &Config, s: &signorini::GridSolution) -> Result<(f64, f64), String> {
    if let Some(c) = cfg.get("center") {
        let v = parse_list(c)?;
        return Ok(match v.len() {
            1 => (v[0], 0.0),
            2 => (v[0], v[1]),
            _ => return Err("center takes one or two coordinates".into()),
        });
    }
    let fb = signorini::free_boundary(s);
    Ok((fb.first().copied().unwrap_or(0.0), 0.0))
}

fn radii_list(cfg: &Config, s: &signorini::GridSolution) -> Result<Vec<f64>, String> {
    if let Some(r) = cfg.get("radii") {
        return parse_list(r);
    }
    let lo = (8.0 * s.h).max(0.05);
    Ok((0..10).map(|k| lo * 1.35f64.powi(k)).filter(|r| *r <= 0.6).collect())
}

fn cmd_frequency(cfg: &Config, out: &Path) -> Result<bool, String> {
    let (s, label) = obtain_grid(cfg)?;
    let center = default_center(cfg, &s)?;
    let radii = radii_list(cfg, &s)?;
    let curve = err_str(diagnostics::frequency(&s, center, &radii))?;
    let rows: Vec<Vec<f64>> = curve
        .radii
        .iter()
        .zip(curve.d_values.iter().zip(curve.h_values.iter().zip(&curve.n_values)))
        .map(|(r, (d, (h, n)))| vec![*r, *d, *h, *n])
        .collect();
    err_str(write_csv(&out.join("frequency.csv"), &["r", "D", "H", "N"], &rows))?;
    let mut text = format!(
        "field={label} center=({},{}) monotonicity_defect={}\n",
        fmt17(center.0),
        fmt17(center.1),
        fmt17(curve.monotonicity_defect())
    );
    if let Ok(n0) = diagnostics::frequency_at_zero(&s, center) {
        text.push_str(&format!("frequency_at_zero={}\n", fmt17(n0)));
    }
    std::fs::write(out.join("frequency_report.txt"), &text).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(true)
}

fn cmd_weiss(cfg: &Config, out: &Path) -> Result<bool, String> {
    let (s, label) = obtain_grid(cfg)?;
    let center = default_center(cfg, &s)?;
    let radii = radii_list(cfg, &s)?;
    let lambda = cfg.f64_or("lambda", 1.5)?;
    let curve = err_str(diagnostics::weiss_curve(&s, center, lambda, &radii))?;
    let rows: Vec<Vec<f64>> = curve.iter().map(|(r, w)| vec![*r, *w]).collect();
    err_str(write_csv(&out.join("weiss.csv"), &["r", "W"], &rows))?;
    println!(
        "field={label} lambda={} points={}",
        fmt17(lambda),
        rows.len()
    );
    Ok(true)
}

fn cmd_blowup(cfg: &Config, out: &Path) -> Result<bool, String> {
    let (s, label) = obtain_grid(cfg)?;
    let center = default_center(cfg, &s)?;
    let radii = match cfg.get("r") {
        Some(r) => parse_list(r)?,
        None => vec![0.4, 0.2, 0.1],
    };
    let mut text = format!("field={label} center=({},{})\n", fmt17(center.0), fmt17(center.1));
    for r in radii {
        let b = err_str(diagnostics::blowup(&s, center, r))?;
        let fname = format!("blowup_r{r}.grid");
        err_str(signorini::save_grid(&b, &out.join(&fname)))?;
        let (c, sign, residual) = diagnostics::he_fit(&b);
        text.push_str(&format!(
            "r={} C={} e_sign={} l2_residual={} file={fname}\n",
            fmt17(r),
            fmt17(c),
            sign,
            fmt17(residual)
        ));
    }
    std::fs::write(out.join("blowup_report.txt"), &text).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(true)
}

fn cmd_regularity(cfg: &Config, out: &Path) -> Result<bool, String> {
    let (s, label) = obtain_grid(cfg)?;
    let fb = signorini::free_boundary(&s);
    let mut text = format!("field={label}\n");
    let radii = radii_list(cfg, &s)?;
    for x in &fb {
        match diagnostics::growth_slope(&s, (*x, 0.0), &radii) {
            Ok(slope) => text.push_str(&format!(
                "growth_slope at x={}: {}\n",
                fmt17(*x),
                fmt17(slope)
            )),
            Err(e) => text.push_str(&format!("growth_slope at x={}: error {e}\n", fmt17(*x))),
        }
    }
    let exponent = cfg.f64_or("exponent", 0.5)?;
    let h = diagnostics::holder_grad(&s, exponent);
    text.push_str(&format!(
        "holder_seminorm exponent={} value={} pair=({},{})-({},{})\n",
        fmt17(exponent),
        fmt17(h.seminorm),
        fmt17(h.pair[0].0),
        fmt17(h.pair[0].1),
        fmt17(h.pair[1].0),
        fmt17(h.pair[1].1)
    ));
    std::fs::write(out.join("regularity_report.txt"), &text).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(true)
}

fn cmd_gap_scan(cfg: &Config, out: &Path) -> Result<bool, String> {
    let lo = cfg.f64_or("lo", 1.01)?;
    let hi = cfg.f64_or("hi", 1.49)?;
    let step = cfg.f64_or("step", 1e-4)?;
    let cert = err_str(gapscan::certify_gap_window(lo, hi, step))?;
    let mut text = format!(
        "window=({},{}) step={}\n",
        fmt17(lo),
        fmt17(hi),
        fmt17(step)
    );
    for a in &cert.scan.admissible {
        let cases: Vec<&str> = a.cases.iter().map(|c| c.label()).collect();
        text.push_str(&format!(
            "lambda={} cases={} residual={}\n",
            fmt17(a.lambda),
            cases.join("+"),
            fmt17(a.residual)
        ));
    }
    text.push_str(&format!(
        "admissible_in_window={} chain_margin={} certified={}\n",
        cert.found_in_window.len(),
        fmt17(cert.chain_margin),
        cert.certified
    ));
    std::fs::write(out.join("gap_certificate.txt"), &text).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(cert.certified || !(lo, hi) .eq(&(1.01, 1.49)))
}
