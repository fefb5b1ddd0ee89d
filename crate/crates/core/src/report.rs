//! Text emission: 17-significant-digit floats, CSV curves, key=value
//! records and run manifests. Identical inputs produce byte-identical
//! files, which is what the regression baselines diff against.

use std::path::Path;

use crate::epi::EpiReport;
use crate::Result;

/// Format with 17 significant digits (round-trip exact for f64).
pub fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Write a CSV file with a header row and 17-digit floats.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cols: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One epiperimetric record as a single structured-text line.
pub fn epi_record(r: &EpiReport) -> String {
    format!(
        "n={} eps={} W_z={} W_zeta={} I={} J={} K={} L={} passed={} equality={}",
        r.n,
        fmt17(r.eps),
        fmt17(r.w_z),
        fmt17(r.w_zeta),
        fmt17(r.term_i),
        fmt17(r.term_j),
        fmt17(r.term_k),
        fmt17(r.term_l),
        r.passed,
        r.equality
    )
}

/// Run manifest: config echo plus versions and wall time.
pub fn write_manifest(path: &Path, fields: &[(String, String)], wall_ms: u128) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("version={}\n", env!("CARGO_PKG_VERSION")));
    for (k, v) in fields {
        out.push_str(&format!("{k}={v}\n"));
    }
    out.push_str(&format!("wall_ms={wall_ms}\n"));
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_roundtrip() {
        for v in [std::f64::consts::PI, -5.0 * std::f64::consts::PI / 12.0, 1e-300, 0.1] {
            let s = fmt17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }

    #[test]
    fn record_has_the_contract_fields() {
        let r = EpiReport {
            n: 1,
            eps: 0.2,
            w_z: -1.0,
            w_zeta: -1.2,
            term_i: 0.0,
            term_j: 0.0,
            term_k: 0.0,
            term_l: 0.0,
            passed: true,
            equality: true,
        };
        let line = epi_record(&r);
        for key in ["n=", "eps=", "W_z=", "W_zeta=", "I=", "J=", "K=", "L=", "passed=", "equality="] {
            assert!(line.contains(key), "missing {key} in `{line}`");
        }
    }
}
