//! CSV and JSON report files.
//!
//! `norms.csv`, `net_diagnostics.csv` and `summary.json` depend only on the
//! inputs, so reruns are byte-identical. Wall-clock timings go to a separate
//! `timings.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::{ConsistencyReport, ModeratenessReport, NegligibilityReport, NetDiagnostics, NET_ORDERS};
use crate::cauchy_engine::{EstimateCheck, NormSample};
use crate::error::{Error, Result};

pub const SUMMARY_SCHEMA: &str = "landau-vws-summary/1";

/// Classical-solve results for the summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalSummary {
    pub estimate: EstimateCheck,
    pub top_shell_fraction: f64,
}

/// Everything one command produced.
#[derive(Debug, Clone, Default)]
pub struct Reports {
    pub command: String,
    pub scenario: Option<String>,
    pub variant: Option<String>,
    pub s: f64,
    pub schedule: Option<String>,
    pub eps_grid: Vec<f64>,
    pub net: Option<NetDiagnostics>,
    /// `(ε, norm time series)` for every successful member of the net.
    pub net_norms: Vec<(f64, Vec<NormSample>)>,
    pub moderateness: Option<ModeratenessReport>,
    pub consistency: Option<ConsistencyReport>,
    pub uniqueness: Option<NegligibilityReport>,
    pub classical: Option<ClassicalSummary>,
    /// `(label, seconds)`; written to `timings.json` only.
    pub timings: Vec<(String, f64)>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn moderateness_json(m: &ModeratenessReport) -> Value {
    let mut obj = Map::new();
    for e in &m.exponents {
        obj.insert(format!("k{}", e.k), num(e.n_hat));
    }
    obj.insert("pass".into(), Value::Bool(m.pass));
    obj.insert(
        "fits".into(),
        Value::Array(
            m.exponents
                .iter()
                .map(|e| {
                    json!({
                        "k": e.k,
                        "n_hat": num(e.n_hat),
                        "rms_residual": num(e.rms_residual),
                        "first_half_slope": num(e.first_half_slope),
                        "second_half_slope": num(e.second_half_slope),
                        "stable": e.stable,
                    })
                })
                .collect(),
        ),
    );
    Value::Object(obj)
}

fn entries_json(entries: &[super::ErrorEntry]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|e| json!({"eps": num(e.eps), "omega": num(e.omega), "value": num(e.value)}))
            .collect(),
    )
}

/// The deterministic summary document.
pub fn summary_json(r: &Reports) -> Value {
    let net = r.net.as_ref().map(|d| {
        json!({
            "failed": d.failed(),
            "entries": d.entries.iter().map(|e| {
                let sups = e.sup_norms.map(|n| {
                    let mut m = Map::new();
                    for (k, v) in n.iter().enumerate() {
                        m.insert(format!("k{k}"), num(*v));
                    }
                    Value::Object(m)
                });
                json!({
                    "eps": num(e.eps),
                    "omega": num(e.omega),
                    "sup_norms": sups,
                    "error": e.error,
                })
            }).collect::<Vec<_>>(),
        })
    });
    json!({
        "schema": SUMMARY_SCHEMA,
        "command": r.command,
        "scenario": r.scenario,
        "variant": r.variant,
        "s": num(r.s),
        "schedule": r.schedule,
        "eps_grid": r.eps_grid.iter().map(|v| num(*v)).collect::<Vec<_>>(),
        "net": net,
        "moderateness": r.moderateness.as_ref().map(moderateness_json),
        "consistency": r.consistency.as_ref().map(|c| json!({
            "entries": entries_json(&c.entries),
            "inversions": c.inversions,
            "ratio": num(c.ratio),
            "consistent": c.consistent,
        })),
        "uniqueness": r.uniqueness.as_ref().map(|u| json!({
            "entries": entries_json(&u.entries),
            "inversions": u.inversions,
            "decreasing": u.decreasing,
            "note": "decreasing differences only; faster-than-any-power decay is not certified",
        })),
        "classical": r.classical.as_ref().map(|c| json!({
            "estimate_passed": c.estimate.passed,
            "measured_c": num(c.estimate.measured_c),
            "theoretical_c": num(c.estimate.theoretical_c),
            "top_shell_fraction": num(c.top_shell_fraction),
        })),
    })
}

/// Writes `norms.csv`, `net_diagnostics.csv`, `summary.json` (plus
/// `consistency.csv`, `uniqueness.csv` and `timings.json` when applicable)
/// into `dir`, creating it if needed. Returns the written paths.
pub fn export_reports(r: &Reports, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("norms.csv");
    write_file(&path, |w| {
        writeln!(w, "eps,t,h_norm_1plus_s,h_norm_s")?;
        for (eps, series) in &r.net_norms {
            for n in series {
                writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", eps, n.t, n.h_norm_1plus_s, n.h_norm_s)?;
            }
        }
        Ok(())
    })?;
    written.push(path);

    let path = dir.join("net_diagnostics.csv");
    write_file(&path, |w| {
        writeln!(w, "eps,k,sup_norm")?;
        if let Some(d) = &r.net {
            for e in &d.entries {
                if let Some(n) = e.sup_norms {
                    for (k, v) in n.iter().enumerate().take(NET_ORDERS) {
                        writeln!(w, "{:.16e},{},{:.16e}", e.eps, k, v)?;
                    }
                }
            }
        }
        Ok(())
    })?;
    written.push(path);

    for (name, entries) in [
        ("consistency.csv", r.consistency.as_ref().map(|c| &c.entries)),
        ("uniqueness.csv", r.uniqueness.as_ref().map(|u| &u.entries)),
    ] {
        if let Some(entries) = entries {
            let path = dir.join(name);
            write_file(&path, |w| {
                writeln!(w, "eps,omega,sup_difference")?;
                for e in entries {
                    writeln!(w, "{:.16e},{:.16e},{:.16e}", e.eps, e.omega, e.value)?;
                }
                Ok(())
            })?;
            written.push(path);
        }
    }

    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary_json(r)).map_err(|source| Error::Json {
        context: "summary".into(),
        source,
    })?;
    write_file(&path, |w| writeln!(w, "{text}"))?;
    written.push(path);

    if !r.timings.is_empty() {
        let path = dir.join("timings.json");
        let obj: Map<String, Value> = r.timings.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
        let text = serde_json::to_string_pretty(&Value::Object(obj)).expect("timings serialize");
        write_file(&path, |w| writeln!(w, "{text}"))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vws_harness::{ExponentEstimate, NetEntry};

    #[test]
    fn empty_reports_write_headers_and_schema() {
        let dir = tempfile::tempdir().unwrap();
        let files = export_reports(&Reports::default(), dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        assert_eq!(std::fs::read_to_string(dir.path().join("norms.csv")).unwrap(), "eps,t,h_norm_1plus_s,h_norm_s\n");
        assert_eq!(std::fs::read_to_string(dir.path().join("net_diagnostics.csv")).unwrap(), "eps,k,sup_norm\n");
        let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["schema"], SUMMARY_SCHEMA);
        assert!(summary["moderateness"].is_null());
    }

    #[test]
    fn moderateness_field_layout() {
        let r = Reports {
            moderateness: Some(ModeratenessReport {
                exponents: vec![ExponentEstimate {
                    k: 0,
                    n_hat: 2.0,
                    rms_residual: 0.0,
                    first_half_slope: 2.0,
                    second_half_slope: 2.0,
                    stable: true,
                }],
                pass: true,
            }),
            ..Default::default()
        };
        let v = summary_json(&r);
        assert_eq!(v["moderateness"]["k0"], json!(2.0));
        assert_eq!(v["moderateness"]["pass"], json!(true));
    }

    #[test]
    fn failed_entries_are_skipped_in_csv_and_reported_in_json() {
        let r = Reports {
            net: Some(NetDiagnostics {
                s: 0.0,
                entries: vec![
                    NetEntry { eps: 0.25, omega: 0.7, sup_norms: Some([1.0, 2.0, 3.0]), error: None },
                    NetEntry { eps: 0.125, omega: 0.5, sup_norms: None, error: Some("boom".into()) },
                ],
            }),
            timings: vec![("total".into(), 1.5)],
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let files = export_reports(&r, dir.path()).unwrap();
        assert!(files.iter().any(|p| p.ends_with("timings.json")));
        let csv = std::fs::read_to_string(dir.path().join("net_diagnostics.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
        let v = summary_json(&r);
        assert_eq!(v["net"]["failed"], json!(1));
        assert_eq!(v["net"]["entries"][1]["error"], json!("boom"));
    }

    #[test]
    fn unwritable_destination_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = export_reports(&Reports::default(), &blocker.join("sub")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("file"));
    }
}
