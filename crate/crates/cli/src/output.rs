//! CSV and JSON rendering. JSON mirrors the CSV rows plus a metadata block.

use std::io::Write;

use serde_json::{json, Value};
use thermalize::{CountTable, TypicalityReport};

use crate::commands::{DeformBand, Table1Report, TwoLevelRow};
use crate::config::{LoadedConfig, OutputFormat};
use crate::error::{CliError, Result};

pub struct Rendered {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn render_count(t: &CountTable) -> Rendered {
    let rows = t
        .rows()
        .into_iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.epsilon_n),
                num(r.epsilon_n_kappa),
                r.omega_exact.unwrap_or_default(),
                opt(r.omega_analytic_log),
                opt(r.p_exact),
                num(r.p_analytic),
                opt(r.ln_p_exact),
                opt(r.ln_p_analytic),
            ]
        })
        .collect();
    Rendered {
        header: CountTable::CSV_HEADER.to_vec(),
        rows,
        json: t.to_json(),
    }
}

pub fn render_table1(r: &Table1Report) -> Rendered {
    let rows = r
        .rows
        .iter()
        .map(|row| {
            vec![
                num(row.kappa),
                num(row.beta),
                num(row.intercept),
                num(row.r_squared),
                row.points.to_string(),
                r.window.to_string(),
                num(r.beta_theory),
            ]
        })
        .collect();
    Rendered {
        header: vec![
            "kappa",
            "beta",
            "intercept",
            "r_squared",
            "points",
            "fit_window",
            "beta_theory",
        ],
        rows,
        json: serde_json::to_value(r).expect("report serializes"),
    }
}

pub fn render_deform(bands: &[DeformBand]) -> Rendered {
    let rows = bands
        .iter()
        .flat_map(|b| {
            b.rows.iter().map(move |r| {
                vec![
                    num(b.kappa),
                    r.n.to_string(),
                    num(r.bath_lo),
                    num(r.bath_hi),
                ]
            })
        })
        .collect();
    Rendered {
        header: vec!["kappa", "n", "bath_lo", "bath_hi"],
        rows,
        json: json!({ "bands": bands }),
    }
}

pub fn render_sample(r: &TypicalityReport) -> Rendered {
    let rows = r
        .seeds
        .iter()
        .enumerate()
        .map(|(i, seed)| {
            vec![
                i.to_string(),
                seed.to_string(),
                num(r.deviations[i]),
                opt(r.max_coherence.as_ref().map(|v| v[i])),
                opt(r.coherence_01.as_ref().map(|v| v[i])),
            ]
        })
        .collect();
    Rendered {
        header: vec!["index", "seed", "deviation", "max_abs_coherence", "abs_f01"],
        rows,
        json: json!({
            "report": r,
            "mean_abs_f01": r.mean_coherence_01(),
        }),
    }
}

pub fn render_two_level(rows: &[TwoLevelRow]) -> Rendered {
    let csv = rows
        .iter()
        .map(|r| {
            let a = r.approx.as_ref();
            vec![
                num(r.abs_f),
                num(r.exact.p_plus),
                num(r.exact.p_minus),
                num(r.exact.s_vn),
                num(r.exact.beta_eff),
                opt(a.map(|a| a.p_plus)),
                opt(a.map(|a| a.p_minus)),
                opt(a.map(|a| a.s_vn)),
                opt(a.map(|a| a.beta_eff)),
                opt(a.map(|a| a.s_gibbs)),
            ]
        })
        .collect();
    Rendered {
        header: vec![
            "abs_f",
            "p_plus_exact",
            "p_minus_exact",
            "s_vn_exact",
            "beta_eff_exact",
            "p_plus_approx",
            "p_minus_approx",
            "s_vn_approx",
            "beta_eff_approx",
            "s_gibbs",
        ],
        rows: csv,
        json: json!({ "rows": rows }),
    }
}

/// Write `rendered` in the configured format to `sink`.
pub fn write(
    rendered: &Rendered,
    cfg: &LoadedConfig,
    format: OutputFormat,
    mut sink: impl Write,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            let to_io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
            w.write_record(&rendered.header).map_err(to_io)?;
            for row in &rendered.rows {
                w.write_record(row).map_err(to_io)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut doc = rendered.json.clone();
            let meta = json!({
                "config_hash": cfg.hash(),
                "version": env!("CARGO_PKG_VERSION"),
                "seed": cfg.config.run.seed,
            });
            match &mut doc {
                Value::Object(map) => {
                    map.insert("run_metadata".into(), meta);
                }
                other => {
                    doc = json!({ "data": other.take(), "run_metadata": meta });
                }
            }
            serde_json::to_writer_pretty(&mut sink, &doc).map_err(|e| CliError::Io(e.into()))?;
            writeln!(sink)?;
        }
    }
    Ok(())
}
