//! CSV/JSON table writers and the run manifest.

use std::io::Write;
use std::time::Duration;

use serde_json::{json, Value};

use crate::config::{Config, ExperimentId, Format};
use crate::run::{Cell, Row, Table};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Real(Some(x)) => fmt_real(*x),
        Cell::Real(None) => String::new(),
        Cell::Int(n) => n.to_string(),
    }
}

fn row_fields(r: &Row) -> Vec<String> {
    let mut f: Vec<String> = r.cells.iter().map(csv_field).collect();
    f.push(r.probability.map(fmt_real).unwrap_or_default());
    f.push(r.leakage.map(fmt_real).unwrap_or_default());
    f.push(r.status.name().to_string());
    f
}

pub fn write_csv<W: Write>(table: &Table, w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(&table.columns)?;
    for r in &table.rows {
        out.write_record(row_fields(r))?;
    }
    out.flush()?;
    Ok(())
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Real(Some(x)) => json!(x),
        Cell::Real(None) => Value::Null,
        Cell::Int(n) => json!(n),
    }
}

pub fn table_json(experiment: ExperimentId, table: &Table) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            let mut v: Vec<Value> = r.cells.iter().map(json_cell).collect();
            v.push(r.probability.map_or(Value::Null, |x| json!(x)));
            v.push(r.leakage.map_or(Value::Null, |x| json!(x)));
            v.push(json!(r.status.name()));
            Value::Array(v)
        })
        .collect();
    json!({
        "experiment": experiment.name(),
        "columns": table.columns,
        "rows": rows,
    })
}

pub fn render(cfg: &Config, table: &Table) -> Vec<u8> {
    match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(table, &mut buf).expect("writing to memory");
            buf
        }
        Format::Json => {
            let mut buf = serde_json::to_vec_pretty(&table_json(cfg.experiment, table))
                .expect("finite values");
            buf.push(b'\n');
            buf
        }
    }
}

pub fn manifest(
    cfg: &Config,
    table: &Table,
    output: &str,
    workers: usize,
    wall: Duration,
) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = json!({
                "row": i,
                "probability": r.probability,
                "leakage": r.leakage,
                "status": r.status.name(),
            });
            if let Some(n) = &r.note {
                v["note"] = json!(n);
            }
            v
        })
        .collect();
    let g = &cfg.grid;
    let mut effective = json!({
        "cutoff": cfg.cutoff,
        "workers": workers,
        "leakage_bound": cfg.leakage_bound,
        "grid_cap": cfg.grid_cap,
        "grid": {
            "s": g.s,
            "eta": g.eta,
            "p": g.p,
            "phi": g.phi,
            "n": g.n,
        },
    });
    if cfg.experiment == ExperimentId::Noon {
        effective["noon"] = json!({
            "mode": if cfg.noon.physical { "physical" } else { "ideal" },
            "idler_cutoff": cfg.noon.idler_cutoff,
        });
    }
    if let Some(c) = &cfg.custom {
        effective["cutoffs"] = json!(c.cutoffs);
    }
    json!({
        "tool": "homsim",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "config": {
            "origin": cfg.origin,
            "text": cfg.text,
        },
        "effective": effective,
        "output": output,
        "format": cfg.format.name(),
        "columns": table.columns,
        "rows": rows,
        "flagged": table.flagged(),
        "wall_time_s": wall.as_secs_f64(),
    })
}
