//! Trace files: one header row, one row per sample.
//!
//! Column order is `t`, the two-component fields `x xdot s e r tau u_ad
//! masses` (each as `_1 _2`), then `sigma_1..N`, `h_o_1..N`, `w_r_1..C`,
//! `dist_1..C`, `n_s`, `i_star`, `a_r_fired`. `N` is the hidden width and
//! `C` the memory capacity. Attention columns past the active count, and
//! `i_star` without memory, are left empty.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use wmac_core::scenario::ScenarioSpec;
use wmac_core::simulation::TraceRecord;

use crate::error::{CliError, Result};

const PAIRS: [&str; 8] = ["x", "xdot", "s", "e", "r", "tau", "u_ad", "masses"];

/// Widths of the variable-length trace fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceLayout {
    pub hidden: usize,
    pub capacity: usize,
}

impl TraceLayout {
    pub fn for_spec(spec: &ScenarioSpec) -> Self {
        Self {
            hidden: spec.controller.hidden,
            capacity: if spec.controller.kind.has_memory() {
                spec.memory.capacity
            } else {
                0
            },
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for name in PAIRS {
            cols.extend((1..=2).map(|i| format!("{name}_{i}")));
        }
        for (name, n) in [
            ("sigma", self.hidden),
            ("h_o", self.hidden),
            ("w_r", self.capacity),
            ("dist", self.capacity),
        ] {
            cols.extend((1..=n).map(|i| format!("{name}_{i}")));
        }
        cols.extend(["n_s", "i_star", "a_r_fired"].map(String::from));
        cols
    }
}

/// Decimal text with 17 significant digits, enough to reproduce the value.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn padded(values: &[f64], width: usize, row: &mut Vec<String>) -> Result<()> {
    if values.len() > width {
        return Err(CliError::Format(format!(
            "trace field has {} entries but the layout allows {width}",
            values.len()
        )));
    }
    row.extend(values.iter().map(|v| format_number(*v)));
    row.extend(std::iter::repeat_n(String::new(), width - values.len()));
    Ok(())
}

fn row(rec: &TraceRecord, layout: &TraceLayout) -> Result<Vec<String>> {
    let mut row = vec![format_number(rec.t)];
    for pair in [rec.x, rec.xdot, rec.s, rec.e, rec.r, rec.tau, rec.u_ad, rec.masses] {
        row.extend(pair.iter().map(|v| format_number(*v)));
    }
    padded(&rec.sigma, layout.hidden, &mut row)?;
    padded(&rec.h_o, layout.hidden, &mut row)?;
    padded(&rec.w_r, layout.capacity, &mut row)?;
    padded(&rec.dist, layout.capacity, &mut row)?;
    row.push(rec.n_s.to_string());
    row.push(rec.i_star.map(|i| i.to_string()).unwrap_or_default());
    row.push(u8::from(rec.a_r_fired).to_string());
    Ok(row)
}

pub fn write_trace<W: Write>(trace: &[TraceRecord], layout: &TraceLayout, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| CliError::Format(format!("writing trace: {e}"));
    w.write_record(layout.header()).map_err(fail)?;
    for rec in trace {
        w.write_record(row(rec, layout)?).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Format(format!("writing trace: {e}")))
}

pub fn write_trace_csv(trace: &[TraceRecord], layout: &TraceLayout, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trace(trace, layout, BufWriter::new(file))
}

fn layout_from_header(header: &csv::StringRecord) -> Result<TraceLayout> {
    let count = |prefix: &str| {
        header
            .iter()
            .filter(|h| h.strip_prefix(prefix).is_some_and(|n| n.parse::<usize>().is_ok()))
            .count()
    };
    let layout = TraceLayout {
        hidden: count("sigma_"),
        capacity: count("w_r_"),
    };
    let expected = layout.header();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::Format(
            "trace header does not match the expected column order".into(),
        ));
    }
    Ok(layout)
}

pub fn read_trace<R: Read>(input: R) -> Result<(TraceLayout, Vec<TraceRecord>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r
        .headers()
        .map_err(|e| CliError::Format(format!("reading trace: {e}")))?
        .clone();
    let layout = layout_from_header(&header)?;
    let mut trace = Vec::new();
    for (i, result) in r.records().enumerate() {
        let line = i + 2;
        let rec = result.map_err(|e| CliError::Format(format!("trace line {line}: {e}")))?;
        trace.push(parse_row(&rec, &layout).map_err(|m| CliError::Format(format!("trace line {line}: {m}")))?);
    }
    Ok((layout, trace))
}

pub fn read_trace_csv(path: &Path) -> Result<(TraceLayout, Vec<TraceRecord>)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trace(file)
}

fn parse_row(rec: &csv::StringRecord, layout: &TraceLayout) -> std::result::Result<TraceRecord, String> {
    let mut cells = rec.iter();
    let mut next = || cells.next().ok_or_else(|| "row is too short".to_string());
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let t = num(next()?)?;
    let mut pairs = [[0.0; 2]; 8];
    for pair in &mut pairs {
        for v in pair.iter_mut() {
            *v = num(next()?)?;
        }
    }
    let mut block = |n: usize| -> std::result::Result<Vec<f64>, String> {
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let cell = next()?;
            if !cell.is_empty() {
                values.push(num(cell)?);
            }
        }
        Ok(values)
    };
    let sigma = block(layout.hidden)?;
    let h_o = block(layout.hidden)?;
    let w_r = block(layout.capacity)?;
    let dist = block(layout.capacity)?;
    let int = |s: &str| s.parse::<usize>().map_err(|e| format!("`{s}`: {e}"));
    let n_s = int(next()?)?;
    let i_star = match next()? {
        "" => None,
        s => Some(int(s)?),
    };
    let a_r_fired = match next()? {
        "0" => false,
        "1" => true,
        s => return Err(format!("`{s}` is not a flag")),
    };
    let [x, xdot, s, e, r, tau, u_ad, masses] = pairs;
    Ok(TraceRecord {
        t,
        x,
        xdot,
        s,
        e,
        r,
        tau,
        u_ad,
        masses,
        sigma,
        h_o,
        w_r,
        dist,
        n_s,
        i_star,
        a_r_fired,
    })
}
