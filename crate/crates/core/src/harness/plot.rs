//! gnuplot script generation from an experiment CSV: mean competitive ratio
//! against the axis value, one series per strategy in alphabetical order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::harness::experiment::CSV_COLUMNS;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlotError {
    #[error("CSV header does not match the result schema: {0}")]
    Schema(String),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotScript {
    pub script: String,
    pub strategies: Vec<String>,
    pub warnings: Vec<String>,
}

fn split_row(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

pub fn plot_script(csv: &str) -> Result<PlotScript, PlotError> {
    let mut lines = csv.lines().enumerate();
    let mut warnings = Vec::new();
    let header = match lines.next() {
        Some((_, h)) => split_row(h),
        None => {
            warnings.push("CSV is empty; the script has no series".to_string());
            return Ok(render("value", BTreeMap::new(), warnings));
        }
    };
    if header.len() < CSV_COLUMNS.len() || header[..CSV_COLUMNS.len()] != CSV_COLUMNS {
        return Err(PlotError::Schema(header.join(",")));
    }
    let col = |name: &str| CSV_COLUMNS.iter().position(|c| *c == name).expect("known column");
    let (c_axis, c_value, c_strategy, c_ratio) =
        (col("axis"), col("axis_value"), col("strategy"), col("competitive_ratio"));

    let mut axis_name: Option<String> = None;
    // strategy -> axis value (as text, ordered numerically below) -> ratios
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_row(line);
        if fields.len() != header.len() {
            return Err(PlotError::Row {
                line: idx + 1,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        axis_name.get_or_insert_with(|| fields[c_axis].clone());
        let value: f64 = fields[c_value].parse().map_err(|_| PlotError::Row {
            line: idx + 1,
            message: format!("bad axis value '{}'", fields[c_value]),
        })?;
        let entry = series.entry(fields[c_strategy].clone()).or_default();
        if let Ok(ratio) = fields[c_ratio].parse::<f64>() {
            entry.push((value, ratio));
        }
    }
    if series.is_empty() {
        warnings.push("CSV has no data rows; the script has no series".to_string());
    }
    let means = series
        .into_iter()
        .map(|(name, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut out: Vec<(f64, f64)> = Vec::new();
            let mut i = 0;
            while i < points.len() {
                let x = points[i].0;
                let group: Vec<f64> = points[i..].iter().take_while(|p| p.0 == x).map(|p| p.1).collect();
                i += group.len();
                out.push((x, group.iter().sum::<f64>() / group.len() as f64));
            }
            (name, out)
        })
        .collect();
    Ok(render(axis_name.as_deref().unwrap_or("value"), means, warnings))
}

fn render(axis: &str, series: BTreeMap<String, Vec<(f64, f64)>>, warnings: Vec<String>) -> PlotScript {
    let xlabel = match axis {
        "budget" => "C / n",
        "density" => "density parameter",
        "radius" => "spectral radius of beta A",
        other => other,
    };
    let mut s = String::new();
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output 'competitive_ratio.png'");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel 'mean competitive ratio'");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set grid");
    for (i, (name, points)) in series.iter().enumerate() {
        let _ = writeln!(s, "$s{i} << EOD");
        for (x, y) in points {
            let _ = writeln!(s, "{x} {y}");
        }
        let _ = writeln!(s, "EOD");
        let _ = writeln!(s, "# series {i}: {name}");
    }
    if !series.is_empty() {
        let parts: Vec<String> = series
            .keys()
            .enumerate()
            .map(|(i, name)| format!("$s{i} using 1:2 with linespoints title '{name}'"))
            .collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    }
    PlotScript {
        script: s,
        strategies: series.into_keys().collect(),
        warnings,
    }
}
