//! Report documents and their md/csv renderings.

use std::fmt::Write;

use serde::Serialize;

pub const CSV_HEADER: &str = "point_index,x,quantity,closed_form,pipeline,residual";

/// Reproducibility stamp carried by every report.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub field: String,
    pub dimension: usize,
    pub config_sha256: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirs: Option<u64>,
    pub tol: f64,
    pub mode: kropina_core::kropina::Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Empty,
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Scalar(v) => num(*v),
            Cell::Vector(v) => join(v),
        }
    }
}

/// One line of the flat table shared by csv and md.
#[derive(Debug, Clone)]
pub struct Row {
    pub point_index: usize,
    pub x: Vec<f64>,
    pub quantity: String,
    pub closed_form: Cell,
    pub pipeline: Cell,
    pub residual: Option<f64>,
}

impl Row {
    fn cells(&self) -> [String; 6] {
        [
            self.point_index.to_string(),
            join(&self.x),
            self.quantity.clone(),
            self.closed_form.render(),
            self.pipeline.render(),
            self.residual.map(num).unwrap_or_default(),
        ]
    }
}

pub enum Section {
    List(String, Vec<(String, String)>),
    Table(String, Vec<&'static str>, Vec<Vec<String>>),
}

pub struct Document {
    pub title: String,
    pub meta: Meta,
    pub sections: Vec<Section>,
    pub rows: Vec<Row>,
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-4..1e7).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

fn table(out: &mut String, headers: &[&str], rows: impl Iterator<Item = Vec<String>>) {
    let _ = writeln!(out, "| {} |", headers.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(headers.len()));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out.push('\n');
}

impl Document {
    pub fn markdown(&self) -> String {
        let m = &self.meta;
        let mut out = format!("# {}\n\n", self.title);
        let _ = writeln!(out, "- tool: {} {}", m.tool, m.version);
        let _ = writeln!(out, "- field: {} (n = {})", m.field, m.dimension);
        let _ = writeln!(out, "- config sha256: {}", m.config_sha256);
        let _ = write!(out, "- seed: {}", m.seed);
        if let (Some(p), Some(d)) = (m.points, m.dirs) {
            let _ = write!(out, ", points: {p}, dirs: {d}");
        }
        let _ = writeln!(out, ", tol: {}\n", num(m.tol));
        for s in &self.sections {
            match s {
                Section::List(title, items) => {
                    let _ = writeln!(out, "## {title}\n");
                    for (k, v) in items {
                        let _ = writeln!(out, "- {k}: {v}");
                    }
                    out.push('\n');
                }
                Section::Table(title, headers, rows) => {
                    let _ = writeln!(out, "## {title}\n");
                    table(&mut out, headers, rows.iter().cloned());
                }
            }
        }
        if !self.rows.is_empty() {
            out.push_str("## Values\n\n");
            let headers = ["point", "x", "quantity", "closed form", "pipeline", "residual"];
            table(&mut out, &headers, self.rows.iter().map(|r| r.cells().to_vec()));
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.cells().join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [1.0, -0.5, 1e-17, 3.0e12, 0.30000000000000004, -2.5e-5] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-17), "1e-17");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(-0.0), "0");
    }

    #[test]
    fn cells_render_without_commas() {
        assert_eq!(Cell::Vector(vec![1.0, 0.0, 2.0]).render(), "1 0 2");
        assert_eq!(Cell::Empty.render(), "");
    }
}
