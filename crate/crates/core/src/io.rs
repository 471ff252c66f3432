//! Flat-file formats for clusters and vertex fields: a one-line context
//! header, then one row per vertex in the order given. Floating values use
//! the shortest round-trip decimal form, so write then read is bit-exact.

use std::fmt::Write as _;

use crate::gasket::{GasketLevel, Half, Vertex};
use crate::{Error, Result};

/// A cluster loaded from CSV: the context header plus the vertex rows,
/// still unvalidated against any graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterFile {
    pub n: u32,
    pub domain_log2: u32,
    pub vertices: Vec<Vertex>,
}

impl ClusterFile {
    /// Vertex indices on `g`. Errors if the context or any vertex does not
    /// belong to `g`.
    pub fn indices(&self, g: &GasketLevel) -> Result<Vec<u32>> {
        if self.n != g.n() || self.domain_log2 != g.domain_log2() {
            return Err(Error::Config(format!(
                "file context level={} domain_L={} does not match graph level={} domain_L={}",
                self.n,
                self.domain_log2,
                g.n(),
                g.domain_log2()
            )));
        }
        self.vertices.iter().map(|&v| g.require_index(v)).collect()
    }
}

/// A per-vertex scalar field loaded from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub n: u32,
    pub domain_log2: u32,
    pub rows: Vec<(Vertex, f64)>,
}

fn half_char(h: Half) -> char {
    match h {
        Half::Plus => '+',
        Half::Minus => '-',
    }
}

fn header_line(n: u32, domain_log2: u32) -> String {
    format!("# level={n} domain_L={domain_log2}")
}

fn parse_header(line: &str) -> Result<(u32, u32)> {
    let bad = || Error::Config(format!("line 1: expected `# level=n domain_L=L`, got `{line}`"));
    let rest = line.strip_prefix("# ").ok_or_else(bad)?;
    let mut parts = rest.split(' ');
    let level = parts
        .next()
        .and_then(|t| t.strip_prefix("level="))
        .and_then(|t| t.parse().ok())
        .ok_or_else(bad)?;
    let domain = parts
        .next()
        .and_then(|t| t.strip_prefix("domain_L="))
        .and_then(|t| t.parse().ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((level, domain))
}

fn parse_vertex(fields: &[&str], lineno: usize) -> Result<Vertex> {
    let half = match fields[0] {
        "+" => Half::Plus,
        "-" => Half::Minus,
        other => {
            return Err(Error::Config(format!("line {lineno}: bad half `{other}`")))
        }
    };
    let coord = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| Error::Config(format!("line {lineno}: bad coordinate `{s}`")))
    };
    Ok(Vertex::new(half, coord(fields[1])?, coord(fields[2])?))
}

/// Cluster CSV: header, then `half,a,b` rows in the order of `indices`.
pub fn cluster_to_csv(g: &GasketLevel, indices: &[u32]) -> String {
    let mut out = header_line(g.n(), g.domain_log2());
    out.push('\n');
    for &i in indices {
        let v = g.vertex(i);
        let _ = writeln!(out, "{},{},{}", half_char(v.half), v.a, v.b);
    }
    out
}

pub fn cluster_from_csv(text: &str) -> Result<ClusterFile> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Config("empty file".into()))?;
    let (n, domain_log2) = parse_header(header)?;
    let mut vertices = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = k + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!(
                "line {lineno}: expected 3 fields, got {}",
                fields.len()
            )));
        }
        vertices.push(parse_vertex(&fields, lineno)?);
    }
    Ok(ClusterFile { n, domain_log2, vertices })
}

/// Field CSV: header, then `half,a,b,value` rows covering every vertex of
/// `g` in enumeration order.
pub fn field_to_csv(g: &GasketLevel, values: &[f64]) -> String {
    assert_eq!(values.len(), g.vertex_count());
    let mut out = header_line(g.n(), g.domain_log2());
    out.push('\n');
    for (i, &x) in values.iter().enumerate() {
        let v = g.vertex(i as u32);
        let _ = writeln!(out, "{},{},{},{x}", half_char(v.half), v.a, v.b);
    }
    out
}

pub fn field_from_csv(text: &str) -> Result<FieldFile> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Config("empty file".into()))?;
    let (n, domain_log2) = parse_header(header)?;
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = k + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Config(format!(
                "line {lineno}: expected 4 fields, got {}",
                fields.len()
            )));
        }
        let v = parse_vertex(&fields, lineno)?;
        let x = fields[3]
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("line {lineno}: bad value `{}`", fields[3])))?;
        rows.push((v, x));
    }
    Ok(FieldFile { n, domain_log2, rows })
}

/// Plain numeric matrix, one comma-separated row per line.
pub fn matrix_to_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let mut first = true;
        for &x in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{x}");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    Error::Config(format!("line {}: bad value `{s}`", k + 1))
                })
            })
            .collect();
        rows.push(row?);
    }
    Ok(rows)
}
