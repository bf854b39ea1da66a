use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kcut::Graph;

/// Feature rows and, optionally, one raw label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointData {
    pub points: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses comma, tab or whitespace separated points. A first row that does
/// not parse as numbers is taken as a header. With `has_labels` the last
/// column is a class label.
pub fn parse_points(text: &str, has_labels: bool) -> Result<PointData> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (idx, (line_no, line)) in data_lines(text).enumerate() {
        let mut cols = fields(line);
        let label = if has_labels {
            if cols.len() < 2 {
                bail!("line {line_no}: expected features followed by a label");
            }
            cols.pop().map(str::to_string)
        } else {
            None
        };
        let parsed: Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if idx == 0 => continue,
            Err(e) => bail!("line {line_no}: {e}"),
        };
        if let Some(bad) = row.iter().position(|x| !x.is_finite()) {
            bail!("line {line_no}: column {} is not finite", bad + 1);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => bail!("line {line_no}: expected {w} features, found {}", row.len()),
            _ => {}
        }
        points.push(row);
        labels.extend(label);
    }
    if points.is_empty() {
        bail!("no data rows");
    }
    Ok(PointData { points, labels: has_labels.then_some(labels) })
}

pub fn read_points(path: &Path, has_labels: bool) -> Result<PointData> {
    parse_points(&read(path)?, has_labels).with_context(|| format!("in {}", path.display()))
}

/// Parses an `i j w` edge list with 0-based vertex indices. The vertex count
/// is one more than the largest index unless `n` is given.
pub fn parse_edges(text: &str, n: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    for (line_no, line) in data_lines(text) {
        let cols = fields(line);
        if cols.len() != 3 && cols.len() != 2 {
            bail!("line {line_no}: expected 'i j w', found {} fields", cols.len());
        }
        let i: usize = cols[0].parse().with_context(|| format!("line {line_no}: bad vertex '{}'", cols[0]))?;
        let j: usize = cols[1].parse().with_context(|| format!("line {line_no}: bad vertex '{}'", cols[1]))?;
        let w: f64 = match cols.get(2) {
            Some(c) => c.parse().with_context(|| format!("line {line_no}: bad weight '{c}'"))?,
            None => 1.0,
        };
        edges.push((i, j, w));
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0));
    Ok(Graph::from_edges(n, edges)?)
}

pub fn read_edges(path: &Path) -> Result<Graph> {
    parse_edges(&read(path)?, None).with_context(|| format!("in {}", path.display()))
}

/// One label per non-empty line.
pub fn read_truth(path: &Path) -> Result<Vec<String>> {
    Ok(data_lines(&read(path)?).map(|(_, l)| l.to_string()).collect())
}

/// Maps raw labels to `0..c` in sorted order (numeric when all labels are
/// integers). Returns the codes and the sorted distinct labels.
pub fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut classes: Vec<String> = raw.to_vec();
    if raw.iter().all(|r| r.parse::<i64>().is_ok()) {
        classes.sort_by_key(|r| r.parse::<i64>().unwrap());
    } else {
        classes.sort();
    }
    classes.dedup();
    let codes = raw.iter().map(|r| classes.iter().position(|c| c == r).unwrap()).collect();
    (codes, classes)
}

/// Centers every feature and scales it to unit variance (constant features
/// are only centered).
pub fn standardize(points: &mut [Vec<f64>]) {
    let (n, d) = (points.len() as f64, points.first().map_or(0, Vec::len));
    for c in 0..d {
        let mean = points.iter().map(|p| p[c]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[c] - mean).powi(2)).sum::<f64>() / n;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        points.iter_mut().for_each(|p| p[c] = (p[c] - mean) / sd);
    }
}

pub fn format_assignment(assignment: &[usize]) -> String {
    let mut out = String::from("vertex\tcluster\n");
    for (i, c) in assignment.iter().enumerate() {
        out.push_str(&format!("{i}\t{c}\n"));
    }
    out
}

pub fn parse_assignment(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (line_no, line) in data_lines(text).skip(1) {
        let cols = fields(line);
        if cols.len() != 2 {
            bail!("line {line_no}: expected 'vertex cluster'");
        }
        let v: usize = cols[0].parse().with_context(|| format!("line {line_no}: bad vertex"))?;
        if v != out.len() {
            bail!("line {line_no}: expected vertex {}, found {v}", out.len());
        }
        out.push(cols[1].parse().with_context(|| format!("line {line_no}: bad cluster"))?);
    }
    Ok(out)
}
