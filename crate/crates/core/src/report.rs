//! Comparison reports and output renderers.
//!
//! Machine formats (JSON, CSV) carry numbers at full precision; the markdown
//! rendering shows the same numbers to six decimals. Nothing time-dependent
//! is ever emitted, so equal inputs give byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heap::StrategicPath;
use crate::ingestion::write_matrix_csv;
use crate::matrix::SquareMatrix;
use crate::model::{FactorId, FactorSystem, Level, StrategyResult, StrategyTag};
use crate::project::ProjectOptions;
use crate::relation::TotalRelationMatrix;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Md,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Md),
            _ => Err(format!("unknown format `{s}` (json, csv, md)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub project: String,
    pub tool: String,
    pub version: String,
    pub options: ProjectOptions,
}

impl ReportMetadata {
    pub fn new(project: impl Into<String>, options: ProjectOptions) -> Self {
        Self {
            project: project.into(),
            tool: TOOL_NAME.to_owned(),
            version: TOOL_VERSION.to_owned(),
            options,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub strategy: StrategyTag,
    pub name: String,
    /// `(BSR, nSig)` style label; empty for parallel strategies.
    pub heuristic: String,
    /// Path ordinal as text; empty for parallel strategies.
    pub path: String,
    pub total_epi: f64,
    /// Set on the first row with the largest TotalEPI.
    pub best: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
}

impl ComparisonReport {
    pub fn new(metadata: ReportMetadata, results: &[StrategyResult]) -> Self {
        let mut rows: Vec<ReportRow> = results
            .iter()
            .map(|r| ReportRow {
                strategy: r.strategy,
                name: r.strategy.name(),
                heuristic: r.strategy.heuristic_label(),
                path: r.strategy.path().map(|p| p.to_string()).unwrap_or_default(),
                total_epi: r.total_epi,
                best: false,
            })
            .collect();
        rows.sort_by_key(|r| r.strategy);
        let mut best: Option<usize> = None;
        for (i, r) in rows.iter().enumerate() {
            if best.is_none_or(|b| r.total_epi > rows[b].total_epi) {
                best = Some(i);
            }
        }
        if let Some(b) = best {
            rows[b].best = true;
        }
        Self { metadata, rows }
    }

    pub fn best(&self) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.best)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut w = CsvOut::new();
                w.record(["family", "strategy", "heuristic", "path", "total_epi", "best"])?;
                for r in &self.rows {
                    w.record([
                        r.strategy.family().to_owned(),
                        r.name.clone(),
                        r.heuristic.clone(),
                        r.path.clone(),
                        r.total_epi.to_string(),
                        r.best.to_string(),
                    ])?;
                }
                w.finish()
            }
            Format::Md => {
                let mut s = format!(
                    "# Strategy comparison: {}\n\n{} {}\n\n",
                    self.metadata.project, self.metadata.tool, self.metadata.version
                );
                let rows = self
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.name.clone(),
                            r.heuristic.clone(),
                            r.path.clone(),
                            fmt6(r.total_epi),
                            if r.best { "*".into() } else { String::new() },
                        ]
                    })
                    .collect();
                s.push_str(&md_table(&["Strategy", "Heuristic", "Path", "TotalEPI", "Best"], rows));
                Ok(s)
            }
        }
    }
}

/// Six-decimal display form.
pub fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Column-aligned markdown table.
pub fn md_table(headers: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len().max(3)).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let mut s = String::from("|");
        for (c, w) in cells.iter().zip(&widths) {
            let _ = write!(s, " {c:<w$} |");
        }
        s.push('\n');
        s
    };
    let mut out = line(headers.iter().map(|h| h.to_string()).collect());
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect()));
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

struct CsvOut(csv::Writer<Vec<u8>>);

impl CsvOut {
    fn new() -> Self {
        Self(csv::WriterBuilder::new().flexible(true).from_writer(Vec::new()))
    }

    fn record<I, S>(&mut self, rec: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.0.write_record(rec)?;
        Ok(())
    }

    fn finish(self) -> Result<String> {
        let bytes = self.0.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn md_matrix(ids: &[FactorId], m: &SquareMatrix) -> String {
    let mut headers = vec![""];
    headers.extend(ids.iter().map(|i| i.as_str()));
    let rows = ids
        .iter()
        .zip(m.rows())
        .map(|(id, r)| {
            let mut v = vec![id.to_string()];
            v.extend(r.iter().map(|x| fmt6(*x)));
            v
        })
        .collect();
    md_table(&headers, rows)
}

/// Output of `normalize`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizePayload {
    pub factors: Vec<FactorId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<Vec<Vec<f64>>>,
    pub ndim: Vec<Vec<f64>>,
}

impl NormalizePayload {
    /// CSV carries the normalized matrix only.
    pub fn render(&self, format: Format) -> Result<String> {
        let ndim = SquareMatrix::from_rows(&self.ndim)?;
        match format {
            Format::Json => to_json(self),
            Format::Csv => write_matrix_csv(&self.factors, &ndim),
            Format::Md => {
                let mut s = String::new();
                if let Some(d) = &self.dim {
                    s.push_str("## Direct influence matrix\n\n");
                    s.push_str(&md_matrix(&self.factors, &SquareMatrix::from_rows(d)?));
                    s.push('\n');
                }
                s.push_str("## Normalized direct influence matrix\n\n");
                s.push_str(&md_matrix(&self.factors, &ndim));
                Ok(s)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub from: FactorId,
    pub to: FactorId,
    pub value: f64,
}

/// Output of `trm`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrmPayload {
    pub factors: Vec<FactorId>,
    pub threshold: f64,
    pub total_relation: Vec<Vec<f64>>,
    pub edges: Vec<Edge>,
}

impl TrmPayload {
    pub fn new(system: &FactorSystem, trm: &TotalRelationMatrix) -> Self {
        let factors: Vec<FactorId> = system.factors().iter().map(|f| f.id.clone()).collect();
        let edges = trm
            .significant
            .edges()
            .into_iter()
            .map(|(i, j)| Edge {
                from: factors[i].clone(),
                to: factors[j].clone(),
                value: trm.entries[(i, j)],
            })
            .collect();
        Self {
            factors,
            threshold: trm.threshold,
            total_relation: trm.entries.to_rows(),
            edges,
        }
    }

    /// CSV: the matrix, a blank line, the threshold, a blank line, the edge list.
    pub fn render(&self, format: Format) -> Result<String> {
        let t = SquareMatrix::from_rows(&self.total_relation)?;
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut s = write_matrix_csv(&self.factors, &t)?;
                let mut w = CsvOut::new();
                w.record([""])?;
                w.record(["threshold".to_owned(), self.threshold.to_string()])?;
                w.record([""])?;
                w.record(["from", "to", "value"])?;
                for e in &self.edges {
                    w.record([e.from.to_string(), e.to.to_string(), e.value.to_string()])?;
                }
                s.push_str(&w.finish()?);
                Ok(s)
            }
            Format::Md => {
                let mut s = String::from("## Total relation matrix\n\n");
                s.push_str(&md_matrix(&self.factors, &t));
                let _ = write!(s, "\nThreshold: {}\n\n## Significant edges\n\n", fmt6(self.threshold));
                let rows = self
                    .edges
                    .iter()
                    .map(|e| vec![e.from.to_string(), e.to.to_string(), fmt6(e.value)])
                    .collect();
                s.push_str(&md_table(&["From", "To", "t"], rows));
                Ok(s)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifiedFactor {
    pub id: FactorId,
    pub name: String,
    pub level: Level,
    pub label: String,
    pub class: &'static str,
}

/// Output of `classify`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifyPayload {
    pub daf: Vec<FactorId>,
    pub ndaf: Vec<FactorId>,
    pub excluded: Vec<FactorId>,
    pub factors: Vec<ClassifiedFactor>,
}

impl ClassifyPayload {
    pub fn new(system: &FactorSystem, daf: Vec<FactorId>, ndaf: Vec<FactorId>) -> Self {
        let factors: Vec<ClassifiedFactor> = system
            .factors()
            .iter()
            .map(|f| ClassifiedFactor {
                id: f.id.clone(),
                name: f.name.clone(),
                level: f.level,
                label: system.level_label(f.level),
                class: if f.excluded {
                    "excluded"
                } else if f.accessible {
                    "DAF"
                } else {
                    "NDAF"
                },
            })
            .collect();
        let excluded = factors.iter().filter(|f| f.class == "excluded").map(|f| f.id.clone()).collect();
        Self {
            daf,
            ndaf,
            excluded,
            factors,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut w = CsvOut::new();
                w.record(["factor", "name", "block", "sublevel", "level", "class"])?;
                for f in &self.factors {
                    w.record([
                        f.id.to_string(),
                        f.name.clone(),
                        f.level.block.to_string(),
                        f.level.sublevel.to_string(),
                        f.label.clone(),
                        f.class.to_owned(),
                    ])?;
                }
                w.finish()
            }
            Format::Md => {
                let rows = self
                    .factors
                    .iter()
                    .map(|f| vec![f.id.to_string(), f.name.clone(), f.label.clone(), f.class.to_owned()])
                    .collect();
                Ok(md_table(&["Factor", "Name", "Level", "Class"], rows))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathLevel {
    pub level: Level,
    pub label: String,
    pub members: Vec<FactorId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSummary {
    pub ordinal: usize,
    pub effective_blocks: Vec<u32>,
    pub levels: Vec<PathLevel>,
}

/// Output of `paths`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathsPayload {
    pub count: usize,
    pub paths: Vec<PathSummary>,
}

impl PathsPayload {
    pub fn new(system: &FactorSystem, paths: &[StrategicPath]) -> Self {
        let paths: Vec<PathSummary> = paths
            .iter()
            .map(|p| PathSummary {
                ordinal: p.ordinal,
                effective_blocks: p.effective_blocks.clone(),
                levels: p
                    .selection
                    .iter()
                    .map(|(l, ids)| PathLevel {
                        level: *l,
                        label: system.level_label(*l),
                        members: ids.clone(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            count: paths.len(),
            paths,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut w = CsvOut::new();
                w.record(["path", "block", "sublevel", "level", "factor"])?;
                for p in &self.paths {
                    for l in &p.levels {
                        for m in &l.members {
                            w.record([
                                p.ordinal.to_string(),
                                l.level.block.to_string(),
                                l.level.sublevel.to_string(),
                                l.label.clone(),
                                m.to_string(),
                            ])?;
                        }
                    }
                }
                w.finish()
            }
            Format::Md => {
                let rows = self
                    .paths
                    .iter()
                    .map(|p| {
                        let members = p
                            .levels
                            .iter()
                            .map(|l| {
                                let ids: Vec<&str> = l.members.iter().map(|m| m.as_str()).collect();
                                format!("{}: {}", l.label, ids.join(", "))
                            })
                            .collect::<Vec<_>>()
                            .join("; ");
                        vec![p.ordinal.to_string(), p.effective_blocks.len().to_string(), members]
                    })
                    .collect();
                Ok(md_table(&["Path", "Effective blocks", "Members"], rows))
            }
        }
    }
}

/// Output of `evaluate`: full per-factor detail for each strategy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluatePayload {
    pub metadata: ReportMetadata,
    pub results: Vec<StrategyResult>,
}

impl EvaluatePayload {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut w = CsvOut::new();
                w.record(["strategy", "heuristic", "path", "factor", "effort", "latent_inflow", "uepf"])?;
                for r in &self.results {
                    let (name, heur, path) = labels(&r.strategy);
                    for (id, row) in factor_rows(r) {
                        let [e, l, u] = row.map(|v| v.map(|x| x.to_string()).unwrap_or_default());
                        w.record([name.clone(), heur.clone(), path.clone(), id.to_string(), e, l, u])?;
                    }
                    w.record([name, heur, path, "TotalEPI".to_owned(), String::new(), String::new(), r.total_epi.to_string()])?;
                }
                w.finish()
            }
            Format::Md => {
                let mut s = String::new();
                for r in &self.results {
                    let (name, heur, path) = labels(&r.strategy);
                    let _ = write!(s, "## {name}");
                    if !heur.is_empty() {
                        let _ = write!(s, " {heur}, path {path}");
                    }
                    s.push_str("\n\n");
                    let rows = factor_rows(r)
                        .into_iter()
                        .map(|(id, row)| {
                            let mut v = vec![id.to_string()];
                            v.extend(row.map(|x| x.map(fmt6).unwrap_or_default()));
                            v
                        })
                        .collect();
                    s.push_str(&md_table(&["Factor", "Effort", "Latent inflow", "UEPF"], rows));
                    let _ = write!(s, "\nTotalEPI: {}\n\n", fmt6(r.total_epi));
                }
                Ok(s)
            }
        }
    }
}

fn labels(tag: &StrategyTag) -> (String, String, String) {
    (
        tag.name(),
        tag.heuristic_label(),
        tag.path().map(|p| p.to_string()).unwrap_or_default(),
    )
}

fn factor_rows(r: &StrategyResult) -> Vec<(FactorId, [Option<f64>; 3])> {
    let mut rows: BTreeMap<FactorId, [Option<f64>; 3]> = BTreeMap::new();
    for (id, e) in &r.assignment.efforts {
        rows.entry(id.clone()).or_default()[0] = Some(*e);
    }
    for (id, a) in &r.latent_inflows {
        rows.entry(id.clone()).or_default()[1] = Some(*a);
    }
    for (id, u) in r.uepf.iter().flatten() {
        rows.entry(id.clone()).or_default()[2] = Some(*u);
    }
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap::{BlockHeuristic, HeapHeuristic, UnitHeuristic};
    use crate::model::{EffortAssignment, PeapVariant};

    fn result(tag: StrategyTag, epi: f64) -> StrategyResult {
        StrategyResult {
            strategy: tag,
            assignment: EffortAssignment::unchecked(BTreeMap::new(), 1.0),
            latent_inflows: BTreeMap::new(),
            uepf: None,
            total_epi: epi,
        }
    }

    fn sample() -> ComparisonReport {
        let h = |b, u, p| StrategyTag::Heap {
            heuristic: HeapHeuristic::new(b, u),
            path: p,
        };
        let results = vec![
            result(h(BlockHeuristic::Bsr, UnitHeuristic::NSig, 2), 0.144217),
            result(StrategyTag::Peap { variant: PeapVariant::Weighted }, 0.109484),
            result(h(BlockHeuristic::Uni, UnitHeuristic::Uni, 1), 0.14277),
            result(h(BlockHeuristic::Bsr, UnitHeuristic::NSig, 1), 0.14425),
            result(StrategyTag::Peap { variant: PeapVariant::Uniform }, 0.076337),
        ];
        ComparisonReport::new(ReportMetadata::new("t", ProjectOptions::default()), &results)
    }

    #[test]
    fn rows_sorted_and_best_flagged() {
        let r = sample();
        let names: Vec<(String, String, String)> =
            r.rows.iter().map(|x| (x.name.clone(), x.heuristic.clone(), x.path.clone())).collect();
        assert_eq!(names[0].0, "U-PEAP");
        assert_eq!(names[1].0, "W-PEAP");
        assert_eq!(names[2].1, "(Uni, Uni)");
        assert_eq!((names[3].1.as_str(), names[3].2.as_str()), ("(BSR, nSig)", "1"));
        assert_eq!(names[4].2, "2");
        assert_eq!(r.best().unwrap().total_epi, 0.14425);
        assert_eq!(r.rows.iter().filter(|x| x.best).count(), 1);
    }

    #[test]
    fn renderings_agree() {
        let r = sample();
        let json: serde_json::Value = serde_json::from_str(&r.render(Format::Json).unwrap()).unwrap();
        let md = r.render(Format::Md).unwrap();
        let csv = r.render(Format::Csv).unwrap();
        for row in json["rows"].as_array().unwrap() {
            let v = row["total_epi"].as_f64().unwrap();
            assert!(md.contains(&fmt6(v)));
            assert!(csv.contains(&v.to_string()));
        }
        assert_eq!(json["rows"][0]["strategy"]["family"], "PEAP");
        assert_eq!(json["rows"][2]["strategy"]["block"], "Uni");
        assert!(md.contains("| Weighted block Weighted unit - HEAP | (BSR, nSig) | 1    | 0.144250 | *"));
    }

    #[test]
    fn markdown_table_alignment() {
        let t = md_table(&["a", "bb"], vec![vec!["xxxx".into(), "y".into()]]);
        assert_eq!(t, "| a    | bb  |\n| ---- | --- |\n| xxxx | y   |\n");
    }
}
