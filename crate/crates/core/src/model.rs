//! Domain types shared by every engine: factors, the factor system, the
//! significance vector, influence matrices, effort assignments and results.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heap::HeapHeuristic;
use crate::matrix::SquareMatrix;

/// Tolerance on `Σ nSig = 1` for a vector covering the whole system.
pub const NSIG_SUM_TOL: f64 = 1e-6;
/// Tolerance on row sums of a precomputed, non-partial N-DIM.
pub const ROW_SUM_TOL: f64 = 1e-6;
/// Tolerance on `Σ efforts = total`.
pub const EFFORT_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorId(String);

impl FactorId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FactorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl Borrow<str> for FactorId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for FactorId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for FactorId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// Position in the factor hierarchy. Blocks are the major levels (roman
/// numerals in the usual notation), sublevels the ordered layers inside a
/// block (letter suffixes). Ordering is lexicographic, bottom-up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Level {
    pub block: u32,
    pub sublevel: u32,
}

impl Level {
    pub fn new(block: u32, sublevel: u32) -> Self {
        Self { block, sublevel }
    }

    /// Renders `II-A` style labels; the letter is dropped when `bare` is set.
    pub fn label(&self, bare: bool) -> String {
        let block = to_roman(self.block);
        if bare {
            block
        } else {
            format!("{block}-{}", sublevel_letters(self.sublevel))
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    /// Accepts `VII`, `II-A`, `I-E` (letters are case-insensitive, `AA`
    /// follows `Z`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLevelLabel(s.to_owned());
        let s = s.trim();
        let (roman, letters) = match s.split_once('-') {
            Some((r, l)) => (r, Some(l)),
            None => (s, None),
        };
        let block = from_roman(roman).ok_or_else(bad)?;
        let sublevel = match letters {
            None => 1,
            Some(l) if !l.is_empty() && l.chars().all(|c| c.is_ascii_alphabetic()) => l
                .to_ascii_uppercase()
                .bytes()
                .fold(0u32, |acc, b| acc * 26 + u32::from(b - b'A' + 1)),
            Some(_) => return Err(bad()),
        };
        Ok(Level::new(block, sublevel))
    }
}

const ROMAN: [(u32, &str); 13] = [
    (1000, "M"),
    (900, "CM"),
    (500, "D"),
    (400, "CD"),
    (100, "C"),
    (90, "XC"),
    (50, "L"),
    (40, "XL"),
    (10, "X"),
    (9, "IX"),
    (5, "V"),
    (4, "IV"),
    (1, "I"),
];

fn to_roman(mut n: u32) -> String {
    if n == 0 {
        return "0".into();
    }
    let mut out = String::new();
    for &(v, s) in &ROMAN {
        while n >= v {
            out.push_str(s);
            n -= v;
        }
    }
    out
}

fn from_roman(s: &str) -> Option<u32> {
    if s.is_empty() {
        return None;
    }
    let upper = s.to_ascii_uppercase();
    let mut rest = upper.as_str();
    let mut n = 0;
    for &(v, sym) in &ROMAN {
        while let Some(r) = rest.strip_prefix(sym) {
            n += v;
            rest = r;
        }
    }
    // Reject non-canonical spellings such as IIII or VX.
    (rest.is_empty() && n > 0 && to_roman(n) == upper).then_some(n)
}

fn sublevel_letters(mut n: u32) -> String {
    let mut out = Vec::new();
    while n > 0 {
        let r = (n - 1) % 26;
        out.push(b'A' + r as u8);
        n = (n - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub id: FactorId,
    pub name: String,
    /// Directly accessible (can receive assigned effort).
    pub accessible: bool,
    pub level: Level,
    /// Dropped from every strategy.
    #[serde(default)]
    pub excluded: bool,
}

impl Factor {
    pub fn new(id: &str, name: &str, accessible: bool, level: Level) -> Self {
        Self {
            id: id.into(),
            name: name.to_owned(),
            accessible,
            level,
            excluded: false,
        }
    }

    pub fn excluded(mut self) -> Self {
        self.excluded = true;
        self
    }

    pub fn is_daf(&self) -> bool {
        self.accessible && !self.excluded
    }

    pub fn is_ndaf(&self) -> bool {
        !self.accessible && !self.excluded
    }
}

/// Ordered factors of a decision system. The goal is an implicit sink and is
/// never a factor; `nSig` carries each factor's coupling to it.
#[derive(Clone, Debug)]
pub struct FactorSystem {
    factors: Vec<Factor>,
    goal_name: String,
    index: HashMap<FactorId, usize>,
}

impl FactorSystem {
    /// Rejects duplicate ids and zero block/sublevel indices. The remaining
    /// consistency rules are reported by [`validate_system`].
    pub fn new(factors: Vec<Factor>, goal_name: impl Into<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(factors.len());
        for (i, f) in factors.iter().enumerate() {
            if f.level.block == 0 || f.level.sublevel == 0 {
                return Err(Error::InvalidLevel(f.id.to_string()));
            }
            if index.insert(f.id.clone(), i).is_some() {
                return Err(Error::DuplicateFactor(f.id.to_string()));
            }
        }
        Ok(Self {
            factors,
            goal_name: goal_name.into(),
            index,
        })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn goal_name(&self) -> &str {
        &self.goal_name
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require_index(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownFactor(id.to_owned()))
    }

    pub fn factor(&self, id: &str) -> Option<&Factor> {
        self.index_of(id).map(|i| &self.factors[i])
    }

    /// Non-excluded factors in input order.
    pub fn eligible(&self) -> impl Iterator<Item = &Factor> {
        self.factors.iter().filter(|f| !f.excluded)
    }

    /// Display label of a level: the sublevel letter is omitted when the
    /// block has a single sublevel.
    pub fn level_label(&self, level: Level) -> String {
        let multi = self
            .factors
            .iter()
            .any(|f| f.level.block == level.block && f.level.sublevel != 1);
        level.label(!multi && level.sublevel == 1)
    }

    pub fn max_block(&self) -> u32 {
        self.factors.iter().map(|f| f.level.block).max().unwrap_or(0)
    }
}

/// Splits the non-excluded factors into directly accessible (DAF) and latent
/// (NDAF) ids, preserving input order.
pub fn classify_factors(system: &FactorSystem) -> Result<(Vec<FactorId>, Vec<FactorId>)> {
    let (daf, ndaf): (Vec<&Factor>, Vec<&Factor>) = system.eligible().partition(|f| f.accessible);
    if daf.is_empty() {
        return Err(Error::NoActionableFactors);
    }
    Ok((
        daf.into_iter().map(|f| f.id.clone()).collect(),
        ndaf.into_iter().map(|f| f.id.clone()).collect(),
    ))
}

/// Normalized system significance per factor, optionally with the raw
/// (unnormalized) values it was derived from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignificanceVector {
    pub values: BTreeMap<FactorId, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<BTreeMap<FactorId, f64>>,
}

impl SignificanceVector {
    pub fn new(values: BTreeMap<FactorId, f64>) -> Self {
        Self { values, raw: None }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self::new(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Normalizes raw significance values to sum to one, keeping the raw map.
    pub fn from_raw(raw: BTreeMap<FactorId, f64>) -> Result<Self> {
        let total: f64 = raw.values().sum();
        if total <= 0.0 {
            return Err(Error::ZeroSignificance);
        }
        Ok(Self {
            values: raw.iter().map(|(k, v)| (k.clone(), v / total)).collect(),
            raw: Some(raw),
        })
    }

    /// `nSig` of a factor; absent factors count as zero.
    pub fn get(&self, id: &str) -> f64 {
        self.values.get(id).copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.values.values().sum()
    }

    /// Dense vector in system order.
    pub fn dense(&self, system: &FactorSystem) -> Vec<f64> {
        system.factors().iter().map(|f| self.get(f.id.as_str())).collect()
    }
}

/// Aggregated direct influences `D(i→j)`, indexed in system order.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectInfluenceMatrix(pub SquareMatrix);

/// Row-normalized direct influences `d(i→j)`, indexed in system order.
///
/// A `partial` matrix is one where only some entries are known (the rest are
/// stored as zero), so row sums are not expected to reach one.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedInfluenceMatrix {
    matrix: SquareMatrix,
    partial: bool,
}

impl NormalizedInfluenceMatrix {
    /// Wraps a matrix computed elsewhere. Nothing is checked here; run
    /// [`validate_system`] on the result.
    pub fn from_precomputed(matrix: SquareMatrix, partial: bool) -> Self {
        Self { matrix, partial }
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }
}

/// Effort per accessible factor, in units of total effort.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffortAssignment {
    pub efforts: BTreeMap<FactorId, f64>,
    pub total: f64,
}

impl EffortAssignment {
    /// Checks nonnegativity and that the efforts add up to `total`.
    pub fn new(efforts: BTreeMap<FactorId, f64>, total: f64) -> Result<Self> {
        if let Some((id, v)) = efforts.iter().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidAssignment(format!(
                "effort {v} on `{id}` is not a nonnegative number"
            )));
        }
        let sum: f64 = efforts.values().sum();
        if (sum - total).abs() > EFFORT_SUM_TOL {
            return Err(Error::InvalidAssignment(format!(
                "efforts sum to {sum}, expected {total}"
            )));
        }
        Ok(Self { efforts, total })
    }

    /// Builds an assignment without the conservation check, for fixtures that
    /// carry rounded published efforts.
    pub fn unchecked(efforts: BTreeMap<FactorId, f64>, total: f64) -> Self {
        Self { efforts, total }
    }

    pub fn effort(&self, id: &str) -> f64 {
        self.efforts.get(id).copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.efforts.values().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            efforts: self.efforts.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            total: self.total * c,
        }
    }

    /// Every keyed factor must be accessible and not excluded.
    pub fn check_against(&self, system: &FactorSystem) -> Result<()> {
        for id in self.efforts.keys() {
            let f = system
                .factor(id.as_str())
                .ok_or_else(|| Error::UnknownFactor(id.to_string()))?;
            if !f.is_daf() {
                return Err(Error::InvalidAssignment(format!(
                    "`{id}` cannot receive effort directly"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeapVariant {
    Uniform,
    Weighted,
}

/// Identifies one evaluated strategy. The derived ordering is the report
/// ordering: parallel before hierarchical, then heuristic, then path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum StrategyTag {
    #[serde(rename = "PEAP")]
    Peap { variant: PeapVariant },
    #[serde(rename = "HEAP")]
    Heap {
        #[serde(flatten)]
        heuristic: HeapHeuristic,
        path: usize,
    },
}

impl StrategyTag {
    pub fn family(&self) -> &'static str {
        match self {
            StrategyTag::Peap { .. } => "PEAP",
            StrategyTag::Heap { .. } => "HEAP",
        }
    }

    pub fn name(&self) -> String {
        match self {
            StrategyTag::Peap {
                variant: PeapVariant::Uniform,
            } => "U-PEAP".into(),
            StrategyTag::Peap {
                variant: PeapVariant::Weighted,
            } => "W-PEAP".into(),
            StrategyTag::Heap { heuristic, .. } => heuristic.family_name().into(),
        }
    }

    pub fn heuristic_label(&self) -> String {
        match self {
            StrategyTag::Peap { .. } => String::new(),
            StrategyTag::Heap { heuristic, .. } => heuristic.to_string(),
        }
    }

    pub fn path(&self) -> Option<usize> {
        match self {
            StrategyTag::Peap { .. } => None,
            StrategyTag::Heap { path, .. } => Some(*path),
        }
    }
}

/// Outcome of evaluating one strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy: StrategyTag,
    pub assignment: EffortAssignment,
    /// Effort arriving at each latent factor through propagation.
    pub latent_inflows: BTreeMap<FactorId, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uepf: Option<BTreeMap<FactorId, f64>>,
    pub total_epi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DimensionMismatch { expected: usize, found: usize },
    NegativeInfluence { row: usize, col: usize, value: f64 },
    InfluenceAboveOne { row: usize, col: usize, value: f64 },
    RowNotNormalized { row: usize, sum: f64 },
    NonFiniteInfluence { row: usize, col: usize },
    SignificanceMissing(FactorId),
    SignificanceUnknown(FactorId),
    SignificanceNegative(FactorId),
    SignificanceNotNormalized { sum: f64 },
    MissingLevel { block: u32 },
    NoActionableFactors,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: influence matrix is {found}x{found}, system has {expected} factors"
            ),
            Violation::NegativeInfluence { row, col, value } => {
                write!(f, "negative influence {value} at ({row}, {col})")
            }
            Violation::InfluenceAboveOne { row, col, value } => {
                write!(f, "normalized influence {value} at ({row}, {col}) exceeds 1")
            }
            Violation::RowNotNormalized { row, sum } => {
                write!(f, "row {row} of the normalized influence matrix sums to {sum}")
            }
            Violation::NonFiniteInfluence { row, col } => {
                write!(f, "non-finite influence at ({row}, {col})")
            }
            Violation::SignificanceMissing(id) => write!(f, "significance missing for `{id}`"),
            Violation::SignificanceUnknown(id) => {
                write!(f, "significance given for unknown factor `{id}`")
            }
            Violation::SignificanceNegative(id) => write!(f, "negative significance for `{id}`"),
            Violation::SignificanceNotNormalized { sum } => {
                write!(f, "significance not normalized: values sum to {sum}")
            }
            Violation::MissingLevel { block } => {
                write!(f, "missing levels: block {block} has no factors")
            }
            Violation::NoActionableFactors => write!(f, "no actionable factors"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks a system, its significance vector and an influence matrix for
/// consistency. An empty report means the bundle is usable.
pub fn validate_system(
    system: &FactorSystem,
    nsig: &SignificanceVector,
    ndim: &NormalizedInfluenceMatrix,
) -> ValidationReport {
    let mut violations = validate_structure(system, nsig);
    violations.extend(check_influence(system.len(), ndim.matrix(), !ndim.is_partial()));
    ValidationReport { violations }
}

/// Same as [`validate_system`] for a raw direct influence matrix: only
/// nonnegativity and dimensions are checked on the matrix.
pub fn validate_with_dim(
    system: &FactorSystem,
    nsig: &SignificanceVector,
    dim: &DirectInfluenceMatrix,
) -> ValidationReport {
    let mut violations = validate_structure(system, nsig);
    violations.extend(check_influence(system.len(), &dim.0, false));
    ValidationReport { violations }
}

fn validate_structure(system: &FactorSystem, nsig: &SignificanceVector) -> Vec<Violation> {
    let mut out = Vec::new();
    let max_block = system.max_block();
    for block in 1..=max_block {
        if !system.factors().iter().any(|f| f.level.block == block) {
            out.push(Violation::MissingLevel { block });
        }
    }
    if !system.eligible().any(|f| f.accessible) {
        out.push(Violation::NoActionableFactors);
    }
    for f in system.factors() {
        match nsig.values.get(f.id.as_str()) {
            None => out.push(Violation::SignificanceMissing(f.id.clone())),
            Some(v) if !(*v >= 0.0) => out.push(Violation::SignificanceNegative(f.id.clone())),
            Some(_) => {}
        }
    }
    for id in nsig.values.keys() {
        if system.index_of(id.as_str()).is_none() {
            out.push(Violation::SignificanceUnknown(id.clone()));
        }
    }
    let sum = nsig.sum();
    if (sum - 1.0).abs() > NSIG_SUM_TOL {
        out.push(Violation::SignificanceNotNormalized { sum });
    }
    out
}

/// Matrix checks shared by the validators: dimension, finiteness, sign, and
/// optionally row normalization.
pub fn check_influence(n: usize, m: &SquareMatrix, rows_normalized: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    if m.dim() != n {
        out.push(Violation::DimensionMismatch {
            expected: n,
            found: m.dim(),
        });
        return out;
    }
    let normalized_bound = rows_normalized;
    for (row, r) in m.rows().enumerate() {
        for (col, &value) in r.iter().enumerate() {
            if !value.is_finite() {
                out.push(Violation::NonFiniteInfluence { row, col });
            } else if value < 0.0 {
                out.push(Violation::NegativeInfluence { row, col, value });
            } else if normalized_bound && value > 1.0 + ROW_SUM_TOL {
                out.push(Violation::InfluenceAboveOne { row, col, value });
            }
        }
        if rows_normalized {
            let sum: f64 = r.iter().sum();
            if sum != 0.0 && (sum - 1.0).abs() > ROW_SUM_TOL {
                out.push(Violation::RowNotNormalized { row, sum });
            }
        }
    }
    out
}
