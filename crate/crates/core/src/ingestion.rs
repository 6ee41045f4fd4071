//! Expert opinion matrices, their aggregation into a direct influence matrix,
//! and row normalization.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::model::{DirectInfluenceMatrix, FactorId, NormalizedInfluenceMatrix};

/// Highest point of the 0-6 linguistic influence scale
/// (0 = no influence ... 6 = extremely high influence).
pub const SCALE_MAX: u8 = 6;

/// One expert's pairwise influence judgements on the 0-6 scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpinionMatrix {
    pub expert: String,
    entries: Vec<Vec<u8>>,
}

impl OpinionMatrix {
    pub fn new(expert: impl Into<String>, entries: Vec<Vec<i64>>) -> Result<Self> {
        let expert = expert.into();
        let n = entries.len();
        let mut out = Vec::with_capacity(n);
        for (row, r) in entries.into_iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "opinion matrix of `{expert}`: row {row} has {} entries, expected {n}",
                    r.len()
                )));
            }
            let mut converted = Vec::with_capacity(n);
            for (col, value) in r.into_iter().enumerate() {
                if !(0..=i64::from(SCALE_MAX)).contains(&value) {
                    return Err(Error::OutOfScale {
                        expert,
                        row,
                        col,
                        value,
                    });
                }
                converted.push(value as u8);
            }
            out.push(converted);
        }
        Ok(Self {
            expert,
            entries: out,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<u8>] {
        &self.entries
    }
}

/// Turns a set of opinion matrices into a direct influence matrix.
///
/// This is the hook for alternative aggregation schemes (fuzzy conversions,
/// credibility weighting); [`MeanAggregator`] is the crisp default.
pub trait OpinionAggregator {
    fn aggregate(&self, matrices: &[OpinionMatrix]) -> Result<DirectInfluenceMatrix>;
}

/// Entrywise weighted arithmetic mean; equal weights when none are given.
#[derive(Clone, Debug, Default)]
pub struct MeanAggregator {
    pub weights: Option<Vec<f64>>,
}

impl OpinionAggregator for MeanAggregator {
    fn aggregate(&self, matrices: &[OpinionMatrix]) -> Result<DirectInfluenceMatrix> {
        match &self.weights {
            None => aggregate_opinions(matrices),
            Some(w) => aggregate_opinions_weighted(matrices, w),
        }
    }
}

/// Equal-weight entrywise mean of the expert matrices.
pub fn aggregate_opinions(matrices: &[OpinionMatrix]) -> Result<DirectInfluenceMatrix> {
    let w = vec![1.0; matrices.len()];
    aggregate_opinions_weighted(matrices, &w)
}

/// Entrywise mean with per-expert weights (normalized internally).
pub fn aggregate_opinions_weighted(
    matrices: &[OpinionMatrix],
    weights: &[f64],
) -> Result<DirectInfluenceMatrix> {
    let first = matrices.first().ok_or(Error::NoOpinions)?;
    if weights.len() != matrices.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} experts",
            weights.len(),
            matrices.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Err(Error::InvalidWeights("weights sum to zero".into()));
    }
    let n = first.dim();
    if let Some(m) = matrices.iter().find(|m| m.dim() != n) {
        return Err(Error::DimensionMismatch(format!(
            "expert `{}` has a {}x{} matrix, expected {n}x{n}",
            m.expert,
            m.dim(),
            m.dim()
        )));
    }
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let acc: f64 = matrices
                .iter()
                .zip(weights)
                .map(|(m, w)| w * f64::from(m.get(i, j)))
                .sum();
            out[(i, j)] = acc / wsum;
        }
    }
    Ok(DirectInfluenceMatrix(out))
}

/// Row-normalizes direct influences: `d(i→j) = D(i→j) / Σ_j D(i→j)`.
/// All-zero rows stay all-zero.
pub fn normalize_dim(dim: &DirectInfluenceMatrix) -> NormalizedInfluenceMatrix {
    let src = &dim.0;
    let n = src.dim();
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        let sum = src.row_sum(i);
        if sum > 0.0 {
            for j in 0..n {
                out[(i, j)] = src[(i, j)] / sum;
            }
        }
    }
    NormalizedInfluenceMatrix::from_precomputed(out, false)
}

/// A labelled numeric matrix read from CSV: header `factor,<id1>,<id2>,...`
/// followed by one `<id>,<v1>,...` row per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledMatrix {
    pub ids: Vec<FactorId>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<LabelledMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let ids: Vec<FactorId> = header.iter().skip(1).map(FactorId::from).collect();
    if ids.is_empty() {
        return Err(Error::Project("matrix CSV has no factor columns".into()));
    }
    let mut rows = Vec::with_capacity(ids.len());
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let label = record.get(0).unwrap_or_default();
        if label != ids.get(r).map(FactorId::as_str).unwrap_or_default() {
            return Err(Error::Project(format!(
                "matrix CSV row {} is labelled `{label}`, expected `{}`",
                r + 1,
                ids.get(r).map(FactorId::as_str).unwrap_or("<none>")
            )));
        }
        let values = record
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Project(format!("matrix CSV row {}: `{v}` is not a number", r + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix CSV row {} has {} values, expected {}",
                r + 1,
                values.len(),
                ids.len()
            )));
        }
        rows.push(values);
    }
    if rows.len() != ids.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix CSV has {} rows, expected {}",
            rows.len(),
            ids.len()
        )));
    }
    Ok(LabelledMatrix { ids, rows })
}

pub fn read_matrix_csv_file(path: &Path) -> Result<LabelledMatrix> {
    read_matrix_csv(std::fs::File::open(path)?)
}

/// Reads one expert's opinion matrix; every cell must be an integer 0-6.
pub fn read_opinion_csv<R: Read>(reader: R, expert: &str) -> Result<(Vec<FactorId>, OpinionMatrix)> {
    let m = read_matrix_csv(reader)?;
    let mut entries = Vec::with_capacity(m.rows.len());
    for row in &m.rows {
        let mut r = Vec::with_capacity(row.len());
        for &v in row {
            if v.fract() != 0.0 {
                return Err(Error::Project(format!(
                    "opinion matrix of `{expert}` holds non-integer value {v}"
                )));
            }
            r.push(v as i64);
        }
        entries.push(r);
    }
    Ok((m.ids, OpinionMatrix::new(expert, entries)?))
}

pub fn write_matrix_csv(ids: &[FactorId], m: &SquareMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["factor".to_owned()];
    header.extend(ids.iter().map(|i| i.to_string()));
    w.write_record(&header)?;
    for (id, row) in ids.iter().zip(m.rows()) {
        let mut rec = vec![id.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn om(expert: &str, rows: Vec<Vec<i64>>) -> OpinionMatrix {
        OpinionMatrix::new(expert, rows).unwrap()
    }

    #[test]
    fn mean_of_two_experts() {
        let d = aggregate_opinions(&[
            om("e1", vec![vec![0, 6], vec![2, 0]]),
            om("e2", vec![vec![0, 0], vec![4, 0]]),
        ])
        .unwrap();
        assert_eq!(d.0.to_rows(), vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
    }

    #[test]
    fn single_expert_is_identity() {
        let m = om("e", vec![vec![1, 2, 3], vec![4, 5, 6], vec![0, 1, 0]]);
        let d = aggregate_opinions(std::slice::from_ref(&m)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.0[(i, j)], f64::from(m.get(i, j)));
            }
        }
    }

    #[test]
    fn aggregation_matches_independent_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let n = 6;
        let experts: Vec<Vec<Vec<i64>>> = (0..20)
            .map(|_| (0..n).map(|_| (0..n).map(|_| rng.random_range(0..=6)).collect()).collect())
            .collect();
        let matrices: Vec<OpinionMatrix> = experts
            .iter()
            .enumerate()
            .map(|(k, e)| om(&format!("e{k}"), e.clone()))
            .collect();
        let d = aggregate_opinions(&matrices).unwrap();
        for i in 0..n {
            for j in 0..n {
                // integer sum first, single division: independent of the float path
                let total: i64 = experts.iter().map(|e| e[i][j]).sum();
                let expected = total as f64 / experts.len() as f64;
                assert!((d.0[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn aggregation_errors() {
        assert!(matches!(aggregate_opinions(&[]), Err(Error::NoOpinions)));
        let err = aggregate_opinions(&[om("a", vec![vec![0]]), om("b", vec![vec![0, 1], vec![1, 0]])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        let err = OpinionMatrix::new("x", vec![vec![0, 7], vec![0, 0]]).unwrap_err();
        assert!(matches!(err, Error::OutOfScale { value: 7, .. }));
        let err = OpinionMatrix::new("x", vec![vec![-1]]).unwrap_err();
        assert!(matches!(err, Error::OutOfScale { value: -1, .. }));
    }

    #[test]
    fn weighted_aggregation() {
        let ms = [om("a", vec![vec![0, 6], vec![0, 0]]), om("b", vec![vec![0, 0], vec![3, 0]])];
        let d = MeanAggregator {
            weights: Some(vec![2.0, 1.0]),
        }
        .aggregate(&ms)
        .unwrap();
        assert!((d.0[(0, 1)] - 4.0).abs() < 1e-12);
        assert!((d.0[(1, 0)] - 1.0).abs() < 1e-12);
        assert!(aggregate_opinions_weighted(&ms, &[1.0]).is_err());
        assert!(aggregate_opinions_weighted(&ms, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn normalize_rows() {
        let dim = DirectInfluenceMatrix(
            SquareMatrix::from_rows(&[
                vec![2.0, 1.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
                vec![1.0, 2.0, 3.0, 4.0],
                vec![0.0, 0.0, 5.0, 0.0],
            ])
            .unwrap(),
        );
        let n = normalize_dim(&dim);
        assert_eq!(n.matrix().row(0), &[0.5, 0.25, 0.25, 0.0]);
        assert_eq!(n.matrix().row(1), &[0.0; 4]);
        let r2 = n.matrix().row(2);
        for (got, want) in r2.iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(n.matrix().row(3), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn opinion_csv_parses() {
        let src = "factor,a,b\na,0,6\nb,2,0\n";
        let (ids, m) = read_opinion_csv(src.as_bytes(), "e1").unwrap();
        assert_eq!(ids, vec![FactorId::from("a"), FactorId::from("b")]);
        assert_eq!(m.get(0, 1), 6);
        assert!(read_opinion_csv("factor,a,b\na,0,9\nb,2,0\n".as_bytes(), "e").is_err());
        assert!(read_opinion_csv("factor,a,b\nb,0,1\na,2,0\n".as_bytes(), "e").is_err());
        assert!(read_opinion_csv("factor,a,b\na,0,1.5\nb,2,0\n".as_bytes(), "e").is_err());
        assert!(read_opinion_csv("factor,a,b\na,0,1\n".as_bytes(), "e").is_err());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let ids = vec![FactorId::from("a"), FactorId::from("b")];
        let m = SquareMatrix::from_rows(&[vec![0.1, 0.9], vec![1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        let text = write_matrix_csv(&ids, &m).unwrap();
        let back = read_matrix_csv(text.as_bytes()).unwrap();
        assert_eq!(back.ids, ids);
        assert_eq!(back.rows, m.to_rows());
    }

    fn opinion_set() -> impl Strategy<Value = Vec<Vec<Vec<i64>>>> {
        (1usize..5).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(prop::collection::vec(0i64..=6, n), n), 1..6)
        })
    }

    proptest! {
        #[test]
        fn aggregation_is_permutation_invariant(set in opinion_set(), rot in 0usize..6) {
            let ms: Vec<OpinionMatrix> = set.iter().enumerate().map(|(k, e)| om(&k.to_string(), e.clone())).collect();
            let mut shuffled = ms.clone();
            let len = shuffled.len();
            shuffled.rotate_left(rot % len);
            shuffled.reverse();
            let a = aggregate_opinions(&ms).unwrap();
            let b = aggregate_opinions(&shuffled).unwrap();
            prop_assert!(a.0.max_abs_diff(&b.0) < 1e-12);
        }

        #[test]
        fn normalize_is_idempotent(rows in (1usize..7).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0.0f64..10.0, n), n))) {
            let dim = DirectInfluenceMatrix(SquareMatrix::from_rows(&rows).unwrap());
            let once = normalize_dim(&dim);
            let twice = normalize_dim(&DirectInfluenceMatrix(once.matrix().clone()));
            prop_assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-12);
            for i in 0..once.dim() {
                let s = once.matrix().row_sum(i);
                prop_assert!(s == 0.0 || (s - 1.0).abs() < 1e-9);
            }
        }
    }
}
