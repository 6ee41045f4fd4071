//! Total relation matrix, significance threshold and significant edges.
//!
//! The closure is the classic DEMATEL one, `T = N + N² + … = N (I − N)⁻¹`.
//! It is used for edge significance and reporting only; propagation always
//! works on the normalized direct influences.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// How the source matrix is scaled before closure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureScale {
    /// Use the matrix as given.
    None,
    /// Divide by the maximum row sum.
    #[default]
    MaxRowSum,
}

/// Rule turning the entries of a total relation matrix into a threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// mean + ½·σ (population σ)
    #[default]
    MeanHalfStd,
    Mean,
    /// mean + σ
    MeanStd,
}

impl ThresholdRule {
    pub fn apply(self, t: &SquareMatrix) -> f64 {
        let (mean, std) = mean_and_std(t.entries());
        match self {
            ThresholdRule::MeanHalfStd => mean + 0.5 * std,
            ThresholdRule::Mean => mean,
            ThresholdRule::MeanStd => mean + std,
        }
    }
}

/// Boolean `n×n` mask of significant influences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMask {
    n: usize,
    bits: Vec<bool>,
}

impl EdgeMask {
    pub fn all(n: usize) -> Self {
        Self {
            n,
            bits: vec![true; n * n],
        }
    }

    pub fn is_significant(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Significant `(from, to)` pairs in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.is_significant(i, j))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TotalRelationMatrix {
    pub entries: SquareMatrix,
    pub threshold: f64,
    pub significant: EdgeMask,
}

impl TotalRelationMatrix {
    /// Scales `source`, closes it, and thresholds the result.
    pub fn compute(source: &SquareMatrix, scale: ClosureScale, rule: ThresholdRule) -> Result<Self> {
        let scaled = match scale {
            ClosureScale::None => source.clone(),
            ClosureScale::MaxRowSum => scale_by_max_row_sum(source),
        };
        let entries = total_relation_matrix(&scaled)?;
        let threshold = rule.apply(&entries);
        let significant = significant_edges(&entries, threshold);
        Ok(Self {
            entries,
            threshold,
            significant,
        })
    }
}

pub fn scale_by_max_row_sum(m: &SquareMatrix) -> SquareMatrix {
    let s = m.max_row_sum();
    if s > 0.0 {
        m.scaled(1.0 / s)
    } else {
        m.clone()
    }
}

/// `T = Σ_{k≥1} N^k = N (I − N)⁻¹`.
///
/// Fails with [`Error::ClosureDiverges`] unless the spectral radius of `N` is
/// below one. That is certified by finding some power `N^(2^m)` with an
/// infinity norm below one.
pub fn total_relation_matrix(n: &SquareMatrix) -> Result<SquareMatrix> {
    let dim = n.dim();
    if dim == 0 {
        return Ok(SquareMatrix::zeros(0));
    }
    if n.entries().iter().any(|v| !v.is_finite()) {
        return Err(Error::ClosureDiverges);
    }
    if !spectral_radius_below_one(n) {
        return Err(Error::ClosureDiverges);
    }
    let a = DMatrix::from_row_slice(dim, dim, n.entries());
    let system = DMatrix::identity(dim, dim) - &a;
    // T (I − N) = N  ⇔  (I − N)ᵀ Tᵀ = Nᵀ
    let lu = system.transpose().lu();
    let t_transposed = lu.solve(&a.transpose()).ok_or(Error::ClosureDiverges)?;
    let t = t_transposed.transpose();
    let mut out = SquareMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = t[(i, j)];
        }
    }
    Ok(out)
}

fn spectral_radius_below_one(n: &SquareMatrix) -> bool {
    let mut p = n.clone();
    for _ in 0..48 {
        let norm = p.max_abs_row_sum();
        if norm < 1.0 {
            return true;
        }
        if !norm.is_finite() || norm > 1e150 {
            return false;
        }
        p = p.matmul(&p);
    }
    false
}

/// mean + ½·σ over all entries, σ the population standard deviation.
pub fn significance_threshold(t: &SquareMatrix) -> f64 {
    ThresholdRule::MeanHalfStd.apply(t)
}

/// Strict comparison: an influence equal to the threshold is not significant.
pub fn significant_edges(t: &SquareMatrix, threshold: f64) -> EdgeMask {
    EdgeMask {
        n: t.dim(),
        bits: t.entries().iter().map(|&v| v > threshold).collect(),
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[Vec<f64>]) -> SquareMatrix {
        SquareMatrix::from_rows(rows).unwrap()
    }

    /// Σ_{k=1..terms} N^k by repeated multiplication.
    fn truncated_series(n: &SquareMatrix, terms: usize) -> SquareMatrix {
        let mut acc = SquareMatrix::zeros(n.dim());
        let mut power = n.clone();
        for _ in 0..terms {
            acc = acc.add(&power);
            power = power.matmul(n);
        }
        acc
    }

    #[test]
    fn nilpotent_closure() {
        let t = total_relation_matrix(&m(&[vec![0.0, 0.5], vec![0.0, 0.0]])).unwrap();
        assert!(t.max_abs_diff(&m(&[vec![0.0, 0.5], vec![0.0, 0.0]])) < 1e-15);
    }

    #[test]
    fn scalar_geometric_series() {
        let t = total_relation_matrix(&m(&[vec![0.3]])).unwrap();
        assert!((t[(0, 0)] - 0.3 / 0.7).abs() < 1e-15);
        assert!((t[(0, 0)] - 0.428571).abs() < 1e-6);
    }

    #[test]
    fn frozen_random_4x4_matches_series() {
        // max row sum 0.8
        let n = m(&[
            vec![0.10, 0.30, 0.25, 0.15],
            vec![0.20, 0.05, 0.40, 0.10],
            vec![0.00, 0.35, 0.10, 0.30],
            vec![0.25, 0.25, 0.05, 0.05],
        ]);
        assert!((n.max_row_sum() - 0.8).abs() < 1e-12);
        let t = total_relation_matrix(&n).unwrap();
        assert!(t.max_abs_diff(&truncated_series(&n, 200)) < 1e-10);
        // T = N + N·T
        assert!(t.max_abs_diff(&n.add(&n.matmul(&t))) < 1e-12);
    }

    #[test]
    fn row_stochastic_diverges() {
        let n = m(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(total_relation_matrix(&n), Err(Error::ClosureDiverges)));
        let n = m(&[vec![1.2]]);
        assert!(matches!(total_relation_matrix(&n), Err(Error::ClosureDiverges)));
    }

    #[test]
    fn convergent_despite_large_row_sum() {
        // row sum 1.5 but nilpotent
        let n = m(&[vec![0.0, 1.5], vec![0.0, 0.0]]);
        let t = total_relation_matrix(&n).unwrap();
        assert!((t[(0, 1)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn threshold_closed_forms() {
        let (mean, std) = mean_and_std(&[0.1, 0.2, 0.3]);
        assert!((mean + 0.5 * std - 0.2408248).abs() < 1e-7);
        let t = m(&[vec![0.4, 0.4], vec![0.4, 0.4]]);
        assert!((significance_threshold(&t) - 0.4).abs() < 1e-15);
        let t = m(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((ThresholdRule::Mean.apply(&t) - 0.5).abs() < 1e-15);
        assert!((ThresholdRule::MeanStd.apply(&t) - 1.0).abs() < 1e-15);
        assert!((significance_threshold(&t) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn threshold_is_strict() {
        let tau = 0.25;
        let t = m(&[vec![0.25, 0.25 + 1e-12], vec![0.0, 0.1]]);
        let e = significant_edges(&t, tau);
        assert!(!e.is_significant(0, 0));
        assert!(e.is_significant(0, 1));
        assert_eq!(e.edges(), vec![(0, 1)]);
        let z = significant_edges(&SquareMatrix::zeros(3), 0.1);
        assert!(z.edges().is_empty());
    }

    #[test]
    fn compute_scales_by_max_row_sum() {
        let d = m(&[vec![0.0, 3.0], vec![1.0, 0.0]]);
        let trm = TotalRelationMatrix::compute(&d, ClosureScale::MaxRowSum, ThresholdRule::MeanHalfStd).unwrap();
        let expected = total_relation_matrix(&d.scaled(1.0 / 3.0)).unwrap();
        assert!(trm.entries.max_abs_diff(&expected) < 1e-15);
        assert!(TotalRelationMatrix::compute(&d, ClosureScale::None, ThresholdRule::Mean).is_err());
    }

    fn substochastic(max: f64) -> impl Strategy<Value = SquareMatrix> {
        (1usize..=10).prop_flat_map(move |n| {
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, n), n).prop_map(move |rows| {
                let raw = SquareMatrix::from_rows(&rows).unwrap();
                let s = raw.max_row_sum();
                if s > 0.0 { raw.scaled(max / s) } else { raw }
            })
        })
    }

    proptest! {
        #[test]
        fn closure_dominates_input(n in substochastic(0.9)) {
            let t = total_relation_matrix(&n).unwrap();
            for (a, b) in t.entries().iter().zip(n.entries()) {
                prop_assert!(*a >= *b - 1e-15);
            }
        }

        #[test]
        fn edges_invariant_under_scaling(n in substochastic(0.9), c in 0.01f64..100.0) {
            let t = total_relation_matrix(&n).unwrap();
            let scaled = t.scaled(c);
            let tau = significance_threshold(&t);
            let tau_c = significance_threshold(&scaled);
            prop_assert!((tau_c - c * tau).abs() <= 1e-12 * c.max(1.0) * tau.abs().max(1.0));
            prop_assert_eq!(significant_edges(&t, tau), significant_edges(&scaled, tau_c));
        }
    }
}
