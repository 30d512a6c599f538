use serde::{Deserialize, Serialize};

use crate::des::RngStream;
use crate::error::{Error, Result};
use crate::model::ComponentClass;

const N: usize = 5;

/// Row-stochastic 5×5 classification error model; row = true class,
/// column = predicted class, both in [`ComponentClass::DETECTABLE`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ConfusionMatrix {
    rows: [[f64; N]; N],
}

impl ConfusionMatrix {
    pub fn identity() -> Self {
        Self::uniform_diagonal(1.0).expect("identity is stochastic")
    }

    /// Diagonal `d`, the remaining mass spread evenly over the other four columns.
    pub fn uniform_diagonal(d: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Matrix(format!("diagonal {d} outside [0,1]")));
        }
        let off = (1.0 - d) / (N - 1) as f64;
        let mut rows = [[off; N]; N];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = d;
        }
        Ok(ConfusionMatrix { rows })
    }

    /// Default error model: 98.9 % on the diagonal with uniform errors.
    pub fn reference() -> Self {
        Self::uniform_diagonal(0.989).expect("valid diagonal")
    }

    pub fn from_rows(rows: [[f64; N]; N]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::Matrix(format!("row {i} has invalid entry {x}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Matrix(format!("row {i} sums to {sum}")));
            }
        }
        Ok(ConfusionMatrix { rows })
    }

    /// Normalizes a count matrix row by row; all-zero rows are an error.
    pub fn from_counts(counts: &[[u64; N]; N]) -> Result<Self> {
        let mut rows = [[0.0; N]; N];
        for (i, c) in counts.iter().enumerate() {
            let total: u64 = c.iter().sum();
            if total == 0 {
                return Err(Error::Matrix(format!(
                    "no observations for true class {}",
                    ComponentClass::DETECTABLE[i]
                )));
            }
            for j in 0..N {
                rows[i][j] = c[j] as f64 / total as f64;
            }
        }
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> &[[f64; N]; N] {
        &self.rows
    }

    pub fn get(&self, truth: ComponentClass, predicted: ComponentClass) -> Result<f64> {
        let i = truth.index().ok_or(Error::NotDetectable(truth))?;
        let j = predicted.index().ok_or(Error::NotDetectable(predicted))?;
        Ok(self.rows[i][j])
    }

    /// Σ pᵢ·Mᵢᵢ for class priors `p`.
    pub fn accuracy(&self, priors: &[f64; N]) -> f64 {
        (0..N).map(|i| priors[i] * self.rows[i][i]).sum()
    }

    /// Inverts the cumulative row of `truth` at `u` ∈ [0,1).
    pub fn invert(&self, truth: ComponentClass, u: f64) -> Result<ComponentClass> {
        let i = truth.index().ok_or(Error::NotDetectable(truth))?;
        let row = &self.rows[i];
        let mut cum = 0.0;
        let mut last_positive = i;
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                last_positive = j;
                cum += p;
                if u < cum {
                    return Ok(ComponentClass::DETECTABLE[j]);
                }
            }
        }
        // u landed in the rounding gap above the final cumulative sum
        Ok(ComponentClass::DETECTABLE[last_positive])
    }
}

impl TryFrom<Vec<Vec<f64>>> for ConfusionMatrix {
    type Error = Error;

    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        if v.len() != N || v.iter().any(|r| r.len() != N) {
            return Err(Error::Matrix("expected a 5x5 matrix".into()));
        }
        let mut rows = [[0.0; N]; N];
        for (i, r) in v.iter().enumerate() {
            rows[i].copy_from_slice(r);
        }
        Self::from_rows(rows)
    }
}

impl From<ConfusionMatrix> for Vec<Vec<f64>> {
    fn from(m: ConfusionMatrix) -> Self {
        m.rows.iter().map(|r| r.to_vec()).collect()
    }
}

/// Draws the class the detector reports for an item of class `truth`.
pub fn sample_perceived(
    truth: ComponentClass,
    m: &ConfusionMatrix,
    stream: &mut RngStream,
) -> Result<ComponentClass> {
    if !truth.is_detectable() {
        return Err(Error::NotDetectable(truth));
    }
    m.invert(truth, stream.draw_uniform())
}

/// Arg-max class if its score reaches `threshold`. Ties go to the lowest index.
pub fn classify_with_threshold(
    scores: &[f64],
    threshold: f64,
) -> Result<Option<(ComponentClass, f64)>> {
    if scores.is_empty() {
        return Err(Error::Logic("empty score vector".into()));
    }
    if scores.len() > N {
        return Err(Error::Logic(format!("{} scores for {N} classes", scores.len())));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Logic(format!("score {s} outside [0,1]")));
    }
    let (best, &score) = scores
        .iter()
        .enumerate()
        .fold((0, &scores[0]), |acc, (i, s)| if *s > *acc.1 { (i, s) } else { acc });
    Ok((score >= threshold).then(|| (ComponentClass::DETECTABLE[best], score)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ComponentClass::*;

    #[test]
    fn identity_always_returns_truth() {
        let m = ConfusionMatrix::identity();
        let mut s = RngStream::new(1, 1);
        for c in ComponentClass::DETECTABLE {
            for _ in 0..200 {
                assert_eq!(sample_perceived(c, &m, &mut s).unwrap(), c);
            }
        }
    }

    #[test]
    fn cdf_inversion_edge() {
        let m = ConfusionMatrix::identity();
        assert_eq!(m.invert(NormalCase, 0.999).unwrap(), NormalCase);
        assert_eq!(m.invert(NormalCase, 0.999_999_999_999).unwrap(), NormalCase);
        let r = ConfusionMatrix::reference();
        assert_eq!(r.invert(Screen, 0.0).unwrap(), NormalCase);
        assert_eq!(r.invert(Screen, 0.5).unwrap(), Screen);
        assert_eq!(r.invert(Screen, 0.999_999).unwrap(), IphoneCase);
    }

    #[test]
    fn reference_diagonal_frequency() {
        let m = ConfusionMatrix::reference();
        let mut s = RngStream::new(7, 3);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_perceived(Film, &m, &mut s).unwrap() == Film)
            .count();
        let p = hits as f64 / n as f64;
        assert!((p - 0.989).abs() < 0.005, "{p}");
    }

    #[test]
    fn reference_accuracy_under_uniform_priors() {
        let m = ConfusionMatrix::reference();
        assert!((m.accuracy(&[0.2; 5]) - 0.989).abs() < 1e-12);
        assert!((m.rows()[0][1] - 0.00275).abs() < 1e-12);
    }

    #[test]
    fn invalid_rows_rejected() {
        let mut rows = [[0.2; 5]; 5];
        rows[2][0] = 0.3;
        assert!(ConfusionMatrix::from_rows(rows).is_err());
        rows[2][0] = -0.0;
        assert!(ConfusionMatrix::from_rows(rows).is_err());
        let bad: Vec<Vec<f64>> = vec![vec![1.0]];
        assert!(ConfusionMatrix::try_from(bad).is_err());
        assert!(sample_perceived(Battery, &ConfusionMatrix::identity(), &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn normalizes_counts() {
        let mut counts = [[0u64; 5]; 5];
        for (i, row) in counts.iter_mut().enumerate() {
            row[i] = 10;
        }
        counts[0] = [98, 2, 0, 0, 0];
        let m = ConfusionMatrix::from_counts(&counts).unwrap();
        assert_eq!(m.rows()[0], [0.98, 0.02, 0.0, 0.0, 0.0]);
        counts[4] = [0; 5];
        assert!(ConfusionMatrix::from_counts(&counts).is_err());
    }

    #[test]
    fn thresholding() {
        let s = [0.95, 0.01, 0.01, 0.02, 0.01];
        assert_eq!(classify_with_threshold(&s, 0.8).unwrap(), Some((NormalCase, 0.95)));
        let s = [0.1, 0.79, 0.05, 0.03, 0.03];
        assert_eq!(classify_with_threshold(&s, 0.8).unwrap(), None);
        let s = [0.1, 0.8, 0.8, 0.0, 0.0];
        assert_eq!(classify_with_threshold(&s, 0.8).unwrap(), Some((MiddleLayer, 0.8)));
        assert!(classify_with_threshold(&[], 0.8).is_err());
        assert!(classify_with_threshold(&[1.2], 0.8).is_err());
    }
}
