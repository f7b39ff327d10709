//! Multi-criteria aggregation of score matrices.

use num_traits::Float;
use serde::Serialize;

use super::EvalError;
use crate::scalar::Scalar;

const WEIGHT_TOLERANCE: f64 = 1e-6;

/// Rows are alternatives, columns criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreMatrix<T> {
    alternatives: Vec<String>,
    criteria: Vec<String>,
    scores: Vec<Vec<T>>,
    weights: Vec<T>,
    /// Lower is better on flagged criteria.
    cost: Vec<bool>,
}

impl<T: Scalar> ScoreMatrix<T> {
    pub fn new(
        alternatives: Vec<String>,
        criteria: Vec<String>,
        scores: Vec<Vec<T>>,
        weights: Vec<T>,
    ) -> Result<Self, EvalError> {
        if scores.len() != alternatives.len() {
            return Err(EvalError::WeightMismatch(format!(
                "{} alternatives but {} rows",
                alternatives.len(),
                scores.len()
            )));
        }
        if let Some((i, _)) = scores.iter().enumerate().find(|(_, r)| r.len() != criteria.len()) {
            return Err(EvalError::WeightMismatch(format!(
                "row `{}` has {} scores for {} criteria",
                alternatives[i],
                scores[i].len(),
                criteria.len()
            )));
        }
        if weights.len() != criteria.len() {
            return Err(EvalError::WeightMismatch(format!(
                "{} weights for {} criteria",
                weights.len(),
                criteria.len()
            )));
        }
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(EvalError::InvalidWeights("negative weight".into()));
        }
        if !criteria.is_empty() {
            let sum: f64 = weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).sum();
            if sum.is_nan() || (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(EvalError::InvalidWeights(format!("weights sum to {sum}, not 1")));
            }
        }
        let cost = vec![false; criteria.len()];
        Ok(ScoreMatrix { alternatives, criteria, scores, weights, cost })
    }

    pub fn with_cost_criteria(mut self, cost: Vec<bool>) -> Result<Self, EvalError> {
        if cost.len() != self.criteria.len() {
            return Err(EvalError::WeightMismatch(format!(
                "{} cost flags for {} criteria",
                cost.len(),
                self.criteria.len()
            )));
        }
        self.cost = cost;
        Ok(self)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<ScoreMatrix<U>, EvalError> {
        ScoreMatrix::new(
            self.alternatives.clone(),
            self.criteria.clone(),
            self.scores.iter().map(|r| r.iter().map(|&x| f(x)).collect()).collect(),
            self.weights.iter().map(|&w| f(w)).collect(),
        )?
        .with_cost_criteria(self.cost.clone())
    }
}

impl<T> ScoreMatrix<T> {
    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    pub fn scores(&self) -> &[Vec<T>] {
        &self.scores
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn cost_flags(&self) -> &[bool] {
        &self.cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry<T> {
    pub id: String,
    pub score: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking<T> {
    pub method: String,
    pub direction: Direction,
    /// Best first; ties broken by id.
    pub entries: Vec<RankEntry<T>>,
}

impl<T: PartialOrd> Ranking<T> {
    pub fn new(method: &str, direction: Direction, mut entries: Vec<RankEntry<T>>) -> Self {
        entries.sort_by(|a, b| {
            let ord = match direction {
                Direction::HigherIsBetter => b.score.partial_cmp(&a.score),
                Direction::LowerIsBetter => a.score.partial_cmp(&b.score),
            };
            ord.unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.id.cmp(&b.id))
        });
        Ranking { method: method.to_string(), direction, entries }
    }

    pub fn best(&self) -> Option<&RankEntry<T>> {
        self.entries.first()
    }

    pub fn score_of(&self, id: &str) -> Option<&T> {
        self.entries.iter().find(|e| e.id == id).map(|e| &e.score)
    }
}

/// `Σ_j w_j q_ij`. Only defined for benefit criteria.
pub fn weighted_sum<T: Scalar>(m: &ScoreMatrix<T>) -> Result<Ranking<T>, EvalError> {
    if let Some(j) = m.cost.iter().position(|&c| c) {
        return Err(EvalError::WeightMismatch(format!(
            "weighted sum needs benefit criteria, `{}` is a cost",
            m.criteria[j]
        )));
    }
    let entries = m
        .alternatives
        .iter()
        .zip(&m.scores)
        .map(|(id, row)| RankEntry {
            id: id.clone(),
            score: row.iter().zip(&m.weights).fold(T::zero(), |acc, (&q, &w)| acc + w * q),
        })
        .collect();
    Ok(Ranking::new("ws", Direction::HigherIsBetter, entries))
}

fn check_positive<F: Float>(m: &ScoreMatrix<F>) -> Result<(), EvalError> {
    for (i, row) in m.scores.iter().enumerate() {
        if let Some(j) = row.iter().position(|q| q.is_nan() || *q <= F::zero()) {
            return Err(EvalError::NonPositiveScore {
                alternative: m.alternatives[i].clone(),
                criterion: m.criteria[j].clone(),
            });
        }
    }
    Ok(())
}

/// `Π_j (q_1j / q_2j)^{w_j}`, with cost criteria inverted. Greater than 1
/// when the first alternative is preferred.
pub fn weighted_product_ratio<F: Float + Scalar>(m: &ScoreMatrix<F>, first: usize, second: usize) -> Result<F, EvalError> {
    check_positive(m)?;
    let (a, b) = (&m.scores[first], &m.scores[second]);
    Ok((0..m.criteria.len()).fold(F::one(), |acc, j| {
        let w = if m.cost[j] { -m.weights[j] } else { m.weights[j] };
        acc * (a[j] / b[j]).powf(w)
    }))
}

/// Ranks by `Π_j q_ij^{w_j}`: the pairwise ratio of two alternatives is the
/// quotient of these products, so this order is the ratio tournament.
pub fn wp_rank<F: Float + Scalar>(m: &ScoreMatrix<F>) -> Result<Ranking<F>, EvalError> {
    check_positive(m)?;
    let entries = m
        .alternatives
        .iter()
        .zip(&m.scores)
        .map(|(id, row)| RankEntry {
            id: id.clone(),
            score: row.iter().enumerate().fold(F::one(), |acc, (j, &q)| {
                let w = if m.cost[j] { -m.weights[j] } else { m.weights[j] };
                acc * q.powf(w)
            }),
        })
        .collect();
    Ok(Ranking::new("wp", Direction::HigherIsBetter, entries))
}

/// Closeness to the ideal solution after vector normalization.
pub fn topsis<F: Float + Scalar>(m: &ScoreMatrix<F>) -> Result<Ranking<F>, EvalError> {
    let k = m.criteria.len();
    let mut v: Vec<Vec<F>> = m.scores.clone();
    for j in 0..k {
        let norm = m.scores.iter().fold(F::zero(), |acc, r| acc + r[j] * r[j]).sqrt();
        if norm == F::zero() {
            return Err(EvalError::ZeroColumn(m.criteria[j].clone()));
        }
        for row in &mut v {
            row[j] = m.weights[j] * row[j] / norm;
        }
    }
    let column = |j: usize| v.iter().map(move |r| r[j]);
    let (ideal, anti): (Vec<F>, Vec<F>) = (0..k)
        .map(|j| {
            let hi = column(j).fold(F::neg_infinity(), F::max);
            let lo = column(j).fold(F::infinity(), F::min);
            if m.cost[j] {
                (lo, hi)
            } else {
                (hi, lo)
            }
        })
        .unzip();
    let dist = |row: &[F], target: &[F]| {
        row.iter()
            .zip(target)
            .fold(F::zero(), |acc, (&x, &t)| acc + (x - t) * (x - t))
            .sqrt()
    };
    let half = F::one() / (F::one() + F::one());
    let entries = m
        .alternatives
        .iter()
        .zip(&v)
        .map(|(id, row)| {
            let (plus, minus) = (dist(row, &ideal), dist(row, &anti));
            let total = plus + minus;
            let score = if total == F::zero() { half } else { minus / total };
            RankEntry { id: id.clone(), score }
        })
        .collect();
    Ok(Ranking::new("topsis", Direction::HigherIsBetter, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>, weights: Vec<f64>) -> ScoreMatrix<f64> {
        let alts = (0..rows.len()).map(|i| format!("D{i}")).collect();
        let crit = (0..weights.len()).map(|j| format!("k{j}")).collect();
        ScoreMatrix::new(alts, crit, rows, weights).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        let r = ScoreMatrix::new(vec!["a".into()], vec!["x".into()], vec![vec![1.0]], vec![0.5]);
        assert!(matches!(r, Err(EvalError::InvalidWeights(_))));
        let r = ScoreMatrix::new(vec!["a".into()], vec!["x".into()], vec![vec![1.0]], vec![0.5, 0.5]);
        assert!(matches!(r, Err(EvalError::WeightMismatch(_))));
    }

    #[test]
    fn identical_rows_tie() {
        let m = matrix(vec![vec![0.5, 0.7], vec![0.5, 0.7]], vec![0.5, 0.5]);
        let ws = weighted_sum(&m).unwrap();
        assert_eq!(ws.entries[0].id, "D0");
        assert_eq!(ws.entries[0].score, ws.entries[1].score);
        assert_eq!(weighted_product_ratio(&m, 0, 1).unwrap(), 1.0);
        let t = topsis(&m).unwrap();
        assert!(t.entries.iter().all(|e| e.score == 0.5));
    }

    #[test]
    fn dominant_wins_everywhere() {
        let m = matrix(vec![vec![0.2, 0.3], vec![0.4, 0.9]], vec![0.3, 0.7]);
        assert_eq!(weighted_sum(&m).unwrap().best().unwrap().id, "D1");
        assert_eq!(wp_rank(&m).unwrap().best().unwrap().id, "D1");
        assert_eq!(topsis(&m).unwrap().best().unwrap().id, "D1");
    }

    #[test]
    fn cost_criteria() {
        let m = matrix(vec![vec![10.0], vec![5.0]], vec![1.0]).with_cost_criteria(vec![true]).unwrap();
        assert_eq!(wp_rank(&m).unwrap().best().unwrap().id, "D1");
        assert_eq!(topsis(&m).unwrap().best().unwrap().id, "D1");
        assert!(weighted_sum(&m).is_err());
    }

    #[test]
    fn wp_needs_positive_scores() {
        let m = matrix(vec![vec![0.0], vec![1.0]], vec![1.0]);
        assert!(matches!(wp_rank(&m), Err(EvalError::NonPositiveScore { .. })));
    }

    #[test]
    fn topsis_zero_column() {
        let m = matrix(vec![vec![0.0, 1.0], vec![0.0, 2.0]], vec![0.5, 0.5]);
        assert!(matches!(topsis(&m), Err(EvalError::ZeroColumn(_))));
    }
}
