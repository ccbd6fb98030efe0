use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::NfgError;
use crate::game::normalize_label;
use crate::num::Scalar;

/// Two-player normal-form game; cell `(r, c)` holds `(u_1, u_2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffTensor<T> {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Row-major cells.
    pub values: Vec<[T; 2]>,
}

fn check_labels(labels: &[String], axis: &str) -> Result<(), NfgError> {
    if labels.is_empty() {
        return Err(NfgError::InvalidTensor(format!("no {axis} labels")));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(normalize_label(l)) {
            return Err(NfgError::InvalidTensor(format!("duplicate {axis} label `{l}`")));
        }
    }
    Ok(())
}

fn default_labels(n: usize, prefix: char) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl<T: Scalar> PayoffTensor<T> {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, values: Vec<[T; 2]>) -> Result<Self, NfgError> {
        check_labels(&row_labels, "row")?;
        check_labels(&col_labels, "column")?;
        if values.len() != row_labels.len() * col_labels.len() {
            return Err(NfgError::ShapeMismatch {
                expected: row_labels.len() * col_labels.len(),
                found: values.len(),
            });
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(NfgError::InvalidTensor("non-finite payoff".into()));
        }
        Ok(PayoffTensor { row_labels, col_labels, values })
    }

    /// Unlabeled tensor from per-player matrices `u1[r][c]`, `u2[r][c]`.
    pub fn from_matrices(u1: &[Vec<f64>], u2: &[Vec<f64>]) -> Result<Self, NfgError> {
        let rows = u1.len();
        let cols = u1.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            if u1[r].len() != cols || u2.get(r).map_or(true, |row| row.len() != cols) {
                return Err(NfgError::InvalidTensor("ragged payoff matrices".into()));
            }
            for c in 0..cols {
                values.push([T::of(u1[r][c]), T::of(u2[r][c])]);
            }
        }
        PayoffTensor::new(default_labels(rows, 'r'), default_labels(cols, 'c'), values)
    }

    /// Zero-sum tensor from the row player's matrix.
    pub fn zero_sum(u1: &[Vec<f64>]) -> Result<Self, NfgError> {
        let u2: Vec<Vec<f64>> = u1.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
        PayoffTensor::from_matrices(u1, &u2)
    }

    /// Symmetric game: `u2[r][c] = u1[c][r]`.
    pub fn symmetric(u1: &[Vec<f64>]) -> Result<Self, NfgError> {
        let n = u1.len();
        let u2: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| u1[c][r]).collect()).collect();
        PayoffTensor::from_matrices(u1, &u2)
    }

    pub fn with_labels(mut self, rows: Vec<String>, cols: Vec<String>) -> Result<Self, NfgError> {
        self.row_labels = rows;
        self.col_labels = cols;
        PayoffTensor::new(self.row_labels, self.col_labels, self.values)
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn num_actions(&self, player: usize) -> usize {
        if player == 0 {
            self.rows()
        } else {
            self.cols()
        }
    }

    pub fn get(&self, r: usize, c: usize) -> [T; 2] {
        self.values[r * self.cols() + c]
    }

    /// Payoff to `player` when it plays `own` and the co-player `other`.
    pub fn payoff(&self, player: usize, own: usize, other: usize) -> T {
        if player == 0 {
            self.get(own, other)[0]
        } else {
            self.get(other, own)[1]
        }
    }

    /// `u_player(a, opponent)` for every own action `a`.
    pub fn action_values(&self, player: usize, opponent: &[T]) -> Vec<T> {
        (0..self.num_actions(player))
            .map(|a| opponent.iter().enumerate().map(|(b, &q)| q * self.payoff(player, a, b)).sum())
            .collect()
    }

    pub fn min_payoff(&self, player: usize) -> T {
        self.values.iter().map(|v| v[player]).fold(T::infinity(), T::min)
    }

    pub fn max_payoff(&self, player: usize) -> T {
        self.values.iter().map(|v| v[player]).fold(T::neg_infinity(), T::max)
    }

    /// Σ over cells of weight · (u_1, u_2).
    pub fn expected_payoffs(&self, joint: &JointDistribution<T>) -> Result<[T; 2], NfgError> {
        if joint.rows != self.rows() || joint.cols != self.cols() {
            return Err(NfgError::ShapeMismatch { expected: self.values.len(), found: joint.weights.len() });
        }
        let mut out = [T::zero(); 2];
        for (w, v) in joint.weights.iter().zip(&self.values) {
            out[0] += *w * v[0];
            out[1] += *w * v[1];
        }
        Ok(out)
    }

    /// CSV with header `row,col,u1,u2`, one line per cell in row-major order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["row", "col", "u1", "u2"]).expect("in-memory write");
        for (r, rl) in self.row_labels.iter().enumerate() {
            for (c, cl) in self.col_labels.iter().enumerate() {
                let v = self.get(r, c);
                w.write_record([rl.clone(), cl.clone(), fmt(v[0]), fmt(v[1])]).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str) -> Result<Self, NfgError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows: Vec<String> = Vec::new();
        let mut cols: Vec<String> = Vec::new();
        let mut cells: Vec<(usize, usize, [T; 2])> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| NfgError::Io(e.to_string()))?;
            if record.len() != 4 {
                return Err(NfgError::Io(format!("expected 4 fields, found {}", record.len())));
            }
            let idx = |labels: &mut Vec<String>, l: &str| match labels.iter().position(|x| x == l) {
                Some(i) => i,
                None => {
                    labels.push(l.to_owned());
                    labels.len() - 1
                }
            };
            let r = idx(&mut rows, &record[0]);
            let c = idx(&mut cols, &record[1]);
            let parse = |s: &str| s.trim().parse::<f64>().map(T::of).map_err(|e| NfgError::Io(e.to_string()));
            cells.push((r, c, [parse(&record[2])?, parse(&record[3])?]));
        }
        let mut values = vec![None; rows.len() * cols.len()];
        for (r, c, v) in cells {
            values[r * cols.len() + c] = Some(v);
        }
        let values: Option<Vec<[T; 2]>> = values.into_iter().collect();
        let values = values.ok_or_else(|| NfgError::Io("missing cells".into()))?;
        PayoffTensor::new(rows, cols, values)
    }
}

fn fmt<T: Scalar>(x: T) -> String {
    format!("{}", x.to_f64_lossy())
}

/// Distribution over the cells of a tensor, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution<T> {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<T>,
}

impl<T: Scalar> JointDistribution<T> {
    pub fn uniform(rows: usize, cols: usize) -> Self {
        JointDistribution { rows, cols, weights: crate::num::uniform(rows * cols) }
    }

    pub fn one_hot(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut weights = vec![T::zero(); rows * cols];
        weights[r * cols + c] = T::one();
        JointDistribution { rows, cols, weights }
    }

    /// Independent product `x ⊗ y`.
    pub fn product(x: &[T], y: &[T]) -> Self {
        let weights = x.iter().flat_map(|&a| y.iter().map(move |&b| a * b)).collect();
        JointDistribution { rows: x.len(), cols: y.len(), weights }
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.weights[r * self.cols + c]
    }

    /// Row and column marginals.
    pub fn marginals(&self) -> (Vec<T>, Vec<T>) {
        let mut x = vec![T::zero(); self.rows];
        let mut y = vec![T::zero(); self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let w = self.get(r, c);
                x[r] += w;
                y[c] += w;
            }
        }
        (x, y)
    }

    pub fn marginal(&self, player: usize) -> Vec<T> {
        let (x, y) = self.marginals();
        if player == 0 {
            x
        } else {
            y
        }
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.weights.len() == self.rows * self.cols && crate::num::is_distribution(&self.weights, tol)
    }

    pub fn to_json(&self) -> String {
        let matrix: Vec<Vec<f64>> =
            (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c).to_f64_lossy()).collect()).collect();
        serde_json::json!({ "rows": self.rows, "cols": self.cols, "weights": matrix }).to_string()
    }

    /// Largest gain any player gets by committing ex ante to a fixed action (zero at a CCE).
    pub fn max_cce_regret(&self, tensor: &PayoffTensor<T>) -> T {
        let value = tensor.expected_payoffs(self).expect("matching shapes");
        let mut worst = T::neg_infinity();
        for player in 0..2 {
            for dev in 0..tensor.num_actions(player) {
                let mut v = T::zero();
                for r in 0..self.rows {
                    for c in 0..self.cols {
                        let other = if player == 0 { c } else { r };
                        v += self.get(r, c) * tensor.payoff(player, dev, other);
                    }
                }
                worst = worst.max(v - value[player]);
            }
        }
        worst
    }
}
