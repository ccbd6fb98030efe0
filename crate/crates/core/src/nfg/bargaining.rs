use super::tensor::{JointDistribution, PayoffTensor};
use crate::num::{uniform, Scalar};

/// Gap below the smallest payoff used for the default disagreement point.
pub const DISAGREEMENT_OFFSET: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BargainingConfig {
    pub steps: usize,
    pub step_size: f64,
}

impl Default for BargainingConfig {
    fn default() -> Self {
        BargainingConfig { steps: 10_000, step_size: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BargainingSolution<T> {
    pub joint: JointDistribution<T>,
    pub value: [T; 2],
    pub disagreement: [T; 2],
    /// Nash product Π (u_i − d_i).
    pub product: T,
    /// No feasible point strictly dominates the disagreement point; `joint` is then the single
    /// cell with the largest worst-case gain.
    pub degenerate: bool,
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = T::zero();
    let mut theta = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - T::one()) / T::of((j + 1) as f64);
        if uj - t > T::zero() {
            theta = t;
        }
    }
    v.iter().map(|x| (*x - theta).max(T::zero())).collect()
}

fn payoffs<T: Scalar>(tensor: &PayoffTensor<T>, w: &[T]) -> [T; 2] {
    let mut out = [T::zero(); 2];
    for (p, v) in w.iter().zip(&tensor.values) {
        out[0] += *p * v[0];
        out[1] += *p * v[1];
    }
    out
}

fn objective<T: Scalar>(u: [T; 2], d: [T; 2]) -> Option<T> {
    let g0 = u[0] - d[0];
    let g1 = u[1] - d[1];
    (g0 > T::zero() && g1 > T::zero()).then(|| g0.ln() + g1.ln())
}

/// A mixture of at most two cells strictly dominating `d`, if one exists. In the plane a
/// hull point above `d` can always be slid along (1, 1) onto an edge, so edges suffice.
fn strictly_feasible<T: Scalar>(tensor: &PayoffTensor<T>, d: [T; 2]) -> Option<Vec<T>> {
    let n = tensor.values.len();
    for i in 0..n {
        for j in i..n {
            let (a, b) = (tensor.values[i], tensor.values[j]);
            let (mut lo, mut hi) = (T::zero(), T::one());
            let mut ok = true;
            for k in 0..2 {
                let slope = b[k] - a[k];
                let gap = d[k] - a[k];
                if slope == T::zero() {
                    ok &= a[k] > d[k];
                } else if slope > T::zero() {
                    lo = lo.max(gap / slope);
                } else {
                    hi = hi.min(gap / slope);
                }
            }
            if ok && lo < hi {
                let two = T::of(2.0);
                let t = if lo <= T::zero() && hi >= T::one() {
                    T::one() / two
                } else {
                    (lo.max(T::zero()) + hi.min(T::one())) / two
                };
                let mut w = vec![T::zero(); n];
                w[i] += T::one() - t;
                w[j] += t;
                if objective(payoffs(tensor, &w), d).is_some() {
                    return Some(w);
                }
            }
        }
    }
    None
}

/// Nash bargaining over joint distributions: maximizes log(u_1 − d_1) + log(u_2 − d_2) by
/// projected gradient ascent with backtracking. `d` defaults to each player's smallest payoff
/// minus [`DISAGREEMENT_OFFSET`].
pub fn nash_bargaining<T: Scalar>(
    tensor: &PayoffTensor<T>,
    disagreement: Option<[T; 2]>,
    config: BargainingConfig,
) -> BargainingSolution<T> {
    let offset = T::of(DISAGREEMENT_OFFSET);
    let d = disagreement.unwrap_or([tensor.min_payoff(0) - offset, tensor.min_payoff(1) - offset]);
    let n = tensor.values.len();
    let start = uniform::<T>(n);
    let mut w = if objective(payoffs(tensor, &start), d).is_some() {
        start
    } else if let Some(w) = strictly_feasible(tensor, d) {
        w
    } else {
        let best = (0..n)
            .max_by(|&a, &b| {
                let gain = |c: usize| (tensor.values[c][0] - d[0]).min(tensor.values[c][1] - d[1]);
                gain(a).partial_cmp(&gain(b)).expect("finite").then(b.cmp(&a))
            })
            .expect("tensor has cells");
        let mut weights = vec![T::zero(); n];
        weights[best] = T::one();
        let value = tensor.values[best];
        let product = (value[0] - d[0]) * (value[1] - d[1]);
        let joint = JointDistribution { rows: tensor.rows(), cols: tensor.cols(), weights };
        return BargainingSolution { joint, value, disagreement: d, product, degenerate: true };
    };

    let armijo = T::of(1e-4);
    let mut f = objective(payoffs(tensor, &w), d).expect("strictly feasible start");
    for _ in 0..config.steps {
        let u = payoffs(tensor, &w);
        let (g0, g1) = (T::one() / (u[0] - d[0]), T::one() / (u[1] - d[1]));
        let grad: Vec<T> = tensor.values.iter().map(|v| v[0] * g0 + v[1] * g1).collect();
        let mut alpha = T::of(config.step_size);
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<T> = w.iter().zip(&grad).map(|(x, g)| *x + alpha * *g).collect();
            let next = project_simplex(&trial);
            let ascent: T = next.iter().zip(&w).zip(&grad).map(|((a, b), g)| (*a - *b) * *g).sum();
            if let Some(fn_next) = objective(payoffs(tensor, &next), d) {
                if fn_next >= f + armijo * ascent {
                    moved = fn_next > f;
                    w = next;
                    f = fn_next;
                    break;
                }
            }
            alpha = alpha * T::of(0.5);
        }
        if !moved {
            break;
        }
    }
    let value = payoffs(tensor, &w);
    let product = (value[0] - d[0]) * (value[1] - d[1]);
    let joint = JointDistribution { rows: tensor.rows(), cols: tensor.cols(), weights: w };
    BargainingSolution { joint, value, disagreement: d, product, degenerate: false }
}
