//! Scalar abstraction shared by the numerical solvers.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point scalar used by the equilibrium solvers and the imitation policy.
///
/// Payoffs coming out of a dialogue game are always `f64`; solvers convert them with
/// [`Scalar::of`] so that the arithmetic itself can run in `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Uniform distribution of length `n`.
pub fn uniform<T: Scalar>(n: usize) -> Vec<T> {
    if n == 0 {
        return Vec::new();
    }
    vec![T::one() / T::of(n as f64); n]
}

/// Normalizes a non-negative vector in place; falls back to uniform when the mass is zero.
pub fn normalize_or_uniform<T: Scalar>(values: &mut [T]) {
    let total: T = values.iter().copied().sum();
    if total > T::zero() && total.is_finite() {
        for v in values.iter_mut() {
            *v /= total;
        }
    } else {
        let u = T::one() / T::of(values.len() as f64);
        values.iter_mut().for_each(|v| *v = u);
    }
}

/// Regret matching: positive parts of `regrets` normalized, uniform when none is positive.
pub fn regret_matching<T: Scalar>(regrets: &[T], out: &mut [T]) {
    for (o, r) in out.iter_mut().zip(regrets) {
        *o = r.max(T::zero());
    }
    normalize_or_uniform(out);
}

/// True when `p` is non-negative and sums to one within `tol`.
pub fn is_distribution<T: Scalar>(p: &[T], tol: f64) -> bool {
    !p.is_empty()
        && p.iter().all(|x| *x >= T::zero() && x.is_finite())
        && (p.iter().copied().sum::<T>().to_f64_lossy() - 1.0).abs() <= tol
}
