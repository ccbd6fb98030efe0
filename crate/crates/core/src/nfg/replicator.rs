use super::tensor::PayoffTensor;
use super::NfgError;
use crate::num::{uniform, Scalar};

/// Time-averaged and final iterates of a replicator run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicatorResult<T> {
    pub average: (Vec<T>, Vec<T>),
    pub last: (Vec<T>, Vec<T>),
}

fn update<T: Scalar>(own: &[T], values: &[T], step_size: T) -> Result<Vec<T>, NfgError> {
    let mean: T = own.iter().zip(values).map(|(p, v)| *p * *v).sum();
    let mut next: Vec<T> = own
        .iter()
        .zip(values)
        .map(|(p, v)| (*p * (T::one() + step_size * (*v - mean))).max(T::zero()))
        .collect();
    let total: T = next.iter().copied().sum();
    if !(total > T::zero()) || !total.is_finite() {
        return Err(NfgError::Divergence(format!("normalizer {}", total.to_f64_lossy())));
    }
    next.iter_mut().for_each(|p| *p /= total);
    Ok(next)
}

/// One simultaneous discrete replicator step for both populations.
pub fn replicator_step<T: Scalar>(
    tensor: &PayoffTensor<T>,
    x: &[T],
    y: &[T],
    step_size: T,
) -> Result<(Vec<T>, Vec<T>), NfgError> {
    let ux = tensor.action_values(0, y);
    let uy = tensor.action_values(1, x);
    Ok((update(x, &ux, step_size)?, update(y, &uy, step_size)?))
}

/// Two-population replicator dynamics from the uniform profile.
pub fn replicator_dynamics<T: Scalar>(
    tensor: &PayoffTensor<T>,
    steps: usize,
    step_size: T,
) -> Result<ReplicatorResult<T>, NfgError> {
    if !(step_size > T::zero()) {
        return Err(NfgError::InvalidTensor("step size must be positive".into()));
    }
    let mut x = uniform::<T>(tensor.rows());
    let mut y = uniform::<T>(tensor.cols());
    let mut sx = vec![T::zero(); x.len()];
    let mut sy = vec![T::zero(); y.len()];
    let steps = steps.max(1);
    for _ in 0..steps {
        (x, y) = replicator_step(tensor, &x, &y, step_size)?;
        sx.iter_mut().zip(&x).for_each(|(s, p)| *s += *p);
        sy.iter_mut().zip(&y).for_each(|(s, p)| *s += *p);
    }
    let k = T::of(steps as f64);
    sx.iter_mut().for_each(|s| *s /= k);
    sy.iter_mut().for_each(|s| *s /= k);
    Ok(ReplicatorResult { average: (sx, sy), last: (x, y) })
}
