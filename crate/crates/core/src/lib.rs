//! Dialogue tasks as imperfect-information extensive-form games.

pub mod assets;
pub mod backends;
pub mod domains;
pub mod efg;
pub mod eval;
pub mod game;
pub mod imitation;
pub mod nfg;
pub mod num;
pub mod psro;

pub use num::Scalar;

/// Double-precision defaults for the scalar-generic solvers.
pub type Tree = efg::GameTree<f64>;
pub type Policy = efg::TabularPolicy<f64>;
pub type Tensor = nfg::PayoffTensor<f64>;
pub type Joint = nfg::JointDistribution<f64>;
pub type Mlp = imitation::MlpPolicy<f64>;

/// Single-precision variants.
pub type Tree32 = efg::GameTree<f32>;
pub type Policy32 = efg::TabularPolicy<f32>;
pub type Tensor32 = nfg::PayoffTensor<f32>;
pub type Mlp32 = imitation::MlpPolicy<f32>;
