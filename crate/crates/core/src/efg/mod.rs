//! Extensive-form solvers over the expanded dialogue tree: CFR, best response and the
//! exploitability metrics.

mod best_response;
mod cfr;
mod metrics;
mod policy;
mod tree;

pub use best_response::{best_response, best_response_value, expected_values, expected_values_profile};
pub use cfr::{cfr_solve, cfr_solve_tree, CfrSolver};
pub use metrics::{baseline_policy, cfr_gain, cfr_gain_per_player, ess_indicator, nash_conv};
pub use policy::TabularPolicy;
pub use tree::{GameTree, Infoset, TreeNode};
