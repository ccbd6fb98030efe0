use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::tree::GameTree;
use crate::num::{uniform, Scalar};

/// Map from canonical infostate key to a distribution over action indices.
///
/// Keys not in the table get `fallback`, which is uniform unless set otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy<T> {
    pub num_actions: usize,
    pub table: BTreeMap<String, Vec<T>>,
    pub fallback: Vec<T>,
}

impl<T: Scalar> TabularPolicy<T> {
    pub fn uniform(num_actions: usize) -> Self {
        TabularPolicy { num_actions, table: BTreeMap::new(), fallback: uniform(num_actions) }
    }

    /// Plays `action` everywhere.
    pub fn pure(num_actions: usize, action: usize) -> Self {
        let mut fallback = vec![T::zero(); num_actions];
        fallback[action] = T::one();
        TabularPolicy { num_actions, table: BTreeMap::new(), fallback }
    }

    /// Plays the same distribution everywhere.
    pub fn constant(probs: Vec<T>) -> Self {
        TabularPolicy { num_actions: probs.len(), table: BTreeMap::new(), fallback: probs }
    }

    pub fn probs(&self, key: &str) -> &[T] {
        self.table.get(key).map(Vec::as_slice).unwrap_or(&self.fallback)
    }

    pub fn set(&mut self, key: impl Into<String>, probs: Vec<T>) {
        debug_assert_eq!(probs.len(), self.num_actions);
        self.table.insert(key.into(), probs);
    }

    /// Per-infoset probabilities for `tree`, indexed by infoset id.
    pub fn lookup_all(&self, tree: &GameTree<T>) -> Vec<Vec<T>> {
        tree.infosets.iter().map(|i| self.probs(&i.key).to_vec()).collect()
    }

    pub fn to_json(&self) -> String {
        let table: BTreeMap<&str, Vec<f64>> = self
            .table
            .iter()
            .map(|(k, v)| (k.as_str(), v.iter().map(|x| x.to_f64_lossy()).collect()))
            .collect();
        serde_json::to_string_pretty(&table).expect("policy serializes")
    }

    pub fn from_json(text: &str, num_actions: usize) -> Result<Self, serde_json::Error> {
        let table: BTreeMap<String, Vec<f64>> = serde_json::from_str(text)?;
        let mut policy = TabularPolicy::uniform(num_actions);
        for (k, v) in table {
            policy.set(k, v.into_iter().map(T::of).collect());
        }
        Ok(policy)
    }
}
