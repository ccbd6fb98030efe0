use super::policy::TabularPolicy;
use super::tree::{GameTree, TreeNode};
use crate::num::Scalar;

/// Expected returns when player `p` follows `profile[p]`.
pub fn expected_values_profile<T: Scalar>(tree: &GameTree<T>, profile: &[&TabularPolicy<T>]) -> Vec<T> {
    let tables: Vec<Vec<Vec<T>>> = profile.iter().map(|p| p.lookup_all(tree)).collect();
    fn go<T: Scalar>(tree: &GameTree<T>, tables: &[Vec<Vec<T>>], node: usize) -> Vec<T> {
        match &tree.nodes[node] {
            TreeNode::Terminal { returns } => returns.clone(),
            TreeNode::Chance { outcomes } => {
                let mut v = vec![T::zero(); tree.num_players];
                for &(p, child) in outcomes {
                    for (acc, x) in v.iter_mut().zip(go(tree, tables, child)) {
                        *acc += p * x;
                    }
                }
                v
            }
            TreeNode::Decision { player, infoset, children } => {
                let sigma = &tables[*player][*infoset];
                let mut v = vec![T::zero(); tree.num_players];
                for (a, &child) in children.iter().enumerate() {
                    if sigma[a] == T::zero() {
                        continue;
                    }
                    for (acc, x) in v.iter_mut().zip(go(tree, tables, child)) {
                        *acc += sigma[a] * x;
                    }
                }
                v
            }
        }
    }
    go(tree, &tables, 0)
}

/// Expected returns when every player follows `policy`.
pub fn expected_values<T: Scalar>(tree: &GameTree<T>, policy: &TabularPolicy<T>) -> Vec<T> {
    let profile = vec![policy; tree.num_players];
    expected_values_profile(tree, &profile)
}

struct Responder<'a, T> {
    tree: &'a GameTree<T>,
    player: usize,
    sigma: Vec<Vec<T>>,
    opp_reach: Vec<T>,
    value: Vec<Option<T>>,
    choice: Vec<Option<usize>>,
}

impl<'a, T: Scalar> Responder<'a, T> {
    fn new(tree: &'a GameTree<T>, policy: &TabularPolicy<T>, player: usize) -> Self {
        let sigma = policy.lookup_all(tree);
        let mut opp_reach = vec![T::zero(); tree.nodes.len()];
        opp_reach[0] = T::one();
        // Children always have larger indices, so one forward sweep propagates reach.
        for node in 0..tree.nodes.len() {
            let r = opp_reach[node];
            match &tree.nodes[node] {
                TreeNode::Terminal { .. } => {}
                TreeNode::Chance { outcomes } => {
                    for &(p, child) in outcomes {
                        opp_reach[child] = r * p;
                    }
                }
                TreeNode::Decision { player: q, infoset, children } => {
                    for (a, &child) in children.iter().enumerate() {
                        opp_reach[child] = if *q == player { r } else { r * sigma[*infoset][a] };
                    }
                }
            }
        }
        Responder {
            tree,
            player,
            sigma,
            opp_reach,
            value: vec![None; tree.nodes.len()],
            choice: vec![None; tree.infosets.len()],
        }
    }

    fn value(&mut self, node: usize) -> T {
        if let Some(v) = self.value[node] {
            return v;
        }
        let tree = self.tree;
        let v = match &tree.nodes[node] {
            TreeNode::Terminal { returns } => returns[self.player],
            TreeNode::Chance { outcomes } => outcomes.iter().map(|&(p, c)| p * self.value(c)).sum(),
            TreeNode::Decision { player, infoset, children } if *player != self.player => {
                let mut acc = T::zero();
                for (a, &c) in children.iter().enumerate() {
                    let p = self.sigma[*infoset][a];
                    if p != T::zero() {
                        acc += p * self.value(c);
                    }
                }
                acc
            }
            TreeNode::Decision { infoset, children, .. } => {
                let a = self.choose(*infoset);
                self.value(children[a])
            }
        };
        self.value[node] = Some(v);
        v
    }

    /// Action maximizing the reach-weighted value summed over the infoset's histories;
    /// the lowest index wins ties.
    fn choose(&mut self, infoset: usize) -> usize {
        if let Some(a) = self.choice[infoset] {
            return a;
        }
        let tree = self.tree;
        let mut best = (0, T::neg_infinity());
        for a in 0..tree.num_actions {
            let mut total = T::zero();
            for &h in &tree.infosets[infoset].nodes {
                if let TreeNode::Decision { children, .. } = &tree.nodes[h] {
                    let w = self.opp_reach[h];
                    let v = self.value(children[a]);
                    total += w * v;
                }
            }
            if total > best.1 {
                best = (a, total);
            }
        }
        self.choice[infoset] = Some(best.0);
        best.0
    }
}

/// Value to `player` of a best pure deviation against everyone else following `policy`.
pub fn best_response_value<T: Scalar>(tree: &GameTree<T>, policy: &TabularPolicy<T>, player: usize) -> T {
    Responder::new(tree, policy, player).value(0)
}

/// The best pure deviation itself, as a one-hot policy over `player`'s infosets, with its value.
pub fn best_response<T: Scalar>(tree: &GameTree<T>, policy: &TabularPolicy<T>, player: usize) -> (T, TabularPolicy<T>) {
    let mut r = Responder::new(tree, policy, player);
    let value = r.value(0);
    let mut br = policy.clone();
    for i in tree.player_infosets(player) {
        let a = r.choose(i);
        let mut p = vec![T::zero(); tree.num_actions];
        p[a] = T::one();
        br.set(tree.infosets[i].key.clone(), p);
    }
    (value, br)
}
