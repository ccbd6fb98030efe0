use super::policy::TabularPolicy;
use super::tree::{GameTree, TreeNode};
use crate::game::{DialogueGame, GameError};
use crate::num::{normalize_or_uniform, regret_matching, Scalar};

/// Vanilla CFR: full traversals, both players updated from the same current-strategy snapshot.
pub struct CfrSolver<'a, T> {
    tree: &'a GameTree<T>,
    cumulative_regret: Vec<Vec<T>>,
    cumulative_strategy: Vec<Vec<T>>,
    current: Vec<Vec<T>>,
    iterations: usize,
}

impl<'a, T: Scalar> CfrSolver<'a, T> {
    pub fn new(tree: &'a GameTree<T>) -> Self {
        let n = tree.num_actions;
        let zeros = vec![vec![T::zero(); n]; tree.infosets.len()];
        CfrSolver {
            tree,
            cumulative_regret: zeros.clone(),
            cumulative_strategy: zeros.clone(),
            current: zeros,
            iterations: 0,
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn run(&mut self, iterations: usize) {
        for _ in 0..iterations {
            self.iterate();
        }
    }

    pub fn iterate(&mut self) {
        for (cur, reg) in self.current.iter_mut().zip(&self.cumulative_regret) {
            regret_matching(reg, cur);
        }
        let mut reach = vec![T::one(); self.tree.num_players + 1];
        self.walk(0, &mut reach);
        self.iterations += 1;
    }

    /// Values for every player at `node`; `reach` holds each player's own reach probability
    /// followed by the chance reach.
    fn walk(&mut self, node: usize, reach: &mut [T]) -> Vec<T> {
        let tree = self.tree;
        match &tree.nodes[node] {
            TreeNode::Terminal { returns } => returns.clone(),
            TreeNode::Chance { outcomes } => {
                let chance = tree.num_players;
                let mut value = vec![T::zero(); tree.num_players];
                let saved = reach[chance];
                for &(p, child) in outcomes {
                    reach[chance] = saved * p;
                    let v = self.walk(child, reach);
                    for (acc, x) in value.iter_mut().zip(v) {
                        *acc += p * x;
                    }
                }
                reach[chance] = saved;
                value
            }
            TreeNode::Decision { player, infoset, children } => {
                let (player, infoset) = (*player, *infoset);
                let sigma = self.current[infoset].clone();
                let saved = reach[player];
                let mut value = vec![T::zero(); tree.num_players];
                let mut action_values = Vec::with_capacity(children.len());
                for (a, &child) in children.iter().enumerate() {
                    reach[player] = saved * sigma[a];
                    let v = self.walk(child, reach);
                    for (acc, x) in value.iter_mut().zip(&v) {
                        *acc += sigma[a] * *x;
                    }
                    action_values.push(v[player]);
                }
                reach[player] = saved;
                let counterfactual: T = reach
                    .iter()
                    .enumerate()
                    .filter(|(q, _)| *q != player)
                    .map(|(_, r)| *r)
                    .fold(T::one(), |acc, r| acc * r);
                for a in 0..children.len() {
                    self.cumulative_regret[infoset][a] += counterfactual * (action_values[a] - value[player]);
                    self.cumulative_strategy[infoset][a] += saved * sigma[a];
                }
                value
            }
        }
    }

    /// Regret-matching strategy that the next iteration will play.
    pub fn current_policy(&self) -> TabularPolicy<T> {
        let mut policy = TabularPolicy::uniform(self.tree.num_actions);
        for (info, reg) in self.tree.infosets.iter().zip(&self.cumulative_regret) {
            let mut p = vec![T::zero(); reg.len()];
            regret_matching(reg, &mut p);
            policy.set(info.key.clone(), p);
        }
        policy
    }

    /// Normalized cumulative strategy; uniform where nothing has accumulated.
    pub fn average_policy(&self) -> TabularPolicy<T> {
        let mut policy = TabularPolicy::uniform(self.tree.num_actions);
        for (info, sum) in self.tree.infosets.iter().zip(&self.cumulative_strategy) {
            let mut p = sum.clone();
            normalize_or_uniform(&mut p);
            policy.set(info.key.clone(), p);
        }
        policy
    }

    pub fn cumulative_regret(&self, infoset: usize) -> &[T] {
        &self.cumulative_regret[infoset]
    }
}

/// Runs `iterations` of CFR on the materialized tree and returns the average policy.
pub fn cfr_solve_tree<T: Scalar>(tree: &GameTree<T>, iterations: usize) -> TabularPolicy<T> {
    let mut solver = CfrSolver::new(tree);
    solver.run(iterations.max(1));
    solver.average_policy()
}

/// Expands `game` and solves it; returns the tree alongside the average policy.
pub fn cfr_solve<T: Scalar>(
    game: &DialogueGame,
    iterations: usize,
) -> Result<(GameTree<T>, TabularPolicy<T>), GameError> {
    let tree = GameTree::build(game)?;
    let policy = cfr_solve_tree(&tree, iterations);
    Ok((tree, policy))
}
