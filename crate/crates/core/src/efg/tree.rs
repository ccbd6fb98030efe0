use std::collections::HashMap;

use crate::game::{DialogueGame, DialogueState, GameError, Move, NodeKind};
use crate::num::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode<T> {
    /// `children[a]` is the node reached by action `a`.
    Decision { player: usize, infoset: usize, children: Vec<usize> },
    Chance { outcomes: Vec<(T, usize)> },
    Terminal { returns: Vec<T> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Infoset {
    pub player: usize,
    /// Canonical infostate key text.
    pub key: String,
    /// Decision nodes belonging to this infoset, in discovery order.
    pub nodes: Vec<usize>,
}

/// A fully expanded game tree with infosets indexed by their canonical key.
///
/// Node 0 is the root. Every node's children have larger indices than the node.
#[derive(Clone, Debug)]
pub struct GameTree<T> {
    pub nodes: Vec<TreeNode<T>>,
    pub infosets: Vec<Infoset>,
    pub num_players: usize,
    pub num_actions: usize,
    index: HashMap<String, usize>,
}

impl<T: Scalar> GameTree<T> {
    pub fn new(num_players: usize, num_actions: usize) -> Self {
        GameTree { nodes: Vec::new(), infosets: Vec::new(), num_players, num_actions, index: HashMap::new() }
    }

    /// Expands every history of `game`. Each distinct transition reaches the backends at most
    /// once thanks to the game's memo.
    pub fn build(game: &DialogueGame) -> Result<Self, GameError> {
        let mut tree = GameTree::new(game.num_players(), game.num_actions());
        tree.expand(game, game.root())?;
        Ok(tree)
    }

    fn expand(&mut self, game: &DialogueGame, state: DialogueState) -> Result<usize, GameError> {
        let id = self.nodes.len();
        match game.node_kind(&state) {
            NodeKind::Terminal => {
                let returns = game.returns(&state)?.into_iter().map(T::of).collect();
                self.nodes.push(TreeNode::Terminal { returns });
            }
            NodeKind::Chance => {
                self.nodes.push(TreeNode::Chance { outcomes: Vec::new() });
                let mut outcomes = Vec::new();
                for (seed, p) in game.chance_outcomes(&state)? {
                    let child = game.apply(&state, Move::Seed(seed))?;
                    outcomes.push((T::of(p), self.expand(game, child)?));
                }
                self.nodes[id] = TreeNode::Chance { outcomes };
            }
            NodeKind::Decision(player) => {
                let key = game.infostate_key(&state, player).canonical();
                let infoset = self.intern(player, key, id);
                self.nodes.push(TreeNode::Decision { player, infoset, children: Vec::new() });
                let mut children = Vec::new();
                for action in game.legal_actions(&state)? {
                    let child = game.apply(&state, Move::Action(action))?;
                    children.push(self.expand(game, child)?);
                }
                self.nodes[id] = TreeNode::Decision { player, infoset, children };
            }
        }
        Ok(id)
    }

    /// Registers decision node `node` under `key`, creating the infoset when new.
    pub fn intern(&mut self, player: usize, key: String, node: usize) -> usize {
        let next = self.infosets.len();
        let idx = *self.index.entry(key.clone()).or_insert(next);
        if idx == next {
            self.infosets.push(Infoset { player, key, nodes: Vec::new() });
        }
        self.infosets[idx].nodes.push(node);
        idx
    }

    /// Appends a node; used by hand-built trees.
    pub fn push(&mut self, node: TreeNode<T>) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn infoset_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn player_infosets(&self, player: usize) -> Vec<usize> {
        (0..self.infosets.len()).filter(|i| self.infosets[*i].player == player).collect()
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Terminal { .. })).count()
    }
}
