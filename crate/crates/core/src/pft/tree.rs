//! Arena-allocated search tree over particle beliefs.

use crate::belief::ParticleBelief;
use crate::model::Action;

#[derive(Clone, Debug)]
pub struct ActionNode {
    pub action: Action,
    /// Visit count `N(b, a)`.
    pub n: u64,
    /// Running-mean value `Q(b, a)`.
    pub q: f64,
    /// Sum of every return backed up through this node.
    pub q_sum: f64,
    /// Belief children and their GenPF rewards, at most `C` of them.
    pub children: Vec<(usize, f64)>,
}

impl ActionNode {
    pub fn new(action: Action) -> Self {
        ActionNode {
            action,
            n: 0,
            q: 0.0,
            q_sum: 0.0,
            children: Vec::new(),
        }
    }

    /// Fold one more return into the running mean.
    pub(crate) fn record(&mut self, q: f64) {
        self.n += 1;
        self.q += (q - self.q) / self.n as f64;
        self.q_sum += q;
    }
}

#[derive(Clone, Debug)]
pub struct BeliefNode<S> {
    pub belief: ParticleBelief<S>,
    /// Visit count `N(b)`.
    pub n: u64,
    pub actions: Vec<ActionNode>,
    /// Every positively weighted particle is terminal.
    pub terminal: bool,
}

#[derive(Clone, Debug)]
pub struct SearchTree<S> {
    pub nodes: Vec<BeliefNode<S>>,
}

impl<S> SearchTree<S> {
    pub fn new() -> Self {
        SearchTree { nodes: Vec::new() }
    }

    pub fn add(&mut self, belief: ParticleBelief<S>, actions: Vec<ActionNode>, terminal: bool) -> usize {
        self.nodes.push(BeliefNode {
            belief,
            n: 0,
            actions,
            terminal,
        });
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Check the structural invariants at every node: visit counts add up,
    /// no action holds more children than `cap(N(b, a))` allows, and each `Q`
    /// is the mean of the returns recorded through it.
    pub fn check_invariants(&self, cap: &dyn Fn(u64) -> usize) -> std::result::Result<(), String> {
        for (i, node) in self.nodes.iter().enumerate() {
            let total: u64 = node.actions.iter().map(|a| a.n).sum();
            if total != node.n {
                return Err(format!("node {i}: N(b) = {} but sum of N(b,a) = {total}", node.n));
            }
            for (j, a) in node.actions.iter().enumerate() {
                let width = cap(a.n);
                if a.children.len() > width {
                    return Err(format!("node {i} action {j}: {} children > cap {width}", a.children.len()));
                }
                if a.n == 0 {
                    if a.q != 0.0 || !a.children.is_empty() {
                        return Err(format!("node {i} action {j}: unvisited action was modified"));
                    }
                    continue;
                }
                let mean = a.q_sum / a.n as f64;
                let tol = 1e-9 * (1.0 + mean.abs());
                if (mean - a.q).abs() > tol {
                    return Err(format!("node {i} action {j}: Q = {} but mean of returns = {mean}", a.q));
                }
                if a.children.iter().any(|(c, _)| *c >= self.nodes.len() || *c <= i) {
                    return Err(format!("node {i} action {j}: child index out of order"));
                }
            }
        }
        Ok(())
    }
}

impl<S> Default for SearchTree<S> {
    fn default() -> Self {
        Self::new()
    }
}
