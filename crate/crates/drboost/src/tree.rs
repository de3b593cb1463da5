//! Binary decision trees with ±1 leaves — the weak-learner class.

use crate::error::{Error, Result};

/// One node of a decision tree. Routing rule: go left iff
/// `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Leaf { value } => *value,
            Node::Split { feature, threshold, left, right } => {
                if x[*feature] <= *threshold {
                    left.eval(x)
                } else {
                    right.eval(x)
                }
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

/// A fitted weak learner: deterministic, total on any d-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    arity: usize,
    root: Node,
}

impl Tree {
    pub fn new(arity: usize, root: Node) -> Self {
        Tree { arity, root }
    }

    /// A single-leaf tree that outputs `value` everywhere.
    pub fn constant(arity: usize, value: f64) -> Self {
        Tree { arity, root: Node::Leaf { value } }
    }

    /// A depth-1 tree.
    pub fn stump(arity: usize, feature: usize, threshold: f64, left: f64, right: f64) -> Self {
        Tree {
            arity,
            root: Node::Split {
                feature,
                threshold,
                left: Box::new(Node::Leaf { value: left }),
                right: Box::new(Node::Leaf { value: right }),
            },
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves()
    }

    /// Evaluate at a feature vector, checking arity.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: x.len() });
        }
        Ok(self.root.eval(x))
    }

    /// Evaluate without the arity check; callers that iterate dataset rows
    /// validate once up front.
    pub fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.root.eval(x)
    }

    /// Short human-readable form for traces, e.g. `stump(f2<=0.50)`.
    pub fn summary(&self) -> String {
        match &self.root {
            Node::Leaf { value } => format!("leaf({value:+})"),
            Node::Split { feature, threshold, .. } => {
                if self.depth() == 1 {
                    format!("stump(f{feature}<={threshold:.6})")
                } else {
                    format!("tree(depth={},leaves={})", self.depth(), self.leaf_count())
                }
            }
        }
    }
}
