//! Expression trees in prefix order: binary arithmetic operators over
//! feature references and real constants, with protected division and
//! magnitude clamping so evaluation stays finite.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

/// Values are clamped to this magnitude after every operation.
const VALUE_LIMIT: f64 = 1e150;
/// Denominators below this magnitude make protected division return 1.
const DIV_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn apply(self, a: f64, b: f64) -> f64 {
        let v = match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => {
                if libm::fabs(b) < DIV_GUARD {
                    1.0
                } else {
                    a / b
                }
            }
        };
        v.clamp(-VALUE_LIMIT, VALUE_LIMIT)
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Op(BinOp),
    Feature(usize),
    Const(f64),
}

/// A genome: nodes in prefix order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprTree {
    nodes: Vec<Node>,
}

impl ExprTree {
    /// Validates arity consistency and feature indices.
    pub fn from_nodes(nodes: Vec<Node>, num_features: usize) -> Result<Self> {
        // A prefix expression is well formed when exactly one value is
        // left open at the end and never before.
        let mut open = 1i64;
        for node in &nodes {
            if open <= 0 {
                return Err(Error::InvalidTree {
                    reason: "trailing nodes after the expression closed",
                });
            }
            match node {
                Node::Op(_) => open += 1,
                Node::Feature(f) => {
                    if *f >= num_features {
                        return Err(Error::InvalidTree {
                            reason: "feature index out of range",
                        });
                    }
                    open -= 1;
                }
                Node::Const(c) => {
                    if !c.is_finite() {
                        return Err(Error::InvalidTree {
                            reason: "non-finite constant",
                        });
                    }
                    open -= 1;
                }
            }
        }
        if open != 0 {
            return Err(Error::InvalidTree {
                reason: "expression is incomplete",
            });
        }
        Ok(Self { nodes })
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tree depth; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        *self.node_depths().iter().max().unwrap_or(&0)
    }

    /// Depth of each node position (root = 1).
    pub(crate) fn node_depths(&self) -> Vec<usize> {
        let mut depths = Vec::with_capacity(self.nodes.len());
        // Stack of remaining child slots per ancestor level.
        let mut pending: Vec<u8> = Vec::new();
        for node in &self.nodes {
            depths.push(pending.len() + 1);
            match node {
                Node::Op(_) => pending.push(2),
                _ => {
                    while let Some(last) = pending.last_mut() {
                        *last -= 1;
                        if *last == 0 {
                            pending.pop();
                        } else {
                            break;
                        }
                    }
                }
            }
        }
        depths
    }

    /// End (exclusive) of the subtree rooted at `start`.
    pub(crate) fn subtree_end(&self, start: usize) -> usize {
        let mut open = 1i64;
        let mut k = start;
        while open > 0 {
            match self.nodes[k] {
                Node::Op(_) => open += 1,
                _ => open -= 1,
            }
            k += 1;
        }
        k
    }

    /// Evaluates the tree on one feature row.
    pub fn eval_row(&self, row: &[f64]) -> f64 {
        // Reverse-prefix stack evaluation: operands pop in left-right
        // order.
        let mut stack: Vec<f64> = Vec::with_capacity(8);
        for node in self.nodes.iter().rev() {
            match node {
                Node::Const(c) => stack.push(*c),
                Node::Feature(f) => stack.push(row[*f].clamp(-VALUE_LIMIT, VALUE_LIMIT)),
                Node::Op(op) => {
                    let a = stack.pop().expect("well-formed prefix expression");
                    let b = stack.pop().expect("well-formed prefix expression");
                    stack.push(op.apply(a, b));
                }
            }
        }
        stack.pop().expect("well-formed prefix expression")
    }

    /// Infix rendering, fully parenthesized.
    pub fn to_infix(&self) -> String {
        fn render(nodes: &[Node], k: usize, out: &mut String) -> usize {
            match nodes[k] {
                Node::Const(c) => {
                    use core::fmt::Write;
                    let _ = write!(out, "{c}");
                    k + 1
                }
                Node::Feature(f) => {
                    use core::fmt::Write;
                    let _ = write!(out, "x{f}");
                    k + 1
                }
                Node::Op(op) => {
                    out.push('(');
                    let after_left = render(nodes, k + 1, out);
                    out.push(' ');
                    out.push_str(op.symbol());
                    out.push(' ');
                    let after_right = render(nodes, after_left, out);
                    out.push(')');
                    after_right
                }
            }
        }
        let mut out = String::new();
        render(&self.nodes, 0, &mut out);
        out
    }
}

impl core::fmt::Display for ExprTree {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.to_infix())
    }
}

const OPS: [BinOp; 4] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];

fn random_terminal<R: Rng>(rng: &mut R, num_features: usize) -> Node {
    if num_features > 0 && rng.gen::<f64>() < 0.7 {
        Node::Feature(rng.gen_range(0..num_features))
    } else {
        Node::Const(rng.gen_range(-1.0..1.0))
    }
}

/// Random tree of depth at most `depth`. `full` forces operators down to
/// the last level; otherwise each position is a terminal with
/// probability one half.
pub(crate) fn random_tree<R: Rng>(
    rng: &mut R,
    num_features: usize,
    depth: usize,
    full: bool,
) -> ExprTree {
    fn grow<R: Rng>(rng: &mut R, num_features: usize, budget: usize, full: bool, out: &mut Vec<Node>) {
        if budget <= 1 || (!full && rng.gen::<f64>() < 0.5) {
            out.push(random_terminal(rng, num_features));
        } else {
            out.push(Node::Op(OPS[rng.gen_range(0..OPS.len())]));
            grow(rng, num_features, budget - 1, full, out);
            grow(rng, num_features, budget - 1, full, out);
        }
    }
    let mut nodes = Vec::new();
    grow(rng, num_features, depth.max(1), full, &mut nodes);
    ExprTree::from_nodes_unchecked(nodes)
}

/// Subtree crossover: a random subtree of `a` is replaced by a random
/// subtree of `b`. Offspring deeper than `max_depth` are retried a few
/// times; on failure the first parent is returned unchanged.
pub(crate) fn crossover<R: Rng>(
    a: &ExprTree,
    b: &ExprTree,
    max_depth: usize,
    rng: &mut R,
) -> ExprTree {
    for _ in 0..8 {
        let i = rng.gen_range(0..a.len());
        let k = rng.gen_range(0..b.len());
        let i_end = a.subtree_end(i);
        let k_end = b.subtree_end(k);
        let mut nodes = Vec::with_capacity(a.len() - (i_end - i) + (k_end - k));
        nodes.extend_from_slice(&a.nodes[..i]);
        nodes.extend_from_slice(&b.nodes[k..k_end]);
        nodes.extend_from_slice(&a.nodes[i_end..]);
        let child = ExprTree::from_nodes_unchecked(nodes);
        if child.depth() <= max_depth {
            return child;
        }
    }
    a.clone()
}

/// Subtree mutation: a random subtree is replaced by a fresh grown tree
/// that fits the remaining depth budget.
pub(crate) fn mutate<R: Rng>(
    t: &ExprTree,
    num_features: usize,
    max_depth: usize,
    rng: &mut R,
) -> ExprTree {
    let i = rng.gen_range(0..t.len());
    let i_end = t.subtree_end(i);
    let node_depth = t.node_depths()[i];
    let budget = max_depth.saturating_sub(node_depth) + 1;
    let depth = rng.gen_range(1..=budget.min(4));
    let replacement = random_tree(rng, num_features, depth, false);
    let mut nodes = Vec::with_capacity(t.len() - (i_end - i) + replacement.len());
    nodes.extend_from_slice(&t.nodes[..i]);
    nodes.extend_from_slice(replacement.nodes());
    nodes.extend_from_slice(&t.nodes[i_end..]);
    ExprTree::from_nodes_unchecked(nodes)
}
