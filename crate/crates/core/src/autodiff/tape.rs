//! Reverse-mode differentiation on an append-only tape.
//!
//! Recording evaluates each primitive immediately and stores its value
//! together with the local partial derivatives with respect to its (at most
//! two) parents. [`Tape::backward`] then makes a single sweep from the output
//! back to the first node, accumulating `adjoint[parent] += adjoint[node] *
//! partial`. Parents always precede their children, so reverse recording
//! order is a valid reverse topological order and the sweep needs no sorting.
//!
//! ```
//! use gradkit::autodiff::Tape;
//!
//! let mut tape = Tape::new();
//! let x = tape.leaf(3.0);
//! let y = tape.mul(x, x)?;
//! let adjoints = tape.backward(y)?;
//! assert_eq!(adjoints.get(x)?, 6.0);
//! # Ok::<(), gradkit::Error>(())
//! ```

use std::sync::atomic::{AtomicU64, Ordering};

use crate::autodiff::sigmoid;
use crate::error::{Error, Result};
use crate::linalg::Vector;

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Log,
    Sigmoid,
}

impl Op {
    fn arity(self) -> usize {
        match self {
            Op::Leaf => 0,
            Op::Neg | Op::Exp | Op::Log | Op::Sigmoid => 1,
            Op::Add | Op::Sub | Op::Mul | Op::Div => 2,
        }
    }
}

/// Handle to a value recorded on a particular [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId {
    tape: u64,
    index: usize,
}

impl NodeId {
    pub fn index(self) -> usize {
        self.index
    }
}

/// One recorded primitive. Unused parent/partial slots are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub op: Op,
    pub parents: [usize; 2],
    pub partials: [f64; 2],
    pub value: f64,
}

#[derive(Debug)]
pub struct Tape {
    id: u64,
    nodes: Vec<Node>,
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn check(&self, id: NodeId) -> Result<usize> {
        if id.tape != self.id || id.index >= self.nodes.len() {
            return Err(Error::ForeignNode {
                index: id.index,
                node_tape: id.tape,
                tape: self.id,
            });
        }
        Ok(id.index)
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        NodeId {
            tape: self.id,
            index: self.nodes.len() - 1,
        }
    }

    pub fn leaf(&mut self, value: f64) -> NodeId {
        self.push(Node {
            op: Op::Leaf,
            parents: [0; 2],
            partials: [0.0; 2],
            value,
        })
    }

    pub fn leaves(&mut self, values: &[f64]) -> Vec<NodeId> {
        values.iter().map(|&v| self.leaf(v)).collect()
    }

    /// Appends a node whose value and local partials were computed by the
    /// caller. `parents` and `partials` must have the op's arity.
    pub fn record(
        &mut self,
        op: Op,
        parents: &[NodeId],
        value: f64,
        partials: &[f64],
    ) -> Result<NodeId> {
        if parents.len() != op.arity() || partials.len() != op.arity() {
            return Err(Error::InvalidShape(format!(
                "{op:?} takes {} parents and partials, got {} and {}",
                op.arity(),
                parents.len(),
                partials.len()
            )));
        }
        let mut node = Node {
            op,
            parents: [0; 2],
            partials: [0.0; 2],
            value,
        };
        for (slot, (&p, &d)) in parents.iter().zip(partials).enumerate() {
            node.parents[slot] = self.check(p)?;
            node.partials[slot] = d;
        }
        Ok(self.push(node))
    }

    pub fn value(&self, id: NodeId) -> Result<f64> {
        Ok(self.nodes[self.check(id)?].value)
    }

    fn v(&self, id: NodeId) -> Result<f64> {
        self.value(id)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let value = self.v(a)? + self.v(b)?;
        self.record(Op::Add, &[a, b], value, &[1.0, 1.0])
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let value = self.v(a)? - self.v(b)?;
        self.record(Op::Sub, &[a, b], value, &[1.0, -1.0])
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (x, y) = (self.v(a)?, self.v(b)?);
        self.record(Op::Mul, &[a, b], x * y, &[y, x])
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (x, y) = (self.v(a)?, self.v(b)?);
        if y == 0.0 {
            return Err(Error::Domain { op: "div", value: y });
        }
        self.record(Op::Div, &[a, b], x / y, &[1.0 / y, -x / (y * y)])
    }

    pub fn neg(&mut self, a: NodeId) -> Result<NodeId> {
        let x = self.v(a)?;
        self.record(Op::Neg, &[a], -x, &[-1.0])
    }

    pub fn exp(&mut self, a: NodeId) -> Result<NodeId> {
        let e = self.v(a)?.exp();
        self.record(Op::Exp, &[a], e, &[e])
    }

    pub fn log(&mut self, a: NodeId) -> Result<NodeId> {
        let x = self.v(a)?;
        if x <= 0.0 || x.is_nan() {
            return Err(Error::Domain { op: "log", value: x });
        }
        self.record(Op::Log, &[a], x.ln(), &[1.0 / x])
    }

    pub fn sigmoid(&mut self, a: NodeId) -> Result<NodeId> {
        let s = sigmoid(self.v(a)?);
        self.record(Op::Sigmoid, &[a], s, &[s * (1.0 - s)])
    }

    /// Left-to-right chain of additions. An empty slice records a zero leaf.
    pub fn sum(&mut self, terms: &[NodeId]) -> Result<NodeId> {
        let Some((&first, rest)) = terms.split_first() else {
            return Ok(self.leaf(0.0));
        };
        self.check(first)?;
        rest.iter().try_fold(first, |acc, &t| self.add(acc, t))
    }

    /// Sum of pairwise products.
    pub fn dot(&mut self, a: &[NodeId], b: &[NodeId]) -> Result<NodeId> {
        if a.len() != b.len() {
            return Err(Error::mismatch(
                "tape dot",
                format!("len {}", a.len()),
                format!("len {}", b.len()),
            ));
        }
        let products = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| self.mul(x, y))
            .collect::<Result<Vec<_>>>()?;
        self.sum(&products)
    }

    /// Adjoint of every node with respect to `output`.
    pub fn backward(&self, output: NodeId) -> Result<Adjoints> {
        let out = self.check(output)?;
        let mut adjoint = vec![0.0; self.nodes.len()];
        adjoint[out] = 1.0;
        for i in (0..=out).rev() {
            let a = adjoint[i];
            if a == 0.0 {
                continue;
            }
            let node = &self.nodes[i];
            for slot in 0..node.op.arity() {
                adjoint[node.parents[slot]] += a * node.partials[slot];
            }
        }
        Ok(Adjoints {
            tape: self.id,
            values: adjoint,
        })
    }
}

/// Result of a backward sweep, indexed by [`NodeId`].
#[derive(Clone, Debug, PartialEq)]
pub struct Adjoints {
    tape: u64,
    values: Vec<f64>,
}

impl Adjoints {
    pub fn get(&self, id: NodeId) -> Result<f64> {
        if id.tape != self.tape || id.index >= self.values.len() {
            return Err(Error::ForeignNode {
                index: id.index,
                node_tape: id.tape,
                tape: self.tape,
            });
        }
        Ok(self.values[id.index])
    }

    pub fn collect(&self, ids: &[NodeId]) -> Result<Vec<f64>> {
        ids.iter().map(|&id| self.get(id)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Value and gradient of a scalar function recorded on a fresh tape.
///
/// `f` receives one leaf per coordinate of `point` and returns the output
/// node.
pub fn grad<F>(f: F, point: &Vector) -> Result<(f64, Vector)>
where
    F: FnOnce(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    let mut tape = Tape::new();
    let inputs = tape.leaves(point);
    let out = f(&mut tape, &inputs)?;
    let adjoints = tape.backward(out)?;
    let g = Vector::new(adjoints.collect(&inputs)?)?;
    Ok((tape.value(out)?, g))
}
