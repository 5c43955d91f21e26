//! Binary-tree amplitude store over matrix columns.
//!
//! One tree per column holds the squared magnitudes `|A_ij|²` at its
//! leaves (plus the unit phase of each entry) with subtree sums at the
//! internal nodes; a norm tree holds the squared column norms `‖A_j‖²`.
//! State preparation descends a tree with conditional-rotation semantics:
//! each branch amplitude is `√(child_sum / parent_sum)`, so a leaf
//! receives `√(leaf / root)` times its stored phase.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::qsim::state::StateVector;

/// One binary tree with `2^depth` leaf slots stored as a 1-indexed heap:
/// node 1 is the root, node `k` has children `2k` and `2k+1`, leaves sit
/// at `2^depth ..= 2^{depth+1}−1`.
#[derive(Debug, Clone)]
struct SumTree {
    depth: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(depth: usize) -> Self {
        SumTree {
            depth,
            nodes: vec![0.0; 1 << (depth + 1)],
        }
    }

    fn leaf_index(&self, i: usize) -> usize {
        (1 << self.depth) + i
    }

    fn set_leaf(&mut self, i: usize, value: f64) {
        let idx = self.leaf_index(i);
        self.nodes[idx] = value;
    }

    fn root(&self) -> f64 {
        self.nodes[1]
    }

    fn rebuild(&mut self) {
        for k in (1..(1 << self.depth)).rev() {
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Recompute the path from leaf `i` to the root; returns the number of
    /// nodes written (`depth + 1`).
    fn update_leaf(&mut self, i: usize, value: f64) -> usize {
        let mut idx = self.leaf_index(i);
        self.nodes[idx] = value;
        let mut touched = 1;
        while idx > 1 {
            idx /= 2;
            self.nodes[idx] = self.nodes[2 * idx] + self.nodes[2 * idx + 1];
            touched += 1;
        }
        touched
    }

    /// Branch amplitudes `√(leaf / root)` by explicit descent.
    fn descend(&self, n: usize) -> Vec<f64> {
        let mut level = vec![1.0f64; 1]; // amplitude at the root
        let mut nodes = vec![1usize];
        for _ in 0..self.depth {
            let mut next_amp = Vec::with_capacity(level.len() * 2);
            let mut next_nodes = Vec::with_capacity(level.len() * 2);
            for (amp, node) in level.iter().zip(&nodes) {
                let parent = self.nodes[*node];
                for child in [2 * node, 2 * node + 1] {
                    let w = if parent > 0.0 {
                        (self.nodes[child] / parent).sqrt()
                    } else {
                        0.0
                    };
                    next_amp.push(amp * w);
                    next_nodes.push(child);
                }
            }
            level = next_amp;
            nodes = next_nodes;
        }
        level.truncate(n);
        level
    }
}

fn depth_for(n: usize) -> usize {
    let mut d = 0;
    while (1usize << d) < n {
        d += 1;
    }
    d
}

/// Nodes rewritten by one `update`: the leaf-to-root path of the touched
/// column tree and of the norm tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateTouched {
    pub column_nodes: usize,
    pub norm_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct KpTree {
    n: usize,
    column_trees: Vec<SumTree>,
    /// unit phase of each entry, row-major per column; 1 for zero entries
    phases: Vec<Vec<C64>>,
    norm_tree: SumTree,
}

impl KpTree {
    /// Build from a matrix with `O(n² log n)` node writes.
    pub fn build(a: &DenseMatrix) -> Self {
        let n = a.n();
        let depth = depth_for(n);
        let mut column_trees = Vec::with_capacity(n);
        let mut phases = Vec::with_capacity(n);
        let mut norm_tree = SumTree::new(depth);
        for j in 0..n {
            let mut tree = SumTree::new(depth);
            let mut col_phases = vec![C64::new(1.0, 0.0); n];
            for i in 0..n {
                let z = a.entry(i, j);
                tree.set_leaf(i, z.norm_sqr());
                if z.norm() > 0.0 {
                    col_phases[i] = z / z.norm();
                }
            }
            tree.rebuild();
            norm_tree.set_leaf(j, tree.root());
            column_trees.push(tree);
            phases.push(col_phases);
        }
        norm_tree.rebuild();
        KpTree {
            n,
            column_trees,
            phases,
            norm_tree,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `‖A_j‖²`.
    pub fn column_root(&self, j: usize) -> f64 {
        self.column_trees[j].root()
    }

    /// `‖A‖_F²`.
    pub fn norm_root(&self) -> f64 {
        self.norm_tree.root()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.column_root(j).sqrt()
    }

    pub fn frob(&self) -> f64 {
        self.norm_root().sqrt()
    }

    /// Replace entry `(i, j)` and recompute both affected paths.
    pub fn update(&self, i: usize, j: usize, value: C64) -> Result<(KpTree, UpdateTouched)> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange(format!("update ({i},{j}) for n={}", self.n)));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonFinite("tree update value".into()));
        }
        let mut out = self.clone();
        let column_nodes = out.column_trees[j].update_leaf(i, value.norm_sqr());
        out.phases[j][i] = if value.norm() > 0.0 {
            value / value.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let norm_nodes = out.norm_tree.update_leaf(j, out.column_trees[j].root());
        Ok((
            out,
            UpdateTouched {
                column_nodes,
                norm_nodes,
            },
        ))
    }

    /// `|A_j⟩`: normalized column amplitudes produced by tree descent.
    pub fn prepare_column(&self, j: usize) -> Result<Vec<C64>> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange(format!("column {j} of {}", self.n)));
        }
        if self.column_root(j) <= 0.0 {
            return Err(Error::ZeroColumn { j });
        }
        let mags = self.column_trees[j].descend(self.n);
        Ok(mags
            .into_iter()
            .zip(&self.phases[j])
            .map(|(m, p)| p * m)
            .collect())
    }

    /// `|A_F⟩`: column-norm amplitudes from the norm tree.
    pub fn prepare_norm_vector(&self) -> Result<Vec<C64>> {
        if self.norm_root() <= 0.0 {
            return Err(Error::EmptyPostSelection("matrix has zero Frobenius norm".into()));
        }
        Ok(self
            .norm_tree
            .descend(self.n)
            .into_iter()
            .map(|m| C64::new(m, 0.0))
            .collect())
    }

    /// `|A⟩ = (1/‖A‖_F) Σ_{ij} A_ij |i,j⟩` over registers (row, col),
    /// assembled entirely from tree descents.
    pub fn prepare_matrix_state(&self) -> Result<StateVector> {
        let n = self.n;
        let col_weights = self.prepare_norm_vector()?;
        let mut amps = vec![C64::new(0.0, 0.0); n * n];
        for j in 0..n {
            if self.column_root(j) <= 0.0 {
                continue;
            }
            let col = self.prepare_column(j)?;
            for i in 0..n {
                amps[i * n + j] = col_weights[j] * col[i];
            }
        }
        StateVector::new_normalized(vec![n, n], vec!["row".into(), "col".into()], amps)
    }
}
