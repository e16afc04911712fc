//! Quadtree of dyadic cells on which every basis function of a set is
//! bilinear cell by cell.

use std::collections::{HashMap, HashSet};

use crate::basis2d::{BasisIndex2D, BasisSet, Group};
use crate::error::{Error, Result};
use crate::geometry::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub level: u32,
    pub i: i64,
    pub j: i64,
}

impl Cell {
    pub fn new(level: u32, i: i64, j: i64) -> Self {
        Self { level, i, j }
    }

    pub fn rect(&self) -> Rect {
        Rect::cell(self.level, self.i, self.j)
    }

    pub fn parent(&self) -> Cell {
        Cell::new(self.level - 1, self.i >> 1, self.j >> 1)
    }

    pub fn children(&self) -> [Cell; 4] {
        let (l, i, j) = (self.level + 1, 2 * self.i, 2 * self.j);
        [
            Cell::new(l, i, j),
            Cell::new(l, i + 1, j),
            Cell::new(l, i, j + 1),
            Cell::new(l, i + 1, j + 1),
        ]
    }

    /// Grid nodes `(level, i, j)` of the corners, ordered `(0,0), (1,0), (0,1), (1,1)`.
    pub fn corner_nodes(&self) -> [(i64, i64); 4] {
        let (i, j) = (self.i, self.j);
        [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Leaf(usize),
    Split,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub base_level: u32,
    pub max_level: u32,
    leaves: Vec<Cell>,
    tree: HashMap<Cell, Node>,
}

/// Level on whose cells a function is bilinear.
pub fn resolution_level(idx: &BasisIndex2D) -> u32 {
    match idx.group {
        Group::PhiPhi => idx.level(),
        _ => idx.level() + 1,
    }
}

impl Mesh {
    pub fn uniform(level: u32) -> Self {
        Self::refined(level, &[])
    }

    /// Uniform at the set's top standard level, refined wherever a higher
    /// function lives.
    pub fn for_basis(set: &BasisSet) -> Self {
        let base = set.max_level;
        let mut required: Vec<HashSet<(i64, i64)>> = Vec::new();
        for e in set.entries() {
            let need = resolution_level(e);
            if need <= base {
                continue;
            }
            let k = (need - base) as usize;
            if required.len() <= k {
                required.resize_with(k + 1, HashSet::new);
            }
            for cy in e.y.support_cells(need) {
                for cx in e.x.support_cells(need) {
                    required[k].insert((cx, cy));
                }
            }
        }
        Self::refined(base, &required)
    }

    /// `required[k]` lists cells at level `base + k` that must exist.
    fn refined(base: u32, required: &[HashSet<(i64, i64)>]) -> Self {
        let top = required.len().saturating_sub(1);
        // split[k]: cells at level base + k with descendants
        let mut split: Vec<HashSet<(i64, i64)>> = vec![HashSet::new(); top + 1];
        for k in (1..=top).rev() {
            let below: Vec<(i64, i64)> =
                required[k].iter().chain(split[k].iter()).copied().collect();
            for (i, j) in below {
                split[k - 1].insert((i >> 1, j >> 1));
            }
        }
        let mut tree = HashMap::new();
        let mut leaves = Vec::new();
        let n = 1i64 << base;
        let mut frontier: Vec<Cell> = (0..n)
            .flat_map(|j| (0..n).map(move |i| Cell::new(base, i, j)))
            .collect();
        for k in 0..=top {
            let mut next = Vec::new();
            for c in frontier {
                if split[k].contains(&(c.i, c.j)) {
                    tree.insert(c, Node::Split);
                    next.extend(c.children());
                } else {
                    tree.insert(c, Node::Leaf(leaves.len()));
                    leaves.push(c);
                }
            }
            frontier = next;
        }
        debug_assert!(frontier.is_empty());
        let max_level = leaves.iter().map(|c| c.level).max().unwrap_or(base);
        Self {
            base_level: base,
            max_level,
            leaves,
            tree,
        }
    }

    pub fn leaves(&self) -> &[Cell] {
        &self.leaves
    }

    pub fn is_uniform(&self) -> bool {
        self.max_level == self.base_level
    }

    pub fn leaf_index(&self, c: &Cell) -> Option<usize> {
        match self.tree.get(c) {
            Some(Node::Leaf(k)) => Some(*k),
            _ => None,
        }
    }

    /// Cells at `level` that exist in the tree (leaves or split).
    pub fn contains_cell(&self, c: &Cell) -> bool {
        self.tree.contains_key(c)
    }

    /// Leaf containing the point; points on grid lines go to the cell below
    /// and to the left, except on the far edges of the square.
    pub fn locate(&self, x: f64, y: f64) -> usize {
        let n = (1u64 << self.base_level) as f64;
        let idx = |v: f64, scale: f64| -> i64 {
            let s = v * scale;
            let mut k = s.floor() as i64;
            if s == k as f64 && k > 0 {
                k -= 1;
            }
            k.clamp(0, scale as i64 - 1)
        };
        let mut c = Cell::new(self.base_level, idx(x, n), idx(y, n));
        loop {
            match self.tree.get(&c) {
                Some(Node::Leaf(k)) => return *k,
                Some(Node::Split) => {
                    let s = (1u64 << (c.level + 1)) as f64;
                    c = Cell::new(c.level + 1, idx(x, s), idx(y, s));
                }
                None => unreachable!("point outside the unit square"),
            }
        }
    }

    /// Leaves lying inside `cell`, which must exist in the tree.
    pub fn leaves_under(&self, cell: Cell, out: &mut Vec<usize>) {
        match self.tree.get(&cell) {
            Some(Node::Leaf(k)) => out.push(*k),
            Some(Node::Split) => {
                for ch in cell.children() {
                    self.leaves_under(ch, out);
                }
            }
            None => {}
        }
    }

    /// Leaves meeting the open primal support of `idx`. Fails when one of
    /// them is too coarse for the function to be bilinear on it.
    pub fn support_leaves(&self, idx: &BasisIndex2D) -> Result<Vec<usize>> {
        let need = resolution_level(idx);
        let level = need.max(self.base_level);
        let mut out = Vec::new();
        for cy in idx.y.support_cells(level) {
            for cx in idx.x.support_cells(level) {
                let c = Cell::new(level, cx, cy);
                if self.tree.contains_key(&c) {
                    self.leaves_under(c, &mut out);
                } else {
                    // ancestor is a leaf coarser than the function
                    let mut a = c;
                    while a.level > self.base_level && !self.tree.contains_key(&a) {
                        a = a.parent();
                    }
                    return Err(Error::MeshMismatch(format!(
                        "leaf ({}, {}) at level {} under a level-{need} function",
                        a.i, a.j, a.level
                    )));
                }
            }
        }
        Ok(out)
    }
}
