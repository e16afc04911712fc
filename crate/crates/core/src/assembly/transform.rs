//! Matrix-free Galerkin operator. Synthesis turns basis coefficients into
//! nodal values level by level (prolongation of the coarser values plus the
//! wavelets living at that level); analysis is its adjoint.

use std::collections::{HashMap, HashSet};

use crate::basis2d::{expand_to_fine_2d, BasisSet};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

use super::fine::FineStiffness;
use super::galerkin::corner_values;
use super::mesh::{resolution_level, Mesh};
use super::solution::NodalField;

const NO_NODE: u32 = u32::MAX;

/// Interior grid nodes of the existing cells at every level of a mesh.
#[derive(Debug, Clone)]
pub struct NodeLayout {
    pub base_level: u32,
    maps: Vec<HashMap<(i64, i64), u32>>,
    /// Corner node ids of each leaf at its own level.
    leaf_nodes: Vec<[u32; 4]>,
}

impl NodeLayout {
    pub fn new(mesh: &Mesh) -> Self {
        let base = mesh.base_level;
        let depth = (mesh.max_level - base) as usize;
        let mut cells: Vec<HashSet<(i64, i64)>> = vec![HashSet::new(); depth + 1];
        for c in mesh.leaves() {
            for l in base..=c.level {
                let s = c.level - l;
                cells[(l - base) as usize].insert((c.i >> s, c.j >> s));
            }
        }
        let mut maps = Vec::with_capacity(depth + 1);
        for (k, set) in cells.iter().enumerate() {
            let n = 1i64 << (base + k as u32);
            let mut nodes: Vec<(i64, i64)> = set
                .iter()
                .flat_map(|&(i, j)| [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)])
                .filter(|&(i, j)| i > 0 && j > 0 && i < n && j < n)
                .collect();
            nodes.sort_unstable_by_key(|&(i, j)| (j, i));
            nodes.dedup();
            maps.push(
                nodes
                    .into_iter()
                    .enumerate()
                    .map(|(k, p)| (p, k as u32))
                    .collect(),
            );
        }
        let leaf_nodes = mesh
            .leaves()
            .iter()
            .map(|c| {
                let m: &HashMap<(i64, i64), u32> = &maps[(c.level - base) as usize];
                c.corner_nodes()
                    .map(|p| m.get(&p).copied().unwrap_or(NO_NODE))
            })
            .collect();
        Self {
            base_level: base,
            maps,
            leaf_nodes,
        }
    }

    pub fn levels(&self) -> usize {
        self.maps.len()
    }

    pub fn count(&self, level: u32) -> usize {
        self.maps[(level - self.base_level) as usize].len()
    }

    pub fn node(&self, level: u32, i: i64, j: i64) -> Option<usize> {
        self.maps
            .get((level - self.base_level) as usize)?
            .get(&(i, j))
            .map(|k| *k as usize)
    }

    pub fn leaf_nodes(&self, leaf: usize) -> [Option<usize>; 4] {
        self.leaf_nodes[leaf].map(|k| (k != NO_NODE).then_some(k as usize))
    }
}

#[derive(Debug, Clone)]
pub struct MultilevelTransform {
    layout: NodeLayout,
    n_basis: usize,
    /// Base-level nodal values of the functions resolved there.
    base: CsrMatrix,
    /// Bilinear interpolation from level `base + k` to `base + k + 1`.
    prolong: Vec<CsrMatrix>,
    /// Nodal values at level `base + k + 1` of the functions resolved there.
    detail: Vec<CsrMatrix>,
}

impl MultilevelTransform {
    pub fn new(set: &BasisSet, mesh: &Mesh) -> Result<Self> {
        let layout = NodeLayout::new(mesh);
        let base_level = mesh.base_level;
        let depth = layout.levels() - 1;
        let n = set.len();
        let mut trip_base = Vec::new();
        let mut trip_detail: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); depth];
        for (col, e) in set.entries().iter().enumerate() {
            let need = resolution_level(e);
            let level = need.max(base_level);
            if level > mesh.max_level {
                return Err(Error::MeshMismatch(format!(
                    "level-{need} function above the mesh"
                )));
            }
            let target = if level == base_level {
                &mut trip_base
            } else {
                &mut trip_detail[(level - base_level - 1) as usize]
            };
            for (i, j, c) in expand_to_fine_2d(e, level, true)?.entries() {
                let row = layout.node(level, i, j).ok_or_else(|| {
                    Error::MeshMismatch(format!("node ({i}, {j}) missing at level {level}"))
                })?;
                target.push((row, col, c));
            }
        }
        let base = CsrMatrix::from_triplets(layout.count(base_level), n, &trip_base);
        let mut detail = Vec::with_capacity(depth);
        let mut prolong = Vec::with_capacity(depth);
        for k in 0..depth {
            let fine = base_level + k as u32 + 1;
            detail.push(CsrMatrix::from_triplets(
                layout.count(fine),
                n,
                &trip_detail[k],
            ));
            let mut t = Vec::new();
            for (&(i, j), &row) in &layout.maps[k + 1] {
                let xs: &[(i64, f64)] = if i % 2 == 0 {
                    &[(0, 1.0)]
                } else {
                    &[(0, 0.5), (1, 0.5)]
                };
                let ys: &[(i64, f64)] = if j % 2 == 0 {
                    &[(0, 1.0)]
                } else {
                    &[(0, 0.5), (1, 0.5)]
                };
                for &(dx, wx) in xs {
                    for &(dy, wy) in ys {
                        if let Some(c) = layout.node(fine - 1, (i >> 1) + dx, (j >> 1) + dy) {
                            t.push((row as usize, c, wx * wy));
                        }
                    }
                }
            }
            prolong.push(CsrMatrix::from_triplets(
                layout.count(fine),
                layout.count(fine - 1),
                &t,
            ));
        }
        Ok(Self {
            layout,
            n_basis: n,
            base,
            prolong,
            detail,
        })
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.n_basis
    }

    pub fn is_empty(&self) -> bool {
        self.n_basis == 0
    }

    /// Nodal values at every level.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.layout.levels());
        out.push(self.base.mul(coeffs));
        for k in 0..self.prolong.len() {
            let mut v = self.prolong[k].mul(&out[k]);
            let d = self.detail[k].mul(coeffs);
            for (a, b) in v.iter_mut().zip(d) {
                *a += b;
            }
            out.push(v);
        }
        out
    }

    /// Adjoint of [`Self::synthesize`]; consumes the nodal residuals.
    pub fn analyze(&self, mut nodal: Vec<Vec<f64>>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_basis];
        for k in (0..self.prolong.len()).rev() {
            let fine = std::mem::take(&mut nodal[k + 1]);
            self.detail[k].transpose_matvec_add(&fine, &mut out);
            self.prolong[k].transpose_matvec_add(&fine, &mut nodal[k]);
        }
        self.base.transpose_matvec_add(&nodal[0], &mut out);
        out
    }

    fn zero_nodal(&self) -> Vec<Vec<f64>> {
        (0..self.layout.levels())
            .map(|k| vec![0.0; self.layout.count(self.layout.base_level + k as u32)])
            .collect()
    }

    pub fn field(&self, mesh: &Mesh, coeffs: &[f64]) -> NodalField {
        NodalField::new(mesh.clone(), self.layout.clone(), self.synthesize(coeffs))
    }
}

/// `x ↦ Tᵀ K T x` without forming the matrix.
#[derive(Debug, Clone)]
pub struct MatrixFreeSystem {
    pub transform: MultilevelTransform,
    fine: FineStiffness,
    pub rhs: Vec<f64>,
    pub diagonal: Vec<f64>,
}

impl MatrixFreeSystem {
    pub fn new(set: &BasisSet, fine: FineStiffness) -> Result<Self> {
        let transform = MultilevelTransform::new(set, &fine.mesh)?;
        let mut nodal = transform.zero_nodal();
        for (leaf, f) in fine.loads.iter().enumerate() {
            scatter(&transform.layout, &fine.mesh, leaf, f, &mut nodal);
        }
        let rhs = transform.analyze(nodal);
        let mut diagonal = Vec::with_capacity(set.len());
        for e in set.entries() {
            let mut d = 0.0;
            for leaf in fine.mesh.support_leaves(e)? {
                let c = corner_values(e, &fine.mesh, leaf);
                let k = &fine.blocks[leaf];
                for r in 0..4 {
                    for s in 0..4 {
                        d += c[r] * k[r][s] * c[s];
                    }
                }
            }
            diagonal.push(d);
        }
        Ok(Self {
            transform,
            fine,
            rhs,
            diagonal,
        })
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn mesh(&self) -> &Mesh {
        &self.fine.mesh
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let vals = self.transform.synthesize(x);
        let mut nodal = self.transform.zero_nodal();
        let layout = &self.transform.layout;
        let base = layout.base_level;
        for (leaf, cell) in self.fine.mesh.leaves().iter().enumerate() {
            let nodes = layout.leaf_nodes(leaf);
            let lv = &vals[(cell.level - base) as usize];
            let v = nodes.map(|n| n.map_or(0.0, |k| lv[k]));
            let k = &self.fine.blocks[leaf];
            let mut w = [0.0; 4];
            for r in 0..4 {
                w[r] = k[r][0] * v[0] + k[r][1] * v[1] + k[r][2] * v[2] + k[r][3] * v[3];
            }
            scatter(layout, &self.fine.mesh, leaf, &w, &mut nodal);
        }
        y.copy_from_slice(&self.transform.analyze(nodal));
    }
}

fn scatter(layout: &NodeLayout, mesh: &Mesh, leaf: usize, w: &[f64; 4], nodal: &mut [Vec<f64>]) {
    let level = mesh.leaves()[leaf].level;
    let target = &mut nodal[(level - layout.base_level) as usize];
    for (r, n) in layout.leaf_nodes(leaf).iter().enumerate() {
        if let Some(k) = n {
            target[*k] += w[r];
        }
    }
}
