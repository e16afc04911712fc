//! Galerkin matrix over a basis set from the per-leaf blocks: every basis
//! function is bilinear on each leaf, so an entry is a sum of
//! `cᵅᵀ K_leaf cᵝ` over shared leaves, `c` being corner values.

use crate::basis2d::{BasisIndex2D, BasisSet};
use crate::error::{Error, Result};
use crate::sparse::{CsrBuilder, CsrMatrix};

use super::fine::FineStiffness;
use super::mesh::Mesh;

#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    /// Full symmetric matrix, rows and columns in basis-set order.
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Factor of each unknown relative to the `2^{-j}`-scaled function.
    pub scale: Vec<f64>,
}

/// How basis functions are scaled beyond the level factor `2^{-j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Every function has unit energy `blf(η, η) = 1`.
    #[default]
    Energy,
    /// The level factor alone.
    Dyadic,
}

impl GalerkinSystem {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// Rescales the unknowns in place; `D^{-1/2} A D^{-1/2}` for
    /// [`Normalization::Energy`].
    pub fn normalize(&mut self, how: Normalization) -> Result<()> {
        if how == Normalization::Dyadic {
            return Ok(());
        }
        let diag = self.matrix.diagonal();
        let mut factor = Vec::with_capacity(diag.len());
        for (i, d) in diag.iter().enumerate() {
            if !(*d > 0.0) {
                return Err(Error::MeshMismatch(format!(
                    "basis function {i} has energy {d}"
                )));
            }
            factor.push(1.0 / d.sqrt());
        }
        let m = &mut self.matrix;
        for r in 0..m.nrows {
            for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                m.values[k] *= factor[r] * factor[m.col_idx[k] as usize];
            }
        }
        for ((b, s), f) in self.rhs.iter_mut().zip(self.scale.iter_mut()).zip(&factor) {
            *b *= f;
            *s *= f;
        }
        Ok(())
    }

    /// Coefficients with respect to the `2^{-j}`-scaled functions.
    pub fn level_coefficients(&self, solved: &[f64]) -> Vec<f64> {
        solved.iter().zip(&self.scale).map(|(c, s)| c * s).collect()
    }
}

/// Corner values of a basis function on one leaf.
pub fn corner_values(idx: &BasisIndex2D, mesh: &Mesh, leaf: usize) -> [f64; 4] {
    let cell = mesh.leaves()[leaf];
    let h = (-(cell.level as f64)).exp2();
    cell.corner_nodes()
        .map(|(i, j)| idx.eval(i as f64 * h, j as f64 * h))
}

/// For each basis function, the leaves of its support with its corner values.
pub(crate) fn support_lists(set: &BasisSet, mesh: &Mesh) -> Result<Vec<Vec<(u32, [f64; 4])>>> {
    set.entries()
        .iter()
        .map(|e| {
            Ok(mesh
                .support_leaves(e)?
                .into_iter()
                .filter_map(|leaf| {
                    let c = corner_values(e, mesh, leaf);
                    c.iter().any(|v| *v != 0.0).then_some((leaf as u32, c))
                })
                .collect())
        })
        .collect()
}

pub fn transform_system(fine: &FineStiffness, set: &BasisSet) -> Result<GalerkinSystem> {
    let mesh = &fine.mesh;
    if mesh.base_level < set.max_level {
        return Err(Error::MeshMismatch(format!(
            "mesh base level {} below the set's level {}",
            mesh.base_level, set.max_level
        )));
    }
    let n = set.len();
    let by_basis = support_lists(set, mesh)?;
    let mut by_leaf: Vec<Vec<(u32, [f64; 4])>> = vec![Vec::new(); mesh.leaves().len()];
    for (b, list) in by_basis.iter().enumerate() {
        for (leaf, c) in list {
            by_leaf[*leaf as usize].push((b as u32, *c));
        }
    }
    let mut acc = vec![0.0; n];
    let mut touched = vec![false; n];
    let mut cols: Vec<u32> = Vec::new();
    let mut builder = CsrBuilder::new(n);
    let mut rhs = vec![0.0; n];
    for (a, list) in by_basis.iter().enumerate() {
        for (leaf, ca) in list {
            let k = &fine.blocks[*leaf as usize];
            let f = &fine.loads[*leaf as usize];
            let mut w = [0.0; 4];
            for r in 0..4 {
                w[r] = k[r][0] * ca[0] + k[r][1] * ca[1] + k[r][2] * ca[2] + k[r][3] * ca[3];
                rhs[a] += ca[r] * f[r];
            }
            for (b, cb) in &by_leaf[*leaf as usize] {
                let bi = *b as usize;
                if !touched[bi] {
                    touched[bi] = true;
                    cols.push(*b);
                }
                acc[bi] += cb[0] * w[0] + cb[1] * w[1] + cb[2] * w[2] + cb[3] * w[3];
            }
        }
        cols.sort_unstable();
        builder.push_row(cols.iter().map(|&c| (c, acc[c as usize])));
        for &c in &cols {
            acc[c as usize] = 0.0;
            touched[c as usize] = false;
        }
        cols.clear();
    }
    let mut matrix = builder.finish();
    symmetrize(&mut matrix);
    Ok(GalerkinSystem {
        matrix,
        rhs,
        scale: vec![1.0; n],
    })
}

/// Averages `A` with `Aᵀ` to remove rounding-level asymmetry from the
/// different summation orders of the two triangles.
fn symmetrize(m: &mut CsrMatrix) {
    for r in 0..m.nrows {
        for k in m.row_ptr[r]..m.row_ptr[r + 1] {
            let c = m.col_idx[k] as usize;
            if c <= r {
                continue;
            }
            let s = m.row_ptr[c]..m.row_ptr[c + 1];
            if let Ok(p) = m.col_idx[s.clone()].binary_search(&(r as u32)) {
                let avg = 0.5 * (m.values[k] + m.values[s.start + p]);
                m.values[k] = avg;
                m.values[s.start + p] = avg;
            }
        }
    }
}
