//! Point evaluation of computed solutions.

use crate::basis2d::BasisSet;
use crate::error::{Error, Result};
use crate::geometry::Side;

use super::fine::local_shape;
use super::lifting::Lifting;
use super::mesh::Mesh;
use super::transform::{MultilevelTransform, NodeLayout};

/// Piecewise-bilinear function on the leaves of a mesh, stored as nodal
/// values at every level.
#[derive(Debug, Clone)]
pub struct NodalField {
    mesh: Mesh,
    layout: NodeLayout,
    values: Vec<Vec<f64>>,
}

impl NodalField {
    pub fn new(mesh: Mesh, layout: NodeLayout, values: Vec<Vec<f64>>) -> Self {
        Self {
            mesh,
            layout,
            values,
        }
    }

    /// Interior nodal values of a uniform grid, numbered
    /// `(i − 1) + (j − 1)(2^level − 1)`.
    pub fn uniform(level: u32, values: &[f64]) -> Result<Self> {
        let m = (1usize << level) - 1;
        if values.len() != m * m {
            return Err(Error::Dimension {
                expected: m * m,
                got: values.len(),
            });
        }
        let mesh = Mesh::uniform(level);
        let layout = NodeLayout::new(&mesh);
        let mut v = vec![0.0; m * m];
        for j in 1..=m {
            for i in 1..=m {
                let k = layout
                    .node(level, i as i64, j as i64)
                    .expect("interior node");
                v[k] = values[(i - 1) + (j - 1) * m];
            }
        }
        Ok(Self::new(mesh, layout, vec![v]))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Value and gradient; on grid lines the cell below and to the left is
    /// used.
    pub fn eval(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let leaf = self.mesh.locate(x, y);
        let cell = self.mesh.leaves()[leaf];
        let vals = &self.values[(cell.level - self.layout.base_level) as usize];
        let (phi, grad) = local_shape(&cell, x, y);
        let (mut v, mut g) = (0.0, [0.0, 0.0]);
        for (r, n) in self.layout.leaf_nodes(leaf).iter().enumerate() {
            if let Some(k) = n {
                let c = vals[*k];
                v += c * phi[r];
                g[0] += c * grad[r][0];
                g[1] += c * grad[r][1];
            }
        }
        (v, g)
    }
}

/// Discrete unknown plus the lifting of the inhomogeneous data.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: NodalField,
    pub lifting: Option<Lifting>,
}

impl Solution {
    /// Value and gradient of the one-sided limit on `side`.
    pub fn eval_side(&self, side: Side, x: f64, y: f64) -> (f64, [f64; 2]) {
        let (mut v, mut g) = self.field.eval(x, y);
        if let Some(l) = &self.lifting {
            let (lv, lg) = l.eval(side, x, y);
            v += lv;
            g[0] += lg[0];
            g[1] += lg[1];
        }
        (v, g)
    }
}

pub fn compose_solution(
    coeffs: &[f64],
    set: &BasisSet,
    mesh: &Mesh,
    lifting: Option<&Lifting>,
) -> Result<Solution> {
    if coeffs.len() != set.len() {
        return Err(Error::Dimension {
            expected: set.len(),
            got: coeffs.len(),
        });
    }
    let t = MultilevelTransform::new(set, mesh)?;
    Ok(Solution {
        field: t.field(mesh, coeffs),
        lifting: lifting.cloned(),
    })
}
