//! Per-cell bilinear stiffness blocks and loads on a quadtree mesh.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{InterfaceCurve, Side};
use crate::quadrature::{arc_points, cell_points, gauss_square, QuadPoint};
use crate::sparse::CsrMatrix;

use super::lifting::Lifting;
use super::mesh::{Cell, Mesh};
use super::problem::ProblemSpec;

/// Gradients of the four corner hats of `cell` at `(x, y)`, in the order of
/// [`Cell::corner_nodes`], together with their values.
#[inline]
pub fn local_shape(cell: &Cell, x: f64, y: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let n = (1u64 << cell.level) as f64;
    let s = x * n - cell.i as f64;
    let t = y * n - cell.j as f64;
    let (s0, t0) = (1.0 - s, 1.0 - t);
    (
        [s0 * t0, s * t0, s0 * t, s * t],
        [
            [-t0 * n, -s0 * n],
            [t0 * n, -s * n],
            [-t * n, s0 * n],
            [t * n, s * n],
        ],
    )
}

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    /// Gauss points per axis on each reference element.
    pub quad_order: usize,
    /// Largest accepted top standard level.
    pub level_guard: u32,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            quad_order: crate::quadrature::DEFAULT_ORDER,
            level_guard: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FineStiffness {
    pub mesh: Mesh,
    /// `∫ a ∇φ_p·∇φ_q` over each leaf.
    pub blocks: Vec<[[f64; 4]; 4]>,
    /// `∫ f φ_p − ∫ a ∇G·∇φ_p − ∫_Γ g_Γ φ_p` over each leaf.
    pub loads: Vec<[f64; 4]>,
}

/// Leaves whose interior the curve visits, per level.
fn visited_cells(curve: &InterfaceCurve, mesh: &Mesh) -> HashMap<u32, BTreeSet<(i64, i64)>> {
    (mesh.base_level..=mesh.max_level)
        .map(|l| (l, curve.cells_meeting(l)))
        .collect()
}

pub fn assemble_fine(
    problem: &ProblemSpec,
    lifting: Option<&Lifting>,
    mesh: Mesh,
    opts: &AssemblyOptions,
) -> Result<FineStiffness> {
    let curve = &problem.curve;
    let visited = visited_cells(curve, &mesh);
    let square = gauss_square(opts.quad_order)?;
    let mut blocks = Vec::with_capacity(mesh.leaves().len());
    let mut loads = Vec::with_capacity(mesh.leaves().len());
    let mut points: Vec<(QuadPoint, Side)> = Vec::new();
    for cell in mesh.leaves() {
        let rect = cell.rect();
        let cut = visited[&cell.level].contains(&(cell.i, cell.j));
        let wrap = |e: Error| Error::Cell {
            level: cell.level,
            i: cell.i,
            j: cell.j,
            source: Box::new(e),
        };
        points.clear();
        if cut {
            points.extend(cell_points(curve, &rect, opts.quad_order).map_err(wrap)?);
        } else {
            let c = rect.center();
            let side = curve.side(c[0], c[1]);
            let (h, area) = (rect.width(), rect.area());
            points.extend(square.points.iter().map(|&([s, t], w)| {
                (
                    QuadPoint {
                        x: [rect.x0 + s * h, rect.y0 + t * h],
                        w: w * area,
                    },
                    side,
                )
            }));
        }
        let mut k = [[0.0; 4]; 4];
        let mut f = [0.0; 4];
        for (p, side) in &points {
            let [x, y] = p.x;
            let (val, grad) = local_shape(cell, x, y);
            let a = problem.a(*side, x, y);
            let src = problem.f(*side, x, y);
            let lift = lifting
                .map(|l| l.gradient(*side, x, y))
                .unwrap_or([0.0, 0.0]);
            for r in 0..4 {
                let wa = p.w * a;
                for c in r..4 {
                    k[r][c] += wa * (grad[r][0] * grad[c][0] + grad[r][1] * grad[c][1]);
                }
                f[r] += p.w * (src * val[r] - a * (lift[0] * grad[r][0] + lift[1] * grad[r][1]));
            }
        }
        for r in 0..4 {
            for c in 0..r {
                k[r][c] = k[c][r];
            }
        }
        if cut {
            for arc in curve.arc_in_cell(&rect).map_err(wrap)? {
                for (t, q, w) in arc_points(curve, arc, opts.quad_order)? {
                    let (val, _) = local_shape(cell, q[0], q[1]);
                    let g = (problem.flux_jump)(t);
                    for r in 0..4 {
                        f[r] -= w * g * val[r];
                    }
                }
            }
        }
        blocks.push(k);
        loads.push(f);
    }
    Ok(FineStiffness {
        mesh,
        blocks,
        loads,
    })
}

impl FineStiffness {
    pub fn level(&self) -> u32 {
        self.mesh.max_level
    }

    /// Stiffness and load over the interior hats of a uniform mesh, hats
    /// numbered `(i − 1) + (j − 1)(2^level − 1)`.
    pub fn nodal_system(&self) -> Result<(CsrMatrix, Vec<f64>)> {
        if !self.mesh.is_uniform() {
            return Err(Error::MeshMismatch(
                "nodal system needs a uniform mesh".into(),
            ));
        }
        let m = (1i64 << self.mesh.base_level) - 1;
        let n = (m * m) as usize;
        let node = |(i, j): (i64, i64)| -> Option<usize> {
            (i >= 1 && i <= m && j >= 1 && j <= m).then(|| ((i - 1) + (j - 1) * m) as usize)
        };
        let mut triplets = Vec::with_capacity(16 * self.blocks.len());
        let mut rhs = vec![0.0; n];
        for ((cell, k), f) in self.mesh.leaves().iter().zip(&self.blocks).zip(&self.loads) {
            let nodes = cell.corner_nodes().map(node);
            for r in 0..4 {
                let Some(a) = nodes[r] else { continue };
                rhs[a] += f[r];
                for c in 0..4 {
                    if let Some(b) = nodes[c] {
                        triplets.push((a, b, k[r][c]));
                    }
                }
            }
        }
        Ok((CsrMatrix::from_triplets(n, n, &triplets), rhs))
    }
}
