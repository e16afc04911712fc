//! Galerkin systems for the interface problem over a basis set.

mod fine;
mod galerkin;
mod lifting;
mod mesh;
mod problem;
mod solution;
mod transform;

pub use fine::{assemble_fine, local_shape, AssemblyOptions, FineStiffness};
pub use galerkin::{corner_values, transform_system, GalerkinSystem, Normalization};
pub use lifting::{build_lifting, Lifting};
pub use mesh::{resolution_level, Cell, Mesh};
pub use problem::{AngleFn, ExactSolution, Piecewise, ProblemSpec, ScalarField, VectorField};
pub use solution::{compose_solution, NodalField, Solution};
pub use transform::{MatrixFreeSystem, MultilevelTransform, NodeLayout};

use crate::basis2d::BasisSet;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

fn check_guard(level: u32, opts: &AssemblyOptions) -> Result<()> {
    if level > opts.level_guard {
        return Err(Error::MemoryGuard {
            level,
            guard: opts.level_guard,
        });
    }
    Ok(())
}

/// Per-leaf blocks for a basis set, lifting included.
pub fn assemble_blocks(
    problem: &ProblemSpec,
    set: &BasisSet,
    opts: &AssemblyOptions,
) -> Result<(FineStiffness, Lifting)> {
    check_guard(set.max_level, opts)?;
    problem.validate()?;
    let lifting = build_lifting(problem);
    let fine = assemble_fine(problem, Some(&lifting), Mesh::for_basis(set), opts)?;
    Ok((fine, lifting))
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub system: GalerkinSystem,
    pub mesh: Mesh,
    pub lifting: Lifting,
}

/// Explicit matrix and right-hand side, lifting correction included.
pub fn assemble_full(
    problem: &ProblemSpec,
    set: &BasisSet,
    opts: &AssemblyOptions,
) -> Result<Assembled> {
    let (fine, lifting) = assemble_blocks(problem, set, opts)?;
    let system = transform_system(&fine, set)?;
    Ok(Assembled {
        system,
        mesh: fine.mesh,
        lifting,
    })
}

pub fn assemble_matrix_free(
    problem: &ProblemSpec,
    set: &BasisSet,
    opts: &AssemblyOptions,
) -> Result<(MatrixFreeSystem, Lifting)> {
    let (fine, lifting) = assemble_blocks(problem, set, opts)?;
    Ok((MatrixFreeSystem::new(set, fine)?, lifting))
}

/// Nodal finite element system over the interior hats of level `level`.
#[derive(Debug, Clone)]
pub struct NodalSystem {
    pub level: u32,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub lifting: Lifting,
}

pub fn assemble_nodal(
    problem: &ProblemSpec,
    level: u32,
    opts: &AssemblyOptions,
) -> Result<NodalSystem> {
    check_guard(level, opts)?;
    problem.validate()?;
    let lifting = build_lifting(problem);
    let fine = assemble_fine(problem, Some(&lifting), Mesh::uniform(level), opts)?;
    let (matrix, rhs) = fine.nodal_system()?;
    Ok(NodalSystem {
        level,
        matrix,
        rhs,
        lifting,
    })
}

impl NodalSystem {
    pub fn solution(&self, values: &[f64]) -> Result<Solution> {
        Ok(Solution {
            field: NodalField::uniform(self.level, values)?,
            lifting: Some(self.lifting.clone()),
        })
    }
}
