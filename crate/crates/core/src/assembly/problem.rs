use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{InterfaceCurve, Side};

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
pub type AngleFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A field given separately on the two sides of the interface.
#[derive(Clone)]
pub struct Piecewise<F> {
    pub plus: F,
    pub minus: F,
}

impl<F> Piecewise<F> {
    pub fn on(&self, side: Side) -> &F {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

#[derive(Clone)]
pub struct ExactSolution {
    pub value: Piecewise<ScalarField>,
    pub gradient: Piecewise<VectorField>,
}

/// Data of `−∇·(a∇u) = f` with jumps `[u] = g`, `[a ∂u/∂ν] = g_Γ` across the
/// interface and `u = g_b` on the boundary of the unit square.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub curve: InterfaceCurve,
    pub coefficient: Piecewise<ScalarField>,
    pub source: Piecewise<ScalarField>,
    /// Jump of the solution as a function of the polar angle.
    pub jump: AngleFn,
    /// Derivative of `jump`; a central difference is used when absent.
    pub jump_slope: Option<AngleFn>,
    /// Jump of the normal flux, normal pointing into Ω₊.
    pub flux_jump: AngleFn,
    pub boundary: ScalarField,
    pub boundary_gradient: VectorField,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("curve", &self.curve)
            .field("exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

const SLOPE_STEP: f64 = 1e-6;

impl ProblemSpec {
    /// Zero jumps, zero boundary data and no exact solution.
    pub fn homogeneous(
        name: impl Into<String>,
        curve: InterfaceCurve,
        coefficient: Piecewise<ScalarField>,
        source: Piecewise<ScalarField>,
    ) -> Self {
        Self {
            name: name.into(),
            curve,
            coefficient,
            source,
            jump: Arc::new(|_| 0.0),
            jump_slope: Some(Arc::new(|_| 0.0)),
            flux_jump: Arc::new(|_| 0.0),
            boundary: Arc::new(|_, _| 0.0),
            boundary_gradient: Arc::new(|_, _| [0.0, 0.0]),
            exact: None,
        }
    }

    #[inline]
    pub fn a(&self, side: Side, x: f64, y: f64) -> f64 {
        (self.coefficient.on(side))(x, y)
    }

    #[inline]
    pub fn f(&self, side: Side, x: f64, y: f64) -> f64 {
        (self.source.on(side))(x, y)
    }

    pub fn jump_derivative(&self, theta: f64) -> f64 {
        match &self.jump_slope {
            Some(d) => d(theta),
            None => {
                ((self.jump)(theta + SLOPE_STEP) - (self.jump)(theta - SLOPE_STEP))
                    / (2.0 * SLOPE_STEP)
            }
        }
    }

    /// Checks positivity of the coefficient on a sample grid of each side.
    pub fn validate(&self) -> Result<()> {
        if self.jump_slope.is_none() {
            log::warn!(
                "{}: no jump derivative given, using central differences",
                self.name
            );
        }
        let n = 64;
        for j in 0..n {
            for i in 0..n {
                let (x, y) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                let side = self.curve.side(x, y);
                let a = self.a(side, x, y);
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::Config(format!(
                        "{}: coefficient {a} at ({x}, {y}) is not positive",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(min, max)` of `a` over cell-centre samples of the `2^{-level}` grid.
    pub fn coefficient_range(&self, level: u32) -> (f64, f64) {
        let n = 1usize << level;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for j in 0..n {
            for i in 0..n {
                let (x, y) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                let a = self.a(self.curve.side(x, y), x, y);
                lo = lo.min(a);
                hi = hi.max(a);
            }
        }
        (lo, hi)
    }
}
