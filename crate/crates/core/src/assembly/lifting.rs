//! Piecewise-smooth extension `G` of the jump and boundary data, so that the
//! remaining unknown is continuous and vanishes on the boundary.

use crate::error::{Error, Result};
use crate::geometry::{theta, theta_gradient, Side};

use super::problem::ProblemSpec;

#[derive(Debug, Clone)]
pub struct Lifting {
    problem: ProblemSpec,
}

pub fn build_lifting(problem: &ProblemSpec) -> Lifting {
    Lifting {
        problem: problem.clone(),
    }
}

impl Lifting {
    /// Radial extension `g(Θ(x, y))` of the jump, defined off Ω₋.
    pub fn jump_extension(&self, x: f64, y: f64) -> Result<f64> {
        if self.problem.curve.side(x, y) == Side::Minus {
            return Err(Error::LiftingDomain { x, y });
        }
        Ok(self.ext(x, y))
    }

    #[inline]
    fn ext(&self, x: f64, y: f64) -> f64 {
        (self.problem.jump)(theta(x, y))
    }

    #[inline]
    fn ext_grad(&self, x: f64, y: f64) -> [f64; 2] {
        let d = self.problem.jump_derivative(theta(x, y));
        let g = theta_gradient(x, y);
        [d * g[0], d * g[1]]
    }

    fn gb(&self, x: f64, y: f64) -> f64 {
        (self.problem.boundary)(x, y)
    }

    fn gb_grad(&self, x: f64, y: f64) -> [f64; 2] {
        (self.problem.boundary_gradient)(x, y)
    }

    /// Linear blend across x of the boundary data minus the extension;
    /// returns the value and gradient.
    fn left_right(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let l = self.gb(0.0, y) - self.ext(0.0, y);
        let r = self.gb(1.0, y) - self.ext(1.0, y);
        let dl = self.gb_grad(0.0, y)[1] - self.ext_grad(0.0, y)[1];
        let dr = self.gb_grad(1.0, y)[1] - self.ext_grad(1.0, y)[1];
        (l * (1.0 - x) + r * x, [r - l, dl * (1.0 - x) + dr * x])
    }

    fn bottom_top(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let (lr0, dlr0) = self.left_right(x, 0.0);
        let (lr1, dlr1) = self.left_right(x, 1.0);
        let b = self.gb(x, 0.0) - self.ext(x, 0.0) - lr0;
        let t = self.gb(x, 1.0) - self.ext(x, 1.0) - lr1;
        let db = self.gb_grad(x, 0.0)[0] - self.ext_grad(x, 0.0)[0] - dlr0[0];
        let dt = self.gb_grad(x, 1.0)[0] - self.ext_grad(x, 1.0)[0] - dlr1[0];
        (b * (1.0 - y) + t * y, [db * (1.0 - y) + dt * y, t - b])
    }

    /// `G` on the given side at `(x, y)` together with its gradient.
    pub fn eval(&self, side: Side, x: f64, y: f64) -> (f64, [f64; 2]) {
        let (lr, dlr) = self.left_right(x, y);
        let (bt, dbt) = self.bottom_top(x, y);
        let mut v = lr + bt;
        let mut g = [dlr[0] + dbt[0], dlr[1] + dbt[1]];
        if side == Side::Plus {
            v += self.ext(x, y);
            let e = self.ext_grad(x, y);
            g[0] += e[0];
            g[1] += e[1];
        }
        (v, g)
    }

    pub fn value(&self, side: Side, x: f64, y: f64) -> f64 {
        self.eval(side, x, y).0
    }

    pub fn gradient(&self, side: Side, x: f64, y: f64) -> [f64; 2] {
        self.eval(side, x, y).1
    }
}
