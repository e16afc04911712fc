//! Named benchmark problems. Manufactured data (source, jumps, boundary
//! values) are derived from the exact solutions with dual numbers.

use std::f64::consts::{FRAC_PI_3, PI};
use std::sync::Arc;

use num_dual::{first_derivative, second_derivative, Dual, Dual2, DualNum};

use crate::assembly::{ExactSolution, Piecewise, ProblemSpec, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::geometry::InterfaceCurve;

/// A smooth function of `(x, y)` that can be evaluated on dual numbers.
pub trait Smooth: Send + Sync + 'static {
    fn at<D: DualNum<Primitive = f64> + Copy>(&self, x: D, y: D) -> D;
}

fn value<S: Smooth>(s: &S, x: f64, y: f64) -> f64 {
    s.at(x, y)
}

fn gradient<S: Smooth>(s: &S, x: f64, y: f64) -> [f64; 2] {
    let dx = first_derivative(|t: Dual<f64>| s.at(t, Dual::from_re(y)), x).1;
    let dy = first_derivative(|t: Dual<f64>| s.at(Dual::from_re(x), t), y).1;
    [dx, dy]
}

fn laplacian<S: Smooth>(s: &S, x: f64, y: f64) -> f64 {
    let xx = second_derivative(|t: Dual2<f64>| s.at(t, Dual2::from_re(y)), x).2;
    let yy = second_derivative(|t: Dual2<f64>| s.at(Dual2::from_re(x), t), y).2;
    xx + yy
}

/// `−∇·(a∇u)` for smooth `a` and `u`.
fn source<U: Smooth, A: Smooth>(u: &U, a: &A, x: f64, y: f64) -> f64 {
    let gu = gradient(u, x, y);
    let ga = gradient(a, x, y);
    -(value(a, x, y) * laplacian(u, x, y) + ga[0] * gu[0] + ga[1] * gu[1])
}

/// Offset from the centre of the square.
#[inline]
fn centred<D: DualNum<Primitive = f64> + Copy>(x: D, y: D) -> (D, D) {
    (x - 0.5, y - 0.5)
}

/// Polar angle about the centre.
#[inline]
fn angle<D: DualNum<Primitive = f64> + Copy>(x: D, y: D) -> D {
    let (dx, dy) = centred(x, y);
    dy.atan2(dx)
}

macro_rules! smooth {
    ($name:ident, |$x:ident, $y:ident| $body:expr) => {
        #[derive(Clone, Copy)]
        struct $name;
        impl Smooth for $name {
            #[allow(unused_variables)]
            fn at<D: DualNum<Primitive = f64> + Copy>(&self, $x: D, $y: D) -> D {
                $body
            }
        }
    };
}

#[derive(Clone, Copy)]
struct Constant(f64);

impl Smooth for Constant {
    fn at<D: DualNum<Primitive = f64> + Copy>(&self, _: D, _: D) -> D {
        D::from(self.0)
    }
}

#[derive(Clone, Copy)]
struct Scaled<S>(f64, S);

impl<S: Smooth> Smooth for Scaled<S> {
    fn at<D: DualNum<Primitive = f64> + Copy>(&self, x: D, y: D) -> D {
        self.1.at(x, y) * self.0
    }
}

fn rho2<D: DualNum<Primitive = f64> + Copy>(x: D, y: D) -> D {
    let (dx, dy) = centred(x, y);
    dx * dx + dy * dy
}

fn field<S: Smooth + Clone>(s: &S) -> ScalarField {
    let s = s.clone();
    Arc::new(move |x, y| value(&s, x, y))
}

fn grad_field<S: Smooth + Clone>(s: &S) -> VectorField {
    let s = s.clone();
    Arc::new(move |x, y| gradient(&s, x, y))
}

/// Problem whose data are generated from a known piecewise solution.
fn manufactured<Up, Um, Ap, Am>(
    name: &str,
    curve: InterfaceCurve,
    up: Up,
    um: Um,
    ap: Ap,
    am: Am,
) -> ProblemSpec
where
    Up: Smooth + Clone,
    Um: Smooth + Clone,
    Ap: Smooth + Clone,
    Am: Smooth + Clone,
{
    let source = Piecewise {
        plus: {
            let (u, a) = (up.clone(), ap.clone());
            Arc::new(move |x, y| source(&u, &a, x, y)) as ScalarField
        },
        minus: {
            let (u, a) = (um.clone(), am.clone());
            Arc::new(move |x, y| source(&u, &a, x, y)) as ScalarField
        },
    };
    let jump = {
        let (c, up, um) = (curve.clone(), up.clone(), um.clone());
        Arc::new(move |t: f64| {
            let [x, y] = c.point(t);
            value(&up, x, y) - value(&um, x, y)
        })
    };
    let jump_slope = {
        let (c, up, um) = (curve.clone(), up.clone(), um.clone());
        Arc::new(move |t: f64| {
            let ([x, y], d) = c.point_and_tangent(t);
            let (gp, gm) = (gradient(&up, x, y), gradient(&um, x, y));
            (gp[0] - gm[0]) * d[0] + (gp[1] - gm[1]) * d[1]
        })
    };
    let flux_jump = {
        let (c, up, um, ap, am) = (
            curve.clone(),
            up.clone(),
            um.clone(),
            ap.clone(),
            am.clone(),
        );
        Arc::new(move |t: f64| {
            let [x, y] = c.point(t);
            let n = c.normal(t).expect("smooth registered curve");
            let (gp, gm) = (gradient(&up, x, y), gradient(&um, x, y));
            let (a_p, a_m) = (value(&ap, x, y), value(&am, x, y));
            (a_p * gp[0] - a_m * gm[0]) * n[0] + (a_p * gp[1] - a_m * gm[1]) * n[1]
        })
    };
    ProblemSpec {
        name: name.into(),
        curve,
        coefficient: Piecewise {
            plus: field(&ap),
            minus: field(&am),
        },
        source,
        jump,
        jump_slope: Some(jump_slope),
        flux_jump,
        boundary: field(&up),
        boundary_gradient: grad_field(&up),
        exact: Some(ExactSolution {
            value: Piecewise {
                plus: field(&up),
                minus: field(&um),
            },
            gradient: Piecewise {
                plus: grad_field(&up),
                minus: grad_field(&um),
            },
        }),
    }
}

fn circle_quarter() -> InterfaceCurve {
    InterfaceCurve::circle(0.25).expect("valid circle")
}

fn circle_contrast() -> ProblemSpec {
    const A_PLUS: f64 = 1e6;
    smooth!(Plus, |x, y| rho2(x, y).powf(1.5) / A_PLUS
        + (1.0 - 1.0 / A_PLUS) / 64.0);
    smooth!(Minus, |x, y| rho2(x, y).powf(1.5));
    manufactured(
        "circle-1e6",
        circle_quarter(),
        Plus,
        Minus,
        Constant(A_PLUS),
        Constant(1.0),
    )
}

fn star_curve() -> InterfaceCurve {
    InterfaceCurve::polar(|t| {
        let r = 0.5 * (0.1 * (5.0 * t - PI / 5.0).sin() + 0.5);
        let dr = 0.25 * (5.0 * t - PI / 5.0).cos();
        (r, dr)
    })
    .expect("valid star")
}

/// `a₊` is either 100 or 0.01; the source material labels the second
/// parameter block inconsistently (once as `a₊`, once as `a₋`), so both
/// variants keep `a₋` variable and change `a₊`.
fn star(a_plus: f64, name: &str) -> ProblemSpec {
    smooth!(Shape, |x, y| {
        let (dx, dy) = centred(x, y);
        (dx * 2.0).sin() * (dy * 2.0).cos() + (rho2(x, y) * 4.0).sqrt().ln()
    });
    smooth!(Minus, |x, y| rho2(x, y) * 4.0);
    smooth!(AMinus, |x, y| rho2(x, y) * 4.0 + 1.0);
    manufactured(
        name,
        star_curve(),
        Scaled(1.0 / a_plus, Shape),
        Minus,
        Constant(a_plus),
        AMinus,
    )
}

fn flower5() -> ProblemSpec {
    let curve = InterfaceCurve::polar(|t| (0.2 + 0.08 * (5.0 * t).sin(), 0.4 * (5.0 * t).cos()))
        .expect("valid flower");
    smooth!(Bump, |x, y| {
        let (dx, dy) = centred(x, y);
        let r = (angle(x, y) * 5.0).sin() * 0.08 + 0.2;
        (dx * 10.0).sin() * (dy * 10.0).sin() * (rho2(x, y) - r * r)
    });
    #[derive(Clone, Copy)]
    struct Shifted(f64, f64);
    impl Smooth for Shifted {
        fn at<D: DualNum<Primitive = f64> + Copy>(&self, x: D, y: D) -> D {
            Bump.at(x, y) * self.0 + self.1
        }
    }
    smooth!(APlus, |x, y| {
        let (dx, dy) = centred(x, y);
        (dx * 5.0).sin() * (dy * 5.0).sin() + 2.0
    });
    manufactured(
        "flower5",
        curve,
        Shifted(1.0, 1.0),
        Shifted(1e-3, 31.0),
        APlus,
        Scaled(1e3, APlus),
    )
}

fn flower8() -> ProblemSpec {
    let curve = InterfaceCurve::polar(|t| {
        (
            0.25 * (FRAC_PI_3 + 0.4 * (8.0 * t).sin()),
            0.8 * (8.0 * t).cos(),
        )
    })
    .expect("valid flower");
    smooth!(Plus, |x, y| (x * 4.0 - 2.0).cos());
    smooth!(Minus, |x, y| (y * 4.0 - 2.0).sin() * 1e3 + 1500.0);
    manufactured("flower8", curve, Plus, Minus, Constant(1.0), Constant(1e-3))
}

fn flower6() -> ProblemSpec {
    const A_PLUS: f64 = 1e4;
    let scale = 10f64.powf(-0.5);
    let curve = InterfaceCurve::polar(move |t| {
        let s = 1.0 + 0.4 * (6.0 * t).sin();
        (
            scale * s.powf(-0.25),
            -0.25 * scale * s.powf(-1.25) * 2.4 * (6.0 * t).cos(),
        )
    })
    .expect("valid flower");
    smooth!(Core, |x, y| {
        let r2 = rho2(x, y);
        r2 * r2 * ((angle(x, y) * 6.0).sin() * 0.4 + 1.0) - 1e-2
    });
    manufactured(
        "flower6",
        curve,
        Scaled(1.0 / A_PLUS, Core),
        Core,
        Constant(A_PLUS),
        Constant(1.0),
    )
}

fn circle_poisson() -> ProblemSpec {
    let a_plus: ScalarField = Arc::new(|_, _| 1.0);
    let a_minus: ScalarField = Arc::new(|_, _| 1e4);
    let f: ScalarField = Arc::new(|_, _| -16.0);
    ProblemSpec::homogeneous(
        "circle-poisson",
        circle_quarter(),
        Piecewise {
            plus: a_plus,
            minus: a_minus,
        },
        Piecewise {
            plus: f.clone(),
            minus: f,
        },
    )
}

fn flower3_unknown() -> ProblemSpec {
    let curve = InterfaceCurve::polar(|t| {
        (
            0.5 * (0.5 + 0.25 * (3.0 * t).sin()),
            0.375 * (3.0 * t).cos(),
        )
    })
    .expect("valid flower");
    let base = |x: f64, y: f64| 2.0 + (4.0 * x - 2.0).cos() * (4.0 * y - 2.0).cos();
    let mut p = ProblemSpec::homogeneous(
        "flower3-unknown",
        curve,
        Piecewise {
            plus: Arc::new(move |x, y| 1e3 * base(x, y)),
            minus: Arc::new(move |x, y| base(x, y)),
        },
        Piecewise {
            plus: Arc::new(|x, y| {
                -16.0 * (PI * (4.0 * x - 2.0)).sin() * (PI * (4.0 * y - 2.0)).sin()
            }),
            minus: Arc::new(|x, y| {
                -16.0 * (PI * (4.0 * x - 2.0)).cos() * (PI * (4.0 * y - 2.0)).cos()
            }),
        },
    );
    p.jump = Arc::new(|t| -t.sin() - 1.0);
    p.jump_slope = Some(Arc::new(|t| -t.cos()));
    p.flux_jump = Arc::new(|t| t.cos());
    p
}

/// Constant coefficient, no jumps, `u = sin(πx) sin(πy)`; the curve only
/// exists to satisfy the problem type.
fn smooth_sine() -> ProblemSpec {
    smooth!(Sine, |x, y| (x * PI).sin() * (y * PI).sin());
    manufactured(
        "smooth-sine",
        circle_quarter(),
        Sine,
        Sine,
        Constant(1.0),
        Constant(1.0),
    )
}

pub struct ExampleInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub exact_known: bool,
}

pub const EXAMPLES: &[ExampleInfo] = &[
    ExampleInfo {
        name: "circle-1e6",
        summary: "circle r = 1/4, a+ = 1e6, a- = 1, radial exact solution",
        exact_known: true,
    },
    ExampleInfo {
        name: "star-a100",
        summary: "five-petal star, a+ = 100, variable a-, discontinuous exact solution",
        exact_known: true,
    },
    ExampleInfo {
        name: "star-a0.01",
        summary: "five-petal star, a+ = 0.01, variable a-, discontinuous exact solution",
        exact_known: true,
    },
    ExampleInfo {
        name: "flower5",
        summary: "five-petal flower, variable a+, a- = 1000 a+",
        exact_known: true,
    },
    ExampleInfo {
        name: "flower8",
        summary: "eight-petal flower, a+ = 1, a- = 1e-3",
        exact_known: true,
    },
    ExampleInfo {
        name: "flower6",
        summary: "six-petal flower, a+ = 1e4, a- = 1, continuous exact solution",
        exact_known: true,
    },
    ExampleInfo {
        name: "circle-poisson",
        summary: "circle r = 1/4, a+ = 1, a- = 1e4, f = -16, homogeneous data",
        exact_known: false,
    },
    ExampleInfo {
        name: "flower3-unknown",
        summary: "three-petal flower, oscillating sources, jump -sin(t) - 1, flux jump cos(t)",
        exact_known: false,
    },
    ExampleInfo {
        name: "smooth-sine",
        summary: "a = 1 everywhere, u = sin(pi x) sin(pi y)",
        exact_known: true,
    },
];

pub fn registry_get(name: &str) -> Result<ProblemSpec> {
    Ok(match name {
        "circle-1e6" => circle_contrast(),
        "star-a100" => star(1e2, name),
        "star-a0.01" => star(1e-2, name),
        "flower5" => flower5(),
        "flower8" => flower8(),
        "flower6" => flower6(),
        "circle-poisson" => circle_poisson(),
        "flower3-unknown" => flower3_unknown(),
        "smooth-sine" => smooth_sine(),
        _ => return Err(Error::UnknownExample(name.into())),
    })
}
