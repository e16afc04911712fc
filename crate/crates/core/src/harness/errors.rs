//! Discrete error norms on a uniform sample grid and convergence orders.

use crate::geometry::{InterfaceCurve, Side};

/// Points closer than this to the interface are left out of the norms.
pub const INTERFACE_GAP: f64 = 1e-12;

/// Relative discrete errors of the value and the gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub rel_l2: f64,
    pub rel_h1: f64,
}

/// Compares `approx` against `truth` at the cell centres of the uniform
/// `2^{-grid_level}` grid. Both closures receive the side of the sample.
pub fn compute_errors(
    curve: &InterfaceCurve,
    grid_level: u32,
    approx: impl Fn(Side, f64, f64) -> (f64, [f64; 2]),
    truth: impl Fn(Side, f64, f64) -> (f64, [f64; 2]),
) -> ErrorPair {
    let n = 1usize << grid_level;
    let h = 1.0 / n as f64;
    let (mut e0, mut n0, mut e1, mut n1) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        let y = (j as f64 + 0.5) * h;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let d = if curve.is_polar() {
                curve.level_value(x, y)
            } else {
                1.0
            };
            if d.abs() < INTERFACE_GAP {
                continue;
            }
            let side = if curve.is_polar() {
                if d < 0.0 {
                    Side::Minus
                } else {
                    Side::Plus
                }
            } else {
                curve.side(x, y)
            };
            let (u, gu) = truth(side, x, y);
            let (v, gv) = approx(side, x, y);
            e0 += (v - u) * (v - u);
            n0 += u * u;
            e1 += (gv[0] - gu[0]).powi(2) + (gv[1] - gu[1]).powi(2);
            n1 += gu[0] * gu[0] + gu[1] * gu[1];
        }
    }
    ErrorPair {
        rel_l2: ratio(e0, n0),
        rel_h1: ratio(e1, n1),
    }
}

fn ratio(err: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (err / norm).sqrt()
    }
}

/// Convergence order with respect to the number of unknowns, normalized so
/// that quartering the error with four times the unknowns gives 2. A zero
/// current error gives infinity.
pub fn order(err_prev: f64, err_cur: f64, n_prev: usize, n_cur: usize) -> f64 {
    if err_cur == 0.0 {
        return f64::INFINITY;
    }
    2.0 * (err_prev / err_cur).log2() / (n_cur as f64 / n_prev as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> InterfaceCurve {
        InterfaceCurve::circle(0.25).unwrap()
    }

    #[test]
    fn exact_match_is_zero() {
        let f = |_: Side, x: f64, y: f64| (x * y, [y, x]);
        let e = compute_errors(&circle(), 6, f, f);
        assert_eq!(
            e,
            ErrorPair {
                rel_l2: 0.0,
                rel_h1: 0.0
            }
        );
    }

    #[test]
    fn scaled_copy() {
        let u = |_: Side, x: f64, y: f64| (x + y, [1.0, 1.0]);
        let v = |_: Side, x: f64, y: f64| (1.1 * (x + y), [1.1, 1.1]);
        let e = compute_errors(&circle(), 5, v, u);
        assert!((e.rel_l2 - 0.1).abs() < 1e-12);
        assert!((e.rel_h1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn bilinear_field_against_hand_interpolation() {
        use crate::assembly::NodalField;
        let level = 4;
        let m = (1usize << level) - 1;
        let h = 1.0 / (m + 1) as f64;
        let node = |i: usize, j: usize| {
            if i == 0 || j == 0 || i > m || j > m {
                0.0
            } else {
                let (x, y) = (i as f64 * h, j as f64 * h);
                (3.0 * x).sin() + x * y * y
            }
        };
        let mut values = vec![0.0; m * m];
        for j in 1..=m {
            for i in 1..=m {
                values[(i - 1) + (j - 1) * m] = node(i, j);
            }
        }
        let field = NodalField::uniform(level, &values).unwrap();
        let truth = |_: Side, x: f64, y: f64| {
            let (i, j) = ((x / h) as usize, (y / h) as usize);
            let (s, t) = (x / h - i as f64, y / h - j as f64);
            let (a, b, c, d) = (
                node(i, j),
                node(i + 1, j),
                node(i, j + 1),
                node(i + 1, j + 1),
            );
            let v = a * (1.0 - s) * (1.0 - t) + b * s * (1.0 - t) + c * (1.0 - s) * t + d * s * t;
            let gx = ((b - a) * (1.0 - t) + (d - c) * t) / h;
            let gy = ((c - a) * (1.0 - s) + (d - b) * s) / h;
            (v, [gx, gy])
        };
        let e = compute_errors(&circle(), 7, |_, x, y| field.eval(x, y), truth);
        assert!(e.rel_l2 < 1e-14 && e.rel_h1 < 1e-14, "{e:?}");
    }

    #[test]
    fn orders() {
        assert!((order(0.1, 0.025, 100, 400) - 2.0).abs() < 1e-14);
        assert_eq!(order(0.1, 0.1, 100, 400), 0.0);
        assert!((order(1.64e-1, 3.75e-2, 2345, 10401) - 1.98).abs() < 5e-3);
        assert!(order(0.1, 0.0, 1, 4).is_infinite());
    }
}
