//! Gauss rules on the unit square and reference triangle, pull-backs onto
//! the curved pieces of cut cells, and line integrals along the interface.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{CellClass, InterfaceCurve, Rect, Shape2, Side, Subregion, MAX_ARC_PANEL};

pub const DEFAULT_ORDER: usize = 5;

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=10).contains(&n) {
        return Err(Error::QuadOrder(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton on P_n from the Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok((nodes, weights))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Square,
    Triangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub reference: Reference,
    pub points: Vec<([f64; 2], f64)>,
    /// Per-axis polynomial degree integrated exactly (square), or total
    /// degree (triangle).
    pub order: usize,
}

/// Tensor rule on [0,1]².
pub fn gauss_square(n: usize) -> Result<QuadRule> {
    let (x, w) = gauss_legendre(n)?;
    let mut points = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            points.push(([x[i], x[j]], w[i] * w[j]));
        }
    }
    Ok(QuadRule {
        reference: Reference::Square,
        points,
        order: 2 * n - 1,
    })
}

/// Collapsed rule on the triangle (0,0), (1,0), (0,1).
pub fn gauss_triangle(n: usize) -> Result<QuadRule> {
    let (x, w) = gauss_legendre(n)?;
    let mut points = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (s, t) = (x[i], x[j]);
            points.push(([t * (1.0 - s), t * s], w[i] * w[j] * t));
        }
    }
    Ok(QuadRule {
        reference: Reference::Triangle,
        points,
        order: 2 * n - 2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub x: [f64; 2],
    pub w: f64,
}

/// Quadrature points of one piece, Jacobian folded into the weights. Curved
/// pieces spanning a long arc are cut into panels along the arc first.
pub fn subregion_points(
    sub: &Subregion,
    curve: &InterfaceCurve,
    n: usize,
) -> Result<Vec<QuadPoint>> {
    let arc = match sub.shape {
        Shape2::CurvedTriangle { arc, .. } | Shape2::CurvedQuad { arc, .. } => arc,
        _ => return piece_points(&sub.shape, curve, n),
    };
    let panels = ((arc.1 - arc.0).abs() / MAX_ARC_PANEL).ceil().max(1.0) as usize;
    if panels == 1 {
        return piece_points(&sub.shape, curve, n);
    }
    let mut out = Vec::new();
    for p in 0..panels {
        let (s0, s1) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        let sub_arc = (arc.0 + s0 * (arc.1 - arc.0), arc.0 + s1 * (arc.1 - arc.0));
        let shape = match sub.shape {
            Shape2::CurvedTriangle { apex, .. } => Shape2::CurvedTriangle { apex, arc: sub_arc },
            Shape2::CurvedQuad { base: [b0, b1], .. } => {
                let at = |s: f64| [b0[0] + s * (b1[0] - b0[0]), b0[1] + s * (b1[1] - b0[1])];
                Shape2::CurvedQuad {
                    base: [at(s0), at(s1)],
                    arc: sub_arc,
                }
            }
            _ => unreachable!(),
        };
        out.extend(piece_points(&shape, curve, n)?);
    }
    Ok(out)
}

fn piece_points(shape: &Shape2, curve: &InterfaceCurve, n: usize) -> Result<Vec<QuadPoint>> {
    let rule = gauss_square(n)?;
    let mut out = Vec::with_capacity(rule.points.len());
    let mut sign = 0.0;
    let mut scale: f64 = 0.0;
    for &([s, t], w) in &rule.points {
        let (x, jac) = shape.map(curve, s, t);
        scale = scale.max(jac.abs());
        if jac != 0.0 {
            if sign == 0.0 {
                sign = jac.signum();
            } else if jac.signum() != sign && jac.abs() > 1e-13 * scale {
                return Err(Error::DegenerateMap { jacobian: jac });
            }
        }
        out.push(QuadPoint {
            x,
            w: w * jac.abs(),
        });
    }
    if let Shape2::Rect(_) = shape {
        return Ok(out);
    }
    if sign == 0.0 && scale > 0.0 {
        return Err(Error::DegenerateMap { jacobian: 0.0 });
    }
    Ok(out)
}

pub fn integrate_subregion(
    f: impl Fn(f64, f64) -> f64,
    sub: &Subregion,
    curve: &InterfaceCurve,
    n: usize,
) -> Result<f64> {
    Ok(subregion_points(sub, curve, n)?
        .iter()
        .map(|p| p.w * f(p.x[0], p.x[1]))
        .sum())
}

/// All quadrature points of a cell, each tagged with its side of the curve.
pub fn cell_points(
    curve: &InterfaceCurve,
    cell: &Rect,
    n: usize,
) -> Result<Vec<(QuadPoint, Side)>> {
    match curve.classify_cell(cell)? {
        CellClass::Inside | CellClass::Outside => {
            let side = curve.side(cell.center()[0], cell.center()[1]);
            let sub = Subregion {
                shape: Shape2::Rect(*cell),
                side: Some(side),
            };
            Ok(subregion_points(&sub, curve, n)?
                .into_iter()
                .map(|p| (p, side))
                .collect())
        }
        CellClass::Cut => {
            let d = curve.decompose_cut_cell(cell)?;
            let mut out = Vec::new();
            for part in &d.parts {
                for p in subregion_points(part, curve, n)? {
                    let side = part.side.unwrap_or_else(|| curve.side(p.x[0], p.x[1]));
                    out.push((p, side));
                }
            }
            Ok(out)
        }
    }
}

/// Points `(θ, γ(θ), weight)` for `∫ g ds` over the parameter interval.
pub fn arc_points(
    curve: &InterfaceCurve,
    interval: (f64, f64),
    n: usize,
) -> Result<Vec<(f64, [f64; 2], f64)>> {
    let (x, w) = gauss_legendre(n)?;
    let (a, b) = interval;
    let panels = ((b - a).abs() / MAX_ARC_PANEL).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for i in 0..n {
            let t = lo + x[i] * h;
            let (pt, d) = curve.point_and_tangent(t);
            out.push((t, pt, w[i] * h.abs() * d[0].hypot(d[1])));
        }
    }
    Ok(out)
}

/// `∫ g(θ) |γ'(θ)| dθ` over the interval.
pub fn integrate_arc(
    g: impl Fn(f64) -> f64,
    curve: &InterfaceCurve,
    interval: (f64, f64),
    n: usize,
) -> Result<f64> {
    Ok(arc_points(curve, interval, n)?
        .iter()
        .map(|&(t, _, w)| w * g(t))
        .sum())
}

/// Areas of Ω₋ and Ω₊ summed cell by cell over the uniform grid at `level`.
pub fn region_areas(curve: &InterfaceCurve, level: u32, n: usize) -> Result<(f64, f64)> {
    let m = 1i64 << level;
    let (mut minus, mut plus) = (0.0, 0.0);
    for j in 0..m {
        for i in 0..m {
            for (p, side) in cell_points(curve, &Rect::cell(level, i, j), n)? {
                match side {
                    Side::Minus => minus += p.w,
                    Side::Plus => plus += p.w,
                }
            }
        }
    }
    Ok((minus, plus))
}

/// Length of the curve accumulated from the arcs inside each grid cell.
pub fn interface_length(curve: &InterfaceCurve, level: u32, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for (i, j) in candidate_cut_cells(curve, level) {
        for arc in curve.arc_in_cell(&Rect::cell(level, i, j))? {
            total += integrate_arc(|_| 1.0, curve, arc, n)?;
        }
    }
    Ok(total)
}

/// Cells that may carry a piece of the curve: those visited by it plus
/// their neighbours (arcs along grid lines belong to either side).
pub fn candidate_cut_cells(curve: &InterfaceCurve, level: u32) -> Vec<(i64, i64)> {
    let m = 1i64 << level;
    let mut set = std::collections::BTreeSet::new();
    for (i, j) in curve.cells_meeting(level) {
        set.insert((i, j));
    }
    let visited: Vec<_> = set.iter().copied().collect();
    for (i, j) in visited {
        for di in -1..=1 {
            for dj in -1..=1 {
                let (a, b) = (i + di, j + dj);
                if (0..m).contains(&a) && (0..m).contains(&b) {
                    set.insert((a, b));
                }
            }
        }
    }
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_square(1).unwrap();
        assert_eq!(r.points, vec![([0.5, 0.5], 1.0)]);
        assert!(gauss_square(0).is_err());
        assert!(gauss_square(11).is_err());
    }

    #[test]
    fn cubic_product_with_two_points() {
        let r = gauss_square(2).unwrap();
        let v: f64 = r
            .points
            .iter()
            .map(|(p, w)| w * p[0].powi(3) * p[1].powi(3))
            .sum();
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn square_rule_exactness(n in 1usize..=10, p in 0u32..20, q in 0u32..20) {
            let max = 2 * n as u32 - 1;
            prop_assume!(p <= max && q <= max);
            let r = gauss_square(n).unwrap();
            let w: f64 = r.points.iter().map(|x| x.1).sum();
            prop_assert!((w - 1.0).abs() < 1e-14);
            prop_assert!(r.points.iter().all(|x| x.1 > 0.0));
            let v: f64 = r.points.iter().map(|(x, w)| w * x[0].powi(p as i32) * x[1].powi(q as i32)).sum();
            let exact = 1.0 / ((p + 1) * (q + 1)) as f64;
            prop_assert!((v - exact).abs() < 10.0 * f64::EPSILON);
        }

        #[test]
        fn triangle_rule_exactness(n in 1usize..=8, p in 0u32..8, q in 0u32..8) {
            prop_assume!(p + q <= 2 * n as u32 - 2);
            let r = gauss_triangle(n).unwrap();
            let v: f64 = r.points.iter().map(|(x, w)| w * x[0].powi(p as i32) * x[1].powi(q as i32)).sum();
            // ∫_T x^p y^q = p! q! / (p + q + 2)!
            let fact = |k: u32| (1..=k).map(|i| i as f64).product::<f64>();
            let exact = fact(p) * fact(q) / fact(p + q + 2);
            prop_assert!((v - exact).abs() < 1e-14);
        }
    }

    fn circle() -> InterfaceCurve {
        InterfaceCurve::circle(0.25).unwrap()
    }

    #[test]
    fn affine_triangle_linear_integrand() {
        let sub = Subregion {
            shape: Shape2::Triangle([[0.1, 0.2], [0.4, 0.25], [0.2, 0.6]]),
            side: Some(Side::Plus),
        };
        let c = circle();
        let v = integrate_subregion(|x, y| 2.0 * x - y + 1.0, &sub, &c, 2).unwrap();
        let area = 0.5 * ((0.4f64 - 0.1) * (0.6 - 0.2) - (0.2 - 0.1) * (0.25 - 0.2)).abs();
        let cx = (0.1 + 0.4 + 0.2) / 3.0;
        let cy = (0.2 + 0.25 + 0.6) / 3.0;
        assert!((v - area * (2.0 * cx - cy + 1.0)).abs() < 1e-15);
    }

    // Adaptive Simpson on x of the analytic y-integral of x² + y² across
    // the part of the cell inside the circle.
    fn inner_integral_oracle(cell: &Rect) -> f64 {
        let strip = |x: f64| -> f64 {
            let dx = x - 0.5;
            let h2 = 1.0 / 16.0 - dx * dx;
            if h2 <= 0.0 {
                return 0.0;
            }
            let h = h2.sqrt();
            let lo = (0.5 - h).max(cell.y0);
            let hi = (0.5 + h).min(cell.y1);
            if hi <= lo {
                return 0.0;
            }
            x * x * (hi - lo) + (hi.powi(3) - lo.powi(3)) / 3.0
        };
        fn simpson(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth > 50 || (left + right - whole).abs() < 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
                + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
        }
        let (a, b) = (cell.x0, cell.x1);
        let (fa, fm, fb) = (strip(a), strip(0.5 * (a + b)), strip(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson(&strip, a, b, fa, fm, fb, whole, 1e-16, 0)
    }

    #[test]
    fn curved_pieces_match_adaptive_oracle() {
        let c = circle();
        for (i, j) in c.cells_meeting(5) {
            let cell = Rect::cell(5, i, j);
            let v: f64 = cell_points(&c, &cell, 5)
                .unwrap()
                .iter()
                .filter(|(_, s)| *s == Side::Minus)
                .map(|(p, _)| p.w * (p.x[0].powi(2) + p.x[1].powi(2)))
                .sum();
            let oracle = inner_integral_oracle(&cell);
            assert!(
                (v - oracle).abs() <= 1e-9 * oracle.abs().max(cell.area() * 0.25),
                "cell {i},{j}: {v} vs {oracle}"
            );
        }
    }

    #[test]
    fn additivity_over_pieces() {
        let c = InterfaceCurve::polar(|t| (0.25 + 0.05 * (5.0 * t).sin(), 0.25 * (5.0 * t).cos()))
            .unwrap();
        let f = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).cos() + x * y;
        for (i, j) in c.cells_meeting(4) {
            let cell = Rect::cell(4, i, j);
            let pieces: f64 = cell_points(&c, &cell, 8)
                .unwrap()
                .iter()
                .map(|(p, _)| p.w * f(p.x[0], p.x[1]))
                .sum();
            let whole: f64 = gauss_square(10)
                .unwrap()
                .points
                .iter()
                .map(|([s, t], w)| {
                    w * cell.area() * f(cell.x0 + s * cell.width(), cell.y0 + t * cell.width())
                })
                .sum();
            assert!((pieces - whole).abs() < 1e-10 * cell.area(), "cell {i},{j}");
        }
    }

    #[test]
    fn circle_area_and_length() {
        let c = circle();
        let (minus, plus) = region_areas(&c, 6, DEFAULT_ORDER).unwrap();
        assert!((minus - PI / 16.0).abs() < 1e-8, "{minus}");
        assert!((minus + plus - 1.0).abs() < 1e-10);
        let len = interface_length(&c, 6, DEFAULT_ORDER).unwrap();
        assert!((len - PI / 2.0).abs() < 1e-8, "{len}");
    }

    #[test]
    fn arc_integrals() {
        let c = circle();
        let full = integrate_arc(|_| 1.0, &c, (0.0, TAU), 5).unwrap();
        assert!((full - PI / 2.0).abs() < 1e-10);
        let odd = integrate_arc(|t| t.cos(), &c, (0.0, TAU), 5).unwrap();
        assert!(odd.abs() < 1e-10);

        let flower = InterfaceCurve::polar(|t| {
            (
                0.25 * (PI / 3.0 + 0.4 * (8.0 * t).sin()),
                0.25 * 3.2 * (8.0 * t).cos(),
            )
        })
        .unwrap();
        let ours = integrate_arc(|_| 1.0, &flower, (0.0, PI), 5).unwrap();
        let m = 1_000_000;
        let h = PI / m as f64;
        let trap: f64 = (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                w * h * flower.speed(k as f64 * h)
            })
            .sum();
        assert!((ours - trap).abs() < 1e-8 * trap, "{ours} vs {trap}");
    }
}
