//! Quick structural checks: filter bank, moments, span, geometry.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_rational::Rational64;
use num_traits::Zero;

use crate::basis2d::{build_standard_set, expand_to_fine_2d};
use crate::error::{Error, Result};
use crate::geometry::InterfaceCurve;
use crate::quadrature::{interface_length, region_areas, DEFAULT_ORDER};
use crate::wavelet1d::{
    build_filter_bank, build_primal, verify_perfect_reconstruction, FilterBank, FilterSeq,
    Generator,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn filter(b: &mut FilterBank, which: usize) -> &mut FilterSeq {
    match which {
        0 => &mut b.lowpass,
        1 => &mut b.highpass,
        2 => &mut b.dual_lowpass,
        _ => &mut b.dual_highpass,
    }
}

/// Perfect reconstruction holds, and fails after changing any single
/// coefficient of any of the four filters.
pub fn check_filter_bank() -> Check {
    let bank = build_filter_bank();
    let exact = verify_perfect_reconstruction(&bank);
    let mut tried = 0;
    let mut survived = Vec::new();
    for which in 0..4 {
        let mut probe = bank.clone();
        let f = filter(&mut probe, which);
        let (lo, hi) = (f.lo(), f.hi());
        for k in lo..=hi {
            let mut bad = bank.clone();
            let f = filter(&mut bad, which);
            *f = f.with_coeff(k, f.get(k) + Rational64::new(1, 7));
            tried += 1;
            if verify_perfect_reconstruction(&bad) {
                survived.push((which, k));
            }
        }
    }
    Check {
        name: "filter bank",
        passed: exact && survived.is_empty(),
        detail: format!(
            "identity {exact}; {tried} single-coefficient changes, {} undetected",
            survived.len()
        ),
    }
}

/// Vanishing integrals of the wavelets, in exact arithmetic.
pub fn check_moments() -> Check {
    let psi = build_primal(Generator::Psi);
    let left = build_primal(Generator::PsiL);
    let right = build_primal(Generator::PsiR);
    let values = [
        psi.moment(0),
        psi.moment(1),
        left.moment(0),
        right.moment(0),
    ];
    Check {
        name: "moments",
        passed: values.iter().all(Zero::is_zero),
        detail: format!(
            "∫ψ, ∫xψ, ∫ψL, ∫ψR = {}",
            values.map(|v| v.to_string()).join(", ")
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanReport {
    pub level: u32,
    pub unknowns: usize,
    pub kappa: f64,
    pub residual: f64,
}

/// Matrix taking standard-set coefficients to the interior fine hats of
/// level `level`, as a dense square matrix.
pub fn standard_to_hats(level: u32) -> Result<Mat<f64>> {
    let set = build_standard_set(3, level)?;
    let m = (1i64 << level) - 1;
    let n = (m * m) as usize;
    if set.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: set.len(),
        });
    }
    let mut t = Mat::<f64>::zeros(n, n);
    for (col, idx) in set.entries().iter().enumerate() {
        for (mx, my, c) in expand_to_fine_2d(idx, level, true)?.entries() {
            if (1..=m).contains(&mx) && (1..=m).contains(&my) {
                t[(((mx - 1) + (my - 1) * m) as usize, col)] += c;
            }
        }
    }
    Ok(t)
}

pub fn span_report(level: u32) -> Result<SpanReport> {
    let t = standard_to_hats(level)?;
    let n = t.nrows();
    let sv = t
        .singular_values()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let (hi, lo) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(h, l), s| (h.max(*s), l.min(*s)));
    // deterministic right-hand side with every entry nonzero
    let b = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + (i % 7) as f64 / 7.0);
    let x = t.partial_piv_lu().solve(&b);
    let r = &t * &x - &b;
    Ok(SpanReport {
        level,
        unknowns: n,
        kappa: hi / lo,
        residual: r.norm_l2() / b.norm_l2(),
    })
}

pub fn check_span() -> Check {
    let mut detail = Vec::new();
    let mut passed = true;
    for (level, expected) in [(4, 225), (5, 961)] {
        match span_report(level) {
            Ok(r) => {
                passed &= r.unknowns == expected && r.kappa.is_finite() && r.residual < 1e-10;
                detail.push(format!(
                    "J={level}: N={} κ={:.3e} residual={:.1e}",
                    r.unknowns, r.kappa, r.residual
                ));
            }
            Err(e) => {
                passed = false;
                detail.push(format!("J={level}: {e}"));
            }
        }
    }
    Check {
        name: "span",
        passed,
        detail: detail.join("; "),
    }
}

/// Area inside and length of the circle of radius 1/4, from cut cells of the
/// `2^{-7}` grid.
pub fn circle_measures() -> Result<(f64, f64)> {
    let c = InterfaceCurve::circle(0.25)?;
    let (inside, _) = region_areas(&c, 7, DEFAULT_ORDER)?;
    Ok((inside, interface_length(&c, 7, DEFAULT_ORDER)?))
}

pub fn check_geometry() -> Check {
    match circle_measures() {
        Ok((area, length)) => {
            let (ea, el) = ((area - PI / 16.0).abs(), (length - PI / 2.0).abs());
            Check {
                name: "geometry",
                passed: ea < 1e-8 && el < 1e-8,
                detail: format!("area error {ea:.1e}, length error {el:.1e}"),
            }
        }
        Err(e) => Check {
            name: "geometry",
            passed: false,
            detail: e.to_string(),
        },
    }
}

pub fn run_checks() -> Vec<Check> {
    vec![
        check_filter_bank(),
        check_moments(),
        check_span(),
        check_geometry(),
    ]
}
