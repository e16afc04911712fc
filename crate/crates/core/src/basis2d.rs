//! Tensor-product bases on the unit square: the standard multilevel set and
//! its enlargement by fine wavelets near the interface.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{InterfaceCurve, Rect};
use crate::wavelet1d::{
    dual_support, enumerate_level, expand_to_fine, to_f64, BasisIndex1D, DualSupport1D, Family,
    FineExpansion, J0,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    PhiPhi,
    PhiPsi,
    PsiPhi,
    PsiPsi,
}

impl Group {
    pub const WAVELETS: [Group; 3] = [Group::PhiPsi, Group::PsiPhi, Group::PsiPsi];

    /// Families of the x and y factors.
    pub fn families(self) -> (Family, Family) {
        match self {
            Group::PhiPhi => (Family::Scaling, Family::Scaling),
            Group::PhiPsi => (Family::Scaling, Family::Wavelet),
            Group::PsiPhi => (Family::Wavelet, Family::Scaling),
            Group::PsiPsi => (Family::Wavelet, Family::Wavelet),
        }
    }
}

/// One tensor-product basis function. With the H¹ scale applied it equals
/// `gx(2^j x − kx) · gy(2^j y − ky)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex2D {
    pub group: Group,
    pub x: BasisIndex1D,
    pub y: BasisIndex1D,
}

impl BasisIndex2D {
    pub fn new(group: Group, level: u32, kx: i64, ky: i64) -> Result<Self> {
        let (fx, fy) = group.families();
        Ok(Self {
            group,
            x: BasisIndex1D::new(fx, level, kx)?,
            y: BasisIndex1D::new(fy, level, ky)?,
        })
    }

    pub fn level(&self) -> u32 {
        self.x.level
    }

    pub fn h1_scale(&self) -> f64 {
        (-(self.level() as f64)).exp2()
    }

    /// Value of the H¹-normalized function.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.x.eval_unnormalized(x) * self.y.eval_unnormalized(y)
    }

    /// Gradient of the H¹-normalized function.
    #[inline]
    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        [
            self.x.slope_unnormalized(x) * self.y.eval_unnormalized(y),
            self.x.eval_unnormalized(x) * self.y.slope_unnormalized(y),
        ]
    }

    pub fn primal_support_box(&self) -> Rect {
        let (x0, x1) = self.x.primal_support();
        let (y0, y1) = self.y.primal_support();
        Rect::new(x0.max(0.0), y0.max(0.0), x1.min(1.0), y1.min(1.0))
    }

    pub fn dual_support_box(&self) -> DualBox {
        DualBox {
            x: dual_support(&self.x),
            y: dual_support(&self.y),
        }
    }

    fn sort_key(&self) -> (u32, Group, i64, i64) {
        (self.level(), self.group, self.y.translate, self.x.translate)
    }
}

impl PartialOrd for BasisIndex2D {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BasisIndex2D {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Closed dual-support rectangle with exact dyadic corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualBox {
    pub x: DualSupport1D,
    pub y: DualSupport1D,
}

impl DualBox {
    pub fn as_rect(&self) -> Rect {
        let (x0, x1) = self.x.as_f64();
        let (y0, y1) = self.y.as_f64();
        Rect::new(x0, y0, x1, y1)
    }
}

#[derive(Debug, Clone)]
pub struct BasisSet {
    entries: Vec<BasisIndex2D>,
    positions: HashMap<BasisIndex2D, usize>,
    pub coarse_level: u32,
    pub max_level: u32,
    pub augmented: bool,
    /// Smallest level whose bilinear space contains every entry.
    pub fine_level: u32,
}

impl BasisSet {
    fn from_sorted(
        entries: Vec<BasisIndex2D>,
        coarse_level: u32,
        max_level: u32,
        augmented: bool,
    ) -> Self {
        let fine_level = entries
            .iter()
            .map(|e| match e.group {
                Group::PhiPhi => e.level(),
                _ => e.level() + 1,
            })
            .max()
            .unwrap_or(max_level)
            .max(max_level);
        let positions = entries.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        Self {
            entries,
            positions,
            coarse_level,
            max_level,
            augmented,
            fine_level,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasisIndex2D] {
        &self.entries
    }

    pub fn position(&self, idx: &BasisIndex2D) -> Option<usize> {
        self.positions.get(idx).copied()
    }

    pub fn contains(&self, idx: &BasisIndex2D) -> bool {
        self.positions.contains_key(idx)
    }

    /// Entries beyond the standard set.
    pub fn added(&self) -> usize {
        let standard = ((1usize << self.max_level) - 1).pow(2);
        self.len() - standard.min(self.len())
    }

    /// `(level, count)` for every level present, ascending.
    pub fn level_counts(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for e in &self.entries {
            match out.last_mut() {
                Some((l, c)) if *l == e.level() => *c += 1,
                _ => out.push((e.level(), 1)),
            }
        }
        out
    }
}

fn check_levels(coarse: u32, max: u32) -> Result<()> {
    if coarse < J0 {
        return Err(Error::InvalidLevel {
            level: coarse,
            min: J0,
        });
    }
    if max < coarse {
        return Err(Error::InvalidLevel {
            level: max,
            min: coarse,
        });
    }
    Ok(())
}

fn group_members(group: Group, level: u32) -> Result<Vec<BasisIndex2D>> {
    let (fx, fy) = group.families();
    let xs = enumerate_level(level, fx)?;
    let ys = enumerate_level(level, fy)?;
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for y in &ys {
        for x in &xs {
            out.push(BasisIndex2D {
                group,
                x: *x,
                y: *y,
            });
        }
    }
    Ok(out)
}

fn standard_entries(coarse: u32, max: u32) -> Result<Vec<BasisIndex2D>> {
    let mut entries = group_members(Group::PhiPhi, coarse)?;
    for level in coarse..max {
        for g in Group::WAVELETS {
            entries.extend(group_members(g, level)?);
        }
    }
    Ok(entries)
}

/// Coarse scaling products plus all wavelet levels below `max`; spans the
/// bilinear space at level `max`.
pub fn build_standard_set(coarse: u32, max: u32) -> Result<BasisSet> {
    check_levels(coarse, max)?;
    Ok(BasisSet::from_sorted(
        standard_entries(coarse, max)?,
        coarse,
        max,
        false,
    ))
}

/// Standard set plus every wavelet product at levels `max..=2·max−2` whose
/// dual-support box has interior meeting the curve.
pub fn build_augmented_set(coarse: u32, max: u32, curve: &InterfaceCurve) -> Result<BasisSet> {
    augment_with_cells(coarse, max, |level| curve.cells_meeting(level))
}

/// Augmentation driven by the set of level-`j` grid cells (as `(i, j)`
/// indices) whose interior the interface visits.
pub fn augment_with_cells(
    coarse: u32,
    max: u32,
    visited: impl Fn(u32) -> BTreeSet<(i64, i64)>,
) -> Result<BasisSet> {
    check_levels(coarse, max)?;
    let mut entries = standard_entries(coarse, max)?;
    for level in max..=(2 * max).saturating_sub(2) {
        let cells = visited(level);
        if cells.is_empty() {
            continue;
        }
        let scaling = covering(level, Family::Scaling)?;
        let wavelet = covering(level, Family::Wavelet)?;
        let mut found = BTreeSet::new();
        for &(cx, cy) in &cells {
            for g in Group::WAVELETS {
                let (fx, fy) = g.families();
                let pick = |f: Family| match f {
                    Family::Scaling => &scaling,
                    Family::Wavelet => &wavelet,
                };
                for x in &pick(fx)[cx as usize] {
                    for y in &pick(fy)[cy as usize] {
                        found.insert(BasisIndex2D {
                            group: g,
                            x: *x,
                            y: *y,
                        });
                    }
                }
            }
        }
        entries.extend(found);
    }
    Ok(BasisSet::from_sorted(entries, coarse, max, true))
}

/// For each cell `c` at `level`, the 1D indices whose dual support contains
/// `[c, c+1]·2^{-level}`. Dual supports have integer endpoints at their own
/// level, so an open box meets an open set iff it contains one of the cells
/// that set visits.
fn covering(level: u32, family: Family) -> Result<Vec<Vec<BasisIndex1D>>> {
    let n = 1i64 << level;
    let mut out = vec![Vec::new(); n as usize];
    for idx in enumerate_level(level, family)? {
        let s = dual_support(&idx);
        let lo = (s.lo * n).to_integer();
        let hi = (s.hi * n).to_integer();
        for c in lo..hi {
            out[c as usize].push(idx);
        }
    }
    Ok(out)
}

/// Coefficients of a tensor-product function over the fine hat products.
#[derive(Debug, Clone, PartialEq)]
pub struct FineExpansion2D {
    pub x: FineExpansion,
    pub y: FineExpansion,
    pub h1_scaled: bool,
}

impl FineExpansion2D {
    /// Nonzero `(mx, my, coefficient)`. With the H¹ scale the coefficients
    /// refer to the unnormalized hats `φ(2^{J'}x − mx)·φ(2^{J'}y − my)`,
    /// otherwise to their L²-normalized versions.
    pub fn entries(&self) -> Vec<(i64, i64, f64)> {
        let scale = if self.h1_scaled {
            1.0
        } else {
            self.x.scale() * self.y.scale()
        };
        let mut out = Vec::new();
        for (iy, cy) in self.y.coeffs.iter().enumerate() {
            if cy == &num_traits::Zero::zero() {
                continue;
            }
            for (ix, cx) in self.x.coeffs.iter().enumerate() {
                if cx == &num_traits::Zero::zero() {
                    continue;
                }
                out.push((
                    self.x.first + ix as i64,
                    self.y.first + iy as i64,
                    scale * to_f64(*cx * *cy),
                ));
            }
        }
        out
    }
}

pub fn expand_to_fine_2d(
    idx: &BasisIndex2D,
    fine: u32,
    h1_scaled: bool,
) -> Result<FineExpansion2D> {
    Ok(FineExpansion2D {
        x: expand_to_fine(&idx.x, fine)?,
        y: expand_to_fine(&idx.y, fine)?,
        h1_scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn circle() -> InterfaceCurve {
        InterfaceCurve::circle(0.25).unwrap()
    }

    #[test]
    fn standard_cardinality() {
        assert_eq!(build_standard_set(3, 3).unwrap().len(), 49);
        assert_eq!(build_standard_set(3, 4).unwrap().len(), 225);
        assert_eq!(build_standard_set(3, 5).unwrap().len(), 961);
        assert!(build_standard_set(2, 4).is_err());
        assert!(build_standard_set(4, 3).is_err());
    }

    #[test]
    fn ordering_and_positions() {
        let s = build_standard_set(3, 5).unwrap();
        assert!(s.entries().windows(2).all(|w| w[0] < w[1]));
        for (i, e) in s.entries().iter().enumerate() {
            assert_eq!(s.position(e), Some(i));
            assert!(e.group != Group::PhiPhi || e.level() == 3);
        }
        assert_eq!(s.fine_level, 5);
        assert_eq!(
            s.level_counts(),
            vec![(3, 49 + 2 * 7 * 8 + 64), (4, 2 * 15 * 16 + 256)]
        );
    }

    #[test]
    fn dual_boxes() {
        let j = 5;
        let s = 1.0 / 32.0;
        let e = BasisIndex2D::new(Group::PsiPsi, j, 10, 17).unwrap();
        assert_eq!(
            e.dual_support_box().as_rect(),
            Rect::new(9.0 * s, 16.0 * s, 12.0 * s, 19.0 * s)
        );
        let e = BasisIndex2D::new(Group::PhiPsi, j, 10, 17).unwrap();
        assert_eq!(
            e.dual_support_box().as_rect(),
            Rect::new(8.0 * s, 16.0 * s, 12.0 * s, 19.0 * s)
        );
        let e = BasisIndex2D::new(Group::PsiPsi, j, 0, 17).unwrap();
        assert_eq!(e.dual_support_box().as_rect().x1, 3.0 * s);
        let e = BasisIndex2D::new(Group::PsiPhi, j, 31, 31).unwrap();
        let r = e.dual_support_box().as_rect();
        assert_eq!((r.x0, r.x1, r.y0, r.y1), (29.0 * s, 1.0, 28.0 * s, 1.0));
    }

    #[test]
    fn circle_counts() {
        let c = circle();
        let s4 = build_augmented_set(3, 4, &c).unwrap();
        assert_eq!(s4.len(), 2345);
        assert!(s4.level_counts().iter().all(|(l, _)| *l <= 6));
        assert_eq!(s4.fine_level, 7);
        assert!(build_standard_set(3, 4)
            .unwrap()
            .entries()
            .iter()
            .all(|e| s4.contains(e)));
        let s5 = build_augmented_set(3, 5, &c).unwrap();
        assert_eq!(s5.len(), 10401);
        assert!(s5.entries().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn no_curve_means_no_augmentation() {
        let s = augment_with_cells(3, 5, |_| BTreeSet::new()).unwrap();
        assert_eq!(s.len(), 961);
        assert_eq!(s.fine_level, 5);
    }

    #[test]
    fn cardinality_ratio_stays_bounded() {
        let c = InterfaceCurve::polar(|t| (0.2 + 0.08 * (5.0 * t).sin(), 0.4 * (5.0 * t).cos()))
            .unwrap();
        let ratios: Vec<f64> = (3..=6)
            .map(|j| {
                build_augmented_set(3, j, &c).unwrap().len() as f64
                    / ((1u64 << j) - 1).pow(2) as f64
            })
            .collect();
        assert!(ratios.iter().all(|r| *r < 16.0), "{ratios:?}");
        let growth: Vec<f64> = ratios.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(growth.windows(2).all(|g| g[1] < g[0]), "{ratios:?}");
    }

    #[test]
    fn shrinking_curve_adds_few() {
        let c = InterfaceCurve::circle(1e-3).unwrap();
        let s = build_augmented_set(3, 5, &c).unwrap();
        for (level, count) in s.level_counts().into_iter().filter(|(l, _)| *l >= 5) {
            // a point lies in at most four 1D dual supports per family
            // per axis, and the disc can straddle one grid line per axis
            assert!(count <= 3 * 5 * 5, "level {level}: {count}");
        }
    }

    // Oracle: densely sampled curve points bucketed by level-j cell; a box
    // is hit when some sample lies strictly inside it.
    fn oracle_hits(
        curve: &InterfaceCurve,
        level: u32,
        samples: usize,
    ) -> (BTreeSet<BasisIndex2D>, BTreeSet<BasisIndex2D>) {
        let n = 1usize << level;
        let mut buckets: Vec<Vec<[f64; 2]>> = vec![Vec::new(); n * n];
        for k in 0..samples {
            let p = curve.point(TAU * k as f64 / samples as f64);
            let (i, j) = ((p[0] * n as f64) as usize, (p[1] * n as f64) as usize);
            buckets[j * n + i].push(p);
        }
        let (mut hit, mut unsure) = (BTreeSet::new(), BTreeSet::new());
        for g in Group::WAVELETS {
            for e in group_members(g, level).unwrap() {
                let r = e.dual_support_box().as_rect();
                let (i0, i1) = (
                    (r.x0 * n as f64) as usize,
                    (r.x1 * n as f64).ceil() as usize,
                );
                let (j0, j1) = (
                    (r.y0 * n as f64) as usize,
                    (r.y1 * n as f64).ceil() as usize,
                );
                let mut depth = f64::NEG_INFINITY;
                for j in j0..j1.min(n) {
                    for i in i0..i1.min(n) {
                        for p in &buckets[j * n + i] {
                            let d = (p[0] - r.x0)
                                .min(r.x1 - p[0])
                                .min(p[1] - r.y0)
                                .min(r.y1 - p[1]);
                            depth = depth.max(d);
                        }
                    }
                }
                if depth.abs() < 1e-5 {
                    unsure.insert(e);
                } else if depth > 0.0 {
                    hit.insert(e);
                }
            }
        }
        (hit, unsure)
    }

    #[test]
    fn augmentation_matches_sampling_oracle() {
        let curves = [
            circle(),
            InterfaceCurve::polar(|t| (0.2 + 0.08 * (5.0 * t).sin(), 0.4 * (5.0 * t).cos()))
                .unwrap(),
        ];
        for c in &curves {
            let set = build_augmented_set(3, 4, c).unwrap();
            for level in 4..=6 {
                let (hit, unsure) = oracle_hits(c, level, 1 << 20);
                for g in Group::WAVELETS {
                    for e in group_members(g, level).unwrap() {
                        if unsure.contains(&e) {
                            continue;
                        }
                        assert_eq!(set.contains(&e), hit.contains(&e), "{e:?}");
                    }
                }
                // the circle passes exactly through grid vertices, so some
                // boxes only touch it at a corner
                assert!(unsure.len() * 5 < hit.len());
            }
        }
    }

    #[test]
    fn unit_expansion_of_fine_hat() {
        let e = BasisIndex2D::new(Group::PhiPhi, 3, 2, 5).unwrap();
        assert_eq!(
            expand_to_fine_2d(&e, 3, true).unwrap().entries(),
            vec![(2, 5, 1.0)]
        );
        assert_eq!(
            expand_to_fine_2d(&e, 3, false).unwrap().entries(),
            vec![(2, 5, 1.0)]
        );
    }

    #[test]
    fn expansion_matches_pointwise_product() {
        for (g, kx, ky) in [
            (Group::PsiPhi, 3, 4),
            (Group::PsiPsi, 0, 7),
            (Group::PhiPsi, 7, 6),
        ] {
            let e = BasisIndex2D::new(g, 3, kx, ky).unwrap();
            let fine = 4;
            let m = 1i64 << fine;
            let coeffs: HashMap<(i64, i64), f64> = expand_to_fine_2d(&e, fine, true)
                .unwrap()
                .entries()
                .into_iter()
                .map(|(a, b, c)| ((a, b), c))
                .collect();
            for i in 1..m {
                for j in 1..m {
                    let v = e.eval(i as f64 / m as f64, j as f64 / m as f64);
                    assert!((coeffs.get(&(i, j)).copied().unwrap_or(0.0) - v).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn interior_wavelet_expansion_size() {
        let e = BasisIndex2D::new(Group::PsiPsi, 4, 6, 9).unwrap();
        for fine in 5..=7 {
            let nnz = expand_to_fine_2d(&e, fine, true).unwrap().entries().len();
            let bound = (3 * (1usize << (fine - 4)) + 1).pow(2);
            assert!(nnz <= bound);
        }
        assert!(expand_to_fine_2d(&e, 4, true).is_err());
    }

    #[test]
    fn standard_set_spans_fine_space() {
        let set = build_standard_set(3, 4).unwrap();
        let m = 15usize;
        let mut a = faer::Mat::<f64>::zeros(set.len(), m * m);
        for (r, e) in set.entries().iter().enumerate() {
            for (i, j, c) in expand_to_fine_2d(e, 4, false).unwrap().entries() {
                a[(r, (j as usize - 1) * m + i as usize - 1)] = c;
            }
        }
        let sv = a.singular_values().unwrap();
        let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), s| {
            (hi.max(*s), lo.min(*s))
        });
        assert!(min > 1e-3 * max, "{min} {max}");
    }

    #[test]
    fn gradient_matches_difference() {
        let e = BasisIndex2D::new(Group::PsiPsi, 4, 0, 15).unwrap();
        let (x, y) = (0.071, 0.93 + 0.1 * PI / 100.0);
        let h = 1e-7;
        let g = e.grad(x, y);
        assert!((g[0] - (e.eval(x + h, y) - e.eval(x - h, y)) / (2.0 * h)).abs() < 1e-5);
        assert!((g[1] - (e.eval(x, y + h) - e.eval(x, y - h)) / (2.0 * h)).abs() < 1e-5);
    }
}
