//! One-dimensional biorthogonal wavelet system on (0,1) built from the hat
//! function: filters, exact primal generators, index sets, dual supports and
//! the refinement transform onto fine-level hats.
//!
//! All construction happens in exact rational arithmetic. Floating point
//! only enters through [`Generator::unit_value`], which is what assembly
//! uses in its inner loops.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Coarsest admissible level.
pub const J0: u32 = 3;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Finitely supported sequence `coeffs[i] = h(lo + i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterSeq {
    lo: i64,
    coeffs: Vec<Rational>,
}

impl FilterSeq {
    /// Fails unless the first and last coefficients are nonzero.
    pub fn new(lo: i64, coeffs: Vec<Rational>) -> Option<Self> {
        match (coeffs.first(), coeffs.last()) {
            (Some(f), Some(l)) if !f.is_zero() && !l.is_zero() => Some(Self { lo, coeffs }),
            _ => None,
        }
    }

    /// The zero sequence, stored with an empty coefficient list.
    pub fn zero() -> Self {
        Self {
            lo: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn get(&self, k: i64) -> Rational {
        if k < self.lo || k > self.hi() {
            return Rational::zero();
        }
        self.coeffs[(k - self.lo) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Rational)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.lo + i as i64, *c))
    }

    pub fn sum(&self) -> Rational {
        self.coeffs.iter().copied().sum()
    }

    /// Copy with one coefficient replaced; the support is not re-trimmed.
    pub fn with_coeff(&self, k: i64, value: Rational) -> Self {
        let mut out = self.clone();
        let i = (k - self.lo) as usize;
        out.coeffs[i] = value;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterBank {
    pub lowpass: FilterSeq,
    pub highpass: FilterSeq,
    pub dual_lowpass: FilterSeq,
    pub dual_highpass: FilterSeq,
}

pub fn build_filter_bank() -> FilterBank {
    let seq = |lo, c: &[(i64, i64)]| {
        FilterSeq::new(lo, c.iter().map(|&(n, d)| q(n, d)).collect()).expect("nonzero ends")
    };
    FilterBank {
        lowpass: seq(-1, &[(1, 4), (1, 2), (1, 4)]),
        highpass: seq(-1, &[(-1, 8), (-1, 4), (3, 4), (-1, 4), (-1, 8)]),
        dual_lowpass: seq(-2, &[(-1, 8), (1, 4), (3, 4), (1, 4), (-1, 8)]),
        dual_highpass: seq(0, &[(-1, 4), (1, 2), (-1, 4)]),
    }
}

/// Laurent polynomial in z = e^{-iξ}.
#[derive(Debug, Clone, Default, PartialEq)]
struct Laurent(BTreeMap<i64, Rational>);

impl Laurent {
    fn from_filter(h: &FilterSeq) -> Self {
        let mut p = Laurent::default();
        for (k, c) in h.iter() {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, k: i64, c: Rational) {
        let e = self.0.entry(k).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&k);
        }
    }

    /// ξ ↦ ξ + π, i.e. z ↦ −z.
    fn shifted_by_pi(&self) -> Self {
        Laurent(
            self.0
                .iter()
                .map(|(&k, &c)| (k, if k.rem_euclid(2) == 1 { -c } else { c }))
                .collect(),
        )
    }

    /// Complex conjugate for real coefficients, i.e. z ↦ 1/z.
    fn conj(&self) -> Self {
        Laurent(self.0.iter().map(|(&k, &c)| (-k, c)).collect())
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Laurent::default();
        for (&i, &a) in &self.0 {
            for (&j, &b) in &other.0 {
                out.add_term(i + j, a * b);
            }
        }
        out
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.0 {
            out.add_term(k, c);
        }
        out
    }

    fn is_constant(&self, c: Rational) -> bool {
        if c.is_zero() {
            return self.0.is_empty();
        }
        self.0.len() == 1 && self.0.get(&0) == Some(&c)
    }
}

/// Checks the 2×2 polyphase identity between the dual and primal filters as
/// an identity of Laurent polynomials.
pub fn verify_perfect_reconstruction(bank: &FilterBank) -> bool {
    let da = Laurent::from_filter(&bank.dual_lowpass);
    let db = Laurent::from_filter(&bank.dual_highpass);
    let a = Laurent::from_filter(&bank.lowpass);
    let b = Laurent::from_filter(&bank.highpass);
    let left = [
        [da.clone(), da.shifted_by_pi()],
        [db.clone(), db.shifted_by_pi()],
    ];
    let right = [
        [a.conj(), b.conj()],
        [a.shifted_by_pi().conj(), b.shifted_by_pi().conj()],
    ];
    for (i, row) in left.iter().enumerate() {
        for j in 0..2 {
            let entry = row[0].mul(&right[0][j]).add(&row[1].mul(&right[1][j]));
            let target = if i == j {
                Rational::one()
            } else {
                Rational::zero()
            };
            if !entry.is_constant(target) {
                return false;
            }
        }
    }
    true
}

/// Continuous piecewise-linear function with breakpoints `(first + i)·2^{-level}`
/// and value zero outside the listed breakpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinear1D {
    level: u32,
    first: i64,
    values: Vec<Rational>,
}

impl PiecewiseLinear1D {
    /// `Σ c·φ(2^level·x − k)` over the given `(k, c)` terms.
    pub fn from_hats(level: u32, terms: &[(i64, Rational)]) -> Self {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(0) - 1;
        let hi = terms.iter().map(|t| t.0).max().unwrap_or(0) + 1;
        let mut values = vec![Rational::zero(); (hi - lo + 1) as usize];
        for &(k, c) in terms {
            values[(k - lo) as usize] += c;
        }
        Self {
            level,
            first: lo,
            values,
        }
    }

    /// `x ↦ f(1 − x)`.
    pub fn reflected(&self) -> Self {
        let n = 1i64 << self.level;
        let last = self.first + self.values.len() as i64 - 1;
        let mut values = self.values.clone();
        values.reverse();
        Self {
            level: self.level,
            first: n - last,
            values,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Closed support as exact dyadic endpoints.
    pub fn support(&self) -> (Rational, Rational) {
        let d = 1i64 << self.level;
        let last = self.first + self.values.len() as i64 - 1;
        (q(self.first, d), q(last, d))
    }

    /// Breakpoints and values, as exact `(x, f(x))` pairs.
    pub fn breakpoints(&self) -> impl Iterator<Item = (Rational, Rational)> + '_ {
        let d = 1i64 << self.level;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (q(self.first + i as i64, d), *v))
    }

    fn value_at_index(&self, i: i64) -> Rational {
        let off = i - self.first;
        if off < 0 || off >= self.values.len() as i64 {
            Rational::zero()
        } else {
            self.values[off as usize]
        }
    }

    /// Exact value at `num·2^{-den_level}`.
    pub fn eval_dyadic(&self, num: i64, den_level: u32) -> Rational {
        if den_level <= self.level {
            return self.value_at_index(num << (self.level - den_level));
        }
        let shift = den_level - self.level;
        let i = num.div_euclid(1 << shift);
        let rem = num.rem_euclid(1 << shift);
        let t = q(rem, 1 << shift);
        let (f0, f1) = (self.value_at_index(i), self.value_at_index(i + 1));
        f0 + (f1 - f0) * t
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x * (1u64 << self.level) as f64;
        let i = t.floor();
        let frac = t - i;
        let i = i as i64;
        let f0 = to_f64(self.value_at_index(i));
        let f1 = to_f64(self.value_at_index(i + 1));
        f0 + (f1 - f0) * frac
    }

    /// `∫ x^p f(x) dx` for p ∈ {0, 1}, exact.
    pub fn moment(&self, p: u32) -> Rational {
        assert!(p <= 1, "only moments of order 0 and 1 are exact here");
        let h = q(1, 1 << self.level);
        let mut acc = Rational::zero();
        for i in 0..self.values.len().saturating_sub(1) {
            let (f0, f1) = (self.values[i], self.values[i + 1]);
            let x0 = h * (self.first + i as i64);
            let x1 = x0 + h;
            acc += if p == 0 {
                h * (f0 + f1) / 2
            } else {
                h * (f0 * (x0 * 2 + x1) + f1 * (x0 + x1 * 2)) / 6
            };
        }
        acc
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The four primal generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Phi,
    Psi,
    PsiL,
    PsiR,
}

pub fn build_primal(g: Generator) -> PiecewiseLinear1D {
    match g {
        Generator::Phi => PiecewiseLinear1D::from_hats(0, &[(0, Rational::one())]),
        Generator::Psi => {
            let b = build_filter_bank().highpass;
            let terms: Vec<_> = b.iter().map(|(k, c)| (k, c * 2)).collect();
            PiecewiseLinear1D::from_hats(1, &terms)
        }
        Generator::PsiL => {
            PiecewiseLinear1D::from_hats(1, &[(1, q(1, 2)), (3, q(-1, 1)), (4, q(1, 2))])
        }
        Generator::PsiR => build_primal(Generator::PsiL).reflected(),
    }
}

/// Floating-point copy of a generator on the half-integer grid.
struct HalfTable {
    first: i64,
    values: Vec<f64>,
}

fn half_table(g: Generator) -> &'static HalfTable {
    static TABLES: OnceLock<[HalfTable; 4]> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        [
            Generator::Phi,
            Generator::Psi,
            Generator::PsiL,
            Generator::PsiR,
        ]
        .map(|g| {
            let f = build_primal(g);
            let (lo, hi) = f.support();
            let (lo2, hi2) = ((lo * 2).to_integer(), (hi * 2).to_integer());
            HalfTable {
                first: lo2,
                values: (lo2..=hi2).map(|s| to_f64(f.eval_dyadic(s, 1))).collect(),
            }
        })
    });
    &tables[g as usize]
}

impl Generator {
    /// Support at unit scale.
    pub fn support(self) -> (f64, f64) {
        let t = half_table(self);
        (
            t.first as f64 / 2.0,
            (t.first + t.values.len() as i64 - 1) as f64 / 2.0,
        )
    }

    /// Value at `t`, exact for dyadic `t` (the breakpoints are half-integers).
    #[inline]
    pub fn unit_value(self, t: f64) -> f64 {
        let tab = half_table(self);
        let s = 2.0 * t - tab.first as f64;
        if s <= 0.0 || s >= (tab.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = s.floor();
        let frac = s - i;
        let i = i as usize;
        tab.values[i] + (tab.values[i + 1] - tab.values[i]) * frac
    }

    /// Derivative at `t` (right derivative at breakpoints).
    #[inline]
    pub fn unit_slope(self, t: f64) -> f64 {
        let tab = half_table(self);
        let s = 2.0 * t - tab.first as f64;
        if s < 0.0 || s >= (tab.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = s.floor() as usize;
        2.0 * (tab.values[i + 1] - tab.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Scaling,
    Wavelet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Left,
    Interior,
    Right,
}

/// One member of Φ_j or Ψ_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex1D {
    pub family: Family,
    pub kind: Kind,
    pub level: u32,
    pub translate: i64,
}

impl BasisIndex1D {
    pub fn new(family: Family, level: u32, translate: i64) -> Result<Self> {
        if level < J0 {
            return Err(Error::InvalidLevel { level, min: J0 });
        }
        let n = 1i64 << level;
        let kind = match family {
            Family::Scaling if (1..n).contains(&translate) => Kind::Interior,
            Family::Wavelet if translate == 0 => Kind::Left,
            Family::Wavelet if translate == n - 1 => Kind::Right,
            Family::Wavelet if (1..n - 1).contains(&translate) => Kind::Interior,
            _ => {
                return Err(Error::Translate {
                    what: match family {
                        Family::Scaling => "scaling",
                        Family::Wavelet => "wavelet",
                    },
                    level,
                    translate,
                })
            }
        };
        Ok(Self {
            family,
            kind,
            level,
            translate,
        })
    }

    pub fn generator(&self) -> Generator {
        match (self.family, self.kind) {
            (Family::Scaling, _) => Generator::Phi,
            (Family::Wavelet, Kind::Left) => Generator::PsiL,
            (Family::Wavelet, Kind::Right) => Generator::PsiR,
            (Family::Wavelet, Kind::Interior) => Generator::Psi,
        }
    }

    /// `g(2^j x − k)` without the `2^{j/2}` normalization.
    #[inline]
    pub fn eval_unnormalized(&self, x: f64) -> f64 {
        let scale = (1u64 << self.level) as f64;
        self.generator()
            .unit_value(scale * x - self.translate as f64)
    }

    /// Derivative of [`Self::eval_unnormalized`].
    #[inline]
    pub fn slope_unnormalized(&self, x: f64) -> f64 {
        let scale = (1u64 << self.level) as f64;
        scale
            * self
                .generator()
                .unit_slope(scale * x - self.translate as f64)
    }

    /// Closed primal support in x.
    pub fn primal_support(&self) -> (f64, f64) {
        let (a, b) = self.generator().support();
        let scale = (1u64 << self.level) as f64;
        (
            (a + self.translate as f64) / scale,
            (b + self.translate as f64) / scale,
        )
    }

    /// Range of cell indices `i` at `cell_level` whose cell `[i, i+1]·2^{-cell_level}`
    /// meets the open primal support.
    pub fn support_cells(&self, cell_level: u32) -> std::ops::Range<i64> {
        let (a, b) = self.primal_support();
        let scale = (1u64 << cell_level) as f64;
        let lo = (a * scale).floor().max(0.0) as i64;
        let hi = ((b * scale).ceil() as i64).min(1i64 << cell_level);
        lo..hi
    }
}

/// Φ_j or Ψ_j ordered by translate.
pub fn enumerate_level(level: u32, family: Family) -> Result<Vec<BasisIndex1D>> {
    if level < J0 {
        return Err(Error::InvalidLevel { level, min: J0 });
    }
    let n = 1i64 << level;
    let range = match family {
        Family::Scaling => 1..n,
        Family::Wavelet => 0..n,
    };
    range.map(|k| BasisIndex1D::new(family, level, k)).collect()
}

/// `f = 2^{sqrt2_exponent/2} · Σ_m coeffs[m − first] · φ_{level;m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FineExpansion {
    pub level: u32,
    pub first: i64,
    pub coeffs: Vec<Rational>,
    pub sqrt2_exponent: i32,
}

impl FineExpansion {
    pub fn coeff(&self, m: i64) -> Rational {
        let off = m - self.first;
        if off < 0 || off >= self.coeffs.len() as i64 {
            Rational::zero()
        } else {
            self.coeffs[off as usize]
        }
    }

    pub fn scale(&self) -> f64 {
        2f64.powf(self.sqrt2_exponent as f64 / 2.0)
    }

    /// Nonzero `(m, coefficient)` pairs in floating point, scale included.
    pub fn to_f64(&self) -> Vec<(i64, f64)> {
        let s = self.scale();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.first + i as i64, s * to_f64(*c)))
            .collect()
    }

    /// Re-expands every `φ_{level;m}` into level `to`.
    pub fn refine(&self, to: u32) -> Result<Self> {
        if to < self.level {
            return Err(Error::Expansion {
                from: self.level,
                to,
            });
        }
        let r = 1i64 << (to - self.level);
        let n = 1i64 << to;
        let hat = build_primal(Generator::Phi);
        let mut acc: BTreeMap<i64, Rational> = BTreeMap::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = self.first + i as i64;
            for t in (m * r - r + 1)..(m * r + r) {
                if t <= 0 || t >= n {
                    continue;
                }
                // φ(2^{level} x − m) at x = t·2^{-to}
                let v = hat.eval_dyadic(t - m * r, to - self.level);
                *acc.entry(t).or_insert_with(Rational::zero) += *c * v;
            }
        }
        Ok(from_map(
            acc,
            to,
            self.sqrt2_exponent + self.level as i32 - to as i32,
        ))
    }
}

fn from_map(acc: BTreeMap<i64, Rational>, level: u32, sqrt2_exponent: i32) -> FineExpansion {
    let first = acc.keys().next().copied().unwrap_or(1);
    let last = acc.keys().next_back().copied().unwrap_or(0);
    let mut coeffs = vec![Rational::zero(); (last - first + 1).max(0) as usize];
    for (m, c) in acc {
        coeffs[(m - first) as usize] = c;
    }
    FineExpansion {
        level,
        first,
        coeffs,
        sqrt2_exponent,
    }
}

/// Coefficients of a basis function over Φ_{fine}.
pub fn expand_to_fine(idx: &BasisIndex1D, fine: u32) -> Result<FineExpansion> {
    let min = match idx.family {
        Family::Scaling => idx.level,
        Family::Wavelet => idx.level + 1,
    };
    if fine < min {
        return Err(Error::Expansion {
            from: idx.level,
            to: fine,
        });
    }
    let f = build_primal(idx.generator());
    let shift = fine - idx.level;
    let n = 1i64 << fine;
    let mut acc = BTreeMap::new();
    for m in 1..n {
        // 2^j x − k at x = m·2^{-fine}, as a dyadic number at level `shift`
        let num = m - (idx.translate << shift);
        let v = f.eval_dyadic(num, shift);
        if !v.is_zero() {
            acc.insert(m, v);
        }
    }
    Ok(from_map(acc, fine, idx.level as i32 - fine as i32))
}

/// Closed interval with exact dyadic endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualSupport1D {
    pub lo: Rational,
    pub hi: Rational,
}

impl DualSupport1D {
    fn hull(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    fn affine(self, shift: i64, div: i64) -> Self {
        Self {
            lo: (self.lo + shift) / div,
            hi: (self.hi + shift) / div,
        }
    }

    fn mirrored(self) -> Self {
        Self {
            lo: Rational::one() - self.hi,
            hi: Rational::one() - self.lo,
        }
    }

    pub fn as_f64(&self) -> (f64, f64) {
        (to_f64(self.lo), to_f64(self.hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualGenerator {
    Phi,
    Psi,
    PhiL,
    PsiL,
    PhiR,
    PsiR,
}

/// Left boundary dual relations: each row of the two-component vector
/// function is a combination of the vector at `2·` (through a 2×2 matrix)
/// and of shifted `φ̃(2·−k)`.
struct BoundaryRelation {
    self_matrix: [[Rational; 2]; 2],
    shifted: Vec<(i64, [Rational; 2])>,
}

fn dual_scaling_left_relation() -> BoundaryRelation {
    BoundaryRelation {
        self_matrix: [[q(0, 1), q(-1, 2)], [q(1, 1), q(3, 2)]],
        shifted: vec![
            (3, [q(1, 2), q(1, 2)]),
            (4, [q(3, 2), q(-1, 4)]),
            (5, [q(1, 2), q(0, 1)]),
            (6, [q(-1, 4), q(0, 1)]),
        ],
    }
}

fn dual_wavelet_left_relation() -> BoundaryRelation {
    BoundaryRelation {
        self_matrix: [[q(0, 1), q(-1, 1)], [q(-1, 1), q(2, 1)]],
        shifted: vec![(3, [q(1, 1), q(0, 1)]), (4, [q(0, 1), q(-1, 2)])],
    }
}

fn shifted_terms(rel: &BoundaryRelation, row: usize, phi: DualSupport1D) -> Option<DualSupport1D> {
    rel.shifted
        .iter()
        .filter(|(_, c)| !c[row].is_zero())
        .map(|&(k, _)| phi.affine(k, 2))
        .reduce(DualSupport1D::hull)
}

/// Component supports of the left dual scaling vector. The hull map is
/// monotone, so iterating `I ← I ∪ F(I)` from the shifted terms plus the
/// dilation fixed point 0 stops exactly at the least fixed point.
fn dual_scaling_left_components() -> [DualSupport1D; 2] {
    let rel = dual_scaling_left_relation();
    let phi = dual_support_unit(DualGenerator::Phi);
    let zero = DualSupport1D {
        lo: Rational::zero(),
        hi: Rational::zero(),
    };
    let mut comps = [0, 1].map(|r| {
        shifted_terms(&rel, r, phi)
            .map(|s| s.hull(zero))
            .unwrap_or(zero)
    });
    for _ in 0..64 {
        let next = [0, 1].map(|r| {
            let mut s = comps[r];
            for (c, m) in comps.iter().zip(rel.self_matrix[r]) {
                if !m.is_zero() {
                    s = s.hull(c.affine(0, 2));
                }
            }
            if let Some(t) = shifted_terms(&rel, r, phi) {
                s = s.hull(t);
            }
            s
        });
        if next == comps {
            break;
        }
        comps = next;
    }
    comps
}

fn dual_wavelet_left_components() -> [DualSupport1D; 2] {
    let rel = dual_wavelet_left_relation();
    let phi = dual_support_unit(DualGenerator::Phi);
    let phil = dual_scaling_left_components();
    [0, 1].map(|r| {
        let mut s: Option<DualSupport1D> = shifted_terms(&rel, r, phi);
        for (c, m) in phil.iter().zip(rel.self_matrix[r]) {
            if !m.is_zero() {
                let t = c.affine(0, 2);
                s = Some(s.map_or(t, |s| s.hull(t)));
            }
        }
        s.expect("every row has a term")
    })
}

/// Support of a dual generator at unit scale, derived from the filters and
/// the boundary refinement relations.
pub fn dual_support_unit(g: DualGenerator) -> DualSupport1D {
    let bank = build_filter_bank();
    match g {
        // fixed point of S = (S + [lo, hi]) / 2
        DualGenerator::Phi => DualSupport1D {
            lo: Rational::from(bank.dual_lowpass.lo()),
            hi: Rational::from(bank.dual_lowpass.hi()),
        },
        DualGenerator::Psi => {
            let phi = dual_support_unit(DualGenerator::Phi);
            bank.dual_highpass
                .iter()
                .map(|(k, _)| phi.affine(k, 2))
                .reduce(DualSupport1D::hull)
                .expect("nonempty filter")
        }
        DualGenerator::PhiL => {
            let [a, b] = dual_scaling_left_components();
            a.hull(b)
        }
        DualGenerator::PsiL => {
            let [a, b] = dual_wavelet_left_components();
            a.hull(b)
        }
        DualGenerator::PhiR => dual_support_unit(DualGenerator::PhiL).mirrored(),
        DualGenerator::PsiR => dual_support_unit(DualGenerator::PsiL).mirrored(),
    }
}

/// Dual generator paired with a primal index, together with the translate
/// anchoring it. The two boundary duals each pair with two primal functions.
pub fn dual_partner(idx: &BasisIndex1D) -> (DualGenerator, i64) {
    let n = 1i64 << idx.level;
    let k = idx.translate;
    match idx.family {
        Family::Scaling if k <= 2 => (DualGenerator::PhiL, 0),
        Family::Scaling if k >= n - 2 => (DualGenerator::PhiR, n - 1),
        Family::Scaling => (DualGenerator::Phi, k),
        Family::Wavelet if k <= 1 => (DualGenerator::PsiL, 0),
        Family::Wavelet if k >= n - 2 => (DualGenerator::PsiR, n - 1),
        Family::Wavelet => (DualGenerator::Psi, k),
    }
}

/// `2^{-j}(supp + anchor) ∩ [0, 1]`.
pub fn dual_support(idx: &BasisIndex1D) -> DualSupport1D {
    let (g, anchor) = dual_partner(idx);
    let s = dual_support_unit(g).affine(anchor, 1 << idx.level);
    DualSupport1D {
        lo: s.lo.max(Rational::zero()),
        hi: s.hi.min(Rational::one()),
    }
}
