//! Closed-form scalar tail formulas `f(k) = e^{a k} P(k)`.
//!
//! A formula carries one exponential rate `a` and a polynomial `P` with
//! complex coefficients. Block indices are integers, so `Im a` is reduced to
//! `(-π, π]`; two formulas are the same function on the integers iff their
//! canonical forms are equal.
//!
//! The family is closed under products, scalar multiples, adjoints and
//! index shifts. Sums are closed only when the rates agree; otherwise the
//! result leaves the grammar and [`GrammarOverflow`] is returned.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linops::cexp;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("tail formula leaves the expression grammar: {reason}")]
pub struct GrammarOverflow {
    pub reason: String,
}

impl GrammarOverflow {
    fn new(reason: impl Into<String>) -> Self {
        GrammarOverflow { reason: reason.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("weighted tail series diverges (|r e^a| = {modulus})")]
pub struct DivergentTail {
    pub modulus: f64,
}

/// Supremum of `|f(k)|` over an index range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailSup {
    Finite(f64),
    Unbounded,
}

impl TailSup {
    pub fn max(self, other: TailSup) -> TailSup {
        match (self, other) {
            (TailSup::Finite(a), TailSup::Finite(b)) => TailSup::Finite(a.max(b)),
            _ => TailSup::Unbounded,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            TailSup::Finite(x) => Some(x),
            TailSup::Unbounded => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Formula {
    rate: C64,
    /// Ascending coefficients, no trailing exact zeros.
    poly: Vec<C64>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn canonical_rate(a: C64) -> C64 {
    // in-range rates stay bit-exact so that conjugate rates still cancel
    if a.im > -PI && a.im <= PI {
        return a;
    }
    let mut t = a.im.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    C64::new(a.re, t)
}

fn trim(mut p: Vec<C64>) -> Vec<C64> {
    while p.last() == Some(&ZERO) {
        p.pop();
    }
    p
}

/// Sums terms in an order that does not depend on how they were produced,
/// so `fg` and `gf` agree bit-for-bit.
fn ordered_sum(mut terms: Vec<C64>) -> C64 {
    terms.sort_by(|x, y| match x.re.total_cmp(&y.re) {
        Ordering::Equal => x.im.total_cmp(&y.im),
        o => o,
    });
    terms.into_iter().fold(ZERO, |acc, z| acc + z)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Coefficients of `P(k + s)`.
fn poly_shift(p: &[C64], s: f64) -> Vec<C64> {
    let mut out = vec![ZERO; p.len()];
    for (j, &c) in p.iter().enumerate() {
        for i in 0..=j {
            out[i] += c * binomial(j, i) * s.powi((j - i) as i32);
        }
    }
    trim(out)
}

/// `Σ_{m>=0} m^j z^m` for `|z| < 1` (with `0^0 = 1`), via
/// `N_0 = 1`, `N_{j+1} = z((1-z) N_j' + (j+1) N_j)`, `S_j = N_j / (1-z)^{j+1}`.
fn power_series_sums(z: C64, max_degree: usize) -> Vec<C64> {
    let mut numer: Vec<f64> = vec![1.0];
    let mut out = Vec::with_capacity(max_degree + 1);
    let one_minus = ONE - z;
    for j in 0..=max_degree {
        let n_at_z = numer.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        out.push(n_at_z / one_minus.powu(j as u32 + 1));
        // derivative
        let deriv: Vec<f64> = numer.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect();
        // (1 - z) N' + (j+1) N
        let mut inner = vec![0.0; numer.len() + 1];
        for (i, &c) in deriv.iter().enumerate() {
            inner[i] += c;
            inner[i + 1] -= c;
        }
        for (i, &c) in numer.iter().enumerate() {
            inner[i] += (j + 1) as f64 * c;
        }
        let mut next = vec![0.0; inner.len() + 1];
        for (i, &c) in inner.iter().enumerate() {
            next[i + 1] = c;
        }
        numer = next;
    }
    out
}

impl Formula {
    pub fn zero() -> Self {
        Formula { rate: ZERO, poly: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Formula::polynomial(vec![c])
    }

    pub fn real_constant(c: f64) -> Self {
        Formula::constant(C64::new(c, 0.0))
    }

    /// `Σ_j coeffs[j] k^j`.
    pub fn polynomial(coeffs: Vec<C64>) -> Self {
        let poly = trim(coeffs);
        Formula { rate: ZERO, poly }
    }

    /// `c k^d`.
    pub fn monomial(c: C64, degree: usize) -> Self {
        let mut coeffs = vec![ZERO; degree + 1];
        coeffs[degree] = c;
        Formula::polynomial(coeffs)
    }

    /// The block index `k` itself.
    pub fn index() -> Self {
        Formula::monomial(ONE, 1)
    }

    /// `c e^{a k}`.
    pub fn exponential(c: C64, a: C64) -> Self {
        Formula::new(a, vec![c])
    }

    /// `e^{a k} P(k)`.
    pub fn new(rate: C64, coeffs: Vec<C64>) -> Self {
        let poly = trim(coeffs);
        if poly.is_empty() {
            return Formula::zero();
        }
        Formula { rate: canonical_rate(rate), poly }
    }

    pub fn rate(&self) -> C64 {
        self.rate
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_empty()
    }

    /// Polynomial degree; `None` for the zero formula.
    pub fn degree(&self) -> Option<usize> {
        self.poly.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || (self.rate == ZERO && self.poly.len() == 1)
    }

    /// Value of a constant formula.
    pub fn constant_value(&self) -> Option<C64> {
        if self.is_zero() {
            Some(ZERO)
        } else if self.is_constant() {
            Some(self.poly[0])
        } else {
            None
        }
    }

    pub fn eval(&self, k: usize) -> C64 {
        if self.poly.is_empty() {
            return ZERO;
        }
        let x = k as f64;
        let p = self.poly.iter().rev().fold(ZERO, |acc, &c| acc * x + c);
        if self.rate == ZERO {
            p
        } else {
            cexp(self.rate * x) * p
        }
    }

    pub fn abs_at(&self, k: usize) -> f64 {
        self.eval(k).norm()
    }

    pub fn scale(&self, c: C64) -> Formula {
        Formula::new(self.rate, self.poly.iter().map(|&p| p * c).collect())
    }

    pub fn neg(&self) -> Formula {
        Formula { rate: self.rate, poly: self.poly.iter().map(|&p| -p).collect() }
    }

    /// Pointwise complex conjugate, the tail of the adjoint.
    pub fn conj(&self) -> Formula {
        Formula::new(self.rate.conj(), self.poly.iter().map(|p| p.conj()).collect())
    }

    pub fn add(&self, other: &Formula) -> Result<Formula, GrammarOverflow> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.rate != other.rate {
            return Err(GrammarOverflow::new(format!(
                "sum of tails with exponential rates {} and {}",
                self.rate, other.rate
            )));
        }
        let n = self.poly.len().max(other.poly.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.poly.get(i).copied().unwrap_or(ZERO);
                let b = other.poly.get(i).copied().unwrap_or(ZERO);
                a + b
            })
            .collect();
        Ok(Formula::new(self.rate, coeffs))
    }

    pub fn sub(&self, other: &Formula) -> Result<Formula, GrammarOverflow> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Formula) -> Formula {
        if self.is_zero() || other.is_zero() {
            return Formula::zero();
        }
        let n = self.poly.len() + other.poly.len() - 1;
        let coeffs = (0..n)
            .map(|d| {
                let terms = (0..self.poly.len())
                    .filter(|&i| d >= i && d - i < other.poly.len())
                    .map(|i| self.poly[i] * other.poly[d - i])
                    .collect();
                ordered_sum(terms)
            })
            .collect();
        Formula::new(self.rate + other.rate, coeffs)
    }

    pub fn pow(&self, n: u32) -> Formula {
        (0..n).fold(Formula::constant(ONE), |acc, _| acc.mul(self))
    }

    /// `g(k) = f(k + s)`.
    pub fn shift(&self, s: i64) -> Formula {
        if self.is_zero() {
            return Formula::zero();
        }
        let factor = cexp(self.rate * s as f64);
        let shifted = poly_shift(&self.poly, s as f64);
        Formula::new(self.rate, shifted.into_iter().map(|c| c * factor).collect())
    }

    /// `e^{t f(k)}`, in the grammar only for `f(k) = c0 + c1 k`.
    pub fn exp_scaled(&self, t: f64) -> Result<Formula, GrammarOverflow> {
        if self.is_zero() {
            return Ok(Formula::constant(ONE));
        }
        if self.rate != ZERO || self.poly.len() > 2 {
            return Err(GrammarOverflow::new(format!("exponential of non-linear tail {self}")));
        }
        let c0 = self.poly[0];
        let c1 = self.poly.get(1).copied().unwrap_or(ZERO);
        Ok(Formula::exponential(cexp(c0 * t), c1 * t))
    }

    /// `f* = -f` on every integer index, within `tol` on coefficients.
    pub fn is_skew(&self, tol: f64) -> bool {
        let c = self.conj();
        if self.is_zero() {
            return true;
        }
        c.rate == self.rate
            && c.poly.len() == self.poly.len()
            && c.poly.iter().zip(&self.poly).all(|(x, y)| (x + y).norm() <= tol)
    }

    /// `f* = f` on every integer index.
    pub fn is_real(&self, tol: f64) -> bool {
        let c = self.conj();
        if self.is_zero() {
            return true;
        }
        c.rate == self.rate
            && c.poly.len() == self.poly.len()
            && c.poly.iter().zip(&self.poly).all(|(x, y)| (x - y).norm() <= tol)
    }

    /// `|f(k)| = 1` for every `k`. Needs `Re a = 0` exactly and a constant polynomial.
    pub fn is_unimodular(&self, tol: f64) -> bool {
        !self.is_zero() && self.rate.re == 0.0 && self.poly.len() == 1 && (self.poly[0].norm() - 1.0).abs() <= tol
    }

    /// Coefficients of the real polynomial `|P(x)|^2`.
    fn abs_sq_poly(&self) -> Vec<f64> {
        let n = self.poly.len();
        let mut q = vec![0.0; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                q[i + j] += (self.poly[i] * self.poly[j].conj()).re;
            }
        }
        q
    }

    /// Index beyond which `|f(k)|` is monotone in `k`.
    ///
    /// Uses the Cauchy bound on the real roots of `d/dx (e^{2αx} |P(x)|^2)
    /// e^{-2αx} = 2α Q + Q'`.
    pub fn monotone_from(&self) -> f64 {
        if self.is_constant() {
            return 0.0;
        }
        let alpha = self.rate.re;
        let q = self.abs_sq_poly();
        let mut h: Vec<f64> = q.iter().map(|&c| 2.0 * alpha * c).collect();
        for (i, &c) in q.iter().enumerate().skip(1) {
            h[i - 1] += i as f64 * c;
        }
        while h.len() > 1 && *h.last().unwrap() == 0.0 {
            h.pop();
        }
        let lead = *h.last().unwrap();
        if h.len() == 1 || lead == 0.0 {
            return 0.0;
        }
        let m = h[..h.len() - 1].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
        1.0 + m
    }

    /// Whether `|f(k)| -> ∞` (as opposed to bounded).
    pub fn is_unbounded(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        let alpha = self.rate.re;
        alpha > 0.0 || (alpha == 0.0 && self.poly.len() > 1)
    }

    /// Exact `sup_{k >= start} |f(k)|`.
    pub fn sup_abs_from(&self, start: usize) -> TailSup {
        if self.is_zero() {
            return TailSup::Finite(0.0);
        }
        if self.is_unbounded() {
            return TailSup::Unbounded;
        }
        if self.rate.re == 0.0 {
            // constant modulus
            return TailSup::Finite(self.poly[0].norm());
        }
        let end = (self.monotone_from().ceil() as usize).max(start);
        let sup = (start..=end).map(|k| self.abs_at(k)).fold(0.0, f64::max);
        TailSup::Finite(sup)
    }

    /// `sup_{start <= k < end} |f(k)|` over a finite range.
    pub fn sup_abs_range(&self, start: usize, end: usize) -> f64 {
        (start..end).map(|k| self.abs_at(k)).fold(0.0, f64::max)
    }

    /// `Σ_{k >= start} w_start r^{k-start} f(k)` in closed form.
    pub fn geometric_sum(&self, start: usize, w_start: f64, ratio: f64) -> Result<C64, DivergentTail> {
        if self.is_zero() {
            return Ok(ZERO);
        }
        let z = cexp(self.rate) * ratio;
        if z.norm() >= 1.0 {
            return Err(DivergentTail { modulus: z.norm() });
        }
        // f(start + m) = e^{a start} e^{a m} P(start + m)
        let shifted = poly_shift(&self.poly, start as f64);
        let sums = power_series_sums(z, shifted.len().saturating_sub(1));
        let total = ordered_sum(shifted.iter().zip(&sums).map(|(c, s)| c * s).collect());
        Ok(total * cexp(self.rate * start as f64) * w_start)
    }

    /// Total weight of `{k >= start : |f(k)| > eps}` under geometric weights
    /// `w_start r^{k-start}`.
    pub fn mass_above(&self, eps: f64, start: usize, w_start: f64, ratio: f64) -> f64 {
        let weight = |k: usize| w_start * ratio_pow(ratio, k - start);
        let mass_from = |k: usize| weight(k) / (1.0 - ratio);
        if self.is_zero() {
            return 0.0;
        }
        if self.rate.re == 0.0 && self.poly.len() == 1 {
            return if self.poly[0].norm() > eps { mass_from(start) } else { 0.0 };
        }
        let bound = (self.monotone_from().ceil() as usize).max(start);
        let mut mass = 0.0;
        for k in start..=bound {
            if self.abs_at(k) > eps {
                mass += weight(k);
            }
        }
        let k = bound + 1;
        if self.is_unbounded() {
            // increasing beyond `bound`
            mass + mass_from(first_from(k, |j| self.abs_at(j) > eps))
        } else {
            // decreasing to zero beyond `bound`
            let end = first_from(k, |j| self.abs_at(j) <= eps);
            mass + weight(k) * (1.0 - ratio_pow(ratio, end - k)) / (1.0 - ratio)
        }
    }
}

fn ratio_pow(ratio: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(n) => ratio.powi(n),
        Err(_) => ratio.powf(n as f64),
    }
}

/// Smallest `k >= from` with `pred(k)`, for a predicate that stays true once
/// it holds; exponential search, then bisection.
fn first_from(from: usize, pred: impl Fn(usize) -> bool) -> usize {
    if pred(from) {
        return from;
    }
    let (mut lo, mut step) = (from, 1usize);
    let mut hi = from + 1;
    while !pred(hi) {
        lo = hi;
        step = step.saturating_mul(2);
        hi = from.saturating_add(step);
        if hi == usize::MAX {
            return hi;
        }
    }
    // pred(lo) is false, pred(hi) is true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn fmt_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("({}{}{}i)", z.re, sign, z.im.abs())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .poly
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(d, &c)| match d {
                0 => fmt_complex(c),
                1 => format!("{}*k", fmt_complex(c)),
                _ => format!("{}*k^{}", fmt_complex(c), d),
            })
            .collect();
        let poly = terms.join(" + ");
        if self.rate == ZERO {
            write!(f, "{poly}")
        } else {
            write!(f, "exp({}*k)*({})", fmt_complex(self.rate), poly)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_and_arithmetic() {
        let k = Formula::index();
        assert_eq!(k.eval(5), c(5.0, 0.0));
        let one = Formula::real_constant(1.0);
        assert_eq!(k.mul(&one), k);
        let sum = k.add(&one).unwrap();
        assert_eq!(sum.eval(3), c(4.0, 0.0));
        assert!(sum.sub(&sum).unwrap().is_zero());
    }

    #[test]
    fn mixed_rate_sum_overflows() {
        let a = Formula::exponential(c(1.0, 0.0), c(-1.0, 0.0));
        let b = Formula::index();
        assert!(a.add(&b).is_err());
        // products always stay inside
        let p = a.mul(&b);
        assert!((p.eval(2) - c(2.0 * (-2.0f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn product_commutes_bitwise() {
        let f = Formula::polynomial(vec![c(0.1, 0.3), c(1.7, -0.2), c(-0.4, 0.9)]);
        let g = Formula::polynomial(vec![c(2.1, 0.0), c(0.33, 0.7), c(1.1, -1.3)]);
        assert_eq!(f.mul(&g), g.mul(&f));
    }

    #[test]
    fn rates_are_reduced_mod_two_pi() {
        let a = Formula::exponential(c(1.0, 0.0), c(0.0, 3.0 * PI));
        let b = Formula::exponential(c(1.0, 0.0), c(0.0, PI));
        assert!((a.rate().im - b.rate().im).abs() < 1e-12);
        assert!((a.eval(3) - b.eval(3)).norm() < 1e-12);
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let f = Formula::new(c(-0.3, 0.2), vec![c(1.0, 0.5), c(0.0, 2.0), c(0.25, 0.0)]);
        let g = f.shift(-3);
        for k in 3..12 {
            assert!((g.eval(k) - f.eval(k - 3)).norm() < 1e-12 * (1.0 + f.abs_at(k - 3)));
        }
    }

    #[test]
    fn sup_of_standard_tails() {
        assert_eq!(Formula::zero().sup_abs_from(0), TailSup::Finite(0.0));
        assert_eq!(Formula::index().sup_abs_from(0), TailSup::Unbounded);
        let decay = Formula::exponential(c(1.0, 0.0), c(-1.0, 0.0));
        assert_eq!(decay.sup_abs_from(2), TailSup::Finite((-2.0f64).exp()));
        // k e^{-k/4} peaks at k = 4
        let bump = Formula::new(c(-0.25, 0.0), vec![ZERO, ONE]);
        let TailSup::Finite(s) = bump.sup_abs_from(0) else { panic!() };
        assert!((s - 4.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sup_agrees_with_brute_force() {
        let f = Formula::new(c(-0.05, 0.4), vec![c(0.5, 0.1), c(-1.0, 0.2), c(0.2, 0.0)]);
        let brute = (7..20_000).map(|k| f.abs_at(k)).fold(0.0, f64::max);
        assert_eq!(f.sup_abs_from(7), TailSup::Finite(brute));
    }

    #[test]
    fn geometric_sum_matches_truncated_series() {
        let f = Formula::new(c(-0.1, 0.7), vec![c(1.0, -0.5), c(0.3, 0.0), c(0.0, 0.05)]);
        let (start, w, r) = (4usize, 0.03, 0.6);
        let closed = f.geometric_sum(start, w, r).unwrap();
        let brute: C64 = (0..400).map(|m| f.eval(start + m) * w * r.powi(m as i32)).sum();
        assert!((closed - brute).norm() < 1e-13);
    }

    #[test]
    fn geometric_sum_detects_divergence() {
        let f = Formula::exponential(ONE, c(1.0, 0.0));
        assert!(f.geometric_sum(0, 0.5, 0.5).is_err());
        assert!(Formula::index().geometric_sum(0, 0.5, 0.5).is_ok());
    }

    #[test]
    fn mass_above_matches_brute_force() {
        let (start, w, r) = (3usize, 0.0625, 0.5);
        let cases = [
            Formula::index(),
            Formula::new(c(-0.2, 0.0), vec![c(3.0, 0.0), c(1.0, 1.0)]),
            Formula::real_constant(0.7),
            Formula::new(c(0.05, 0.0), vec![c(0.01, 0.0)]),
        ];
        for f in &cases {
            for &eps in &[0.05, 0.5, 1.0, 4.0, 10.0] {
                let brute: f64 =
                    (start..2000).filter(|&k| f.abs_at(k) > eps).map(|k| w * f64::powi(r, (k - start) as i32)).sum();
                let exact = f.mass_above(eps, start, w, r);
                assert!((exact - brute).abs() < 1e-15, "{f} eps={eps}: {exact} vs {brute}");
            }
        }
    }

    #[test]
    fn skew_and_unimodular_predicates() {
        let skew = Formula::polynomial(vec![c(0.0, 1.0), c(0.0, -2.0)]);
        assert!(skew.is_skew(0.0));
        assert!(!Formula::index().is_skew(0.0));
        let e = skew.exp_scaled(0.5).unwrap();
        assert!(e.is_unimodular(1e-15));
        assert!((e.eval(4) - cexp(skew.eval(4) * 0.5)).norm() < 1e-14);
        assert!(Formula::index().pow(2).exp_scaled(1.0).is_err());
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(Formula::index().to_string(), "1*k");
        assert_eq!(Formula::zero().to_string(), "0");
        let e = Formula::exponential(c(2.0, 0.0), c(-0.5, 0.0));
        assert_eq!(e.to_string(), "exp(-0.5*k)*(2)");
    }
}
