//! Exact bias and analytic rank.
//!
//! For a multilinear `T` the bias `E_x[χ(T(x))]` equals the probability that
//! fixing slots `1..d` leaves the zero linear form in slot 0, so it is the
//! rational `K / q^e` with `e = n(d-1)`. Three engines compute `K`:
//!
//! * [`bias_fiber`] counts zero fibers directly, walking fixings in odometer
//!   order and updating partial contractions incrementally;
//! * [`bias_recursive`] reduces to order 2, where the bias is `q^(-rank)`;
//! * [`bias_histogram`] evaluates `T` on every input and recovers the bias
//!   from the value distribution.
//!
//! They share no counting code and must agree exactly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gf::{PrimeField, RankWorkspace};
use crate::tensor::{contract_slot, MultiComponentForm, Tensor};

/// The exact rational `numerator / base^exponent`. Not reduced; equality and
/// ordering cross-multiply.
#[derive(Debug, Clone)]
pub struct BiasValue {
    numerator: BigUint,
    exponent: u32,
    base: u32,
}

impl BiasValue {
    pub fn new(numerator: BigUint, exponent: u32, base: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidArgument(format!("base {base} below 2")));
        }
        let v = Self {
            numerator,
            exponent,
            base,
        };
        if v.numerator > v.denominator() {
            return Err(Error::InvalidArgument(format!("{v} exceeds 1")));
        }
        Ok(v)
    }

    pub fn one(base: u32) -> Self {
        Self {
            numerator: BigUint::one(),
            exponent: 0,
            base,
        }
    }

    /// `base^(-r)`.
    pub fn inverse_power(base: u32, r: u32) -> Self {
        Self {
            numerator: BigUint::one(),
            exponent: r,
            base,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::from(self.base).pow(self.exponent)
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.numerator == self.denominator()
    }

    /// Product of two values over the same base.
    pub fn mul(&self, other: &BiasValue) -> Result<BiasValue> {
        if self.base != other.base {
            return Err(Error::InvalidArgument(format!(
                "bases {} and {} differ",
                self.base, other.base
            )));
        }
        Ok(BiasValue {
            numerator: &self.numerator * &other.numerator,
            exponent: self.exponent + other.exponent,
            base: self.base,
        })
    }

    /// `self - other` as a float, for slack reporting only.
    pub fn difference_f64(&self, other: &BiasValue) -> f64 {
        let lhs = BigInt::from(&self.numerator * other.denominator());
        let rhs = BigInt::from(&other.numerator * self.denominator());
        let den = self.denominator() * other.denominator();
        let diff = lhs - rhs;
        let mag = ratio_to_f64(diff.magnitude(), &den);
        if diff.sign() == Sign::Minus {
            -mag
        } else {
            mag
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.numerator, &self.denominator())
    }

    /// `⌈-log_q(self)⌉`: the least integer `r` with `q^(-r) <= self`.
    /// `None` for zero.
    pub fn ceil_log_inverse(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let den = self.denominator();
        let q = BigUint::from(self.base);
        let mut lhs = self.numerator.clone();
        let mut r = 0;
        while lhs < den {
            lhs *= &q;
            r += 1;
        }
        Some(r)
    }
}

impl PartialEq for BiasValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BiasValue {}

impl PartialOrd for BiasValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BiasValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.numerator * other.denominator()).cmp(&(&other.numerator * self.denominator()))
    }
}

impl fmt::Display for BiasValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}^{}", self.numerator, self.base, self.exponent)
    }
}

/// `num / den` rounded to `f64` with about 60 significant bits of quotient.
pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mantissa = q.to_f64().unwrap_or(f64::INFINITY);
    mantissa * 2f64.powi(-shift as i32)
}

/// `-log_q(bias)`, with the exact bias retained.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRank {
    pub exact: BiasValue,
    /// Relative error at most 1e-12.
    pub approx: f64,
    /// Set iff the bias is zero, which only happens for nonzero linear forms.
    pub infinite: bool,
}

impl AnalyticRank {
    /// Exact comparison `arank <= r`.
    pub fn at_most(&self, r: u32) -> bool {
        !self.infinite && self.exact >= BiasValue::inverse_power(self.exact.base, r)
    }
}

pub fn analytic_rank(b: &BiasValue) -> AnalyticRank {
    if b.is_zero() {
        return AnalyticRank {
            exact: b.clone(),
            approx: f64::INFINITY,
            infinite: true,
        };
    }
    // -log_q(1 - δ) with δ = (q^e - K) / q^e computed exactly, so values
    // near zero keep full relative precision.
    let den = b.denominator();
    let delta = ratio_to_f64(&(&den - &b.numerator), &den);
    let approx = if delta < 0.5 {
        -(-delta).ln_1p() / (b.base as f64).ln()
    } else {
        // Far from 1; use the logarithm of the bias directly.
        let bits = b.numerator.bits().max(64) - 64;
        let head = (&b.numerator >> bits as usize).to_f64().unwrap();
        let ln_k = head.ln() + bits as f64 * std::f64::consts::LN_2;
        b.exponent as f64 - ln_k / (b.base as f64).ln()
    };
    AnalyticRank {
        exact: b.clone(),
        approx: approx.max(0.0),
        infinite: false,
    }
}

/// `c(d, q) = -log_q(1 - (1 - 1/q)^(d-1))`.
pub fn c_constant(d: u32, q: u64) -> Result<f64> {
    if d < 2 || q < 2 {
        return Err(Error::InvalidArgument(format!(
            "c(d, q) needs d >= 2 and q >= 2, got d = {d}, q = {q}"
        )));
    }
    let qf = q as f64;
    let log_miss = (d - 1) as f64 * (-1.0 / qf).ln_1p();
    let hit = -log_miss.exp_m1();
    Ok(-hit.ln() / qf.ln())
}

/// The two stated lower bounds on `c(d, q)`: `2^(-d)`, and
/// `1 - log(d-1)/log(q)` which is only informative when `q >= d`.
pub fn c_lower_bounds(d: u32, q: u64) -> (f64, Option<f64>) {
    let always = 2f64.powi(-(d as i32));
    let large_field = (q >= d as u64).then(|| 1.0 - ((d - 1) as f64).ln() / (q as f64).ln());
    (always, large_field)
}

/// Exact bias of a diagonal tensor with `n` nonzero diagonal coefficients:
/// `(1 - (1 - 1/q)^(d-1))^n`, as `(q^(d-1) - (q-1)^(d-1))^n / q^(n(d-1))`.
pub fn diagonal_bias(q: u32, n: u32, d: u32) -> BiasValue {
    assert!(d >= 1);
    let qb = BigUint::from(q);
    let hit = qb.pow(d - 1) - BigUint::from(q - 1).pow(d - 1);
    BiasValue {
        numerator: hit.pow(n),
        exponent: n * (d - 1),
        base: q,
    }
}

fn require_order(t: &Tensor, min: usize) -> Result<()> {
    if t.order() < min {
        return Err(Error::InvalidArgument(format!(
            "order {} tensor; at least {min} required",
            t.order()
        )));
    }
    Ok(())
}

fn exponent_for(t: &Tensor) -> Result<u32> {
    let e = t.dim() as u64 * (t.order() as u64 - 1);
    u32::try_from(e).map_err(|_| Error::InvalidArgument(format!("exponent {e} too large")))
}

/// Counts fixings of `(x^1, …, x^{d-1})` whose contraction leaves the zero
/// linear form in slot 0.
pub fn bias_fiber(t: &Tensor, budget: Budget) -> Result<BiasValue> {
    require_order(t, 1)?;
    let q = t.field().p();
    if t.order() == 1 {
        let k = if t.is_zero() { 1u32 } else { 0 };
        return Ok(BiasValue {
            numerator: BigUint::from(k),
            exponent: 0,
            base: q,
        });
    }
    let e = exponent_for(t)?;
    budget.check_power(q as u64, e as u64)?;
    let mut zero_fibers: u64 = 0;
    walk_contractions(t.field(), t.coeffs(), t.dim(), t.order(), 1, &mut |form| {
        if form.iter().all(|&c| c == 0) {
            // at most q^e <= budget, so no overflow
            zero_fibers += 1;
        }
    });
    Ok(BiasValue {
        numerator: BigUint::from(zero_fibers),
        exponent: e,
        base: q,
    })
}

/// Visits the contraction of slots `leaf_order..order` of `data` with every
/// assignment in `F_p^n`, last slot outermost, each slot's vector in odometer
/// order (coordinate 0 fastest).
///
/// Every odometer step adds exactly one to each changed coordinate (a wrap
/// `p-1 -> 0` is also `+1` mod `p`), so the contraction is updated by adding
/// one slice per changed coordinate.
pub(crate) fn walk_contractions<F: FnMut(&[u32])>(
    field: PrimeField,
    data: &[u32],
    n: usize,
    order: usize,
    leaf_order: usize,
    leaf: &mut F,
) {
    if order == leaf_order {
        leaf(data);
        return;
    }
    let p = field.p();
    let inner = n.pow(order as u32 - 1);
    let slices: Vec<Vec<u32>> = (0..n)
        .map(|k| (0..inner).map(|flat| data[flat * n + k]).collect())
        .collect();
    let mut current = vec![0u32; inner];
    let mut digits = vec![0u32; n];
    loop {
        walk_contractions(field, &current, n, order - 1, leaf_order, leaf);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            for (c, &s) in current.iter_mut().zip(&slices[k]) {
                let t = *c + s;
                *c = if t >= p { t - p } else { t };
            }
            digits[k] += 1;
            if digits[k] == p {
                digits[k] = 0;
                k += 1;
            } else {
                break;
            }
        }
    }
}

/// Reduces to order-2 slices, where the bias is `q^(-rank)`, and averages
/// over all fixings of slots `2..d`.
pub fn bias_recursive(t: &Tensor, budget: Budget) -> Result<BiasValue> {
    require_order(t, 2)?;
    let field = t.field();
    let q = field.p();
    let n = t.dim();
    let e = exponent_for(t)?;
    budget.check_power(q as u64, n as u64 * (t.order() as u64 - 2))?;

    let mut rank_counts = vec![0u64; n + 1];
    let mut ws = RankWorkspace::new(field);
    matrices_by_fixing(field, t.coeffs(), n, t.order(), &mut |m| {
        rank_counts[ws.rank(m, n, n)] += 1;
    });
    let qb = BigUint::from(q);
    let mut k = BigUint::zero();
    for (r, &count) in rank_counts.iter().enumerate() {
        if count > 0 {
            k += BigUint::from(count) * qb.pow((n - r) as u32);
        }
    }
    Ok(BiasValue {
        numerator: k,
        exponent: e,
        base: q,
    })
}

/// Fixes the last slot to every vector of `F_p^n`, recursing until an
/// `n x n` matrix remains. Outer levels contract directly; the final level
/// steps `x` through `F_p^n` and adds the slice `T[.., .., k]` for each
/// coordinate `k` that moved.
fn matrices_by_fixing<F: FnMut(&[u32])>(field: PrimeField, data: &[u32], n: usize, order: usize, visit: &mut F) {
    if order == 2 {
        visit(data);
        return;
    }
    let p = field.p();
    let mut x = vec![0u32; n];
    if order > 3 {
        loop {
            let reduced = contract_slot(field, data, n, order, order - 1, &x);
            matrices_by_fixing(field, &reduced, n, order - 1, visit);
            if !next_vector(&mut x, p) {
                return;
            }
        }
    }
    let slices: Vec<Vec<u32>> = (0..n)
        .map(|k| (0..n * n).map(|ij| data[ij * n + k]).collect())
        .collect();
    let mut m = vec![0u32; n * n];
    loop {
        visit(&m);
        let mut k = 0;
        while k < n {
            for (a, &b) in m.iter_mut().zip(&slices[k]) {
                let s = *a + b;
                *a = if s >= p { s - p } else { s };
            }
            x[k] += 1;
            if x[k] < p {
                break;
            }
            x[k] = 0;
            k += 1;
        }
        if k == n {
            return;
        }
    }
}

/// Next vector in `F_p^n`, coordinate 0 fastest; false after wrapping to zero.
fn next_vector(x: &mut [u32], p: u32) -> bool {
    for c in x.iter_mut() {
        *c += 1;
        if *c < p {
            return true;
        }
        *c = 0;
    }
    false
}

/// Counts `N_v = #{x : F(x) = v}` over the whole domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueHistogram {
    pub p: u32,
    /// Nonzero counts only.
    pub counts: BTreeMap<u32, BigUint>,
    pub domain_size: BigUint,
}

impl ValueHistogram {
    pub fn count(&self, v: u32) -> BigUint {
        self.counts.get(&v).cloned().unwrap_or_default()
    }

    fn from_dense(p: u32, dense: &[u64], sparse: &BTreeMap<u32, u64>) -> Self {
        let mut counts = BTreeMap::new();
        for (v, &c) in dense.iter().enumerate() {
            if c > 0 {
                counts.insert(v as u32, BigUint::from(c));
            }
        }
        for (&v, &c) in sparse {
            counts.insert(v, BigUint::from(c));
        }
        let domain_size = counts.values().sum();
        Self {
            p,
            counts,
            domain_size,
        }
    }
}

/// Tallies values into a dense array for small `p`, a map otherwise.
struct Tally {
    dense: Vec<u64>,
    sparse: BTreeMap<u32, u64>,
}

impl Tally {
    fn new(p: u32) -> Self {
        let dense = if p <= 1 << 16 { vec![0; p as usize] } else { Vec::new() };
        Self {
            dense,
            sparse: BTreeMap::new(),
        }
    }

    #[inline]
    fn add(&mut self, v: u32) {
        if let Some(slot) = self.dense.get_mut(v as usize) {
            *slot += 1;
        } else {
            *self.sparse.entry(v).or_default() += 1;
        }
    }
}

/// Evaluates `T` on all `q^(nd)` inputs. Since `N_v` is the same for every
/// `v != 0` and the nontrivial character values sum to `-1`,
/// `bias = (q·N_0 - q^(nd)) / ((q-1)·q^(nd))`, rewritten over `q^(n(d-1))`.
pub fn bias_histogram(t: &Tensor, budget: Budget) -> Result<(ValueHistogram, BiasValue)> {
    require_order(t, 1)?;
    let field = t.field();
    let q = field.p();
    let n = t.dim();
    let total_exp = n as u64 * t.order() as u64;
    budget.check_power(q as u64, total_exp)?;

    let mut tally = Tally::new(q);
    let mut x = vec![vec![0u32; n]; t.order()];
    let coeffs = t.coeffs();
    let d = t.order();
    loop {
        tally.add(eval_raw(field, coeffs, n, d, &x));
        if !advance(&mut x, q) {
            break;
        }
    }
    let hist = ValueHistogram::from_dense(q, &tally.dense, &tally.sparse);

    let qb = BigUint::from(q);
    let domain = qb.pow(total_exp as u32);
    let n0 = hist.count(0);
    let scaled = &n0 * &qb;
    if scaled < domain {
        return Err(Error::Inconsistent(format!(
            "N_0 = {n0} below q^(nd-1): negative bias for a multilinear form"
        )));
    }
    let den = BigUint::from(q - 1) * qb.pow(n as u32);
    let num = scaled - &domain;
    if !(&num % &den).is_zero() {
        return Err(Error::Inconsistent(format!(
            "histogram bias {num}/({den}) is not a multiple of q^-(n(d-1))"
        )));
    }
    let bias = BiasValue::new(num / den, exponent_for(t)?, q)?;
    Ok((hist, bias))
}

/// Full multilinear sum, no incremental tricks.
fn eval_raw(field: PrimeField, coeffs: &[u32], n: usize, d: usize, x: &[Vec<u32>]) -> u32 {
    let p = field.p() as u64;
    let mut acc = 0u64;
    for (flat, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut rem = flat;
        let mut term = c as u64;
        for slot in (0..d).rev() {
            term = term * x[slot][rem % n] as u64 % p;
            rem /= n;
            if term == 0 {
                break;
            }
        }
        acc += term;
    }
    (acc % p) as u32
}

/// Steps a tuple of vectors through `(F_p^n)^d`; false once it wraps to zero.
fn advance(x: &mut [Vec<u32>], p: u32) -> bool {
    for v in x.iter_mut() {
        for c in v.iter_mut() {
            *c += 1;
            if *c < p {
                return true;
            }
            *c = 0;
        }
    }
    false
}

/// Signed exact bias `numerator / base^exponent`, used when `χ` is real (`p = 2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedBias {
    pub numerator: BigInt,
    pub exponent: u32,
    pub base: u32,
}

impl SignedBias {
    /// Exact `|self| <= other`.
    pub fn abs_at_most(&self, other: &BiasValue) -> bool {
        let lhs = self.numerator.abs().to_biguint().unwrap() * other.denominator();
        let rhs = other.numerator() * BigUint::from(self.base).pow(self.exponent);
        lhs <= rhs
    }

    pub fn to_f64(&self) -> f64 {
        let den = BigUint::from(self.base).pow(self.exponent);
        let mag = ratio_to_f64(self.numerator.magnitude(), &den);
        if self.numerator.is_negative() {
            -mag
        } else {
            mag
        }
    }
}

/// Bias of a sum of tensors on slot subsets.
#[derive(Debug, Clone)]
pub struct MultiformBias {
    pub histogram: ValueHistogram,
    pub value: Complex64,
    pub magnitude: f64,
    /// Bound on `|value - true bias|` from floating rounding.
    pub error_bound: f64,
    /// Present when `p = 2`.
    pub exact: Option<SignedBias>,
}

/// `(1/q^(nd)) Σ_v N_v χ(v)` with `χ(v) = exp(2πiv/p)`.
pub fn bias_multiform(r: &MultiComponentForm, budget: Budget) -> Result<MultiformBias> {
    let field = r.field();
    let q = field.p();
    let n = r.dim();
    let d = r.order();
    let total_exp = n as u64 * d as u64;
    budget.check_power(q as u64, total_exp)?;

    let comps: Vec<(Vec<usize>, &Tensor)> = r
        .components()
        .iter()
        .map(|(set, t)| (set.slots().collect(), t))
        .collect();
    let mut tally = Tally::new(q);
    let mut x = vec![vec![0u32; n]; d];
    loop {
        let mut acc = 0u32;
        for (slots, t) in &comps {
            let sub: Vec<Vec<u32>> = slots.iter().map(|&s| x[s].clone()).collect();
            let v = if t.order() == 0 {
                t.coeffs()[0]
            } else {
                eval_raw(field, t.coeffs(), n, t.order(), &sub)
            };
            acc = field.add(acc, v);
        }
        tally.add(acc);
        if !advance(&mut x, q) {
            break;
        }
    }
    let histogram = ValueHistogram::from_dense(q, &tally.dense, &tally.sparse);
    let domain = &histogram.domain_size;

    let mut value = Complex64::new(0.0, 0.0);
    for (&v, count) in &histogram.counts {
        let w = ratio_to_f64(count, domain);
        let angle = 2.0 * PI * v as f64 / q as f64;
        value += Complex64::new(w * angle.cos(), w * angle.sin());
    }
    // Each term carries a few ulps of error and the weights sum to one.
    let error_bound = 4.0 * (histogram.counts.len() as f64 + 1.0) * f64::EPSILON;

    let exact = (q == 2).then(|| {
        let n0 = BigInt::from(histogram.count(0));
        let n1 = BigInt::from(histogram.count(1));
        SignedBias {
            numerator: n0 - n1,
            exponent: total_exp as u32,
            base: 2,
        }
    });
    Ok(MultiformBias {
        magnitude: value.norm(),
        histogram,
        value,
        error_bound,
        exact,
    })
}

/// Which engine(s) to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Fiber,
    Recursive,
    Histogram,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Fiber, Engine::Recursive, Engine::Histogram];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Fiber => "fiber",
            Engine::Recursive => "recursive",
            Engine::Histogram => "histogram",
        }
    }

    pub fn run(self, t: &Tensor, budget: Budget) -> Result<BiasValue> {
        match self {
            Engine::Fiber => bias_fiber(t, budget),
            Engine::Recursive => bias_recursive(t, budget),
            Engine::Histogram => bias_histogram(t, budget).map(|(_, b)| b),
        }
    }
}

/// Bias via the cheapest engine; recursion when the fiber walk would not fit.
pub fn bias(t: &Tensor, budget: Budget) -> Result<BiasValue> {
    match bias_fiber(t, budget) {
        Err(Error::BudgetExceeded { .. }) if t.order() >= 2 => bias_recursive(t, budget),
        other => other,
    }
}

/// Runs every engine and fails unless all agree.
pub fn bias_all_engines(t: &Tensor, budget: Budget) -> Result<Vec<(Engine, BiasValue)>> {
    let mut out = Vec::new();
    for engine in Engine::ALL {
        if engine == Engine::Recursive && t.order() < 2 {
            continue;
        }
        out.push((engine, engine.run(t, budget)?));
    }
    if let Some((first_engine, first)) = out.first() {
        for (engine, b) in &out[1..] {
            if b != first {
                return Err(Error::Inconsistent(format!(
                    "{} gives {first}, {} gives {b}",
                    first_engine.name(),
                    engine.name()
                )));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{FMatrix, FVector};
    use crate::tensor::{SlotAssignment, SlotSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn frac(k: u64, e: u32, q: u32) -> BiasValue {
        BiasValue::new(BigUint::from(k), e, q).unwrap()
    }

    const B: Budget = Budget::DEFAULT;

    /// Zero-fiber count recomputing each contraction from scratch.
    fn naive_fiber(t: &Tensor) -> BiasValue {
        let field = t.field();
        let (n, d) = (t.dim(), t.order());
        let mut xs: Vec<Vec<u32>> = vec![vec![0; n]; d - 1];
        let mut count = 0u64;
        loop {
            let mut a = SlotAssignment::new();
            for (i, x) in xs.iter().enumerate() {
                a = a.fix(i + 1, FVector::new(field, x.clone()).unwrap());
            }
            if t.contract(&a).unwrap().is_zero() {
                count += 1;
            }
            if !advance(&mut xs, field.p()) {
                break;
            }
        }
        frac(count, (n * (d - 1)) as u32, field.p())
    }

    #[test]
    fn fiber_examples() {
        let t = Tensor::from_entries(3, 2, 2, &[(vec![0, 0], 1)]).unwrap();
        assert_eq!(bias_fiber(&t, B).unwrap(), frac(1, 1, 3));

        for (p, n, d) in [(2, 2, 3), (3, 1, 2), (5, 0, 3), (2, 3, 1)] {
            let z = Tensor::zeros(f(p), n, d).unwrap();
            assert!(bias_fiber(&z, B).unwrap().is_one());
        }

        let id1 = Tensor::identity(f(2), 1, 3).unwrap();
        assert_eq!(bias_fiber(&id1, B).unwrap(), frac(3, 2, 2));
        let id2 = Tensor::identity(f(2), 2, 3).unwrap();
        assert_eq!(bias_fiber(&id2, B).unwrap(), frac(9, 4, 2));
    }

    #[test]
    fn fiber_order_one() {
        let lin = Tensor::from_entries(5, 2, 1, &[(vec![1], 3)]).unwrap();
        let b = bias_fiber(&lin, B).unwrap();
        assert!(b.is_zero());
        let ar = analytic_rank(&b);
        assert!(ar.infinite);
        assert!(ar.approx.is_infinite());
    }

    #[test]
    fn incremental_walk_matches_naive_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (p, n, d) in [(2, 2, 3), (3, 2, 3), (2, 2, 4), (5, 2, 2), (7, 1, 4), (2, 3, 3)] {
            for _ in 0..25 {
                let t = Tensor::random_with(f(p), n, d, &mut rng).unwrap();
                assert_eq!(bias_fiber(&t, B).unwrap(), naive_fiber(&t));
            }
        }
    }

    #[test]
    fn recursive_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for p in [2u64, 3, 5] {
            for _ in 0..20 {
                let m = FMatrix::random(f(p), 3, 3, &mut rng);
                let t = Tensor::new(f(p), 2, 3, m.data().to_vec()).unwrap();
                let r = m.rank() as u32;
                assert_eq!(
                    bias_recursive(&t, B).unwrap(),
                    BiasValue::inverse_power(p as u32, r)
                );
            }
        }
        let id = Tensor::identity(f(2), 3, 3).unwrap();
        assert_eq!(bias_recursive(&id, B).unwrap(), frac(27, 6, 2));
        for _ in 0..30 {
            let t = Tensor::random_with(f(3), 3, 3, &mut rng).unwrap();
            assert_eq!(bias_recursive(&t, B).unwrap(), bias_fiber(&t, B).unwrap());
        }
        assert!(bias_recursive(&Tensor::zeros(f(2), 2, 1).unwrap(), B).is_err());
    }

    #[test]
    fn histogram_examples() {
        let z = Tensor::zeros(f(2), 1, 2).unwrap();
        let (h, b) = bias_histogram(&z, B).unwrap();
        assert_eq!(h.count(0), BigUint::from(4u32));
        assert!(b.is_one());

        let xy = Tensor::from_entries(2, 1, 2, &[(vec![0, 0], 1)]).unwrap();
        let (h, b) = bias_histogram(&xy, B).unwrap();
        assert_eq!(h.count(0), BigUint::from(3u32));
        assert_eq!(h.count(1), BigUint::from(1u32));
        assert_eq!(b, frac(1, 1, 2));

        // scaling x^1 by c maps value v to cv, so nonzero values are equidistributed
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let t = Tensor::random_with(f(5), 2, 2, &mut rng).unwrap();
            let (h, _) = bias_histogram(&t, B).unwrap();
            let c1 = h.count(1);
            for v in 2..5 {
                assert_eq!(h.count(v), c1);
            }
            assert_eq!(h.domain_size, BigUint::from(625u32));
        }
    }

    #[test]
    fn budget_refusal() {
        let t = Tensor::zeros(f(3), 4, 3).unwrap();
        assert!(matches!(
            bias_histogram(&t, Budget(1000)),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            bias_fiber(&t, Budget(1000)),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(bias_recursive(&t, Budget(1000)).is_ok());
    }

    #[test]
    fn engines_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for (p, n, d) in [(2, 2, 3), (3, 2, 3), (2, 2, 4), (5, 2, 2), (2, 3, 3)] {
            for _ in 0..20 {
                let t = Tensor::random_with(f(p), n, d, &mut rng).unwrap();
                let all = bias_all_engines(&t, B).unwrap();
                assert_eq!(all.len(), 3);
                assert!(!all[0].1.is_zero());
            }
        }
    }

    #[test]
    fn analytic_rank_examples() {
        let ar = analytic_rank(&BiasValue::one(5));
        assert_eq!(ar.approx, 0.0);
        for r in 0..6 {
            let ar = analytic_rank(&BiasValue::inverse_power(3, r));
            assert!((ar.approx - r as f64).abs() < 1e-12 * (r as f64).max(1.0));
            assert!(ar.at_most(r));
            assert!(r == 0 || !ar.at_most(r - 1));
        }
        for (q, n, d) in [(2u32, 4u32, 3u32), (3, 5, 4), (5, 3, 3)] {
            let ar = analytic_rank(&diagonal_bias(q, n, d));
            let expected = n as f64 * c_constant(d, q as u64).unwrap();
            assert!((ar.approx - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn analytic_rank_near_one_keeps_precision() {
        // bias = 1 - 2^-60: arank = -log2(1 - 2^-60) ≈ 2^-60 / ln 2
        let k = (BigUint::one() << 60usize) - BigUint::one();
        let ar = analytic_rank(&BiasValue::new(k, 60, 2).unwrap());
        let expected = 2f64.powi(-60) / std::f64::consts::LN_2;
        assert!((ar.approx - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn c_constant_examples() {
        for q in [2, 3, 7, 101] {
            assert!((c_constant(2, q).unwrap() - 1.0).abs() < 1e-15);
        }
        // log2(4/3) evaluated directly
        let direct = (4.0f64 / 3.0).log2();
        assert!((c_constant(3, 2).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.415037499279).abs() < 1e-12);
        for d in 2..10u32 {
            for q in [2u64, 3, 4, 5, 7, 11, 13, 101, 1009] {
                let c = c_constant(d, q).unwrap();
                let (always, large) = c_lower_bounds(d, q);
                assert!(c >= always);
                if let Some(lb) = large {
                    assert!(c >= lb - 1e-15, "d={d} q={q}");
                }
            }
        }
        assert!(c_constant(1, 2).is_err());
        assert!(c_constant(3, 1).is_err());
    }

    #[test]
    fn ordering_and_display() {
        assert!(frac(1, 1, 2) == frac(2, 2, 2));
        assert!(frac(3, 2, 2) > frac(1, 1, 2));
        assert_eq!(frac(3, 2, 2).to_string(), "3 / 2^2");
        assert!(BiasValue::new(BigUint::from(5u32), 2, 2).is_err());
        assert_eq!(frac(3, 2, 2).ceil_log_inverse(), Some(1));
        assert_eq!(frac(1, 2, 2).ceil_log_inverse(), Some(2));
        assert_eq!(frac(1, 0, 2).ceil_log_inverse(), Some(0));
        assert_eq!(frac(0, 2, 2).ceil_log_inverse(), None);
        assert!((frac(3, 2, 2).difference_f64(&frac(1, 1, 2)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn direct_sum_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..30 {
            let p = [2u64, 3][rng.gen_range(0..2)];
            let t = Tensor::random_with(f(p), rng.gen_range(0..3), 3, &mut rng).unwrap();
            let s = Tensor::random_with(f(p), rng.gen_range(0..3), 3, &mut rng).unwrap();
            let lhs = bias_fiber(&t.direct_sum(&s).unwrap(), B).unwrap();
            let rhs = bias_fiber(&t, B).unwrap().mul(&bias_fiber(&s, B).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn multiform_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let fld = f(2);
        let t = Tensor::random_with(fld, 2, 3, &mut rng).unwrap();
        let only_top = MultiComponentForm::new(fld, 2, 3)
            .with_component(SlotSet::full(3), t.clone())
            .unwrap();
        let mb = bias_multiform(&only_top, B).unwrap();
        let exact = mb.exact.unwrap();
        let fiber = bias_fiber(&t, B).unwrap();
        assert!(exact.abs_at_most(&fiber));
        assert!((exact.to_f64() - fiber.to_f64()).abs() < 1e-15);
        assert!((mb.value.re - fiber.to_f64()).abs() <= mb.error_bound);

        let constant = MultiComponentForm::new(fld, 2, 3)
            .with_component(SlotSet::EMPTY, Tensor::scalar(fld, 1))
            .unwrap();
        let mb = bias_multiform(&constant, B).unwrap();
        assert_eq!(mb.exact.unwrap().to_f64(), -1.0);

        for _ in 0..50 {
            let r = MultiComponentForm::random_with(fld, 2, 3, &mut rng).unwrap();
            let mb = bias_multiform(&r, B).unwrap();
            let top = bias_fiber(&r.top(), B).unwrap();
            assert!(mb.exact.unwrap().abs_at_most(&top));
        }
        let f3 = f(3);
        for _ in 0..50 {
            let r = MultiComponentForm::random_with(f3, 2, 2, &mut rng).unwrap();
            let mb = bias_multiform(&r, B).unwrap();
            assert!(mb.exact.is_none());
            assert!(mb.error_bound <= 1e-10);
            let top = bias_fiber(&r.top(), B).unwrap().to_f64();
            assert!(mb.magnitude <= top + 1e-9);
        }
    }
}
