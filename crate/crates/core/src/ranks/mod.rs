//! Tensor rank, slice rank and partition rank of small tensors.
//!
//! Exact values come from an iterative-deepening search over all rank-one
//! tensors of the requested kind ([`RankSearcher`]). Upper bounds come from
//! flattening ranks ([`rank_upper_greedy`]). Lower bounds come from the
//! analytic rank and from independent sets. The exact search never uses the
//! lower bounds to prune, so comparisons against them stay meaningful.

mod greedy;
mod independent;
mod search;

use std::fmt;

use serde::Serialize;

use crate::bias::{analytic_rank, bias, AnalyticRank};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gf::FVector;
use crate::tensor::{SlotSet, Tensor};

pub use greedy::{rank_upper_greedy, Decomposition};
pub use independent::{is_independent_set, max_independent_set, IndependentSet};
pub use search::{rank_one_candidates, Candidate, RankSearcher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKind {
    /// Sums of products of `d` linear forms.
    Rank,
    /// Sums of (linear form in one slot) x (form in the others).
    Srank,
    /// Sums of products of two forms over a proper bipartition of the slots.
    Prank,
}

impl RankKind {
    pub const ALL: [RankKind; 3] = [RankKind::Rank, RankKind::Srank, RankKind::Prank];

    pub fn name(self) -> &'static str {
        match self {
            RankKind::Rank => "rank",
            RankKind::Srank => "srank",
            RankKind::Prank => "prank",
        }
    }
}

impl fmt::Display for RankKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RankKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank" => Ok(RankKind::Rank),
            "srank" => Ok(RankKind::Srank),
            "prank" => Ok(RankKind::Prank),
            other => Err(Error::InvalidArgument(format!("unknown rank kind `{other}`"))),
        }
    }
}

/// One summand of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RankOneTerm {
    /// `Π_s factors[s](x^s)`.
    Product { factors: Vec<FVector> },
    /// `linear(x^slot) · rest(x^j : j != slot)`.
    Slice {
        slot: usize,
        linear: FVector,
        rest: Tensor,
    },
    /// `left(x^A) · right(x^B)` with `A = part`, `B` its complement.
    Partition {
        part: SlotSet,
        left: Tensor,
        right: Tensor,
    },
}

impl RankOneTerm {
    pub fn expand(&self, d: usize) -> Result<Tensor> {
        match self {
            RankOneTerm::Product { factors } => {
                if factors.len() != d || d == 0 {
                    return Err(Error::DimensionMismatch(format!(
                        "{} factors for order {d}",
                        factors.len()
                    )));
                }
                let field = factors[0].field();
                let n = factors[0].len();
                let mut acc = linear_tensor(&factors[0])?;
                for (k, f) in factors.iter().enumerate().skip(1) {
                    let part = SlotSet::full(k);
                    acc = Tensor::partition_product(k + 1, part, &acc, &linear_tensor(f)?)?;
                }
                debug_assert_eq!((acc.field(), acc.dim()), (field, n));
                Ok(acc)
            }
            RankOneTerm::Slice { slot, linear, rest } => Tensor::partition_product(
                d,
                SlotSet::from_slots(&[*slot]),
                &linear_tensor(linear)?,
                rest,
            ),
            RankOneTerm::Partition { part, left, right } => {
                Tensor::partition_product(d, *part, left, right)
            }
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        let vec = |v: &FVector| format!("{:?}", v.entries());
        match self {
            RankOneTerm::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(vec).collect();
                format!("product {}", parts.join(" x "))
            }
            RankOneTerm::Slice { slot, linear, rest } => {
                format!("slice slot {slot}: {} x {:?}", vec(linear), rest.coeffs())
            }
            RankOneTerm::Partition { part, left, right } => {
                format!("partition {part}: {:?} x {:?}", left.coeffs(), right.coeffs())
            }
        }
    }
}

pub(crate) fn linear_tensor(v: &FVector) -> Result<Tensor> {
    Tensor::new(v.field(), 1, v.len(), v.entries().to_vec())
}

/// Re-sums a decomposition and checks it reproduces `t` exactly.
pub fn verify_certificate(t: &Tensor, terms: &[RankOneTerm]) -> Result<()> {
    let mut acc = Tensor::zeros(t.field(), t.dim(), t.order())?;
    for term in terms {
        acc = acc.add(&term.expand(t.order())?)?;
    }
    if acc != *t {
        return Err(Error::Inconsistent(
            "decomposition does not re-sum to the tensor".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundSource {
    /// `prank >= arank`, rounded up exactly.
    AnalyticRank,
    /// `|A|` for the largest independent set `A`. Reported, not used for the
    /// interval.
    IndependentSet,
    /// Exhaustive search ruled out every smaller decomposition.
    Search,
    /// Order 2: every kind equals the matrix rank.
    MatrixRank,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub source: LowerBoundSource,
    pub value: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankValue {
    Exact(u32),
    Bounds { lower: u32, upper: u32 },
}

impl RankValue {
    pub fn lower(self) -> u32 {
        match self {
            RankValue::Exact(v) => v,
            RankValue::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(self) -> u32 {
        match self {
            RankValue::Exact(v) => v,
            RankValue::Bounds { upper, .. } => upper,
        }
    }

    pub fn exact(self) -> Option<u32> {
        match self {
            RankValue::Exact(v) => Some(v),
            RankValue::Bounds { .. } => None,
        }
    }
}

impl fmt::Display for RankValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankValue::Exact(v) => write!(f, "{v}"),
            RankValue::Bounds { lower, upper } => write!(f, "[{lower}, {upper}]"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankReport {
    pub kind: RankKind,
    pub value: RankValue,
    /// A verified decomposition with `value.upper()` terms.
    pub certificate: Vec<RankOneTerm>,
    pub lower_bounds: Vec<LowerBound>,
    /// Set when the analytic rank was computed for a lower bound.
    pub analytic_rank: Option<AnalyticRank>,
}

fn require_kind_order(t: &Tensor, kind: RankKind) -> Result<()> {
    let min = if kind == RankKind::Rank { 1 } else { 2 };
    if t.order() < min {
        return Err(Error::InvalidArgument(format!(
            "{kind} needs order at least {min}, got {}",
            t.order()
        )));
    }
    Ok(())
}

/// `arank(T)` as a float; a lower bound on the partition rank (and so on
/// slice rank and rank).
pub fn prank_lower_bound(t: &Tensor, budget: Budget) -> Result<f64> {
    Ok(analytic_rank(&bias(t, budget)?).approx)
}

/// Lower bounds that need no search: analytic rank (rounded up exactly),
/// the largest independent set, and the matrix rank at order 2.
pub fn lower_bounds(t: &Tensor, budget: Budget) -> (Vec<LowerBound>, Option<AnalyticRank>) {
    let mut out = Vec::new();
    let mut arank = None;
    if t.order() == 2 {
        let m = t.flatten(SlotSet::from_slots(&[0]));
        out.push(LowerBound {
            source: LowerBoundSource::MatrixRank,
            value: m.rank() as u32,
        });
    }
    if t.order() >= 2 {
        if let Ok(b) = bias(t, budget) {
            if let Some(r) = b.ceil_log_inverse() {
                out.push(LowerBound {
                    source: LowerBoundSource::AnalyticRank,
                    value: r,
                });
            }
            arank = Some(analytic_rank(&b));
        }
    }
    if t.order() >= 1 {
        out.push(LowerBound {
            source: LowerBoundSource::IndependentSet,
            value: max_independent_set(t).len() as u32,
        });
    }
    (out, arank)
}

pub(crate) fn interval_lower(bounds: &[LowerBound]) -> u32 {
    bounds
        .iter()
        .filter(|b| b.source != LowerBoundSource::IndependentSet)
        .map(|b| b.value)
        .max()
        .unwrap_or(0)
}

/// Bounds without search; collapses to an exact value when they meet.
pub fn rank_bounds(t: &Tensor, kind: RankKind, budget: Budget) -> Result<RankReport> {
    require_kind_order(t, kind)?;
    let upper = rank_upper_greedy(t, kind)?;
    let (lower_bounds, arank) = lower_bounds(t, budget);
    let lower = interval_lower(&lower_bounds);
    if lower > upper.len() as u32 {
        return Err(Error::Inconsistent(format!(
            "{kind} lower bound {lower} above verified upper bound {}",
            upper.len()
        )));
    }
    let value = if lower == upper.len() as u32 {
        RankValue::Exact(lower)
    } else {
        RankValue::Bounds {
            lower,
            upper: upper.len() as u32,
        }
    };
    Ok(RankReport {
        kind,
        value,
        certificate: upper.terms,
        lower_bounds,
        analytic_rank: arank,
    })
}

/// Exact rank by exhaustive search, or verified bounds when the search does
/// not fit in `budget`.
pub fn rank_exact(t: &Tensor, kind: RankKind, budget: Budget) -> Result<RankReport> {
    require_kind_order(t, kind)?;
    match RankSearcher::new(t.field(), t.dim(), t.order(), kind, budget) {
        Ok(searcher) => searcher.report(t),
        Err(Error::BudgetExceeded { .. }) => rank_bounds(t, kind, budget),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{FMatrix, PrimeField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    const B: Budget = Budget::DEFAULT;

    #[test]
    fn zero_tensor_has_rank_zero() {
        let z = Tensor::zeros(f(2), 2, 3).unwrap();
        for kind in RankKind::ALL {
            let r = rank_exact(&z, kind, B).unwrap();
            assert_eq!(r.value, RankValue::Exact(0));
            assert!(r.certificate.is_empty());
            assert_eq!(rank_upper_greedy(&z, kind).unwrap().len(), 0);
        }
    }

    #[test]
    fn partition_rank_one_example() {
        let fld = f(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = Tensor::random_with(fld, 2, 1, &mut rng).unwrap();
        let b = Tensor::random_with(fld, 2, 2, &mut rng).unwrap();
        let l = if l.is_zero() { Tensor::identity(fld, 1, 1).unwrap().direct_sum(&Tensor::zeros(fld, 1, 1).unwrap()).unwrap() } else { l };
        let b = if b.is_zero() { Tensor::identity(fld, 2, 2).unwrap() } else { b };
        let t = Tensor::partition_product(3, SlotSet::from_slots(&[0]), &l, &b).unwrap();
        let r = rank_exact(&t, RankKind::Prank, B).unwrap();
        assert_eq!(r.value, RankValue::Exact(1));
        assert_eq!(rank_upper_greedy(&t, RankKind::Prank).unwrap().len(), 1);
    }

    #[test]
    fn identity_partition_rank() {
        let id = Tensor::identity(f(2), 2, 3).unwrap();
        let r = rank_exact(&id, RankKind::Prank, B).unwrap();
        assert_eq!(r.value, RankValue::Exact(2));
        verify_certificate(&id, &r.certificate).unwrap();
        let g = rank_upper_greedy(&id, RankKind::Prank).unwrap().len();
        assert!(g >= 2);
    }

    #[test]
    fn matrices_have_all_ranks_equal_to_matrix_rank() {
        let fld = f(2);
        // every 2x2 and 3x3 matrix over F_2
        for n in [2usize, 3] {
            let searchers: Vec<_> = RankKind::ALL
                .iter()
                .map(|&k| RankSearcher::new(fld, n, 2, k, B).unwrap())
                .collect();
            for bits in 0u32..1 << (n * n) {
                let data: Vec<u32> = (0..n * n).map(|i| bits >> i & 1).collect();
                let m = FMatrix::new(fld, n, n, data.clone()).unwrap();
                let t = Tensor::new(fld, 2, n, data).unwrap();
                for s in &searchers {
                    assert_eq!(s.report(&t).unwrap().value, RankValue::Exact(m.rank() as u32));
                }
            }
        }
    }

    #[test]
    fn ordering_and_order_three_collapse() {
        let fld = f(2);
        let searchers: Vec<_> = RankKind::ALL
            .iter()
            .map(|&k| RankSearcher::new(fld, 2, 3, k, B).unwrap())
            .collect();
        for bits in 0u32..256 {
            let data: Vec<u32> = (0..8).map(|i| bits >> i & 1).collect();
            let t = Tensor::new(fld, 3, 2, data).unwrap();
            let vals: Vec<u32> = searchers
                .iter()
                .map(|s| s.report(&t).unwrap().value.exact().unwrap())
                .collect();
            let (rank, srank, prank) = (vals[0], vals[1], vals[2]);
            assert!(prank <= srank && srank <= rank, "{bits:08b}: {vals:?}");
            assert_eq!(prank, srank);
            for kind in RankKind::ALL {
                let g = rank_upper_greedy(&t, kind).unwrap();
                let exact = vals[RankKind::ALL.iter().position(|&k| k == kind).unwrap()];
                assert!(g.len() as u32 >= exact);
            }
        }
    }

    #[test]
    fn bounds_for_identity() {
        let id = Tensor::identity(f(2), 5, 3).unwrap();
        let r = rank_bounds(&id, RankKind::Prank, B).unwrap();
        let arank = r
            .lower_bounds
            .iter()
            .find(|b| b.source == LowerBoundSource::AnalyticRank)
            .unwrap();
        assert_eq!(arank.value, 3);
        assert_eq!(r.value, RankValue::Bounds { lower: 3, upper: 5 });
        verify_certificate(&id, &r.certificate).unwrap();
    }

    #[test]
    fn prank_lower_bound_examples() {
        let z = Tensor::zeros(f(2), 3, 3).unwrap();
        assert_eq!(prank_lower_bound(&z, B).unwrap(), 0.0);
        for n in 1..5 {
            let id = Tensor::identity(f(2), n, 3).unwrap();
            let lb = prank_lower_bound(&id, B).unwrap();
            assert!((lb - n as f64 * (4.0f64 / 3.0).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn order_checks() {
        let lin = Tensor::identity(f(2), 2, 1).unwrap();
        assert!(rank_exact(&lin, RankKind::Prank, B).is_err());
        assert_eq!(rank_exact(&lin, RankKind::Rank, B).unwrap().value, RankValue::Exact(1));
    }

    #[test]
    fn over_budget_search_falls_back_to_bounds() {
        let id = Tensor::identity(f(2), 3, 3).unwrap();
        let r = rank_exact(&id, RankKind::Prank, Budget(1000)).unwrap();
        assert!(r.value.lower() <= 3 && r.value.upper() >= 3);
        verify_certificate(&id, &r.certificate).unwrap();
    }
}
