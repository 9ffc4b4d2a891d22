use std::collections::HashMap;

use num_bigint::BigUint;

use super::{
    interval_lower, lower_bounds, rank_upper_greedy, verify_certificate, LowerBound,
    LowerBoundSource, RankKind, RankOneTerm, RankReport, RankValue,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gf::{FVector, PrimeField};
use crate::tensor::{coeff_count, SlotSet, Tensor};

/// A rank-one tensor of some kind together with its expansion.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub term: RankOneTerm,
    pub tensor: Tensor,
}

/// Calls `f` on every vector of `F_p^len` in lexicographic order.
fn for_each_vector(p: u32, len: usize, mut f: impl FnMut(&[u32])) {
    let mut v = vec![0u32; len];
    loop {
        f(&v);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            v[i] += 1;
            if v[i] < p {
                break;
            }
            v[i] = 0;
        }
    }
}

fn nonzero_vectors(p: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_vector(p, len, |v| {
        if v.iter().any(|&c| c != 0) {
            out.push(v.to_vec());
        }
    });
    out
}

/// Nonzero vectors whose first nonzero entry is 1.
fn normalized_vectors(p: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_vector(p, len, |v| {
        if v.iter().find(|&&c| c != 0) == Some(&1) {
            out.push(v.to_vec());
        }
    });
    out
}

fn proper_parts_with_zero(d: usize) -> impl Iterator<Item = SlotSet> {
    let full = (1u32 << d) - 1;
    (1..full).filter(|b| b & 1 == 1).map(SlotSet::from_bits)
}

/// Number of raw (pre-dedup) candidates generated for `kind`.
fn raw_count(kind: RankKind, p: u64, n: usize, d: usize) -> BigUint {
    let pw = |len: usize| BigUint::from(p).pow(len as u32);
    let nonzero = |len: usize| pw(len) - 1u32;
    let normalized = |len: usize| (pw(len) - 1u32) / (p - 1);
    let sz = |k: usize| n.pow(k as u32);
    match kind {
        RankKind::Rank => normalized(n).pow(d as u32 - 1) * nonzero(n),
        RankKind::Srank => BigUint::from(d) * normalized(n) * nonzero(sz(d - 1)),
        RankKind::Prank => proper_parts_with_zero(d)
            .map(|a| normalized(sz(a.len())) * nonzero(sz(d - a.len())))
            .sum(),
    }
}

fn kron(field: PrimeField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(field.mul(x, y));
        }
    }
    out
}

/// Every distinct nonzero rank-one tensor of `kind` on `(F_p^n)^d`, each
/// with one representative term. Scalar multiples are quotiented out by
/// normalizing all but one factor.
pub fn rank_one_candidates(
    field: PrimeField,
    n: usize,
    d: usize,
    kind: RankKind,
    budget: Budget,
) -> Result<Vec<Candidate>> {
    let min = if kind == RankKind::Rank { 1 } else { 2 };
    if d < min {
        return Err(Error::InvalidArgument(format!("{kind} needs order at least {min}")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    coeff_count(n, d)?;
    let raw = raw_count(kind, field.order(), n, d) * BigUint::from(coeff_count(n, d)?);
    budget.check(&raw)?;
    let p = field.p();
    let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
    let mut out = Vec::new();
    let mut push = |term: RankOneTerm, coeffs: Vec<u32>| {
        if seen.insert(coeffs.clone(), ()).is_none() {
            out.push(Candidate {
                term,
                tensor: Tensor::from_raw(field, d, n, coeffs),
            });
        }
    };
    let tensor = |order: usize, c: &[u32]| Tensor::from_raw(field, order, n, c.to_vec());
    match kind {
        RankKind::Rank => {
            let norm = normalized_vectors(p, n);
            let all = nonzero_vectors(p, n);
            // odometer over the choice of each factor
            let mut choice = vec![0usize; d];
            loop {
                let factors: Vec<&Vec<u32>> = (0..d)
                    .map(|s| if s + 1 < d { &norm[choice[s]] } else { &all[choice[s]] })
                    .collect();
                let coeffs = factors[1..]
                    .iter()
                    .fold(factors[0].clone(), |acc, f| kron(field, &acc, f));
                let term = RankOneTerm::Product {
                    factors: factors
                        .iter()
                        .map(|f| FVector::new(field, f.to_vec()).expect("residues"))
                        .collect(),
                };
                push(term, coeffs);
                let mut s = d;
                loop {
                    if s == 0 {
                        return Ok(out);
                    }
                    s -= 1;
                    choice[s] += 1;
                    let lim = if s + 1 < d { norm.len() } else { all.len() };
                    if choice[s] < lim {
                        break;
                    }
                    choice[s] = 0;
                }
            }
        }
        RankKind::Srank => {
            let norm = normalized_vectors(p, n);
            let rests = nonzero_vectors(p, n.pow(d as u32 - 1));
            for slot in 0..d {
                let part = SlotSet::from_slots(&[slot]);
                for l in &norm {
                    let lt = tensor(1, l);
                    for r in &rests {
                        let rest = tensor(d - 1, r);
                        let t = Tensor::partition_product(d, part, &lt, &rest)?;
                        let term = RankOneTerm::Slice {
                            slot,
                            linear: FVector::new(field, l.clone())?,
                            rest,
                        };
                        push(term, t.coeffs().to_vec());
                    }
                }
            }
        }
        RankKind::Prank => {
            for part in proper_parts_with_zero(d) {
                let k = part.len();
                let lefts = normalized_vectors(p, n.pow(k as u32));
                let rights = nonzero_vectors(p, n.pow((d - k) as u32));
                for l in &lefts {
                    let left = tensor(k, l);
                    for r in &rights {
                        let right = tensor(d - k, r);
                        let t = Tensor::partition_product(d, part, &left, &right)?;
                        let term = RankOneTerm::Partition {
                            part,
                            left: left.clone(),
                            right,
                        };
                        push(term, t.coeffs().to_vec());
                    }
                }
            }
        }
    }
    Ok(out)
}

enum Outcome {
    Found(Vec<usize>),
    NotFound,
    Exhausted,
}

/// Exact rank search for one shape and kind; build once, query many tensors.
pub struct RankSearcher {
    field: PrimeField,
    n: usize,
    d: usize,
    kind: RankKind,
    budget: Budget,
    candidates: Vec<Candidate>,
    by_position: Vec<Vec<usize>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl RankSearcher {
    pub fn new(field: PrimeField, n: usize, d: usize, kind: RankKind, budget: Budget) -> Result<Self> {
        let candidates = rank_one_candidates(field, n, d, kind, budget)?;
        let len = coeff_count(n, d)?;
        let mut by_position = vec![Vec::new(); len];
        let mut lookup = HashMap::with_capacity(candidates.len());
        for (i, c) in candidates.iter().enumerate() {
            for (pos, &v) in c.tensor.coeffs().iter().enumerate() {
                if v != 0 {
                    by_position[pos].push(i);
                }
            }
            lookup.insert(c.tensor.coeffs().to_vec(), i);
        }
        Ok(RankSearcher {
            field,
            n,
            d,
            kind,
            budget,
            candidates,
            by_position,
            lookup,
        })
    }

    pub fn kind(&self) -> RankKind {
        self.kind
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    fn search(&self, residual: &mut [u32], depth: usize, nodes: &mut u64) -> Outcome {
        let Some(pos) = residual.iter().position(|&c| c != 0) else {
            return Outcome::Found(Vec::new());
        };
        if depth == 0 {
            return Outcome::NotFound;
        }
        if depth == 1 {
            *nodes += 1;
            if *nodes > self.budget.0 {
                return Outcome::Exhausted;
            }
            return match self.lookup.get(&*residual) {
                Some(&i) => Outcome::Found(vec![i]),
                None => Outcome::NotFound,
            };
        }
        let field = self.field;
        for &i in &self.by_position[pos] {
            *nodes += 1;
            if *nodes > self.budget.0 {
                return Outcome::Exhausted;
            }
            let c = self.candidates[i].tensor.coeffs();
            for (r, &x) in residual.iter_mut().zip(c) {
                *r = field.sub(*r, x);
            }
            let outcome = self.search(residual, depth - 1, nodes);
            for (r, &x) in residual.iter_mut().zip(c) {
                *r = field.add(*r, x);
            }
            match outcome {
                Outcome::Found(mut v) => {
                    v.push(i);
                    return Outcome::Found(v);
                }
                Outcome::Exhausted => return Outcome::Exhausted,
                Outcome::NotFound => {}
            }
        }
        Outcome::NotFound
    }

    /// Exact value with a verified certificate, or an interval when the
    /// node budget runs out.
    pub fn report(&self, t: &Tensor) -> Result<RankReport> {
        if t.field() != self.field || t.dim() != self.n || t.order() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "searcher for (p={}, n={}, d={}) given (p={}, n={}, d={})",
                self.field.p(),
                self.n,
                self.d,
                t.field().p(),
                t.dim(),
                t.order()
            )));
        }
        let greedy = rank_upper_greedy(t, self.kind)?;
        let upper = greedy.len();
        let mut residual = t.coeffs().to_vec();
        let mut nodes = 0u64;
        for r in 0..upper {
            match self.search(&mut residual, r, &mut nodes) {
                Outcome::Found(idx) => {
                    let certificate: Vec<RankOneTerm> =
                        idx.iter().map(|&i| self.candidates[i].term.clone()).collect();
                    verify_certificate(t, &certificate)?;
                    return Ok(self.exact_report(certificate, r));
                }
                Outcome::NotFound => {}
                Outcome::Exhausted => {
                    let (mut bounds, arank) = lower_bounds(t, self.budget);
                    bounds.push(LowerBound {
                        source: LowerBoundSource::Search,
                        value: r as u32,
                    });
                    let lower = interval_lower(&bounds);
                    if lower as usize > upper {
                        return Err(Error::Inconsistent(format!(
                            "{} lower bound {lower} above verified upper bound {upper}",
                            self.kind
                        )));
                    }
                    let value = if lower as usize == upper {
                        RankValue::Exact(lower)
                    } else {
                        RankValue::Bounds {
                            lower,
                            upper: upper as u32,
                        }
                    };
                    return Ok(RankReport {
                        kind: self.kind,
                        value,
                        certificate: greedy.terms,
                        lower_bounds: bounds,
                        analytic_rank: arank,
                    });
                }
            }
        }
        Ok(self.exact_report(greedy.terms, upper))
    }

    fn exact_report(&self, certificate: Vec<RankOneTerm>, r: usize) -> RankReport {
        RankReport {
            kind: self.kind,
            value: RankValue::Exact(r as u32),
            certificate,
            lower_bounds: vec![LowerBound {
                source: LowerBoundSource::Search,
                value: r as u32,
            }],
            analytic_rank: None,
        }
    }
}
