//! Each identity and inequality as a checkable law over an
//! exhaustive or seeded random universe of small instances.
//!
//! Inequalities between biases are compared exactly by cross-multiplying
//! integers. Floats appear only in slack statistics and in the complex
//! character sum for `p > 2`.

mod checks;
mod correlation;
mod survey;

use std::fmt;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::gf::PrimeField;
use crate::tensor::{coeff_count, Tensor};

pub use correlation::{check_correlation, CorrelationCheck, CorrelationInstance};
pub use survey::{survey_gap, SurveyReport, SurveyRow};

/// The instances a law is checked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Universe {
    /// Every tensor (or pair, or family) of the given shape.
    Exhaustive { p: u64, n: usize, d: usize },
    /// `trials` instances, trial `t` drawn from ChaCha8 seeded with `seed`
    /// on stream `t`.
    Random {
        p: u64,
        n: usize,
        d: usize,
        trials: u64,
        seed: u64,
    },
    /// Identity tensors of dimension `1..=n`.
    Identity { p: u64, n: usize, d: usize },
}

impl Universe {
    pub fn p(&self) -> u64 {
        match *self {
            Universe::Exhaustive { p, .. } | Universe::Random { p, .. } | Universe::Identity { p, .. } => p,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Universe::Exhaustive { n, .. } | Universe::Random { n, .. } | Universe::Identity { n, .. } => n,
        }
    }

    pub fn d(&self) -> usize {
        match *self {
            Universe::Exhaustive { d, .. } | Universe::Random { d, .. } | Universe::Identity { d, .. } => d,
        }
    }

    pub fn field(&self) -> Result<PrimeField> {
        PrimeField::new(self.p())
    }

    /// Single tensors in the universe, each with a label.
    pub fn tensors(&self, budget: Budget) -> Result<Vec<(String, Tensor)>> {
        let field = self.field()?;
        match *self {
            Universe::Exhaustive { n, d, .. } => {
                let count = exhaustive_count(field, n, d, budget)?;
                (0..count)
                    .map(|i| Ok((format!("tensor #{i}"), tensor_from_index(field, n, d, i)?)))
                    .collect()
            }
            Universe::Random { n, d, trials, seed, .. } => (0..trials)
                .map(|t| {
                    let mut rng = trial_rng(seed, t);
                    Ok((format!("trial {t}"), Tensor::random_with(field, n, d, &mut rng)?))
                })
                .collect(),
            Universe::Identity { n, d, .. } => (1..=n)
                .map(|k| Ok((format!("identity n={k}"), Tensor::identity(field, k, d)?)))
                .collect(),
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Exhaustive { p, n, d } => write!(f, "exhaustive p={p} n={n} d={d}"),
            Universe::Random { p, n, d, trials, seed } => {
                write!(f, "random p={p} n={n} d={d} trials={trials} seed={seed}")
            }
            Universe::Identity { p, n, d } => write!(f, "identity p={p} n=1..{n} d={d}"),
        }
    }
}

/// The generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `p^(n^d)`, refused when above the budget.
pub fn exhaustive_count(field: PrimeField, n: usize, d: usize, budget: Budget) -> Result<u64> {
    let len = coeff_count(n, d)?;
    budget.check_power(field.order(), len as u64)
}

/// The tensor whose coefficient `j` is digit `j` of `index` in base `p`.
pub fn tensor_from_index(field: PrimeField, n: usize, d: usize, mut index: u64) -> Result<Tensor> {
    let len = coeff_count(n, d)?;
    let p = field.order();
    let coeffs = (0..len)
        .map(|_| {
            let c = (index % p) as u32;
            index /= p;
            c
        })
        .collect();
    Tensor::new(field, d, n, coeffs)
}

/// Inverse of [`tensor_from_index`].
pub fn index_of_tensor(t: &Tensor) -> u64 {
    let p = t.field().order();
    t.coeffs().iter().rev().fold(0u64, |acc, &c| acc * p + c as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// The three bias engines agree exactly.
    Engines,
    /// `bias(T+S) >= bias(T) bias(S)`.
    Subadditivity,
    /// `bias(T ⊕ S) = bias(T) bias(S)`.
    Tightness,
    /// Order 2: `bias = q^(-rank)`.
    MatrixRank,
    /// Diagonal tensors: `bias = (1 - (1-1/q)^(d-1))^n` and `arank = n c(d,q)`.
    Identity,
    /// `Pr[all T_i, S_j vanish] >= Pr[all T_i vanish] Pr[all S_j vanish]`.
    Correlation,
    /// `arank <= prank`, and `bias >= 1/q` for partition-rank-one tensors.
    ArankLePrank,
    /// `arank >= c(d,q) |A|` and `arank >= 2^(-d) |A|` for independent sets.
    IndependentBound,
    /// `bias(T|_U) >= bias(T)`.
    Restriction,
    /// `|bias(R)| <= bias(R_[d])` for multi-component forms.
    LemmaBias,
    /// `bias(T) = bias(T∘(M,…,M))` for invertible `M`.
    BasisInvariance,
    /// `Σ_I T(x^I, y^(I^c)) = T(x+y)`.
    Shift,
}

impl Law {
    pub const ALL: [Law; 12] = [
        Law::Engines,
        Law::Subadditivity,
        Law::Tightness,
        Law::MatrixRank,
        Law::Identity,
        Law::Correlation,
        Law::ArankLePrank,
        Law::IndependentBound,
        Law::Restriction,
        Law::LemmaBias,
        Law::BasisInvariance,
        Law::Shift,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Law::Engines => "engines",
            Law::Subadditivity => "subadditivity",
            Law::Tightness => "tightness",
            Law::MatrixRank => "matrix_rank",
            Law::Identity => "identity",
            Law::Correlation => "correlation",
            Law::ArankLePrank => "arank_le_prank",
            Law::IndependentBound => "independent_bound",
            Law::Restriction => "restriction",
            Law::LemmaBias => "lemma_bias",
            Law::BasisInvariance => "basis_invariance",
            Law::Shift => "shift",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Law::Engines => "fiber, recursive and histogram bias agree exactly",
            Law::Subadditivity => "bias(T+S) >= bias(T) bias(S)",
            Law::Tightness => "bias(T (+) S) = bias(T) bias(S)",
            Law::MatrixRank => "bias(M) = q^(-rank M) for matrices",
            Law::Identity => "bias of a nonzero diagonal = (1-(1-1/q)^(d-1))^n, arank = n c(d,q)",
            Law::Correlation => "Pr[T=S=0] >= Pr[T=0] Pr[S=0] for families of forms",
            Law::ArankLePrank => "arank(T) <= prank(T); bias >= 1/q when prank = 1",
            Law::IndependentBound => "arank(T) >= c(d,q) |A| >= 2^(-d) |A|",
            Law::Restriction => "bias(T|U) >= bias(T)",
            Law::LemmaBias => "|bias(R)| <= bias(R_[d])",
            Law::BasisInvariance => "bias, rank, srank and prank unchanged by an invertible change of basis",
            Law::Shift => "sum over I of T(x^I, y^(I^c)) = T(x+y)",
        }
    }

    /// Universes used when none is given.
    pub fn default_universes(self, exhaustive: bool, trials: u64, seed: u64) -> Vec<Universe> {
        let shapes: &[(u64, usize, usize)] = match (self, exhaustive) {
            (Law::MatrixRank, true) => &[(2, 3, 2)],
            (Law::MatrixRank, false) => &[(2, 3, 2), (3, 3, 2), (5, 3, 2)],
            (Law::Correlation | Law::Shift, true) => &[(2, 2, 2)],
            (Law::Correlation, false) => &[(2, 2, 2), (3, 2, 2)],
            (Law::LemmaBias, true) => &[(2, 2, 2)],
            (Law::LemmaBias, false) => &[(2, 2, 3), (3, 2, 2), (2, 3, 3), (3, 2, 3), (2, 2, 4), (5, 2, 2)],
            (Law::Identity, true) => {
                return vec![
                    Universe::Identity { p: 2, n: 6, d: 3 },
                    Universe::Identity { p: 3, n: 6, d: 3 },
                    Universe::Identity { p: 2, n: 6, d: 4 },
                    Universe::Identity { p: 3, n: 4, d: 4 },
                ]
            }
            (_, true) => &[(2, 2, 3)],
            (_, false) => &[(2, 3, 3), (3, 2, 3), (2, 2, 4), (5, 2, 2)],
        };
        shapes
            .iter()
            .map(|&(p, n, d)| {
                if exhaustive {
                    Universe::Exhaustive { p, n, d }
                } else {
                    Universe::Random { p, n, d, trials, seed }
                }
            })
            .collect()
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Law::ALL
            .into_iter()
            .find(|l| l.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown law `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Counterexample,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Counterexample => "counterexample",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawResult {
    pub law: Law,
    pub universe: Universe,
    /// Instances checked (tensors, pairs or families).
    pub instances: u64,
    /// Instances where the inequality held with equality.
    pub equalities: u64,
    pub violations: u64,
    pub verdict: Verdict,
    /// Smallest `rhs - lhs` seen, in the law's natural units.
    pub min_slack: Option<f64>,
    /// The first violating instance, confirmed on replay.
    pub witness: Option<String>,
    pub notes: Vec<String>,
}

impl LawResult {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// Result of checking one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Outcome {
    pub holds: bool,
    pub equal: bool,
    pub slack: Option<f64>,
}

impl Outcome {
    pub fn equality(equal: bool) -> Self {
        Outcome {
            holds: equal,
            equal,
            slack: None,
        }
    }
}

pub(crate) struct Tally {
    result: LawResult,
}

impl Tally {
    pub fn new(law: Law, universe: Universe) -> Self {
        Tally {
            result: LawResult {
                law,
                universe,
                instances: 0,
                equalities: 0,
                violations: 0,
                verdict: Verdict::Holds,
                min_slack: None,
                witness: None,
                notes: Vec::new(),
            },
        }
    }

    /// Records `outcome`; a violation is re-checked with `replay` and kept
    /// only if it reproduces.
    pub fn observe(
        &mut self,
        outcome: Outcome,
        replay: impl FnOnce() -> Result<Outcome>,
        witness: impl FnOnce() -> String,
    ) -> Result<()> {
        let r = &mut self.result;
        r.instances += 1;
        if outcome.equal {
            r.equalities += 1;
        }
        if let Some(s) = outcome.slack {
            r.min_slack = Some(r.min_slack.map_or(s, |m: f64| m.min(s)));
        }
        if !outcome.holds {
            if replay()?.holds {
                return Err(Error::Inconsistent(format!(
                    "{}: violation did not reproduce on replay",
                    r.law
                )));
            }
            r.violations += 1;
            r.verdict = Verdict::Counterexample;
            if r.witness.is_none() {
                r.witness = Some(witness());
            }
        }
        Ok(())
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.result.notes.push(s.into());
    }

    pub fn finish(mut self) -> LawResult {
        if self.result.instances == 0 {
            self.note("empty universe: vacuous pass");
        }
        self.result
    }
}

/// Runs `law` over `universe`.
pub fn run_law(law: Law, universe: &Universe, budget: Budget) -> Result<LawResult> {
    if budget.0 == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    checks::run(law, universe, budget)
}

/// `p^k` as an integer.
pub(crate) fn pow(p: u64, k: u64) -> BigUint {
    BigUint::from(p).pow(k as u32)
}
