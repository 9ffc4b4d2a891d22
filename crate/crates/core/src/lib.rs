//! Exact bias, analytic rank and combinatorial ranks of small tensors over
//! prime fields, with a harness that checks the known inequalities between
//! them.

pub mod bias;
pub mod budget;
pub mod error;
pub mod format;
pub mod gf;
pub mod laws;
pub mod ranks;
pub mod tensor;

pub use bias::{
    analytic_rank, bias, bias_all_engines, bias_fiber, bias_histogram, bias_multiform,
    bias_recursive, c_constant, c_lower_bounds, diagonal_bias, AnalyticRank, BiasValue, Engine,
    MultiformBias, SignedBias, ValueHistogram,
};
pub use budget::Budget;
pub use error::{Error, Result};
pub use gf::{FMatrix, FVector, PrimeField};
pub use laws::{
    run_law, survey_gap, CorrelationInstance, Law, LawResult, SurveyReport, SurveyRow, Universe,
    Verdict,
};
pub use ranks::{
    is_independent_set, max_independent_set, prank_lower_bound, rank_bounds, rank_exact,
    rank_upper_greedy, IndependentSet, LowerBound, LowerBoundSource, RankKind, RankOneTerm,
    RankReport, RankValue,
};
pub use tensor::{MultiComponentForm, SlotAssignment, SlotSet, Tensor};
