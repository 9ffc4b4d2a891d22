use std::collections::HashMap;

use serde::Serialize;

use super::Universe;
use crate::bias::{analytic_rank, bias};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ranks::{rank_bounds, RankKind, RankSearcher, RankValue};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRow {
    pub label: String,
    pub arank: f64,
    pub prank: RankValue,
    /// `prank / arank` at the two ends of the prank interval; absent when
    /// `arank = 0`.
    pub ratio_low: Option<f64>,
    pub ratio_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyReport {
    pub universe: Universe,
    pub rows: Vec<SurveyRow>,
    /// Largest ratio among rows with an exact prank.
    pub max_ratio: Option<f64>,
}

/// `(arank, prank, prank / arank)` for each tensor of the universe.
/// Descriptive only.
pub fn survey_gap(u: &Universe, budget: Budget) -> Result<SurveyReport> {
    if u.d() < 2 {
        return Err(Error::InvalidArgument(format!("survey needs d >= 2, got {}", u.d())));
    }
    let field = u.field()?;
    let mut searchers: HashMap<usize, Option<RankSearcher>> = HashMap::new();
    let mut rows = Vec::new();
    for (label, t) in u.tensors(budget)? {
        let searcher = match searchers.entry(t.dim()) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                match RankSearcher::new(field, t.dim(), t.order(), RankKind::Prank, budget) {
                    Ok(s) => e.insert(Some(s)),
                    Err(Error::BudgetExceeded { .. }) => e.insert(None),
                    Err(err) => return Err(err),
                }
            }
        };
        let prank = match searcher {
            Some(s) => s.report(&t)?.value,
            None => rank_bounds(&t, RankKind::Prank, budget)?.value,
        };
        let arank = analytic_rank(&bias(&t, budget)?).approx;
        let ratio = |r: u32| (arank > 0.0).then(|| r as f64 / arank);
        rows.push(SurveyRow {
            label,
            arank,
            prank,
            ratio_low: ratio(prank.lower()),
            ratio_high: ratio(prank.upper()),
        });
    }
    let max_ratio = rows
        .iter()
        .filter(|r| r.prank.exact().is_some())
        .filter_map(|r| r.ratio_low)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    Ok(SurveyReport {
        universe: *u,
        rows,
        max_ratio,
    })
}
