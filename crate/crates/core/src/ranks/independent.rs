use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Indices `A` such that, on `A^d`, `T` is nonzero exactly on the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct IndependentSet {
    pub indices: Vec<usize>,
}

impl IndependentSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn is_independent_set(t: &Tensor, a: &[usize]) -> Result<bool> {
    let n = t.dim();
    if let Some(&bad) = a.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange(format!("index {bad} not below dimension {n}")));
    }
    let mut set = a.to_vec();
    set.sort_unstable();
    set.dedup();
    let d = t.order();
    if d == 0 || set.is_empty() {
        return Ok(true);
    }
    // odometer over A^d
    let mut choice = vec![0usize; d];
    let mut idx = vec![0usize; d];
    loop {
        for (s, &c) in choice.iter().enumerate() {
            idx[s] = set[c];
        }
        let diagonal = idx.iter().all(|&i| i == idx[0]);
        let nonzero = t.get(&idx)? != 0;
        if diagonal != nonzero {
            return Ok(false);
        }
        let mut s = d;
        loop {
            if s == 0 {
                return Ok(true);
            }
            s -= 1;
            choice[s] += 1;
            if choice[s] < set.len() {
                break;
            }
            choice[s] = 0;
        }
    }
}

struct Search {
    /// Diagonal indices with a nonzero entry, ascending.
    cands: Vec<usize>,
    /// Forbidden supports (positions into `cands`), filed under their largest member.
    edges_by_max: Vec<Vec<Vec<usize>>>,
    chosen: Vec<bool>,
    current: Vec<usize>,
    best: Vec<usize>,
}

impl Search {
    fn run(&mut self, pos: usize) {
        if self.current.len() + (self.cands.len() - pos) <= self.best.len() {
            return;
        }
        if pos == self.cands.len() {
            self.best = self.current.clone();
            return;
        }
        let allowed = self.edges_by_max[pos]
            .iter()
            .all(|e| e.iter().any(|&j| j != pos && !self.chosen[j]));
        if allowed {
            self.chosen[pos] = true;
            self.current.push(pos);
            self.run(pos + 1);
            self.current.pop();
            self.chosen[pos] = false;
        }
        self.run(pos + 1);
    }
}

/// A maximum independent set; among those, the lexicographically least.
pub fn max_independent_set(t: &Tensor) -> IndependentSet {
    let d = t.order();
    let n = t.dim();
    if d == 0 {
        return IndependentSet::default();
    }
    let cands: Vec<usize> = (0..n).filter(|&i| t.get(&vec![i; d]).unwrap_or(0) != 0).collect();
    let mut position = vec![usize::MAX; n];
    for (k, &i) in cands.iter().enumerate() {
        position[i] = k;
    }
    let mut edges_by_max = vec![Vec::<Vec<usize>>::new(); cands.len()];
    for (idx, _) in t.nonzero_entries() {
        let mut support: Vec<usize> = idx.clone();
        support.sort_unstable();
        support.dedup();
        if support.len() < 2 || support.iter().any(|&i| position[i] == usize::MAX) {
            continue;
        }
        let edge: Vec<usize> = support.iter().map(|&i| position[i]).collect();
        let max = *edge.last().expect("nonempty");
        if !edges_by_max[max].contains(&edge) {
            edges_by_max[max].push(edge);
        }
    }
    let mut search = Search {
        chosen: vec![false; cands.len()],
        cands,
        edges_by_max,
        current: Vec::new(),
        best: Vec::new(),
    };
    search.run(0);
    let indices = search.best.iter().map(|&k| search.cands[k]).collect();
    IndependentSet { indices }
}
