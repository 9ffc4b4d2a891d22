use super::{verify_certificate, RankKind, RankOneTerm};
use crate::error::{Error, Result};
use crate::gf::{FMatrix, FVector};
use crate::tensor::{SlotSet, Tensor};

/// A verified decomposition into rank-one terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub terms: Vec<RankOneTerm>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn column_tensor(t: &Tensor, m: &FMatrix, k: usize, order: usize) -> Tensor {
    Tensor::new(t.field(), order, t.dim(), m.column(k).entries().to_vec()).expect("reshape")
}

fn row_tensor(t: &Tensor, m: &FMatrix, k: usize, order: usize) -> Tensor {
    Tensor::new(t.field(), order, t.dim(), m.row(k).to_vec()).expect("reshape")
}

/// Splits along the cheapest flattening among `parts`.
fn best_split(t: &Tensor, parts: impl Iterator<Item = SlotSet>) -> Option<(SlotSet, FMatrix, FMatrix)> {
    let mut best: Option<(usize, SlotSet, FMatrix)> = None;
    for part in parts {
        let m = t.flatten(part);
        let r = m.rank();
        if best.as_ref().is_none_or(|(b, _, _)| r < *b) {
            best = Some((r, part, m));
        }
    }
    best.map(|(_, part, m)| {
        let (l, r) = m.rank_factorization();
        (part, l, r)
    })
}

fn products(t: &Tensor) -> Vec<Vec<FVector>> {
    if t.is_zero() {
        return Vec::new();
    }
    if t.order() == 1 {
        return vec![vec![FVector::new(t.field(), t.coeffs().to_vec()).expect("residues")]];
    }
    let m = t.flatten(SlotSet::from_slots(&[0]));
    let (l, r) = m.rank_factorization();
    let mut out = Vec::new();
    for k in 0..l.cols() {
        let u = l.column(k);
        for mut rest in products(&row_tensor(t, &r, k, t.order() - 1)) {
            rest.insert(0, u.clone());
            out.push(rest);
        }
    }
    out
}

/// A decomposition read off flattening ranks. Not minimal in general, but
/// always a valid upper bound; the certificate is re-summed before return.
pub fn rank_upper_greedy(t: &Tensor, kind: RankKind) -> Result<Decomposition> {
    let d = t.order();
    let min = if kind == RankKind::Rank { 1 } else { 2 };
    if d < min {
        return Err(Error::InvalidArgument(format!("{kind} needs order at least {min}, got {d}")));
    }
    let terms = if t.is_zero() {
        Vec::new()
    } else {
        match kind {
            RankKind::Rank => products(t)
                .into_iter()
                .map(|factors| RankOneTerm::Product { factors })
                .collect(),
            RankKind::Srank => {
                let (part, l, r) =
                    best_split(t, (0..d).map(|s| SlotSet::from_slots(&[s]))).expect("d >= 2");
                let slot = part.slots().next().expect("singleton");
                (0..l.cols())
                    .map(|k| RankOneTerm::Slice {
                        slot,
                        linear: l.column(k),
                        rest: row_tensor(t, &r, k, d - 1),
                    })
                    .collect()
            }
            RankKind::Prank => {
                let full = (1u32 << d) - 1;
                let parts = (1..full).filter(|b| b & 1 == 1).map(SlotSet::from_bits);
                let (part, l, r) = best_split(t, parts).expect("d >= 2");
                (0..l.cols())
                    .map(|k| RankOneTerm::Partition {
                        part,
                        left: column_tensor(t, &l, k, part.len()),
                        right: row_tensor(t, &r, k, d - part.len()),
                    })
                    .collect()
            }
        }
    };
    verify_certificate(t, &terms)?;
    Ok(Decomposition { terms })
}
