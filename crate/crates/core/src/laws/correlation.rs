use num_bigint::BigUint;
use rand::Rng;

use crate::bias::{bias, BiasValue};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::format::serialize;
use crate::gf::{FVector, PrimeField};
use crate::tensor::Tensor;

/// Largest `m + n` accepted, so the lifted bias stays small.
pub const MAX_FAMILY: usize = 8;

/// Two families of order-`d` forms on a common space, and the order-`(d+1)`
/// tensors that carry them on distinct coordinates of a new first slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationInstance {
    field: PrimeField,
    dim: usize,
    order: usize,
    ts: Vec<Tensor>,
    ss: Vec<Tensor>,
}

impl CorrelationInstance {
    pub fn new(ts: Vec<Tensor>, ss: Vec<Tensor>) -> Result<Self> {
        let first = ts
            .first()
            .or(ss.first())
            .ok_or_else(|| Error::InvalidArgument("empty correlation instance".into()))?;
        let (field, dim, order) = (first.field(), first.dim(), first.order());
        if ts.iter().chain(&ss).any(|t| t.field() != field || t.dim() != dim || t.order() != order) {
            return Err(Error::DimensionMismatch("family members must share p, n and d".into()));
        }
        if ts.len() + ss.len() > MAX_FAMILY {
            return Err(Error::InvalidArgument(format!(
                "m + n = {} above the cap of {MAX_FAMILY}",
                ts.len() + ss.len()
            )));
        }
        Ok(CorrelationInstance { field, dim, order, ts, ss })
    }

    pub fn random_with<R: Rng + ?Sized>(
        field: PrimeField,
        dim: usize,
        order: usize,
        m: usize,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let ts = (0..m).map(|_| Tensor::random_with(field, dim, order, rng)).collect::<Result<_>>()?;
        let ss = (0..n).map(|_| Tensor::random_with(field, dim, order, rng)).collect::<Result<_>>()?;
        Self::new(ts, ss)
    }

    pub fn ts(&self) -> &[Tensor] {
        &self.ts
    }

    pub fn ss(&self) -> &[Tensor] {
        &self.ss
    }

    /// Dimension of the lifted tensors: every slot is padded to
    /// `max(n, m + n)` so they stay cubical.
    pub fn lift_dim(&self) -> usize {
        self.dim.max(self.ts.len() + self.ss.len())
    }

    fn lift(&self, placed: &[(usize, &Tensor)]) -> Result<Tensor> {
        let mut entries = Vec::new();
        for &(i0, t) in placed {
            for (idx, v) in t.nonzero_entries() {
                let mut full = Vec::with_capacity(self.order + 1);
                full.push(i0);
                full.extend(idx);
                entries.push((full, v as u64));
            }
        }
        Tensor::from_entries(self.field.order(), self.lift_dim(), self.order + 1, &entries)
    }

    /// `Σ_{i<m} x⁰_i T_i`.
    pub fn lifted_t(&self) -> Result<Tensor> {
        let placed: Vec<_> = self.ts.iter().enumerate().collect();
        self.lift(&placed)
    }

    /// `Σ_{j<n} x⁰_(m+j) S_j`.
    pub fn lifted_s(&self) -> Result<Tensor> {
        let m = self.ts.len();
        let placed: Vec<_> = self.ss.iter().enumerate().map(|(j, s)| (m + j, s)).collect();
        self.lift(&placed)
    }

    pub fn lifted_sum(&self) -> Result<Tensor> {
        self.lifted_t()?.add(&self.lifted_s()?)
    }

    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (name, fam) in [("T", &self.ts), ("S", &self.ss)] {
            for (i, t) in fam.iter().enumerate() {
                out.push_str(&format!("{name}{}:\n{}", i + 1, serialize(t)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCheck {
    /// `Pr[all T_i and S_j vanish]`.
    pub lhs: BiasValue,
    pub pr_t: BiasValue,
    pub pr_s: BiasValue,
    /// `pr_t · pr_s`.
    pub rhs: BiasValue,
    /// The three probabilities equal the biases of the lifted tensors.
    pub bridge_holds: bool,
    pub inequality_holds: bool,
    pub slack: f64,
}

impl CorrelationCheck {
    pub fn holds(&self) -> bool {
        self.bridge_holds && self.inequality_holds
    }
}

/// Counts common zeros over all of `V^d` and compares exactly.
pub fn check_correlation(inst: &CorrelationInstance, budget: Budget) -> Result<CorrelationCheck> {
    let q = inst.field.order();
    let (n, d) = (inst.dim, inst.order);
    let members = (inst.ts.len() + inst.ss.len()) as u64;
    budget.check(&(super::pow(q, (n * d) as u64) * BigUint::from(members.max(1))))?;
    let (mut z_all, mut z_t, mut z_s) = (0u64, 0u64, 0u64);
    let mut x = vec![0u32; n * d];
    loop {
        let xs: Vec<FVector> = x
            .chunks(n.max(1))
            .take(d)
            .map(|c| FVector::new(inst.field, c.to_vec()))
            .collect::<Result<_>>()?;
        let xs = if n == 0 { vec![FVector::zeros(inst.field, 0); d] } else { xs };
        let mut t0 = true;
        for t in &inst.ts {
            if t.eval(&xs)? != 0 {
                t0 = false;
                break;
            }
        }
        let mut s0 = true;
        for s in &inst.ss {
            if s.eval(&xs)? != 0 {
                s0 = false;
                break;
            }
        }
        z_t += t0 as u64;
        z_s += s0 as u64;
        z_all += (t0 && s0) as u64;
        // odometer
        let mut i = x.len();
        let done = loop {
            if i == 0 {
                break true;
            }
            i -= 1;
            x[i] += 1;
            if (x[i] as u64) < q {
                break false;
            }
            x[i] = 0;
        };
        if done {
            break;
        }
    }
    let e = (n * d) as u32;
    let base = inst.field.p();
    let lhs = BiasValue::new(BigUint::from(z_all), e, base)?;
    let pr_t = BiasValue::new(BigUint::from(z_t), e, base)?;
    let pr_s = BiasValue::new(BigUint::from(z_s), e, base)?;
    let rhs = pr_t.mul(&pr_s)?;
    let bridge_holds = bias(&inst.lifted_sum()?, budget)? == lhs
        && bias(&inst.lifted_t()?, budget)? == pr_t
        && bias(&inst.lifted_s()?, budget)? == pr_s;
    Ok(CorrelationCheck {
        inequality_holds: lhs >= rhs,
        slack: lhs.difference_f64(&rhs),
        lhs,
        pr_t,
        pr_s,
        rhs,
        bridge_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::trial_rng;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    /// Zero probability of a family by brute force over explicit tuples.
    fn oracle(fam: &[Tensor], field: PrimeField, n: usize) -> (u64, u64) {
        let q = field.p();
        let mut zeros = 0;
        let total = (q as u64).pow(2 * n as u32);
        for code in 0..total {
            let mut c = code;
            let mut v = Vec::new();
            for _ in 0..2 * n {
                v.push((c % q as u64) as u32);
                c /= q as u64;
            }
            let x = FVector::new(field, v[..n].to_vec()).unwrap();
            let y = FVector::new(field, v[n..].to_vec()).unwrap();
            if fam.iter().all(|t| t.eval(&[x.clone(), y.clone()]).unwrap() == 0) {
                zeros += 1;
            }
        }
        (zeros, total)
    }

    #[test]
    fn same_family_twice() {
        let t = Tensor::random(f(2), 2, 2, 3).unwrap();
        let inst = CorrelationInstance::new(vec![t.clone()], vec![t]).unwrap();
        let c = check_correlation(&inst, Budget::DEFAULT).unwrap();
        assert!(c.holds());
        assert_eq!(c.lhs, c.pr_t);
    }

    #[test]
    fn random_families_match_oracle() {
        let fld = f(2);
        for trial in 0..30 {
            let mut rng = trial_rng(11, trial);
            let inst = CorrelationInstance::random_with(fld, 2, 2, 2, 2, &mut rng).unwrap();
            let c = check_correlation(&inst, Budget::DEFAULT).unwrap();
            assert!(c.holds());
            let all: Vec<Tensor> = inst.ts().iter().chain(inst.ss()).cloned().collect();
            let (z, total) = oracle(&all, fld, 2);
            assert_eq!(total, 16);
            assert_eq!(c.lhs, BiasValue::new(BigUint::from(z), 4, 2).unwrap());
            let (zt, _) = oracle(inst.ts(), fld, 2);
            assert_eq!(c.pr_t, BiasValue::new(BigUint::from(zt), 4, 2).unwrap());
        }
    }

    #[test]
    fn lifting_uses_distinct_coordinates() {
        let fld = f(3);
        let a = Tensor::identity(fld, 2, 2).unwrap();
        let b = Tensor::from_entries(3, 2, 2, &[(vec![0, 1], 2)]).unwrap();
        let inst = CorrelationInstance::new(vec![a], vec![b]).unwrap();
        assert_eq!(inst.lift_dim(), 2);
        let l = inst.lifted_sum().unwrap();
        assert_eq!(l.order(), 3);
        assert_eq!(l.get(&[0, 0, 0]).unwrap(), 1);
        assert_eq!(l.get(&[0, 1, 1]).unwrap(), 1);
        assert_eq!(l.get(&[1, 0, 1]).unwrap(), 2);
        assert_eq!(l.nonzero_entries().count(), 3);
    }

    #[test]
    fn cap_enforced() {
        let t = Tensor::zeros(f(2), 2, 2).unwrap();
        assert!(CorrelationInstance::new(vec![t.clone(); 5], vec![t; 4]).is_err());
    }
}
