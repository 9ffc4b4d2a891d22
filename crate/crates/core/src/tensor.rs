//! Dense order-`d` multilinear forms over `F_p^n`.
//!
//! A [`Tensor`] stores its `n^d` coefficients in row-major order: slot 0 is the
//! slowest-varying index. Every slot has the same dimension `n`. Order-0
//! tensors (scalars) are allowed so that contraction is closed.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{FMatrix, FVector, PrimeField};

/// Largest supported order; slot sets are bitmasks.
pub const MAX_ORDER: usize = 32;

/// A subset of the slots `{0, …, d-1}`, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SlotSet(u32);

impl SlotSet {
    pub const EMPTY: SlotSet = SlotSet(0);

    pub fn from_bits(bits: u32) -> Self {
        SlotSet(bits)
    }

    pub fn full(d: usize) -> Self {
        assert!(d <= MAX_ORDER);
        if d == 32 {
            SlotSet(u32::MAX)
        } else {
            SlotSet((1u32 << d) - 1)
        }
    }

    pub fn from_slots(slots: &[usize]) -> Self {
        SlotSet(slots.iter().fold(0, |acc, &s| acc | (1 << s)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, slot: usize) -> bool {
        slot < 32 && self.0 >> slot & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// `[d] \ self`.
    pub fn complement(self, d: usize) -> Self {
        SlotSet(Self::full(d).0 & !self.0)
    }

    /// Members in increasing order.
    pub fn slots(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&s| self.0 >> s & 1 == 1)
    }

    /// All `2^d` subsets of `[d]`, in increasing bitmask order.
    pub fn all_subsets(d: usize) -> impl Iterator<Item = SlotSet> {
        assert!(d < 32);
        (0u32..1 << d).map(SlotSet)
    }
}

impl fmt::Display for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.slots().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Vectors fixed on some slots of a tensor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlotAssignment {
    fixed: BTreeMap<usize, FVector>,
}

impl SlotAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fix(mut self, slot: usize, v: FVector) -> Self {
        self.fixed.insert(slot, v);
        self
    }

    /// Fixes every slot in `slots` to the corresponding vector of `xs`.
    pub fn from_slots(slots: SlotSet, xs: &[FVector]) -> Self {
        let mut a = Self::new();
        for s in slots.slots() {
            a.fixed.insert(s, xs[s].clone());
        }
        a
    }

    pub fn slots(&self) -> SlotSet {
        SlotSet::from_slots(&self.fixed.keys().copied().collect::<Vec<_>>())
    }

    pub fn get(&self, slot: usize) -> Option<&FVector> {
        self.fixed.get(&slot)
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }
}

/// An order-`d` multilinear form `T: (F_p^n)^d -> F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tensor {
    field: PrimeField,
    order: usize,
    dim: usize,
    coeffs: Vec<u32>,
}

/// `n^d`, or an error when it does not fit in memory indices.
pub fn coeff_count(n: usize, d: usize) -> Result<usize> {
    n.checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidArgument(format!("{n}^{d} coefficients do not fit")))
}

impl Tensor {
    pub fn new(field: PrimeField, order: usize, dim: usize, coeffs: Vec<u32>) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::InvalidArgument(format!(
                "order {order} exceeds {MAX_ORDER}"
            )));
        }
        let len = coeff_count(dim, order)?;
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for order {order}, dimension {dim}",
                coeffs.len()
            )));
        }
        for &c in &coeffs {
            field.check(c)?;
        }
        Ok(Self {
            field,
            order,
            dim,
            coeffs,
        })
    }

    pub(crate) fn from_raw(field: PrimeField, order: usize, dim: usize, coeffs: Vec<u32>) -> Self {
        debug_assert_eq!(coeffs.len(), dim.pow(order as u32));
        Self {
            field,
            order,
            dim,
            coeffs,
        }
    }

    pub fn zeros(field: PrimeField, dim: usize, order: usize) -> Result<Self> {
        Self::new(field, order, dim, vec![0; coeff_count(dim, order)?])
    }

    pub fn scalar(field: PrimeField, v: u32) -> Self {
        Self::from_raw(field, 0, 0, vec![field.reduce(v as u64)])
    }

    /// Builds a dense tensor from a sparse entry list. Values are reduced
    /// mod `p` and duplicate indices are summed.
    pub fn from_entries(p: u64, n: usize, d: usize, entries: &[(Vec<usize>, u64)]) -> Result<Self> {
        let field = PrimeField::new(p)?;
        let mut t = Self::zeros(field, n, d)?;
        for (idx, v) in entries {
            let flat = t.flat_index(idx)?;
            t.coeffs[flat] = field.add(t.coeffs[flat], field.reduce(*v));
        }
        Ok(t)
    }

    /// `I(x^1, …, x^d) = Σ_i Π_j x^j_i`.
    pub fn identity(field: PrimeField, n: usize, d: usize) -> Result<Self> {
        Self::diagonal(field, n, d, &FVector::new(field, vec![1; n])?)
    }

    /// `Σ_i c_i Π_j x^j_i`.
    pub fn diagonal(field: PrimeField, n: usize, d: usize, c: &FVector) -> Result<Self> {
        if c.len() != n || c.field() != field {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal coefficients for dimension {n}",
                c.len()
            )));
        }
        let mut t = Self::zeros(field, n, d)?;
        if d == 0 {
            return Ok(t);
        }
        let step: usize = (0..d).map(|k| n.pow(k as u32)).sum();
        for (i, &ci) in c.entries().iter().enumerate() {
            t.coeffs[i * step] = ci;
        }
        Ok(t)
    }

    /// Coefficients drawn i.i.d. uniform from `F_p`, in row-major order, from
    /// ChaCha8 seeded with `ChaCha8Rng::seed_from_u64(seed)`.
    pub fn random(field: PrimeField, n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(field, n, d, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(
        field: PrimeField,
        n: usize,
        d: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let len = coeff_count(n, d)?;
        Ok(Self::from_raw(
            field,
            d,
            n,
            (0..len).map(|_| field.random(rng)).collect(),
        ))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The value of an order-0 tensor.
    pub fn scalar_value(&self) -> Option<u32> {
        (self.order == 0).then(|| self.coeffs[0])
    }

    pub fn flat_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order {
            return Err(Error::IndexOutOfRange(format!(
                "index of length {} for order {}",
                idx.len(),
                self.order
            )));
        }
        let mut flat = 0;
        for &i in idx {
            if i >= self.dim {
                return Err(Error::IndexOutOfRange(format!(
                    "index {i} not below dimension {}",
                    self.dim
                )));
            }
            flat = flat * self.dim + i;
        }
        Ok(flat)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        for slot in (0..self.order).rev() {
            idx[slot] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> Result<u32> {
        Ok(self.coeffs[self.flat_index(idx)?])
    }

    /// Nonzero entries in lexicographic index order.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (Vec<usize>, u32)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(flat, &c)| (self.multi_index(flat), c))
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.field != other.field || self.order != other.order || self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "order {} dim {} over {} vs order {} dim {} over {}",
                self.order, self.dim, self.field, other.order, other.dim, other.field
            )));
        }
        Ok(())
    }

    fn check_vector(&self, v: &FVector) -> Result<()> {
        if v.len() != self.dim || v.field() != self.field {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} over {} for a tensor of dimension {} over {}",
                v.len(),
                v.field(),
                self.dim,
                self.field
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(Tensor::from_raw(
            f,
            self.order,
            self.dim,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(Tensor::from_raw(
            f,
            self.order,
            self.dim,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.sub(a, b))
                .collect(),
        ))
    }

    pub fn scalar_mul(&self, c: u32) -> Tensor {
        let f = self.field;
        let c = f.reduce(c as u64);
        Tensor::from_raw(
            f,
            self.order,
            self.dim,
            self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
        )
    }

    /// Evaluates the form on one vector per slot.
    pub fn eval(&self, xs: &[FVector]) -> Result<u32> {
        if xs.len() != self.order {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors for an order-{} tensor",
                xs.len(),
                self.order
            )));
        }
        let mut assignment = SlotAssignment::new();
        for (slot, x) in xs.iter().enumerate() {
            assignment = assignment.fix(slot, x.clone());
        }
        Ok(self.contract(&assignment)?.coeffs[0])
    }

    /// Fixes the assigned slots; the result is a form on the remaining slots,
    /// which keep their relative order.
    pub fn contract(&self, fixed: &SlotAssignment) -> Result<Tensor> {
        for (&slot, v) in &fixed.fixed {
            if slot >= self.order {
                return Err(Error::IndexOutOfRange(format!(
                    "slot {slot} of an order-{} tensor",
                    self.order
                )));
            }
            self.check_vector(v)?;
        }
        let mut data = self.coeffs.clone();
        let mut order = self.order;
        // Highest slot first, so lower slot numbers stay valid.
        for (&slot, v) in fixed.fixed.iter().rev() {
            data = contract_slot(self.field, &data, self.dim, order, slot, v.entries());
            order -= 1;
        }
        Ok(Tensor::from_raw(self.field, order, self.dim, data))
    }

    /// Block-diagonal sum: `self` on the first `n₁` coordinates of each slot,
    /// `other` on the last `n₂`, zero on mixed index tuples.
    pub fn direct_sum(&self, other: &Tensor) -> Result<Tensor> {
        if self.field != other.field || self.order != other.order {
            return Err(Error::DimensionMismatch(format!(
                "direct sum of order {} over {} and order {} over {}",
                self.order, self.field, other.order, other.field
            )));
        }
        if self.order == 0 {
            return Err(Error::InvalidArgument(
                "direct sum needs order at least 1".into(),
            ));
        }
        let (n1, n2) = (self.dim, other.dim);
        let n = n1 + n2;
        let d = self.order;
        let mut out = Tensor::zeros(self.field, n, d)?;
        let embed = |src: &Tensor, offset: usize, out: &mut Tensor| {
            for (flat, &c) in src.coeffs.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let idx = src.multi_index(flat);
                let target = idx.iter().fold(0, |acc, &i| acc * n + i + offset);
                out.coeffs[target] = c;
            }
        };
        embed(self, 0, &mut out);
        embed(other, n1, &mut out);
        Ok(out)
    }

    /// Restriction to the column span of `basis` (an `n x k` matrix of full
    /// column rank): `S[j₁…j_d] = T(b_{j₁}, …, b_{j_d})`.
    pub fn restrict(&self, basis: &FMatrix) -> Result<Tensor> {
        let rank = basis.rank();
        if rank < basis.cols() {
            return Err(Error::RankDeficientBasis {
                rank,
                cols: basis.cols(),
            });
        }
        self.change_basis(basis)
    }

    /// Composes every slot with `basis` without checking its rank.
    pub fn change_basis(&self, basis: &FMatrix) -> Result<Tensor> {
        if basis.rows() != self.dim || basis.field() != self.field {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} basis for dimension {}",
                basis.rows(),
                basis.cols(),
                self.dim
            )));
        }
        let k = basis.cols();
        let mut shape = vec![self.dim; self.order];
        let mut data = self.coeffs.clone();
        for slot in 0..self.order {
            data = mode_product(self.field, &data, &shape, slot, basis);
            shape[slot] = k;
        }
        Ok(Tensor::from_raw(self.field, self.order, k, data))
    }

    /// The `2^d` summands `T_I(x^I, y^{I^c})` of `T(x + y)`, keyed by `I`.
    pub fn shift_terms(&self, x: &[FVector], y: &[FVector]) -> Result<BTreeMap<SlotSet, u32>> {
        if x.len() != self.order || y.len() != self.order {
            return Err(Error::DimensionMismatch(format!(
                "shift decomposition of an order-{} tensor needs {} vectors per side",
                self.order, self.order
            )));
        }
        let mut out = BTreeMap::new();
        for set in SlotSet::all_subsets(self.order) {
            let z: Vec<FVector> = (0..self.order)
                .map(|s| if set.contains(s) { x[s].clone() } else { y[s].clone() })
                .collect();
            out.insert(set, self.eval(&z)?);
        }
        Ok(out)
    }

    /// Outer product across a bipartition of the slots: the order-`d` form
    /// `left(x^A) · right(x^B)` with `A = part`, `B = [d] \ part`.
    pub fn partition_product(d: usize, part: SlotSet, left: &Tensor, right: &Tensor) -> Result<Tensor> {
        let comp = part.complement(d);
        if left.order != part.len() || right.order != comp.len() {
            return Err(Error::DimensionMismatch(format!(
                "factors of order {} and {} on a {}|{} split",
                left.order,
                right.order,
                part.len(),
                comp.len()
            )));
        }
        if left.field != right.field || (left.dim != right.dim && left.order > 0 && right.order > 0) {
            return Err(Error::DimensionMismatch("factor field or dimension".into()));
        }
        let field = left.field;
        let n = if left.order > 0 { left.dim } else { right.dim };
        let len = coeff_count(n, d)?;
        let a_slots: Vec<usize> = part.slots().collect();
        let b_slots: Vec<usize> = comp.slots().collect();
        let mut coeffs = vec![0u32; len];
        let mut idx = vec![0usize; d];
        for (flat, c) in coeffs.iter_mut().enumerate() {
            let mut rem = flat;
            for slot in (0..d).rev() {
                idx[slot] = rem % n;
                rem /= n;
            }
            let la = a_slots.iter().fold(0, |acc, &s| acc * n + idx[s]);
            let lb = b_slots.iter().fold(0, |acc, &s| acc * n + idx[s]);
            *c = field.mul(left.coeffs[la], right.coeffs[lb]);
        }
        Ok(Tensor::from_raw(field, d, n, coeffs))
    }

    /// Reshapes into an `n^|part| x n^(d-|part|)` matrix, rows indexed by the
    /// slots in `part` and columns by the rest, both in row-major order.
    pub fn flatten(&self, part: SlotSet) -> FMatrix {
        let d = self.order;
        let n = self.dim;
        let comp = part.complement(d);
        let rows = n.pow(part.len() as u32);
        let cols = n.pow(comp.len() as u32);
        let a_slots: Vec<usize> = part.slots().collect();
        let b_slots: Vec<usize> = comp.slots().collect();
        let mut data = vec![0u32; rows * cols];
        for (flat, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let idx = self.multi_index(flat);
            let r = a_slots.iter().fold(0, |acc, &s| acc * n + idx[s]);
            let col = b_slots.iter().fold(0, |acc, &s| acc * n + idx[s]);
            data[r * cols + col] = c;
        }
        FMatrix::new(self.field, rows, cols, data).expect("entries are residues")
    }
}

/// Contracts `slot` of a cubical `order`-tensor with `v`.
pub(crate) fn contract_slot(
    field: PrimeField,
    data: &[u32],
    n: usize,
    order: usize,
    slot: usize,
    v: &[u32],
) -> Vec<u32> {
    let inner = n.pow((order - 1 - slot) as u32);
    let outer = n.pow(slot as u32);
    let p = field.p() as u64;
    let mut out = vec![0u64; outer * inner];
    // Below 2^16 a sum of n products cannot overflow, so reduce once at the end.
    let lazy = p < 1 << 16;
    for o in 0..outer {
        for (k, &vk) in v.iter().enumerate() {
            if vk == 0 {
                continue;
            }
            let base = (o * n + k) * inner;
            let dst = &mut out[o * inner..(o + 1) * inner];
            if lazy {
                for (acc, &t) in dst.iter_mut().zip(&data[base..base + inner]) {
                    *acc += t as u64 * vk as u64;
                }
            } else {
                for (acc, &t) in dst.iter_mut().zip(&data[base..base + inner]) {
                    *acc = (*acc + t as u64 * vk as u64) % p;
                }
            }
        }
    }
    out.into_iter().map(|x| (x % p) as u32).collect()
}

/// `out[.., j, ..] = Σ_k data[.., k, ..] · m[k][j]` along `slot`.
fn mode_product(field: PrimeField, data: &[u32], shape: &[usize], slot: usize, m: &FMatrix) -> Vec<u32> {
    let outer: usize = shape[..slot].iter().product();
    let inner: usize = shape[slot + 1..].iter().product();
    let n_in = shape[slot];
    let n_out = m.cols();
    let p = field.p() as u64;
    let mut out = vec![0u64; outer * n_out * inner];
    for o in 0..outer {
        for k in 0..n_in {
            let src = &data[(o * n_in + k) * inner..(o * n_in + k + 1) * inner];
            for j in 0..n_out {
                let mkj = m.get(k, j) as u64;
                if mkj == 0 {
                    continue;
                }
                let dst = &mut out[(o * n_out + j) * inner..(o * n_out + j + 1) * inner];
                for (acc, &t) in dst.iter_mut().zip(src) {
                    *acc = (*acc + t as u64 * mkj) % p;
                }
            }
        }
    }
    out.into_iter().map(|x| x as u32).collect()
}

/// `R(x) = Σ_{I ⊆ [d]} R_I(x^I)` with each `R_I` an order-`|I|` tensor.
/// Missing components are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiComponentForm {
    field: PrimeField,
    order: usize,
    dim: usize,
    components: BTreeMap<SlotSet, Tensor>,
}

impl MultiComponentForm {
    pub fn new(field: PrimeField, dim: usize, order: usize) -> Self {
        Self {
            field,
            order,
            dim,
            components: BTreeMap::new(),
        }
    }

    pub fn with_component(mut self, set: SlotSet, t: Tensor) -> Result<Self> {
        self.insert(set, t)?;
        Ok(self)
    }

    pub fn insert(&mut self, set: SlotSet, t: Tensor) -> Result<()> {
        if set.bits() & !SlotSet::full(self.order).bits() != 0 {
            return Err(Error::IndexOutOfRange(format!(
                "slot set {set} outside [{}]",
                self.order
            )));
        }
        if t.order != set.len() || t.field != self.field || (t.order > 0 && t.dim != self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "component {set} must be an order-{} tensor of dimension {} over {}",
                set.len(),
                self.dim,
                self.field
            )));
        }
        self.components.insert(set, t);
        Ok(())
    }

    /// Every component drawn uniformly at random.
    pub fn random_with<R: Rng + ?Sized>(field: PrimeField, dim: usize, order: usize, rng: &mut R) -> Result<Self> {
        let mut form = Self::new(field, dim, order);
        for set in SlotSet::all_subsets(order) {
            let t = if set.is_empty() {
                Tensor::scalar(field, field.random(rng))
            } else {
                Tensor::random_with(field, dim, set.len(), rng)?
            };
            form.components.insert(set, t);
        }
        Ok(form)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &BTreeMap<SlotSet, Tensor> {
        &self.components
    }

    pub fn component(&self, set: SlotSet) -> Option<&Tensor> {
        self.components.get(&set)
    }

    /// `R_{[d]}`, or the zero tensor if absent.
    pub fn top(&self) -> Tensor {
        self.components
            .get(&SlotSet::full(self.order))
            .cloned()
            .unwrap_or_else(|| {
                Tensor::zeros(self.field, self.dim, self.order).expect("shape fits")
            })
    }

    pub fn eval(&self, xs: &[FVector]) -> Result<u32> {
        if xs.len() != self.order {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors for an order-{} form",
                xs.len(),
                self.order
            )));
        }
        let mut acc = 0;
        for (set, t) in &self.components {
            let sub: Vec<FVector> = set.slots().map(|s| xs[s].clone()).collect();
            acc = self.field.add(acc, t.eval(&sub)?);
        }
        Ok(acc)
    }
}
