//! Prime field arithmetic and dense linear algebra over `F_p`.
//!
//! Residues are stored as `u32` in `[0, p)`. Moduli are capped at `2^31` so
//! that every product fits in a `u64` before reduction.
//!
//! Elimination always picks the first nonzero entry (scanning rows downward)
//! in the leftmost unprocessed column, so reduced forms are reproducible.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest accepted modulus.
pub const MAX_MODULUS: u64 = 1 << 31;

/// The prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    /// Validates `p` by trial division.
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    /// Field size as `u64`, handy for counting.
    #[inline]
    pub fn order(self) -> u64 {
        self.p as u64
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u32 {
        (v % self.p as u64) as u32
    }

    #[inline]
    pub fn reduce_signed(self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let p = self.p as u64;
        (if s >= p { s - p } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.p as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.p) {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i64, (a % self.p) as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_signed(t0))
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Uniform residue.
    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.p)
    }

    /// Uniform nonzero residue.
    pub fn random_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> u32 {
        rng.gen_range(1..self.p)
    }

    pub(crate) fn check(self, v: u32) -> Result<()> {
        if v < self.p {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!(
                "residue {v} not in [0, {})",
                self.p
            )))
        }
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A vector in `F_p^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FVector {
    field: PrimeField,
    entries: Vec<u32>,
}

impl FVector {
    pub fn new(field: PrimeField, entries: Vec<u32>) -> Result<Self> {
        for &e in &entries {
            field.check(e)?;
        }
        Ok(Self { field, entries })
    }

    /// Reduces arbitrary integers mod `p`.
    pub fn from_u64s(field: PrimeField, entries: &[u64]) -> Self {
        Self {
            field,
            entries: entries.iter().map(|&e| field.reduce(e)).collect(),
        }
    }

    pub fn zeros(field: PrimeField, n: usize) -> Self {
        Self {
            field,
            entries: vec![0; n],
        }
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, n: usize, rng: &mut R) -> Self {
        Self {
            field,
            entries: (0..n).map(|_| field.random(rng)).collect(),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &FVector) -> Result<FVector> {
        self.same_shape(other)?;
        let f = self.field;
        Ok(FVector {
            field: f,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: u32) -> FVector {
        let f = self.field;
        FVector {
            field: f,
            entries: self.entries.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    pub fn dot(&self, other: &FVector) -> Result<u32> {
        self.same_shape(other)?;
        let p = self.field.p() as u64;
        let mut acc = 0u64;
        for (&a, &b) in self.entries.iter().zip(&other.entries) {
            acc = (acc + a as u64 * b as u64) % p;
        }
        Ok(acc as u32)
    }

    /// Concatenation `(self ‖ other)`.
    pub fn concat(&self, other: &FVector) -> Result<FVector> {
        if self.field != other.field {
            return Err(Error::DimensionMismatch("field mismatch".into()));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(FVector {
            field: self.field,
            entries,
        })
    }

    fn same_shape(&self, other: &FVector) -> Result<()> {
        if self.field != other.field || self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "vectors of length {} over {} and {} over {}",
                self.len(),
                self.field,
                other.len(),
                other.field
            )));
        }
        Ok(())
    }
}

/// A dense row-major matrix over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FMatrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        for &e in &data {
            field.check(e)?;
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.p();
        }
        m
    }

    pub fn from_columns(field: PrimeField, rows: usize, columns: &[FVector]) -> Result<Self> {
        let cols = columns.len();
        let mut m = Self::zeros(field, rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows || c.field() != field {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has length {} but {rows} rows expected",
                    c.len()
                )));
            }
            for i in 0..rows {
                m.data[i * cols + j] = c.entries()[i];
            }
        }
        Ok(m)
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            field,
            rows,
            cols,
            data: (0..rows * cols).map(|_| field.random(rng)).collect(),
        }
    }

    /// Random matrix with full column rank; requires `cols <= rows`.
    pub fn random_full_column_rank<R: Rng + ?Sized>(
        field: PrimeField,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if cols > rows {
            return Err(Error::InvalidArgument(format!(
                "cannot have {cols} independent columns in dimension {rows}"
            )));
        }
        loop {
            let m = Self::random(field, rows, cols, rng);
            if m.rank() == cols {
                return Ok(m);
            }
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = self.field.reduce(v as u64);
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> FVector {
        FVector {
            field: self.field,
            entries: (0..self.rows).map(|i| self.get(i, j)).collect(),
        }
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = FMatrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &FMatrix) -> Result<FMatrix> {
        if self.cols != other.rows || self.field != other.field {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.field.p() as u64;
        let mut out = FMatrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc = (acc + self.get(i, k) as u64 * other.get(k, j) as u64) % p;
                }
                out.data[i * other.cols + j] = acc as u32;
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &FVector) -> Result<FVector> {
        if self.cols != v.len() || self.field != v.field() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let p = self.field.p() as u64;
        let entries = (0..self.rows)
            .map(|i| {
                let mut acc = 0u64;
                for (k, &x) in v.entries().iter().enumerate() {
                    acc = (acc + self.get(i, k) as u64 * x as u64) % p;
                }
                acc as u32
            })
            .collect();
        Ok(FVector {
            field: self.field,
            entries,
        })
    }

    /// Rank over `F_p`. Uses packed XOR elimination when `p = 2`.
    pub fn rank(&self) -> usize {
        if self.field.p() == 2 {
            gf2_rank(&self.data, self.rows, self.cols)
        } else {
            self.rank_generic()
        }
    }

    /// Rank by modular elimination, regardless of `p`.
    pub fn rank_generic(&self) -> usize {
        let mut scratch = self.data.clone();
        rank_in_place(self.field, &mut scratch, self.rows, self.cols)
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (FMatrix, Vec<usize>) {
        let f = self.field;
        let (rows, cols) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    a.swap(pr * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(a[r * cols + c]).expect("pivot is nonzero");
            for j in 0..cols {
                a[r * cols + j] = f.mul(a[r * cols + j], inv);
            }
            for i in 0..rows {
                let factor = a[i * cols + c];
                if i == r || factor == 0 {
                    continue;
                }
                for j in 0..cols {
                    let t = f.mul(factor, a[r * cols + j]);
                    a[i * cols + j] = f.sub(a[i * cols + j], t);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (
            FMatrix {
                field: f,
                rows,
                cols,
                data: a,
            },
            pivots,
        )
    }

    /// Factors `self = left * right` with `left` of shape `rows x r` and
    /// `right` of shape `r x cols`, where `r` is the rank.
    pub fn rank_factorization(&self) -> (FMatrix, FMatrix) {
        let (reduced, pivots) = self.rref();
        let r = pivots.len();
        let right = FMatrix {
            field: self.field,
            rows: r,
            cols: self.cols,
            data: reduced.data[..r * self.cols].to_vec(),
        };
        let mut left = FMatrix::zeros(self.field, self.rows, r);
        for i in 0..self.rows {
            for (k, &c) in pivots.iter().enumerate() {
                left.data[i * r + k] = self.get(i, c);
            }
        }
        (left, right)
    }
}

/// Rank of a row-major `rows x cols` buffer, destroying its contents.
pub fn rank_in_place(field: PrimeField, a: &mut [u32], rows: usize, cols: usize) -> usize {
    debug_assert_eq!(a.len(), rows * cols);
    let p = field.p() as u64;
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if pr != rank {
            for j in c..cols {
                a.swap(pr * cols + j, rank * cols + j);
            }
        }
        let inv = field.inv(a[rank * cols + c]).expect("pivot is nonzero") as u64;
        for i in rank + 1..rows {
            let lead = a[i * cols + c];
            if lead == 0 {
                continue;
            }
            // row_i -= (lead / pivot) * row_rank
            let factor = p - (lead as u64 * inv) % p;
            for j in c..cols {
                let t = (a[i * cols + j] as u64 + factor * a[rank * cols + j] as u64) % p;
                a[i * cols + j] = t as u32;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over GF(2) of a 0/1 row-major buffer, packing rows into 64-bit words.
pub fn gf2_rank(data: &[u32], rows: usize, cols: usize) -> usize {
    let words = cols.div_ceil(64).max(1);
    let mut packed = vec![0u64; rows * words];
    for i in 0..rows {
        for j in 0..cols {
            if data[i * cols + j] & 1 == 1 {
                packed[i * words + j / 64] |= 1 << (j % 64);
            }
        }
    }
    gf2_rank_packed(&mut packed, rows, words, cols)
}

/// Rank of packed GF(2) rows (`words` u64 per row), destroying the buffer.
pub fn gf2_rank_packed(packed: &mut [u64], rows: usize, words: usize, cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (w, bit) = (c / 64, 1u64 << (c % 64));
        let Some(pr) = (rank..rows).find(|&i| packed[i * words + w] & bit != 0) else {
            continue;
        };
        if pr != rank {
            for k in 0..words {
                packed.swap(pr * words + k, rank * words + k);
            }
        }
        for i in rank + 1..rows {
            if packed[i * words + w] & bit != 0 {
                for k in w..words {
                    packed[i * words + k] ^= packed[rank * words + k];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Reusable scratch space for repeated rank computations of same-sized
/// matrices. Dispatches to packed XOR elimination for `p = 2`, lookup-table
/// elimination for `p < 256`, and modular elimination otherwise.
#[derive(Debug, Clone)]
pub struct RankWorkspace {
    field: PrimeField,
    mul: Vec<u8>,
    inv: Vec<u8>,
    bytes: Vec<u8>,
    words: Vec<u64>,
    wide: Vec<u32>,
}

impl RankWorkspace {
    pub fn new(field: PrimeField) -> Self {
        let p = field.p();
        let (mul, inv) = if p > 2 && p < 256 {
            let mut mul = vec![0u8; (p * p) as usize];
            let mut inv = vec![0u8; p as usize];
            for a in 0..p {
                for b in 0..p {
                    mul[(a * p + b) as usize] = field.mul(a, b) as u8;
                }
                if a != 0 {
                    inv[a as usize] = field.inv(a).expect("nonzero") as u8;
                }
            }
            (mul, inv)
        } else {
            (Vec::new(), Vec::new())
        };
        Self {
            field,
            mul,
            inv,
            bytes: Vec::new(),
            words: Vec::new(),
            wide: Vec::new(),
        }
    }

    /// Rank of the row-major `rows x cols` matrix in `data`.
    pub fn rank(&mut self, data: &[u32], rows: usize, cols: usize) -> usize {
        let p = self.field.p();
        if p == 2 {
            let words = cols.div_ceil(64).max(1);
            self.words.clear();
            self.words.resize(rows * words, 0);
            for i in 0..rows {
                for j in 0..cols {
                    if data[i * cols + j] != 0 {
                        self.words[i * words + j / 64] |= 1 << (j % 64);
                    }
                }
            }
            gf2_rank_packed(&mut self.words, rows, words, cols)
        } else if p < 256 {
            self.bytes.clear();
            self.bytes.extend(data.iter().map(|&x| x as u8));
            self.rank_bytes(rows, cols)
        } else {
            self.wide.clear();
            self.wide.extend_from_slice(data);
            rank_in_place(self.field, &mut self.wide, rows, cols)
        }
    }

    fn rank_bytes(&mut self, rows: usize, cols: usize) -> usize {
        let p = self.field.p() as usize;
        let a = &mut self.bytes;
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(pr) = (rank..rows).find(|&i| a[i * cols + c] != 0) else {
                continue;
            };
            if pr != rank {
                for j in c..cols {
                    a.swap(pr * cols + j, rank * cols + j);
                }
            }
            let inv = self.inv[a[rank * cols + c] as usize] as usize;
            for i in rank + 1..rows {
                let lead = a[i * cols + c] as usize;
                if lead == 0 {
                    continue;
                }
                // row_i -= (lead / pivot) * row_rank, as row_i += (p - factor) * row_rank
                let factor = self.mul[lead * p + inv] as usize;
                let neg = if factor == 0 { 0 } else { p - factor };
                let row_mul = &self.mul[neg * p..(neg + 1) * p];
                for j in c..cols {
                    let t = a[i * cols + j] as usize + row_mul[a[rank * cols + j] as usize] as usize;
                    a[i * cols + j] = if t >= p { (t - p) as u8 } else { t as u8 };
                }
            }
            rank += 1;
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn field_examples() {
        assert_eq!(f(5).mul(3, 4), 2);
        assert_eq!(f(2).add(1, 1), 0);
        // brute-force inverse of 3 mod 7
        let brute = (1..7).find(|x| (3 * x) % 7 == 1).unwrap();
        assert_eq!(f(7).inv(3).unwrap(), brute);
        assert_eq!(brute, 5);
    }

    #[test]
    fn construction_rejects_bad_moduli() {
        assert_eq!(PrimeField::new(4), Err(Error::NotPrime(4)));
        assert_eq!(PrimeField::new(1), Err(Error::NotPrime(1)));
        assert_eq!(PrimeField::new(0), Err(Error::NotPrime(0)));
        assert!(matches!(
            PrimeField::new((1 << 31) + 11),
            Err(Error::ModulusTooLarge(_))
        ));
        // 2^31 - 1 is a Mersenne prime
        assert!(PrimeField::new((1 << 31) - 1).is_ok());
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        assert_eq!(f(11).inv(0), Err(Error::ZeroInverse));
    }

    #[test]
    fn inverses_for_all_residues() {
        for p in [2u64, 3, 5, 7, 13, 101] {
            let fld = f(p);
            for a in 1..p as u32 {
                assert_eq!(fld.mul(a, fld.inv(a).unwrap()), 1);
            }
        }
        let big = f((1 << 31) - 1);
        let a = 1_234_567_890;
        assert_eq!(big.mul(a, big.inv(a).unwrap()), 1);
    }

    #[test]
    fn sub_neg_pow() {
        let fld = f(7);
        assert_eq!(fld.sub(2, 5), 4);
        assert_eq!(fld.neg(3), 4);
        assert_eq!(fld.neg(0), 0);
        assert_eq!(fld.pow(3, 6), 1);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FMatrix::zeros(f(2), 3, 3).rank(), 0);
        assert_eq!(FMatrix::identity(f(3), 4).rank(), 4);
        assert_eq!(FMatrix::zeros(f(5), 0, 0).rank(), 0);
        assert_eq!(FMatrix::zeros(f(5), 0, 4).rank(), 0);
    }

    /// Independent elimination: repeatedly extract a nonzero row and clear
    /// that row's leading column from all others, counting extractions.
    fn oracle_rank(m: &FMatrix) -> usize {
        let fld = m.field();
        let mut rows: Vec<Vec<u32>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
        let mut count = 0;
        while let Some(pos) = rows.iter().position(|r| r.iter().any(|&x| x != 0)) {
            let pivot_row = rows.swap_remove(pos);
            let lead = pivot_row.iter().position(|&x| x != 0).unwrap();
            let inv = fld.inv(pivot_row[lead]).unwrap();
            for r in rows.iter_mut() {
                let factor = fld.mul(r[lead], inv);
                for (x, &y) in r.iter_mut().zip(&pivot_row) {
                    *x = fld.sub(*x, fld.mul(factor, y));
                }
            }
            count += 1;
        }
        count
    }

    #[test]
    fn random_rank_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let m = FMatrix::random(f(5), 5, 5, &mut rng);
            assert_eq!(m.rank(), oracle_rank(&m));
        }
        for _ in 0..200 {
            let r = rng.gen_range(0..7);
            let c = rng.gen_range(0..7);
            let m = FMatrix::random(f(3), r, c, &mut rng);
            assert_eq!(m.rank(), oracle_rank(&m));
        }
    }

    #[test]
    fn gf2_fast_path_agrees_with_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let r = rng.gen_range(0..80);
            let c = rng.gen_range(0..140);
            let m = FMatrix::random(f(2), r, c, &mut rng);
            assert_eq!(m.rank(), m.rank_generic());
        }
    }

    #[test]
    fn workspace_agrees_with_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for p in [2u64, 3, 5, 251, 257, 65537] {
            let mut ws = RankWorkspace::new(f(p));
            for _ in 0..100 {
                let r = rng.gen_range(0..9);
                let c = rng.gen_range(0..70);
                let mut m = FMatrix::random(f(p), r, c, &mut rng);
                // sprinkle zeros so low ranks occur
                for i in 0..r {
                    if rng.gen_bool(0.3) {
                        for j in 0..c {
                            m.set(i, j, 0);
                        }
                    }
                }
                assert_eq!(ws.rank(m.data(), r, c), m.rank_generic(), "p={p}");
            }
        }
    }

    #[test]
    fn rank_factorization_reproduces_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [2, 3, 7] {
            for _ in 0..50 {
                let m = FMatrix::random(f(p), 4, 6, &mut rng);
                let (l, r) = m.rank_factorization();
                assert_eq!(l.cols(), m.rank());
                assert_eq!(l.mul(&r).unwrap(), m);
            }
        }
    }

    #[test]
    fn rref_is_reduced() {
        let fld = f(7);
        let m = FMatrix::new(fld, 2, 3, vec![2, 4, 6, 1, 2, 3]).unwrap();
        let (r, piv) = m.rref();
        assert_eq!(piv, vec![0]);
        assert_eq!(r.row(0), &[1, 2, 3]);
        assert_eq!(r.row(1), &[0, 0, 0]);
    }

    #[test]
    fn vector_ops() {
        let fld = f(3);
        let u = FVector::new(fld, vec![1, 2, 0]).unwrap();
        let v = FVector::new(fld, vec![2, 2, 1]).unwrap();
        assert_eq!(u.add(&v).unwrap().entries(), &[0, 1, 1]);
        assert_eq!(u.dot(&v).unwrap(), 0);
        assert!(FVector::new(fld, vec![3]).is_err());
        assert!(u.add(&FVector::zeros(fld, 2)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = FMatrix> {
            (prop::sample::select(vec![2u64, 3, 5, 7]), 0usize..6, 0usize..6).prop_flat_map(
                |(p, r, c)| {
                    prop::collection::vec(0..p as u32, r * c)
                        .prop_map(move |d| FMatrix::new(f(p), r, c, d).unwrap())
                },
            )
        }

        proptest! {
            #[test]
            fn rank_transpose_invariant(m in matrix()) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
                prop_assert!(m.rank() <= m.rows().min(m.cols()));
            }

            #[test]
            fn rank_row_operation_invariant(m in matrix(), i in 0usize..6, j in 0usize..6, s in 1u32..7) {
                prop_assume!(m.rows() > 0);
                let fld = m.field();
                let (i, j) = (i % m.rows(), j % m.rows());
                let s = s % fld.p();
                prop_assume!(s != 0);
                let mut data = m.data().to_vec();
                let c = m.cols();
                for k in 0..c {
                    data.swap(i * c + k, j * c + k);
                }
                for k in 0..c {
                    data[i * c + k] = fld.mul(data[i * c + k], s);
                }
                let m2 = FMatrix::new(fld, m.rows(), c, data).unwrap();
                prop_assert_eq!(m.rank(), m2.rank());
            }
        }
    }
}
