//! Pauli strings and weighted sums of them.
//!
//! Basis convention used throughout the crate: computational basis index `x`
//! has qubit `q` in state `(x >> q) & 1`, so qubit 0 is the least significant
//! bit. The same convention is used for fermionic occupation numbers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped when simplifying.
pub const COEFF_EPS: f64 = 1e-12;

/// Largest register for which dense matrices are built.
pub const DENSE_LIMIT: usize = 14;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }
}

/// Tensor product of single-qubit Paulis, stored in symplectic form.
///
/// Qubit `q` carries X if only bit `q` of `x` is set, Z if only bit `q` of `z`
/// is set and Y (the literal Pauli Y, not `XZ`) if both are set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity();
        s.set(qubit, Some(p));
        s
    }

    /// Builds a string from `(qubit, pauli)` pairs. Later pairs on the same
    /// qubit overwrite earlier ones.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Pauli)>>(pairs: I) -> Self {
        let mut s = Self::identity();
        for (q, p) in pairs {
            s.set(q, Some(p));
        }
        s
    }

    pub fn set(&mut self, qubit: usize, p: Option<Pauli>) {
        assert!(qubit < 64, "pauli strings support at most 64 qubits");
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        if let Some(p) = p {
            let (x, z) = p.bits();
            if x {
                self.x |= bit;
            }
            if z {
                self.z |= bit;
            }
        }
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        if qubit >= 64 {
            return None;
        }
        Pauli::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    /// Number of Y factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Highest qubit index touched plus one (0 for the identity).
    pub fn min_qubits(&self) -> usize {
        64 - self.support_mask().leading_zeros() as usize
    }

    /// Non-identity factors in ascending qubit order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        let mut mask = self.support_mask();
        std::iter::from_fn(move || {
            if mask == 0 {
                return None;
            }
            let q = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some((q, self.get(q).expect("support bit")))
        })
    }

    /// `self * other = phase * result`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let result = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        // Count quarter turns of i contributed per qubit.
        let mut quarter: i32 = 0;
        let mut mask = self.support_mask() & other.support_mask();
        while mask != 0 {
            let q = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            let a = self.get(q).expect("support bit");
            let b = other.get(q).expect("support bit");
            quarter += match (a, b) {
                (Pauli::X, Pauli::Y) | (Pauli::Y, Pauli::Z) | (Pauli::Z, Pauli::X) => 1,
                (Pauli::Y, Pauli::X) | (Pauli::Z, Pauli::Y) | (Pauli::X, Pauli::Z) => -1,
                _ => 0,
            };
        }
        (i_pow(quarter), result)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti % 2 == 0
    }

    /// Action on a computational basis state: `P |x> = phase |x'>`.
    #[inline]
    pub fn apply_to_basis(&self, x: u64) -> (u64, Complex64) {
        let sign = if (x & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (x ^ self.x, i_pow(self.y_count() as i32) * sign)
    }

    pub fn to_dense(&self, qubit_count: usize) -> Result<DMatrix<Complex64>> {
        QubitOperator::from_term(qubit_count, *self, Complex64::new(1.0, 0.0))?.to_dense()
    }
}

impl Ord for PauliString {
    /// Lexicographic order of the `(qubit, pauli)` factor lists.
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.iter();
        let mut b = other.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(fa), Some(fb)) => match fa.cmp(&fb) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{p:?}{q}")?;
        }
        Ok(())
    }
}

pub(crate) fn i_pow(k: i32) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitOperator {
    qubit_count: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl QubitOperator {
    pub fn zero(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(qubit_count: usize) -> Self {
        Self::constant(qubit_count, Complex64::new(1.0, 0.0))
    }

    pub fn constant(qubit_count: usize, c: Complex64) -> Self {
        let mut op = Self::zero(qubit_count);
        op.add_term(PauliString::identity(), c);
        op
    }

    pub fn from_term(qubit_count: usize, p: PauliString, c: Complex64) -> Result<Self> {
        if p.min_qubits() > qubit_count {
            return Err(Error::QubitOutOfRange {
                index: p.min_qubits() - 1,
                qubit_count,
            });
        }
        let mut op = Self::zero(qubit_count);
        op.add_term(p, c);
        Ok(op)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in the canonical (sorted) order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// Adds `c * p`, merging with an existing term and dropping it if the
    /// merged coefficient vanishes.
    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        debug_assert!(p.min_qubits() <= self.qubit_count);
        let entry = self.terms.entry(p).or_default();
        *entry += c;
        if entry.norm() < COEFF_EPS {
            self.terms.remove(&p);
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.qubit_count);
        for (p, v) in &self.terms {
            out.add_term(*p, v * c);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        // Pauli strings are Hermitian, so only coefficients conjugate.
        let mut out = Self::zero(self.qubit_count);
        for (p, v) in &self.terms {
            out.add_term(*p, v.conj());
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() < COEFF_EPS)
    }

    /// Largest coefficient difference to `other` over all strings.
    pub fn max_abs_diff(&self, other: &QubitOperator) -> f64 {
        let diff = self - other;
        diff.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(&PauliString::identity())
    }

    pub fn without_constant(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&PauliString::identity());
        out
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.qubit_count > DENSE_LIMIT {
            return Err(Error::TooLarge {
                count: self.qubit_count,
                limit: DENSE_LIMIT,
            });
        }
        let dim = 1usize << self.qubit_count;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (p, c) in &self.terms {
            for col in 0..dim {
                let (row, phase) = p.apply_to_basis(col as u64);
                m[(row as usize, col)] += c * phase;
            }
        }
        Ok(m)
    }

    pub fn compile(&self) -> SparsePauliSum {
        SparsePauliSum::new(self)
    }

    fn combine(&self, other: &QubitOperator, sign: f64) -> QubitOperator {
        let mut out = self.clone();
        out.qubit_count = self.qubit_count.max(other.qubit_count);
        for (p, c) in &other.terms {
            out.add_term(*p, c * sign);
        }
        out
    }
}

impl fmt::Display for QubitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i) [{}]", c.re, c.im, p)?;
        }
        Ok(())
    }
}

impl Add for &QubitOperator {
    type Output = QubitOperator;
    fn add(self, rhs: &QubitOperator) -> QubitOperator {
        self.combine(rhs, 1.0)
    }
}

impl Add for QubitOperator {
    type Output = QubitOperator;
    fn add(self, rhs: QubitOperator) -> QubitOperator {
        &self + &rhs
    }
}

impl AddAssign<&QubitOperator> for QubitOperator {
    fn add_assign(&mut self, rhs: &QubitOperator) {
        self.qubit_count = self.qubit_count.max(rhs.qubit_count);
        for (p, c) in &rhs.terms {
            self.add_term(*p, *c);
        }
    }
}

impl Sub for &QubitOperator {
    type Output = QubitOperator;
    fn sub(self, rhs: &QubitOperator) -> QubitOperator {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &QubitOperator {
    type Output = QubitOperator;
    fn neg(self) -> QubitOperator {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: &QubitOperator) -> QubitOperator {
        let mut out = QubitOperator::zero(self.qubit_count.max(rhs.qubit_count));
        for (pa, ca) in &self.terms {
            for (pb, cb) in &rhs.terms {
                let (phase, p) = pa.mul(pb);
                out.add_term(p, ca * cb * phase);
            }
        }
        out
    }
}

impl Mul for QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: QubitOperator) -> QubitOperator {
        &self * &rhs
    }
}

impl Mul<Complex64> for &QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: Complex64) -> QubitOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &QubitOperator {
    type Output = QubitOperator;
    fn mul(self, rhs: f64) -> QubitOperator {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// Terms sharing one bit-flip pattern.
#[derive(Clone, Debug)]
struct FlipGroup {
    flip: u64,
    /// `(z mask, coefficient * i^{#Y})`
    terms: Vec<(u64, Complex64)>,
}

impl FlipGroup {
    #[inline]
    fn amplitude(&self, x: u64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(z, c) in &self.terms {
            if (x & z).count_ones() % 2 == 0 {
                acc += c;
            } else {
                acc -= c;
            }
        }
        acc
    }
}

/// A [`QubitOperator`] compiled for repeated application to dense vectors.
///
/// The diagonal part is tabulated once; off-diagonal terms are grouped by
/// their X mask so each group costs a single pass over the vector.
#[derive(Clone, Debug)]
pub struct SparsePauliSum {
    qubit_count: usize,
    diagonal: Vec<Complex64>,
    groups: Vec<FlipGroup>,
    hermitian: bool,
}

impl SparsePauliSum {
    pub fn new(op: &QubitOperator) -> Self {
        let n = op.qubit_count;
        let dim = 1usize << n;
        let mut diag_terms = Vec::new();
        let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for (p, c) in op.terms() {
            let coeff = c * i_pow(p.y_count() as i32);
            if p.x_mask() == 0 {
                diag_terms.push((p.z_mask(), coeff));
            } else {
                groups.entry(p.x_mask()).or_default().push((p.z_mask(), coeff));
            }
        }
        let diagonal = if diag_terms.is_empty() {
            Vec::new()
        } else {
            let g = FlipGroup {
                flip: 0,
                terms: diag_terms,
            };
            (0..dim as u64).map(|x| g.amplitude(x)).collect()
        };
        Self {
            qubit_count: n,
            diagonal,
            groups: groups
                .into_iter()
                .map(|(flip, terms)| FlipGroup { flip, terms })
                .collect(),
            hermitian: op.is_hermitian(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `out = O psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(psi.len(), 1usize << self.qubit_count);
        assert_eq!(out.len(), psi.len());
        if self.diagonal.is_empty() {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        } else {
            for ((o, d), p) in out.iter_mut().zip(&self.diagonal).zip(psi) {
                *o = d * p;
            }
        }
        for g in &self.groups {
            for (x, amp) in psi.iter().enumerate() {
                let x = x as u64;
                out[(x ^ g.flip) as usize] += g.amplitude(x) * amp;
            }
        }
    }

    /// `<psi| O |psi>` for a normalized or unnormalized vector.
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        assert_eq!(psi.len(), 1usize << self.qubit_count);
        let mut acc = Complex64::new(0.0, 0.0);
        if !self.diagonal.is_empty() {
            for (d, p) in self.diagonal.iter().zip(psi) {
                acc += d * p.norm_sqr();
            }
        }
        for g in &self.groups {
            for (x, amp) in psi.iter().enumerate() {
                let x = x as u64;
                acc += psi[(x ^ g.flip) as usize].conj() * g.amplitude(x) * amp;
            }
        }
        acc
    }

    /// `tr(rho O)` for a row-major `2^n x 2^n` matrix.
    pub fn trace_product(&self, rho: &[Complex64]) -> Complex64 {
        let dim = 1usize << self.qubit_count;
        assert_eq!(rho.len(), dim * dim);
        let mut acc = Complex64::new(0.0, 0.0);
        if !self.diagonal.is_empty() {
            for (x, d) in self.diagonal.iter().enumerate() {
                acc += d * rho[x * dim + x];
            }
        }
        for g in &self.groups {
            for x in 0..dim {
                let y = x ^ g.flip as usize;
                acc += rho[x * dim + y] * g.amplitude(x as u64);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_qubit_products() {
        let x = PauliString::single(0, Pauli::X);
        let y = PauliString::single(0, Pauli::Y);
        let z = PauliString::single(0, Pauli::Z);
        assert_eq!(x.mul(&y), (I, z));
        assert_eq!(y.mul(&x), (-I, z));
        assert_eq!(z.mul(&x), (I, y));
        assert_eq!(x.mul(&x), (c(1.0), PauliString::identity()));
    }

    #[test]
    fn z_dense_is_diag() {
        let m = PauliString::single(0, Pauli::Z).to_dense(1).unwrap();
        assert_eq!(m[(0, 0)], c(1.0));
        assert_eq!(m[(1, 1)], c(-1.0));
        assert_eq!(m[(0, 1)], c(0.0));
    }

    #[test]
    fn dense_product_matches_string_product() {
        let a = PauliString::from_pairs([(0, Pauli::X), (1, Pauli::Y), (2, Pauli::Z)]);
        let b = PauliString::from_pairs([(0, Pauli::Y), (1, Pauli::Y), (3, Pauli::X)]);
        let (phase, p) = a.mul(&b);
        let lhs = a.to_dense(4).unwrap() * b.to_dense(4).unwrap();
        let rhs = p.to_dense(4).unwrap() * phase;
        assert!((lhs - rhs).norm() < 1e-14);
        assert_eq!(a.commutes_with(&b), {
            let (pb, _) = b.mul(&a);
            (pb - phase).norm() < 1e-14
        });
    }

    #[test]
    fn ordering_follows_factor_lists() {
        let x0 = PauliString::single(0, Pauli::X);
        let z0 = PauliString::single(0, Pauli::Z);
        let x0x2 = PauliString::from_pairs([(0, Pauli::X), (2, Pauli::X)]);
        let x1 = PauliString::single(1, Pauli::X);
        let mut v = vec![x1, z0, x0x2, x0, PauliString::identity()];
        v.sort();
        assert_eq!(v, vec![PauliString::identity(), x0, x0x2, z0, x1]);
    }

    #[test]
    fn merging_drops_cancelled_terms() {
        let mut op = QubitOperator::zero(2);
        let p = PauliString::single(1, Pauli::Z);
        op.add_term(p, c(0.5));
        op.add_term(p, c(-0.5));
        assert!(op.is_empty());
    }

    #[test]
    fn sparse_sum_matches_dense() {
        let mut op = QubitOperator::zero(3);
        op.add_term(PauliString::from_pairs([(0, Pauli::X), (2, Pauli::Y)]), c(0.7));
        op.add_term(PauliString::from_pairs([(1, Pauli::Z)]), Complex64::new(0.2, -0.1));
        op.add_term(PauliString::from_pairs([(0, Pauli::Y), (1, Pauli::Z), (2, Pauli::X)]), c(-1.3));
        op.add_term(PauliString::identity(), c(0.4));
        let dense = op.to_dense().unwrap();
        let psi: Vec<Complex64> = (0..8)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 1.1).cos()))
            .collect();
        let sparse = op.compile();
        let mut out = vec![Complex64::new(0.0, 0.0); 8];
        sparse.apply(&psi, &mut out);
        let v = nalgebra::DVector::from_vec(psi.clone());
        let expect = &dense * &v;
        for k in 0..8 {
            assert!((out[k] - expect[k]).norm() < 1e-13);
        }
        let e = sparse.expectation(&psi);
        let e_dense = v.dotc(&expect);
        assert!((e - e_dense).norm() < 1e-12);
        let rho = &v * v.adjoint();
        let rho_rows: Vec<Complex64> = (0..8)
            .flat_map(|r| (0..8).map(move |c| (r, c)))
            .map(|(r, cc)| rho[(r, cc)])
            .collect();
        assert!((sparse.trace_product(&rho_rows) - e_dense).norm() < 1e-12);
    }
}
