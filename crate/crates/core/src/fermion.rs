//! Second-quantized fermionic operators and the Jordan-Wigner mapping.
//!
//! Terms are kept in a canonical normal order (creators left of annihilators,
//! each group in descending mode index). Normal ordering is only used to merge
//! equal terms; it carries no physical meaning here.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, QubitOperator, COEFF_EPS, DENSE_LIMIT};

/// A single creation (`dagger = true`) or annihilation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }
}

type Factors = Vec<Ladder>;

/// Weighted sum of products of ladder operators on `mode_count` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOperator {
    mode_count: usize,
    terms: BTreeMap<Factors, Complex64>,
}

impl FermionOperator {
    pub fn zero(mode_count: usize) -> Self {
        Self {
            mode_count,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(mode_count: usize) -> Self {
        Self::constant(mode_count, 1.0)
    }

    pub fn constant(mode_count: usize, c: f64) -> Self {
        let mut op = Self::zero(mode_count);
        op.add_normal_ordered(Vec::new(), Complex64::new(c, 0.0));
        op
    }

    /// Builds an operator from raw (not necessarily ordered) products.
    pub fn from_terms<I>(mode_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, Vec<Ladder>)>,
    {
        let mut op = Self::zero(mode_count);
        for (c, factors) in terms {
            op.add_product(c, &factors)?;
        }
        Ok(op)
    }

    /// A single product `c * f_1 f_2 ... f_k`.
    pub fn product(mode_count: usize, c: f64, factors: &[Ladder]) -> Result<Self> {
        let mut op = Self::zero(mode_count);
        op.add_product(Complex64::new(c, 0.0), factors)?;
        Ok(op)
    }

    pub fn create(mode_count: usize, mode: usize) -> Result<Self> {
        Self::product(mode_count, 1.0, &[Ladder::create(mode)])
    }

    pub fn annihilate(mode_count: usize, mode: usize) -> Result<Self> {
        Self::product(mode_count, 1.0, &[Ladder::annihilate(mode)])
    }

    pub fn number(mode_count: usize, mode: usize) -> Result<Self> {
        Self::product(
            mode_count,
            1.0,
            &[Ladder::create(mode), Ladder::annihilate(mode)],
        )
    }

    /// Adds `c * factors`, normal ordering the product first.
    pub fn add_product(&mut self, c: Complex64, factors: &[Ladder]) -> Result<()> {
        if let Some(bad) = factors.iter().find(|f| f.mode >= self.mode_count) {
            return Err(Error::ModeOutOfRange {
                index: bad.mode,
                mode_count: self.mode_count,
            });
        }
        for (ordered, coeff) in normal_order(factors.to_vec(), c) {
            self.add_normal_ordered(ordered, coeff);
        }
        Ok(())
    }

    fn add_normal_ordered(&mut self, factors: Factors, c: Complex64) {
        let entry = self.terms.entry(factors.clone()).or_default();
        *entry += c;
        if entry.norm() < COEFF_EPS {
            self.terms.remove(&factors);
        }
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], &Complex64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn constant_term(&self) -> Complex64 {
        self.terms.get(&Vec::new()).copied().unwrap_or_default()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.mode_count);
        for (k, v) in &self.terms {
            out.add_normal_ordered(k.clone(), v * c);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.mode_count);
        for (k, v) in &self.terms {
            let reversed: Factors = k.iter().rev().map(|f| f.adjoint()).collect();
            for (ordered, coeff) in normal_order(reversed, v.conj()) {
                out.add_normal_ordered(ordered, coeff);
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        (self - &self.adjoint()).is_empty()
    }

    pub fn commutator(&self, other: &FermionOperator) -> FermionOperator {
        &(self * other) - &(other * self)
    }

    /// Largest mode index referenced plus one.
    pub fn min_modes(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|k| k.iter().map(|f| f.mode + 1))
            .max()
            .unwrap_or(0)
    }

    /// Matrix in the occupation basis, built directly from the anticommutation
    /// signs without going through Pauli strings.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.mode_count > DENSE_LIMIT {
            return Err(Error::TooLarge {
                count: self.mode_count,
                limit: DENSE_LIMIT,
            });
        }
        let dim = 1usize << self.mode_count;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (factors, c) in &self.terms {
            for col in 0..dim {
                if let Some((row, sign)) = apply_product(factors, col as u64) {
                    m[(row as usize, col)] += c * sign;
                }
            }
        }
        Ok(m)
    }

    fn combine(&self, other: &FermionOperator, sign: f64) -> FermionOperator {
        let mut out = self.clone();
        out.mode_count = self.mode_count.max(other.mode_count);
        for (k, v) in &other.terms {
            out.add_normal_ordered(k.clone(), v * sign);
        }
        out
    }
}

/// Applies `f_1 ... f_k` (rightmost first) to occupation state `x`.
fn apply_product(factors: &[Ladder], mut x: u64) -> Option<(u64, f64)> {
    let mut sign = 1.0;
    for f in factors.iter().rev() {
        let bit = 1u64 << f.mode;
        let occupied = x & bit != 0;
        if occupied == f.dagger {
            return None;
        }
        if (x & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        x ^= bit;
    }
    Some((x, sign))
}

/// Position of `a` relative to `b` in normal order: true if `a` must move right.
fn out_of_order(a: Ladder, b: Ladder) -> bool {
    match (a.dagger, b.dagger) {
        (false, true) => true,
        (true, false) => false,
        _ => a.mode < b.mode,
    }
}

/// Rewrites a product as a sum of normal-ordered products.
fn normal_order(factors: Factors, c: Complex64) -> Vec<(Factors, Complex64)> {
    let mut out = Vec::new();
    let mut stack = vec![(factors, c)];
    while let Some((mut ops, coeff)) = stack.pop() {
        let mut zero = false;
        let mut changed = true;
        let mut c = coeff;
        // Bubble sort; each swap of distinct operators flips the sign, and
        // swapping c_i c_i^dagger spawns the contraction term.
        while changed && !zero {
            changed = false;
            for i in 0..ops.len().saturating_sub(1) {
                let (a, b) = (ops[i], ops[i + 1]);
                if a == b {
                    zero = true;
                    break;
                }
                if out_of_order(a, b) {
                    if a.mode == b.mode {
                        // c c^dagger = 1 - c^dagger c
                        let mut contracted = ops.clone();
                        contracted.drain(i..i + 2);
                        stack.push((contracted, c));
                    }
                    ops.swap(i, i + 1);
                    c = -c;
                    changed = true;
                }
            }
        }
        if !zero && c.norm() >= COEFF_EPS {
            out.push((ops, c));
        }
    }
    out
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            for l in k {
                write!(f, " c{}{}", l.mode, if l.dagger { "^" } else { "" })?;
            }
        }
        Ok(())
    }
}

impl Add for &FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: &FermionOperator) -> FermionOperator {
        self.combine(rhs, 1.0)
    }
}

impl Add for FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: FermionOperator) -> FermionOperator {
        &self + &rhs
    }
}

impl AddAssign<&FermionOperator> for FermionOperator {
    fn add_assign(&mut self, rhs: &FermionOperator) {
        self.mode_count = self.mode_count.max(rhs.mode_count);
        for (k, v) in &rhs.terms {
            self.add_normal_ordered(k.clone(), *v);
        }
    }
}

impl Sub for &FermionOperator {
    type Output = FermionOperator;
    fn sub(self, rhs: &FermionOperator) -> FermionOperator {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &FermionOperator {
    type Output = FermionOperator;
    fn neg(self) -> FermionOperator {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: &FermionOperator) -> FermionOperator {
        let mut out = FermionOperator::zero(self.mode_count.max(rhs.mode_count));
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let mut factors = ka.clone();
                factors.extend_from_slice(kb);
                for (ordered, coeff) in normal_order(factors, ca * cb) {
                    out.add_normal_ordered(ordered, coeff);
                }
            }
        }
        out
    }
}

impl Mul for FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: FermionOperator) -> FermionOperator {
        &self * &rhs
    }
}

impl Mul<f64> for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: f64) -> FermionOperator {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Mul<Complex64> for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: Complex64) -> FermionOperator {
        self.scale(rhs)
    }
}

/// Image of a single ladder operator:
/// `c_j -> Z_0 ... Z_{j-1} (X_j + i Y_j) / 2`, `c_j^dagger` its adjoint.
fn ladder_image(l: Ladder, qubit_count: usize) -> QubitOperator {
    let z_string = (0..l.mode).map(|k| (k, Pauli::Z));
    let x = PauliString::from_pairs(z_string.clone().chain([(l.mode, Pauli::X)]));
    let y = PauliString::from_pairs(z_string.chain([(l.mode, Pauli::Y)]));
    let y_coeff = if l.dagger { -0.5 } else { 0.5 };
    let mut op = QubitOperator::zero(qubit_count);
    op.add_term(x, Complex64::new(0.5, 0.0));
    op.add_term(y, Complex64::new(0.0, y_coeff));
    op
}

/// Jordan-Wigner image of `op` on a register of `op.mode_count()` qubits.
pub fn jordan_wigner(op: &FermionOperator) -> Result<QubitOperator> {
    let n = op.mode_count();
    if n == 0 {
        return Err(Error::InvalidLattice("operator has no modes".into()));
    }
    if op.min_modes() > n {
        return Err(Error::ModeOutOfRange {
            index: op.min_modes() - 1,
            mode_count: n,
        });
    }
    let mut out = QubitOperator::zero(n);
    for (factors, c) in op.terms() {
        let mut term = QubitOperator::constant(n, *c);
        for &l in factors {
            term = &term * &ladder_image(l, n);
        }
        out += &term;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn creation_image_single_mode() {
        let op = FermionOperator::create(1, 0).unwrap();
        let q = jordan_wigner(&op).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.coefficient(&PauliString::single(0, Pauli::X)), cplx(0.5, 0.0));
        assert_eq!(q.coefficient(&PauliString::single(0, Pauli::Y)), cplx(0.0, -0.5));
    }

    #[test]
    fn number_image_single_mode() {
        let q = jordan_wigner(&FermionOperator::number(1, 0).unwrap()).unwrap();
        assert_eq!(q.len(), 2);
        assert!((q.constant_term() - cplx(0.5, 0.0)).norm() < 1e-15);
        assert!((q.coefficient(&PauliString::single(0, Pauli::Z)) - cplx(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hopping_three_modes_matches_direct_matrix() {
        let op = FermionOperator::from_terms(
            3,
            [
                (cplx(1.0, 0.0), vec![Ladder::create(1), Ladder::annihilate(2)]),
                (cplx(1.0, 0.0), vec![Ladder::create(2), Ladder::annihilate(1)]),
            ],
        )
        .unwrap();
        let direct = op.to_dense().unwrap();
        // Hand-built: c_1^dag c_2 moves a particle from mode 2 to mode 1, no
        // modes strictly between them, so all matrix elements are +1.
        let mut expect = DMatrix::<Complex64>::zeros(8, 8);
        for x in 0..8usize {
            let (b1, b2) = ((x >> 1) & 1, (x >> 2) & 1);
            if b1 != b2 {
                let y = x ^ 0b110;
                expect[(y, x)] = cplx(1.0, 0.0);
            }
        }
        assert!((direct.clone() - expect).norm() < 1e-14);
        let via_jw = jordan_wigner(&op).unwrap().to_dense().unwrap();
        assert!((via_jw - direct).norm() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_modes() {
        assert!(matches!(
            FermionOperator::create(2, 2),
            Err(Error::ModeOutOfRange { index: 2, mode_count: 2 })
        ));
    }

    #[test]
    fn normal_ordering_merges_and_cancels() {
        // c0 c0^dag + c0^dag c0 = 1
        let a = FermionOperator::product(1, 1.0, &[Ladder::annihilate(0), Ladder::create(0)]).unwrap();
        let b = FermionOperator::number(1, 0).unwrap();
        let sum = &a + &b;
        assert_eq!(sum, FermionOperator::identity(1));
        // c0 c0 = 0
        let zero = FermionOperator::product(2, 1.0, &[Ladder::annihilate(0), Ladder::annihilate(0)]).unwrap();
        assert!(zero.is_empty());
        // c1 c0 = -c0 c1
        let p = FermionOperator::product(2, 1.0, &[Ladder::annihilate(1), Ladder::annihilate(0)]).unwrap();
        let q = FermionOperator::product(2, -1.0, &[Ladder::annihilate(0), Ladder::annihilate(1)]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn hermiticity() {
        let c = FermionOperator::annihilate(2, 1).unwrap();
        assert!(!c.is_hermitian());
        assert!((&c + &c.adjoint()).is_hermitian());
        let pair = FermionOperator::product(2, 1.0, &[Ladder::annihilate(1), Ladder::annihilate(0)]).unwrap();
        assert!((&pair + &pair.adjoint()).is_hermitian());
    }

    #[test]
    fn identity_dense() {
        let m = FermionOperator::identity(2).to_dense().unwrap();
        assert!((m - DMatrix::<Complex64>::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn dense_guard() {
        assert!(matches!(
            FermionOperator::identity(15).to_dense(),
            Err(Error::TooLarge { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ladder() -> impl Strategy<Value = Ladder> {
            (0usize..4, any::<bool>()).prop_map(|(mode, dagger)| Ladder { mode, dagger })
        }

        fn operator() -> impl Strategy<Value = FermionOperator> {
            prop::collection::vec(
                ((-1.0f64..1.0, -1.0f64..1.0), prop::collection::vec(ladder(), 0..4)),
                1..5,
            )
            .prop_map(|terms| {
                FermionOperator::from_terms(
                    4,
                    terms.into_iter().map(|((re, im), f)| (Complex64::new(re, im), f)),
                )
                .unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn jw_is_a_homomorphism(a in operator(), b in operator()) {
                let lhs = jordan_wigner(&(&a * &b)).unwrap();
                let rhs = &jordan_wigner(&a).unwrap() * &jordan_wigner(&b).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }

            #[test]
            fn dense_paths_agree(a in operator()) {
                let h = &a + &a.adjoint();
                prop_assert!(h.is_hermitian());
                let q = jordan_wigner(&h).unwrap();
                prop_assert!(q.is_hermitian());
                let diff = q.to_dense().unwrap() - h.to_dense().unwrap();
                prop_assert!(diff.iter().all(|z| z.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn anticommutation_on_four_modes() {
        let m = 4;
        let id = DMatrix::<Complex64>::identity(16, 16);
        let image = |l: Ladder| {
            let op = FermionOperator::product(m, 1.0, &[l]).unwrap();
            jordan_wigner(&op).unwrap().to_dense().unwrap()
        };
        for i in 0..m {
            for j in 0..m {
                let ci = image(Ladder::annihilate(i));
                let cj = image(Ladder::annihilate(j));
                let cjd = image(Ladder::create(j));
                let mixed = &ci * &cjd + &cjd * &ci;
                let expect = if i == j { id.clone() } else { id.clone() * Complex64::new(0.0, 0.0) };
                assert!((mixed - expect).iter().all(|z| z.norm() < 1e-12));
                let same = &ci * &cj + &cj * &ci;
                assert!(same.iter().all(|z| z.norm() < 1e-12));
            }
        }
    }
}
