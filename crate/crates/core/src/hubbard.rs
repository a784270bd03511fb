//! The 2D Hubbard model with staggered-field and pairing-field couplings.
//!
//! Spin-orbital ordering: site `(x, y)` owns modes `2 (x + nx y)` (spin up)
//! and `2 (x + nx y) + 1` (spin down), so the on-site pair is adjacent under
//! Jordan-Wigner.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, Ladder};
use crate::pauli::DENSE_LIMIT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// How the external field strengths follow the interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FieldSchedule {
    /// `max(0.1, 0.1 |U|)`
    #[default]
    Abs,
    /// `max(0.1, 0.1 U)`
    Literal,
    /// Both fields zero.
    Off,
}

/// Returns `(delta_s_ext, b_af_ext)` for interaction `u`.
pub fn external_field_schedule(u: f64, schedule: FieldSchedule) -> (f64, f64) {
    let f = match schedule {
        FieldSchedule::Abs => (0.1 * u.abs()).max(0.1),
        FieldSchedule::Literal => (0.1 * u).max(0.1),
        FieldSchedule::Off => 0.0,
    };
    (f, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub nx: usize,
    pub ny: usize,
    pub t: f64,
    pub u: f64,
    pub b_af_ext: f64,
    pub delta_s_ext: f64,
    pub periodic: bool,
    /// Drop wrap-around bonds that repeat an existing site pair.
    pub dedup_bonds: bool,
}

impl LatticeSpec {
    /// Periodic lattice without external fields.
    pub fn new(nx: usize, ny: usize, t: f64, u: f64) -> Self {
        Self {
            nx,
            ny,
            t,
            u,
            b_af_ext: 0.0,
            delta_s_ext: 0.0,
            periodic: true,
            dedup_bonds: true,
        }
    }

    pub fn with_fields(mut self, delta_s_ext: f64, b_af_ext: f64) -> Self {
        self.delta_s_ext = delta_s_ext;
        self.b_af_ext = b_af_ext;
        self
    }

    pub fn with_schedule(self, schedule: FieldSchedule) -> Self {
        let (d, b) = external_field_schedule(self.u, schedule);
        self.with_fields(d, b)
    }

    pub fn open(mut self) -> Self {
        self.periodic = false;
        self
    }

    pub fn without_fields(self) -> Self {
        self.with_fields(0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidLattice(format!(
                "lattice {}x{} has no sites",
                self.nx, self.ny
            )));
        }
        if self.mode_count() > 64 {
            return Err(Error::InvalidLattice(format!(
                "{} modes exceed the 64-qubit register limit",
                self.mode_count()
            )));
        }
        let finite = [self.t, self.u, self.b_af_ext, self.delta_s_ext];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLattice("non-finite coupling".into()));
        }
        Ok(())
    }

    pub fn site_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn mode_count(&self) -> usize {
        2 * self.site_count()
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        x + self.nx * y
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.nx, site / self.nx)
    }

    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        2 * site + spin.index()
    }

    /// `(-1)^{(x + y) mod 2}` of the site holding `mode`.
    pub fn sublattice_sign(&self, mode: usize) -> f64 {
        let (x, y) = self.coords(mode / 2);
        if (x + y) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn spin_of(&self, mode: usize) -> Spin {
        if mode % 2 == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    /// Staggered parity `sigma (-1)^{(x+y) mod 2}` of a spin-orbital.
    pub fn parity(&self, mode: usize) -> f64 {
        self.spin_of(mode).sign() * self.sublattice_sign(mode)
    }

    /// Nearest-neighbour bonds tagged by hopping class.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut regular = Vec::new();
        let mut wrapped = Vec::new();
        for y in 0..self.ny {
            for x in 0..self.nx {
                let from = self.site(x, y);
                if x + 1 < self.nx || (self.periodic && self.nx > 1) {
                    let class = if x % 2 == 1 { HoppingClass::XOdd } else { HoppingClass::XEven };
                    let bond = Bond {
                        from,
                        to: self.site((x + 1) % self.nx, y),
                        class,
                    };
                    if x + 1 < self.nx { regular.push(bond) } else { wrapped.push(bond) }
                }
                if y + 1 < self.ny || (self.periodic && self.ny > 1) {
                    let class = if y % 2 == 1 { HoppingClass::YOdd } else { HoppingClass::YEven };
                    let bond = Bond {
                        from,
                        to: self.site(x, (y + 1) % self.ny),
                        class,
                    };
                    if y + 1 < self.ny { regular.push(bond) } else { wrapped.push(bond) }
                }
            }
        }
        let mut seen: BTreeSet<(usize, usize)> = regular.iter().map(|b| b.key()).collect();
        for b in wrapped {
            if !self.dedup_bonds || seen.insert(b.key()) {
                regular.push(b);
            }
        }
        regular
    }
}

/// Which of the four hopping generators a bond belongs to, keyed by the
/// parity of the bond's starting coordinate along its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HoppingClass {
    XOdd,
    XEven,
    YOdd,
    YEven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bond {
    pub from: usize,
    pub to: usize,
    pub class: HoppingClass,
}

impl Bond {
    fn key(&self) -> (usize, usize) {
        (self.from.min(self.to), self.from.max(self.to))
    }
}

fn hopping(spec: &LatticeSpec, filter: impl Fn(&Bond) -> bool) -> FermionOperator {
    let m = spec.mode_count();
    let mut op = FermionOperator::zero(m);
    let t = Complex64::new(spec.t, 0.0);
    for bond in spec.bonds().iter().filter(|b| filter(b)) {
        for spin in [Spin::Up, Spin::Down] {
            let a = spec.mode(bond.from, spin);
            let b = spec.mode(bond.to, spin);
            op.add_product(t, &[Ladder::create(a), Ladder::annihilate(b)])
                .expect("bond modes in range");
            op.add_product(t, &[Ladder::create(b), Ladder::annihilate(a)])
                .expect("bond modes in range");
        }
    }
    op
}

fn interaction(spec: &LatticeSpec) -> FermionOperator {
    let m = spec.mode_count();
    let mut op = FermionOperator::zero(m);
    let u = spec.u;
    if u == 0.0 {
        return op;
    }
    for site in 0..spec.site_count() {
        let up = spec.mode(site, Spin::Up);
        let dn = spec.mode(site, Spin::Down);
        // U (n_up - 1/2)(n_dn - 1/2)
        let c = |v: f64| Complex64::new(v, 0.0);
        op.add_product(
            c(u),
            &[Ladder::create(up), Ladder::annihilate(up), Ladder::create(dn), Ladder::annihilate(dn)],
        )
        .expect("site modes in range");
        op.add_product(c(-0.5 * u), &[Ladder::create(up), Ladder::annihilate(up)])
            .expect("site modes in range");
        op.add_product(c(-0.5 * u), &[Ladder::create(dn), Ladder::annihilate(dn)])
            .expect("site modes in range");
        op.add_product(c(0.25 * u), &[]).expect("constant");
    }
    op
}

/// `sum_q p(q) n_q` over all spin-orbitals.
fn staggered_density(spec: &LatticeSpec) -> FermionOperator {
    let m = spec.mode_count();
    let mut op = FermionOperator::zero(m);
    for q in 0..m {
        op.add_product(
            Complex64::new(spec.parity(q), 0.0),
            &[Ladder::create(q), Ladder::annihilate(q)],
        )
        .expect("mode in range");
    }
    op
}

/// `sum_site c_dn c_up`.
fn pair_annihilation(spec: &LatticeSpec) -> FermionOperator {
    let m = spec.mode_count();
    let mut op = FermionOperator::zero(m);
    for site in 0..spec.site_count() {
        op.add_product(
            Complex64::new(1.0, 0.0),
            &[
                Ladder::annihilate(spec.mode(site, Spin::Down)),
                Ladder::annihilate(spec.mode(site, Spin::Up)),
            ],
        )
        .expect("site modes in range");
    }
    op
}

/// Full Hamiltonian: hopping, interaction and both external-field couplings.
pub fn build_hamiltonian(spec: &LatticeSpec) -> Result<FermionOperator> {
    spec.validate()?;
    let mut h = hopping(spec, |_| true);
    h += &interaction(spec);
    if spec.b_af_ext != 0.0 {
        h += &(&staggered_density(spec) * spec.b_af_ext);
    }
    if spec.delta_s_ext != 0.0 {
        let pair = pair_annihilation(spec);
        h += &(&(&pair + &pair.adjoint()) * spec.delta_s_ext);
    }
    Ok(h)
}

/// The five field-free generators: x-hopping (odd, even), y-hopping (odd,
/// even) and the interaction. Classes without bonds yield the zero operator.
pub fn decompose(spec: &LatticeSpec) -> Result<[FermionOperator; 5]> {
    spec.validate()?;
    Ok([
        hopping(spec, |b| b.class == HoppingClass::XOdd),
        hopping(spec, |b| b.class == HoppingClass::XEven),
        hopping(spec, |b| b.class == HoppingClass::YOdd),
        hopping(spec, |b| b.class == HoppingClass::YEven),
        interaction(spec),
    ])
}

/// Staggered magnetization per site and the (non-Hermitian) pairing sum
/// `U sum_site c_dn c_up`.
pub fn order_parameter_observables(spec: &LatticeSpec) -> Result<(FermionOperator, FermionOperator)> {
    spec.validate()?;
    let m_af = &staggered_density(spec) * (1.0 / spec.site_count() as f64);
    let delta_s = &pair_annihilation(spec) * spec.u;
    Ok((m_af, delta_s))
}

/// Symmetry-breaking generator sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BreakingCombo {
    Bcs,
    Af,
    BcsAf,
}

impl BreakingCombo {
    pub const ALL: [BreakingCombo; 3] = [BreakingCombo::Bcs, BreakingCombo::Af, BreakingCombo::BcsAf];

    pub fn generator_count(self) -> usize {
        match self {
            BreakingCombo::Bcs => 1,
            BreakingCombo::Af => 2,
            BreakingCombo::BcsAf => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BreakingCombo::Bcs => "bcs",
            BreakingCombo::Af => "af",
            BreakingCombo::BcsAf => "bcs+af",
        }
    }
}

/// `sum_{p(q) = parity} (c_q + c_q^dagger)`.
fn single_particle_source(spec: &LatticeSpec, parity: f64) -> FermionOperator {
    let m = spec.mode_count();
    let mut op = FermionOperator::zero(m);
    for q in (0..m).filter(|&q| spec.parity(q) == parity) {
        let one = Complex64::new(1.0, 0.0);
        op.add_product(one, &[Ladder::annihilate(q)]).expect("mode in range");
        op.add_product(one, &[Ladder::create(q)]).expect("mode in range");
    }
    op
}

/// Returns the pairing source, the two parity-resolved single-particle
/// sources (`p = -1` first), or all three, each Hermitian.
pub fn symmetry_breaking_terms(spec: &LatticeSpec, combo: BreakingCombo) -> Result<Vec<FermionOperator>> {
    spec.validate()?;
    let pair = pair_annihilation(spec);
    let bcs = &pair + &pair.adjoint();
    let af = || [single_particle_source(spec, -1.0), single_particle_source(spec, 1.0)];
    Ok(match combo {
        BreakingCombo::Bcs => vec![bcs],
        BreakingCombo::Af => af().to_vec(),
        BreakingCombo::BcsAf => {
            let mut v = vec![bcs];
            v.extend(af());
            v
        }
    })
}

pub fn total_number(spec: &LatticeSpec) -> FermionOperator {
    let m = spec.mode_count();
    let mut op = FermionOperator::zero(m);
    for q in 0..m {
        op.add_product(Complex64::new(1.0, 0.0), &[Ladder::create(q), Ladder::annihilate(q)])
            .expect("mode in range");
    }
    op
}

pub fn total_sz(spec: &LatticeSpec) -> FermionOperator {
    let m = spec.mode_count();
    let mut op = FermionOperator::zero(m);
    for q in 0..m {
        let s = 0.5 * spec.spin_of(q).sign();
        op.add_product(Complex64::new(s, 0.0), &[Ladder::create(q), Ladder::annihilate(q)])
            .expect("mode in range");
    }
    op
}

/// Image of an occupation basis state under the global spin flip
/// `c_{i up} <-> c_{i dn}`, which fixes the vacuum.
///
/// Basis states are ascending products `c+_{q1} c+_{q2} ... |0>`; the flipped
/// product is reordered and the sign is the parity of that permutation.
pub fn spin_flip_basis(x: u64) -> (u64, f64) {
    let images: Vec<u32> = (0..64u32).filter(|&q| x >> q & 1 == 1).map(|q| q ^ 1).collect();
    let mut inversions = 0usize;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if images[i] > images[j] {
                inversions += 1;
            }
        }
    }
    let out = images.iter().fold(0u64, |acc, &q| acc | 1 << q);
    (out, if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

/// Dense matrix of the global spin flip.
pub fn spin_flip_matrix(spec: &LatticeSpec) -> Result<DMatrix<Complex64>> {
    let m = spec.mode_count();
    if m > DENSE_LIMIT {
        return Err(Error::TooLarge { count: m, limit: DENSE_LIMIT });
    }
    let dim = 1usize << m;
    let mut f = DMatrix::<Complex64>::zeros(dim, dim);
    for x in 0..dim as u64 {
        let (y, s) = spin_flip_basis(x);
        f[(y as usize, x as usize)] = Complex64::new(s, 0.0);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::jordan_wigner;
    use nalgebra::DVector;

    fn commutator_norm(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a * b - b * a).norm()
    }

    fn dense(op: &FermionOperator) -> DMatrix<Complex64> {
        op.to_dense().unwrap()
    }

    /// Lowest eigenvalue of a real symmetric matrix restricted to basis
    /// states with the given particle number.
    fn sector_ground_energy(m: &DMatrix<Complex64>, modes: usize, particles: u32) -> f64 {
        let states: Vec<usize> = (0..1usize << modes).filter(|x| x.count_ones() == particles).collect();
        let block = DMatrix::<f64>::from_fn(states.len(), states.len(), |i, j| m[(states[i], states[j])].re);
        block.symmetric_eigen().eigenvalues.min()
    }

    fn basis_expectation(op: &FermionOperator, x: usize) -> Complex64 {
        dense(op)[(x, x)]
    }

    #[test]
    fn single_site_without_interaction_is_zero() {
        let h = build_hamiltonian(&LatticeSpec::new(1, 1, -1.0, 0.0)).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn open_dimer_half_filling() {
        let spec = LatticeSpec::new(2, 1, -1.0, 0.0).open();
        let m = dense(&build_hamiltonian(&spec).unwrap());
        let e = sector_ground_energy(&m, 4, 2);
        assert!((e + 2.0).abs() < 1e-12);
    }

    #[test]
    fn field_schedule() {
        assert_eq!(external_field_schedule(5.0, FieldSchedule::Abs), (0.5, 0.5));
        assert_eq!(external_field_schedule(0.0, FieldSchedule::Abs), (0.1, 0.1));
        let (d, b) = external_field_schedule(-3.0, FieldSchedule::Abs);
        assert!((d - 0.3).abs() < 1e-15 && (b - 0.3).abs() < 1e-15);
        assert_eq!(external_field_schedule(-3.0, FieldSchedule::Literal), (0.1, 0.1));
        assert_eq!(external_field_schedule(-3.0, FieldSchedule::Off), (0.0, 0.0));
    }

    #[test]
    fn bond_classes() {
        let count = |spec: &LatticeSpec, c: HoppingClass| spec.bonds().iter().filter(|b| b.class == c).count();
        let s32 = LatticeSpec::new(3, 2, -1.0, 1.0);
        assert_eq!(s32.bonds().len(), 9);
        assert_eq!(count(&s32, HoppingClass::XOdd), 2);
        assert_eq!(count(&s32, HoppingClass::XEven), 4);
        assert_eq!(count(&s32, HoppingClass::YOdd), 0);
        assert_eq!(count(&s32, HoppingClass::YEven), 3);
        let s22 = LatticeSpec::new(2, 2, -1.0, 1.0);
        assert_eq!(s22.bonds().len(), 4);
        let mut doubled = s22;
        doubled.dedup_bonds = false;
        assert_eq!(doubled.bonds().len(), 8);
        assert!(LatticeSpec::new(1, 1, -1.0, 1.0).bonds().is_empty());
    }

    #[test]
    fn decomposition_sums_to_field_free_hamiltonian() {
        let spec = LatticeSpec::new(3, 2, -1.0, 2.5).with_fields(0.3, 0.2);
        let parts = decompose(&spec).unwrap();
        let mut sum = FermionOperator::zero(spec.mode_count());
        for p in &parts {
            sum += p;
        }
        assert_eq!(sum, build_hamiltonian(&spec.without_fields()).unwrap());
        let quartic = parts[4].terms().filter(|(f, _)| f.len() == 4).count();
        assert_eq!(quartic, 6);
    }

    #[test]
    fn generators_conserve_number_and_spin_flip() {
        let spec = LatticeSpec::new(2, 2, -1.0, 1.7);
        let n = dense(&total_number(&spec));
        let flip = spin_flip_matrix(&spec).unwrap();
        for part in decompose(&spec).unwrap() {
            let h = dense(&part);
            assert!(commutator_norm(&h, &n) < 1e-12);
            assert!(commutator_norm(&h, &flip) < 1e-12);
        }
    }

    #[test]
    fn spin_flip_is_an_involution_mapping_ladders() {
        let spec = LatticeSpec::new(2, 1, -1.0, 0.0);
        let f = spin_flip_matrix(&spec).unwrap();
        assert!((&f * &f - DMatrix::<Complex64>::identity(16, 16)).norm() < 1e-14);
        for q in 0..4 {
            let c = dense(&FermionOperator::create(4, q).unwrap());
            let partner = dense(&FermionOperator::create(4, q ^ 1).unwrap());
            assert!((&f * c * f.adjoint() - partner).norm() < 1e-14);
        }
    }

    #[test]
    fn symmetries_and_their_breaking() {
        let base = LatticeSpec::new(2, 2, -1.0, 3.0);
        let n = dense(&total_number(&base));
        let sz = dense(&total_sz(&base));
        let flip = spin_flip_matrix(&base).unwrap();
        let h = dense(&build_hamiltonian(&base).unwrap());
        assert!(commutator_norm(&h, &n) < 1e-12);
        assert!(commutator_norm(&h, &sz) < 1e-12);
        assert!(commutator_norm(&h, &flip) < 1e-12);
        let paired = dense(&build_hamiltonian(&base.with_fields(0.3, 0.0)).unwrap());
        assert!(commutator_norm(&paired, &n) > 1e-3);
        let staggered = dense(&build_hamiltonian(&base.with_fields(0.0, 0.3)).unwrap());
        assert!(commutator_norm(&staggered, &flip) > 1e-3);
    }

    #[test]
    fn observables_on_fock_states() {
        let spec = LatticeSpec::new(2, 2, -1.0, 2.0);
        let (m_af, delta_s) = order_parameter_observables(&spec).unwrap();
        let full = (1usize << 8) - 1;
        assert!(basis_expectation(&m_af, full).norm() < 1e-15);
        // Neel: up on even sublattice, down on odd.
        let mut neel = 0usize;
        for site in 0..4 {
            let (x, y) = spec.coords(site);
            let spin = if (x + y) % 2 == 0 { Spin::Up } else { Spin::Down };
            neel |= 1 << spec.mode(site, spin);
        }
        assert!((basis_expectation(&m_af, neel).re - 1.0).abs() < 1e-14);
        let d = dense(&delta_s);
        for x in [0usize, full, neel, 0b11] {
            assert!(d[(x, x)].norm() < 1e-15);
        }
    }

    #[test]
    fn breaking_terms() {
        let single = LatticeSpec::new(1, 1, -1.0, 0.0);
        let bcs = symmetry_breaking_terms(&single, BreakingCombo::Bcs).unwrap();
        assert_eq!(bcs.len(), 1);
        let expect = FermionOperator::from_terms(
            2,
            [
                (Complex64::new(1.0, 0.0), vec![Ladder::annihilate(1), Ladder::annihilate(0)]),
                (Complex64::new(1.0, 0.0), vec![Ladder::create(0), Ladder::create(1)]),
            ],
        )
        .unwrap();
        assert_eq!(bcs[0], expect);

        let g = jordan_wigner(&bcs[0]).unwrap().to_dense().unwrap();
        let theta = 0.4;
        let u = (g * Complex64::new(0.0, theta)).exp();
        let mut vac = DVector::<Complex64>::zeros(4);
        vac[0] = Complex64::new(1.0, 0.0);
        let out = u * vac;
        assert!((out[3].norm() - theta.sin()).abs() < 1e-12);

        let lattice = LatticeSpec::new(2, 2, -1.0, 0.0);
        let af = symmetry_breaking_terms(&lattice, BreakingCombo::Af).unwrap();
        assert_eq!(af.len(), 2);
        for op in &af {
            let modes: BTreeSet<usize> = op.terms().flat_map(|(f, _)| f.iter().map(|l| l.mode)).collect();
            assert_eq!(modes.len(), 4);
            assert!(op.is_hermitian());
        }
        assert_eq!(symmetry_breaking_terms(&lattice, BreakingCombo::BcsAf).unwrap().len(), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn hamiltonian_is_hermitian(
                nx in 1usize..4, ny in 1usize..3,
                t in -2.0f64..2.0, u in -5.0f64..5.0,
                b in -1.0f64..1.0, d in -1.0f64..1.0,
                periodic in any::<bool>(),
            ) {
                let mut spec = LatticeSpec::new(nx, ny, t, u).with_fields(d, b);
                spec.periodic = periodic;
                let h = build_hamiltonian(&spec).unwrap();
                prop_assert!(h.is_hermitian());
                prop_assert!(jordan_wigner(&h).unwrap().is_hermitian());
            }
        }
    }
}
