//! Quadratic (mean-field) Hamiltonians, their Gaussian ground states and the
//! self-consistency loop for the pairing and staggered-occupation orders.
//!
//! A quadratic Hamiltonian is stored as
//! `H = sum_ij h_ij c+_i c_j + sum_ij (P_ij c_i c_j + conj(P_ij) c+_j c+_i) + const`
//! with `h` Hermitian and `P` antisymmetric.

mod prep;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, FermionOperator, Ladder};
use crate::hubbard::{LatticeSpec, Spin};
use crate::pauli::{SparsePauliSum, DENSE_LIMIT};
use crate::sim::QuantumState;

pub use prep::{gaussian_prep_circuit, gaussian_prep_program};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const STRUCTURE_TOL: f64 = 1e-12;
/// Orbital energies closer than this at the Fermi level count as degenerate.
pub const FERMI_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanFieldKind {
    /// On-site s-wave pairing amplitude.
    Bcs,
    /// Parity-resolved orbital occupations.
    Af,
    /// Both, as free initialization parameters.
    Combined,
}

impl MeanFieldKind {
    pub fn label(self) -> &'static str {
        match self {
            MeanFieldKind::Bcs => "bcs",
            MeanFieldKind::Af => "af",
            MeanFieldKind::Combined => "combined",
        }
    }
}

/// Order-parameter values. `delta_s` is the per-site pairing amplitude
/// `U <c_dn c_up>`; `n_minus` / `n_plus` are the mean occupations of the
/// spin-orbitals with staggered parity -1 / +1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub kind: MeanFieldKind,
    pub delta_s: f64,
    pub n_minus: f64,
    pub n_plus: f64,
}

impl MeanFieldParams {
    pub fn bcs(delta_s: f64) -> Self {
        Self {
            kind: MeanFieldKind::Bcs,
            delta_s,
            n_minus: 0.5,
            n_plus: 0.5,
        }
    }

    pub fn af(n_minus: f64, n_plus: f64) -> Self {
        Self {
            kind: MeanFieldKind::Af,
            delta_s: 0.0,
            n_minus,
            n_plus,
        }
    }

    pub fn combined(delta_s: f64, n_minus: f64, n_plus: f64) -> Self {
        Self {
            kind: MeanFieldKind::Combined,
            delta_s,
            n_minus,
            n_plus,
        }
    }

    /// The same Hamiltonian expressed with all three fields free.
    pub fn as_combined(&self) -> Self {
        match self.kind {
            MeanFieldKind::Bcs => Self::combined(self.delta_s, 0.5, 0.5),
            MeanFieldKind::Af => Self::combined(0.0, self.n_minus, self.n_plus),
            MeanFieldKind::Combined => *self,
        }
    }

    fn uses_pairing(&self) -> bool {
        matches!(self.kind, MeanFieldKind::Bcs | MeanFieldKind::Combined)
    }

    fn uses_occupations(&self) -> bool {
        matches!(self.kind, MeanFieldKind::Af | MeanFieldKind::Combined)
    }

    /// Fields read for this kind, in the order `delta_s, n_minus, n_plus`.
    pub fn to_vec(&self) -> Vec<f64> {
        match self.kind {
            MeanFieldKind::Bcs => vec![self.delta_s],
            MeanFieldKind::Af => vec![self.n_minus, self.n_plus],
            MeanFieldKind::Combined => vec![self.delta_s, self.n_minus, self.n_plus],
        }
    }

    pub fn from_slice(kind: MeanFieldKind, v: &[f64]) -> Result<Self> {
        let expected = match kind {
            MeanFieldKind::Bcs => 1,
            MeanFieldKind::Af => 2,
            MeanFieldKind::Combined => 3,
        };
        if v.len() != expected {
            return Err(Error::ParameterCount { expected, got: v.len() });
        }
        Ok(match kind {
            MeanFieldKind::Bcs => Self::bcs(v[0]),
            MeanFieldKind::Af => Self::af(v[0], v[1]),
            MeanFieldKind::Combined => Self::combined(v[0], v[1], v[2]),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeanField("non-finite field".into()));
        }
        if self.uses_occupations() {
            for (name, n) in [("n_minus", self.n_minus), ("n_plus", self.n_plus)] {
                if !(0.0..=1.0).contains(&n) {
                    return Err(Error::InvalidMeanField(format!("{name} = {n} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticHamiltonian {
    hopping: DMatrix<Complex64>,
    pairing: DMatrix<Complex64>,
    constant: f64,
}

impl QuadraticHamiltonian {
    pub fn new(hopping: DMatrix<Complex64>, pairing: DMatrix<Complex64>, constant: f64) -> Result<Self> {
        let m = hopping.nrows();
        if hopping.ncols() != m || pairing.nrows() != m || pairing.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: pairing.nrows().max(hopping.ncols()),
            });
        }
        if (&hopping - hopping.adjoint()).iter().any(|z| z.norm() > STRUCTURE_TOL) {
            return Err(Error::InvalidMeanField("hopping block is not Hermitian".into()));
        }
        if (&pairing + pairing.transpose()).iter().any(|z| z.norm() > STRUCTURE_TOL) {
            return Err(Error::InvalidMeanField("pairing block is not antisymmetric".into()));
        }
        if !constant.is_finite() || hopping.iter().chain(pairing.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMeanField("non-finite coefficient".into()));
        }
        Ok(Self { hopping, pairing, constant })
    }

    pub fn zero(mode_count: usize) -> Self {
        Self {
            hopping: DMatrix::zeros(mode_count, mode_count),
            pairing: DMatrix::zeros(mode_count, mode_count),
            constant: 0.0,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.hopping.nrows()
    }

    pub fn hopping(&self) -> &DMatrix<Complex64> {
        &self.hopping
    }

    pub fn pairing(&self) -> &DMatrix<Complex64> {
        &self.pairing
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn conserves_particles(&self) -> bool {
        self.pairing.iter().all(|z| z.norm() == 0.0)
    }

    pub fn to_fermion_operator(&self) -> FermionOperator {
        let m = self.mode_count();
        let mut op = FermionOperator::constant(m, self.constant);
        for i in 0..m {
            for j in 0..m {
                let h = self.hopping[(i, j)];
                if h != ZERO {
                    op.add_product(h, &[Ladder::create(i), Ladder::annihilate(j)]).expect("in range");
                }
                let p = self.pairing[(i, j)];
                if p != ZERO {
                    op.add_product(p, &[Ladder::annihilate(i), Ladder::annihilate(j)]).expect("in range");
                    op.add_product(p.conj(), &[Ladder::create(j), Ladder::create(i)]).expect("in range");
                }
            }
        }
        op
    }

    /// Nambu matrix `[[h, -2 conj(P)], [2 P, -h^T]]` in the basis
    /// `(c_1 .. c_M, c+_1 .. c+_M)`; `H = Psi+ H_BdG Psi / 2 + tr(h) / 2 + const`.
    pub fn bdg_matrix(&self) -> DMatrix<Complex64> {
        let m = self.mode_count();
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.hopping[(i, j)];
                out[(i, m + j)] = -self.pairing[(i, j)].conj() * 2.0;
                out[(m + i, j)] = self.pairing[(i, j)] * 2.0;
                out[(m + i, m + j)] = -self.hopping[(j, i)];
            }
        }
        out
    }
}

/// Mean-field decoupling of the lattice model for the given order.
///
/// Pairing kinds add `(delta_s + delta_s_ext)(c_dn c_up + h.c.)` per site with
/// constant `-delta_s^2 / U`; occupation kinds add `U (n_{-p} - 1/2)` to each
/// orbital of parity `p` with the matching Hartree constant. The staggered
/// external field enters the diagonal for every kind.
pub fn build_mf_hamiltonian(spec: &LatticeSpec, params: &MeanFieldParams) -> Result<QuadraticHamiltonian> {
    spec.validate()?;
    params.validate()?;
    let m = spec.mode_count();
    if m > DENSE_LIMIT {
        return Err(Error::TooLarge { count: m, limit: DENSE_LIMIT });
    }
    let mut h = DMatrix::<Complex64>::zeros(m, m);
    let mut p = DMatrix::<Complex64>::zeros(m, m);
    let mut constant = 0.0;
    let t = Complex64::new(spec.t, 0.0);
    for bond in spec.bonds() {
        for spin in [Spin::Up, Spin::Down] {
            let a = spec.mode(bond.from, spin);
            let b = spec.mode(bond.to, spin);
            h[(a, b)] += t;
            h[(b, a)] += t;
        }
    }
    for q in 0..m {
        h[(q, q)] += Complex64::new(spec.b_af_ext * spec.parity(q), 0.0);
    }
    let sites = spec.site_count() as f64;
    let u = spec.u;
    if params.uses_occupations() && u != 0.0 {
        let opposite = |q: usize| if spec.parity(q) > 0.0 { params.n_minus } else { params.n_plus };
        for q in 0..m {
            h[(q, q)] += Complex64::new(u * (opposite(q) - 0.5), 0.0);
        }
        let (a, b) = (params.n_plus - 0.5, params.n_minus - 0.5);
        constant -= sites * u * (a * b + 0.5 * a + 0.5 * b);
    }
    let amplitude = spec.delta_s_ext + if params.uses_pairing() { params.delta_s } else { 0.0 };
    if amplitude != 0.0 {
        for site in 0..spec.site_count() {
            let up = spec.mode(site, Spin::Up);
            let dn = spec.mode(site, Spin::Down);
            p[(dn, up)] += Complex64::new(0.5 * amplitude, 0.0);
            p[(up, dn)] -= Complex64::new(0.5 * amplitude, 0.0);
        }
    }
    if params.uses_pairing() && u != 0.0 {
        constant -= sites * params.delta_s * params.delta_s / u;
    }
    QuadraticHamiltonian::new(h, p, constant)
}

/// Normal modes of a quadratic Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub enum GaussianModes {
    /// Zero Hamiltonian; the vacuum is taken as ground state.
    Vacuum,
    /// Number-conserving case: the lowest `occupied` eigenvectors of `h`.
    Slater {
        /// Orbitals as columns, ascending in energy (`M x M`).
        orbitals: DMatrix<Complex64>,
        energies: Vec<f64>,
        occupied: usize,
        /// Fermi-level tie broken by index.
        degenerate: bool,
    },
    /// Positive-energy Nambu eigenvectors as columns (`2M x M`), so that
    /// `b_k = sum_i conj(u_ki) c_i + conj(v_ki) c+_i`.
    Bogoliubov { transform: DMatrix<Complex64>, energies: Vec<f64> },
}

fn sorted_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ground energy and normal modes.
pub fn diagonalize(h: &QuadraticHamiltonian) -> Result<(f64, GaussianModes)> {
    let m = h.mode_count();
    if m > DENSE_LIMIT {
        return Err(Error::TooLarge { count: m, limit: DENSE_LIMIT });
    }
    if h.conserves_particles() {
        if h.hopping.iter().all(|z| z.norm() == 0.0) {
            return Ok((h.constant, GaussianModes::Vacuum));
        }
        let (energies, orbitals) = sorted_eigen(&h.hopping);
        let occupied = m / 2;
        let degenerate = occupied > 0 && occupied < m && (energies[occupied] - energies[occupied - 1]).abs() < FERMI_DEGENERACY_TOL;
        if degenerate {
            log::debug!(
                "degenerate Fermi level ({:.3e} vs {:.3e}); occupying lowest-index orbitals",
                energies[occupied - 1],
                energies[occupied]
            );
        }
        let energy = energies[..occupied].iter().sum::<f64>() + h.constant;
        return Ok((
            energy,
            GaussianModes::Slater {
                orbitals,
                energies,
                occupied,
                degenerate,
            },
        ));
    }
    let (values, vectors) = sorted_eigen(&h.bdg_matrix());
    // Upper half of the symmetric spectrum.
    let energies: Vec<f64> = values[m..].to_vec();
    if energies.iter().any(|&e| e < -1e-10) {
        return Err(Error::InvalidMeanField("Nambu spectrum is not particle-hole symmetric".into()));
    }
    let transform = vectors.columns(m, m).into_owned();
    let trace: f64 = (0..m).map(|i| h.hopping[(i, i)].re).sum();
    let energy = -0.5 * energies.iter().sum::<f64>() + 0.5 * trace + h.constant;
    Ok((energy, GaussianModes::Bogoliubov { transform, energies }))
}

/// Lowest-energy Gaussian state with its energy and mode description.
#[derive(Clone, Debug)]
pub struct GaussianState {
    pub energy: f64,
    pub state: QuantumState,
    pub modes: GaussianModes,
}

pub fn ground_state_quadratic(h: &QuadraticHamiltonian) -> Result<GaussianState> {
    let (energy, modes) = diagonalize(h)?;
    let m = h.mode_count();
    let state = match &modes {
        GaussianModes::Vacuum => QuantumState::zero(m),
        GaussianModes::Slater { orbitals, occupied, .. } => slater_state(orbitals, *occupied)?,
        GaussianModes::Bogoliubov { transform, .. } => bogoliubov_vacuum(transform)?,
    };
    Ok(GaussianState { energy, state, modes })
}

/// Amplitude on occupation set `S` is `det(orbitals[S, 0..n])`.
fn slater_state(orbitals: &DMatrix<Complex64>, n: usize) -> Result<QuantumState> {
    let m = orbitals.nrows();
    let mut amps = vec![ZERO; 1 << m];
    for (x, amp) in amps.iter_mut().enumerate() {
        if x.count_ones() as usize != n {
            continue;
        }
        let rows: Vec<usize> = (0..m).filter(|q| x >> q & 1 == 1).collect();
        let sub = DMatrix::from_fn(n, n, |r, c| orbitals[(rows[r], c)]);
        *amp = if n == 0 { Complex64::new(1.0, 0.0) } else { sub.determinant() };
    }
    QuantumState::from_amplitudes(amps)
}

/// Projects a fixed pseudo-random state onto the common kernel of all
/// quasiparticle annihilators.
fn bogoliubov_vacuum(transform: &DMatrix<Complex64>) -> Result<QuantumState> {
    let m = transform.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b0_60_1ab);
    let mut psi: Vec<Complex64> = (0..1usize << m)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut scratch = vec![ZERO; psi.len()];
    for k in 0..m {
        scratch.iter_mut().for_each(|z| *z = ZERO);
        for i in 0..m {
            let a = transform[(i, k)].conj();
            let b = transform[(m + i, k)].conj();
            let bit = 1usize << i;
            for (x, &amp) in psi.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let sign = if (x & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                if x & bit != 0 {
                    scratch[x ^ bit] += a * amp * sign;
                } else {
                    scratch[x ^ bit] += b * amp * sign;
                }
            }
        }
        let norm = scratch.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidMeanField("quasiparticle vacuum projection vanished".into()));
        }
        for (p, s) in psi.iter_mut().zip(&scratch) {
            *p = s / norm;
        }
    }
    fix_global_phase(&mut psi);
    QuantumState::from_amplitudes(psi)
}

/// Rotates the largest amplitude onto the positive real axis.
fn fix_global_phase(psi: &mut [Complex64]) {
    let mut best = 0;
    for (k, z) in psi.iter().enumerate() {
        if z.norm() > psi[best].norm() + 1e-12 {
            best = k;
        }
    }
    let phase = psi[best].conj() / psi[best].norm();
    psi.iter_mut().for_each(|z| *z *= phase);
}

/// Compiled operators whose expectations feed the self-consistency update.
pub struct MeanFieldProbe {
    pair: SparsePauliSum,
    minus: SparsePauliSum,
    plus: SparsePauliSum,
    sites: f64,
    u: f64,
}

impl MeanFieldProbe {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        spec.validate()?;
        let m = spec.mode_count();
        let mut pair = FermionOperator::zero(m);
        for site in 0..spec.site_count() {
            pair.add_product(
                Complex64::new(1.0, 0.0),
                &[Ladder::annihilate(spec.mode(site, Spin::Down)), Ladder::annihilate(spec.mode(site, Spin::Up))],
            )?;
        }
        let mut minus = FermionOperator::zero(m);
        let mut plus = FermionOperator::zero(m);
        let count = |parity: f64| (0..m).filter(|&q| spec.parity(q) == parity).count() as f64;
        let (n_minus, n_plus) = (count(-1.0), count(1.0));
        for q in 0..m {
            let (target, norm) = if spec.parity(q) < 0.0 { (&mut minus, n_minus) } else { (&mut plus, n_plus) };
            target.add_product(Complex64::new(1.0 / norm, 0.0), &[Ladder::create(q), Ladder::annihilate(q)])?;
        }
        Ok(Self {
            pair: jordan_wigner(&pair)?.compile(),
            minus: jordan_wigner(&minus)?.compile(),
            plus: jordan_wigner(&plus)?.compile(),
            sites: spec.site_count() as f64,
            u: spec.u,
        })
    }

    /// Fresh order-parameter estimates of `kind` in `state`.
    pub fn measure(&self, kind: MeanFieldKind, state: &QuantumState) -> MeanFieldParams {
        let amps = state.amplitudes();
        let delta_s = self.u * self.pair.expectation(amps).re / self.sites;
        let n_minus = self.minus.expectation(amps).re;
        let n_plus = self.plus.expectation(amps).re;
        match kind {
            MeanFieldKind::Bcs => MeanFieldParams::bcs(delta_s),
            MeanFieldKind::Af => MeanFieldParams::af(n_minus, n_plus),
            MeanFieldKind::Combined => MeanFieldParams::combined(delta_s, n_minus, n_plus),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfOptions {
    /// Weight of the fresh estimate in each update.
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScfResult {
    pub params: MeanFieldParams,
    pub iterations: usize,
    /// Infinity-norm distance between the last input and its re-estimate.
    pub residual: f64,
}

/// Damped fixed-point iteration of the mean fields of `initial.kind`.
pub fn self_consistent_loop(spec: &LatticeSpec, initial: MeanFieldParams, options: &ScfOptions) -> Result<ScfResult> {
    if !(options.tol > 0.0) {
        return Err(Error::Config("self-consistency tolerance must be positive".into()));
    }
    if !(options.mixing > 0.0 && options.mixing <= 1.0) {
        return Err(Error::Config("mixing must lie in (0, 1]".into()));
    }
    let probe = MeanFieldProbe::new(spec)?;
    let kind = initial.kind;
    let mut current = initial;
    let mut residual = f64::INFINITY;
    for iteration in 1..=options.max_iter {
        let h = build_mf_hamiltonian(spec, &current)?;
        let gs = ground_state_quadratic(&h)?;
        let fresh = probe.measure(kind, &gs.state);
        let old = current.to_vec();
        let new = fresh.to_vec();
        residual = old.iter().zip(&new).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if residual < options.tol {
            return Ok(ScfResult {
                params: current,
                iterations: iteration,
                residual,
            });
        }
        let mixed: Vec<f64> = old
            .iter()
            .zip(&new)
            .map(|(a, b)| (1.0 - options.mixing) * a + options.mixing * b)
            .collect();
        current = MeanFieldParams::from_slice(kind, &mixed)?;
        // Occupations are averages of [0, 1] numbers; clamp rounding drift.
        current.n_minus = current.n_minus.clamp(0.0, 1.0);
        current.n_plus = current.n_plus.clamp(0.0, 1.0);
    }
    Err(Error::NoConvergence {
        iterations: options.max_iter,
        residual,
    })
}
