//! Circuits preparing Gaussian ground states from `|0...0>`.
//!
//! Number-conserving states use a Givens rectangle on the occupied-orbital
//! matrix; Bogoliubov states use Givens rotations of the Majorana
//! orthogonal transformation. Both are emitted as Pauli rotations.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{diagonalize, GaussianModes, QuadraticHamiltonian};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::sim::{Circuit, Program};

const TINY: f64 = 1e-14;

/// Preparation as a parameter-free rotation program.
pub fn gaussian_prep_program(h: &QuadraticHamiltonian) -> Result<Program> {
    let (_, modes) = diagonalize(h)?;
    let m = h.mode_count();
    let mut program = Program::new(m, 0);
    match modes {
        GaussianModes::Vacuum => {}
        GaussianModes::Slater { orbitals, occupied, .. } => slater_prep(&mut program, &orbitals, occupied)?,
        GaussianModes::Bogoliubov { transform, .. } => bogoliubov_prep(&mut program, &transform)?,
    }
    Ok(program)
}

/// Preparation lowered to native gates.
pub fn gaussian_prep_circuit(h: &QuadraticHamiltonian) -> Result<Circuit> {
    gaussian_prep_program(h)?.lower().bind(&[])
}

fn x_flip(program: &mut Program, q: usize) -> Result<()> {
    program.push_fixed(PauliString::single(q, Pauli::X), -FRAC_PI_2)
}

/// `exp(i alpha n_q)` up to a global phase.
fn phase(program: &mut Program, q: usize, alpha: f64) -> Result<()> {
    if alpha.abs() < TINY {
        return Ok(());
    }
    program.push_fixed(PauliString::single(q, Pauli::Z), -alpha / 2.0)
}

/// `exp(theta (c+_a c_b - c+_b c_a))` for adjacent modes `a < b`.
fn real_rotation(program: &mut Program, a: usize, b: usize, theta: f64) -> Result<()> {
    if theta.abs() < TINY {
        return Ok(());
    }
    program.push_fixed(PauliString::from_pairs([(a, Pauli::X), (b, Pauli::Y)]), theta / 2.0)?;
    program.push_fixed(PauliString::from_pairs([(a, Pauli::Y), (b, Pauli::X)]), -theta / 2.0)
}

/// Unitary whose action on creation operators of modes `(a, a+1)` is the
/// 2x2 unitary `act`, i.e. `U c+_m U+ = sum_l act[l][m] c+_l`.
fn mode_unitary(program: &mut Program, a: usize, act: [[Complex64; 2]; 2]) -> Result<()> {
    // act = diag(e^{i a0}, e^{i a1}) R(theta) diag(1, e^{i b1}),
    // R = [[c, s], [-s, c]] with c, s >= 0.
    let c = act[0][0].norm();
    let s = act[0][1].norm();
    let theta = s.atan2(c);
    let (alpha0, alpha1, beta1) = if s < 1e-13 {
        // Diagonal up to rounding.
        (act[0][0].arg(), act[1][1].arg(), 0.0)
    } else if c < 1e-13 {
        let a0 = act[0][1].arg();
        (a0, act[1][0].arg() - PI, 0.0)
    } else {
        let a0 = act[0][0].arg();
        (a0, act[1][0].arg() - PI, act[0][1].arg() - a0)
    };
    // In time order: right diagonal, rotation, left diagonal.
    phase(program, a + 1, beta1)?;
    real_rotation(program, a, a + 1, theta)?;
    phase(program, a, alpha0)?;
    phase(program, a + 1, alpha1)
}

fn slater_prep(program: &mut Program, orbitals: &DMatrix<Complex64>, n: usize) -> Result<()> {
    let m = orbitals.nrows();
    if n == 0 {
        return Ok(());
    }
    // Rows are orbitals: the state is prod_k (sum_j w[k][j] c+_j) |0>.
    let mut w = DMatrix::from_fn(n, m, |r, c| orbitals[(c, r)]);
    // Row operations only change the state's global phase: make row r vanish
    // beyond column m - n + r.
    for col in (m - n + 1..m).rev() {
        for r in 0..col - (m - n) {
            let x = w[(r, col)];
            let y = w[(r + 1, col)];
            let rho = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if x.norm() < TINY || rho < TINY {
                continue;
            }
            for j in 0..m {
                let (ra, rb) = (w[(r, j)], w[(r + 1, j)]);
                w[(r, j)] = (y * ra - x * rb) / rho;
                w[(r + 1, j)] = (x.conj() * ra + y.conj() * rb) / rho;
            }
        }
    }
    // Column rotations reduce w to a diagonal of unit phases.
    let mut givens: Vec<(usize, [[Complex64; 2]; 2])> = Vec::new();
    for r in 0..n {
        for j in (r + 1..=m - n + r).rev() {
            let x = w[(r, j - 1)];
            let y = w[(r, j)];
            let rho = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if y.norm() < TINY || rho < TINY {
                continue;
            }
            let g = [[x.conj() / rho, y / rho], [y.conj() / rho, -x / rho]];
            for row in 0..n {
                let (p, q) = (w[(row, j - 1)], w[(row, j)]);
                w[(row, j - 1)] = p * g[0][0] + q * g[1][0];
                w[(row, j)] = p * g[0][1] + q * g[1][1];
            }
            givens.push((j - 1, g));
        }
    }
    for q in 0..n {
        x_flip(program, q)?;
    }
    for &(a, g) in givens.iter().rev() {
        let act = [[g[0][0].conj(), g[0][1].conj()], [g[1][0].conj(), g[1][1].conj()]];
        mode_unitary(program, a, act)?;
    }
    Ok(())
}

fn bogoliubov_prep(program: &mut Program, transform: &DMatrix<Complex64>) -> Result<()> {
    let m = transform.ncols();
    let dim = 2 * m;
    // b_k = sum_a w[k][a] gamma_a; rows 2k, 2k+1 hold Re and Im of 2 w[k].
    let mut o = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..m {
        for i in 0..m {
            let u = transform[(i, k)].conj();
            let v = transform[(m + i, k)].conj();
            let even = (u + v) * 0.5;
            let odd = Complex64::new(0.0, 1.0) * (u - v) * 0.5;
            o[(2 * k, 2 * i)] = 2.0 * even.re;
            o[(2 * k + 1, 2 * i)] = 2.0 * even.im;
            o[(2 * k, 2 * i + 1)] = 2.0 * odd.re;
            o[(2 * k + 1, 2 * i + 1)] = 2.0 * odd.im;
        }
    }
    let orth = (&o * o.transpose() - DMatrix::<f64>::identity(dim, dim)).abs().max();
    if orth > 1e-8 {
        return Err(Error::InvalidMeanField(format!("Majorana transform not orthogonal ({orth:.2e})")));
    }
    let mut r = o;
    if r.determinant() < 0.0 {
        // X_0 conjugation negates every Majorana but gamma_0, so the rotation
        // has to realize diag(1, -1, ..) o instead.
        for row in 1..dim {
            for col in 0..dim {
                r[(row, col)] = -r[(row, col)];
            }
        }
        x_flip(program, 0)?;
    }
    // Left Givens eliminations bring r to the identity: L_K .. L_1 r = 1.
    let mut rotations: Vec<(usize, f64)> = Vec::new();
    for col in 0..dim - 1 {
        for i in (col..dim - 1).rev() {
            let x = r[(i, col)];
            let y = r[(i + 1, col)];
            if y.abs() < TINY && x >= 0.0 {
                continue;
            }
            let rho = x.hypot(y);
            let (c, s) = (x / rho, y / rho);
            for j in 0..dim {
                let (p, q) = (r[(i, j)], r[(i + 1, j)]);
                r[(i, j)] = c * p + s * q;
                r[(i + 1, j)] = -s * p + c * q;
            }
            rotations.push((i, s.atan2(c) / 2.0));
        }
    }
    if (r[(dim - 1, dim - 1)] - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidMeanField("Majorana decomposition left a reflection".into()));
    }
    for (a, phi) in rotations {
        if phi.abs() < TINY {
            continue;
        }
        let j = a / 2;
        let pauli = if a % 2 == 0 {
            PauliString::single(j, Pauli::Z)
        } else {
            PauliString::from_pairs([(j, Pauli::X), (j + 1, Pauli::X)])
        };
        program.push_fixed(pauli, phi)?;
    }
    Ok(())
}
