//! Spin-1/2 operators and ideal global rotations.
//!
//! Single-spin matrices are written in the (|↓⟩, |↑⟩) order, matching bit
//! value 0/1 of the full-basis index.

use num_complex::Complex64;

use crate::hamiltonian::Basis;
use crate::propagation::QuantumState;
use crate::linalg::{kron, real, CMatrix, ONE, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(&self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// An ideal, instantaneous collective rotation exp(−iθ Σ_i I_i^axis).
///
/// A 2π rotation multiplies every spin-1/2 state by −1 per spin, so the
/// full-basis operator for a 2π pulse is (−1)^N times the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pulse {
    pub axis: Axis,
    pub angle: f64,
}

impl Pulse {
    pub fn new(axis: Axis, angle: f64) -> Self {
        Self { axis, angle }
    }

    pub fn inverse(&self) -> Self {
        Self {
            axis: self.axis,
            angle: -self.angle,
        }
    }
}

/// Pauli matrix σ_axis in (|↓⟩, |↑⟩) order.
pub fn pauli(axis: Axis) -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        // ⟨↓|σy|↑⟩ = i, ⟨↑|σy|↓⟩ = −i
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, i, -i, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]),
    }
}

/// exp(−iθσ/2) on one spin.
pub fn spin_rotation(pulse: Pulse) -> CMatrix {
    let half = 0.5 * pulse.angle;
    let (s, c) = (libm::sin(half), libm::cos(half));
    CMatrix::identity(2, 2) * real(c) - pauli(pulse.axis) * Complex64::new(0.0, s)
}

/// I_site^axis in the full 2^N basis.
pub fn spin_operator(sites: usize, site: usize, axis: Axis) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for k in (0..sites).rev() {
        let factor = if k == site {
            pauli(axis) * real(0.5)
        } else {
            CMatrix::identity(2, 2)
        };
        acc = kron(&acc, &factor);
    }
    acc
}

/// Matrix of a global pulse in the given basis. Only z rotations are
/// available in the single-excitation basis.
pub fn pulse_matrix(basis: Basis, pulse: Pulse) -> Result<CMatrix> {
    match basis {
        Basis::Full { sites } => {
            let r = spin_rotation(pulse);
            let mut acc = CMatrix::identity(1, 1);
            for _ in 0..sites {
                acc = kron(&acc, &r);
            }
            Ok(acc)
        }
        Basis::SingleExcitation { sites } => {
            if pulse.axis != Axis::Z {
                return Err(Error::PulseOutsideSector(pulse.axis.name()));
            }
            let d = sites + 1;
            let mut m = CMatrix::zeros(d, d);
            for k in 0..d {
                let mz = basis.excitations(k) as f64 - 0.5 * sites as f64;
                m[(k, k)] = crate::linalg::phase(pulse.angle * mz);
            }
            Ok(m)
        }
    }
}

/// Σ_i I_i^axis in the full basis.
pub fn collective_operator(sites: usize, axis: Axis) -> CMatrix {
    let d = 1 << sites;
    (0..sites).fold(CMatrix::zeros(d, d), |acc, k| acc + spin_operator(sites, k, axis))
}

/// ⟨Σ_i I_i^axis⟩ for a state in the full basis.
pub fn collective_expectation(state: &QuantumState, axis: Axis) -> f64 {
    let full = state.to_full();
    let op = collective_operator(full.basis().sites(), axis);
    full.amplitudes().dotc(&(op * full.amplitudes())).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitarity_defect};
    use core::f64::consts::PI;

    #[test]
    fn rotation_matches_spin_algebra() {
        // R†(θ about y) I^z R = cosθ I^z − sinθ I^x ... sign fixed by σ ordering;
        // check only that a π/2 y-rotation maps I^z into ±I^x.
        let r = spin_rotation(Pulse::new(Axis::Y, PI / 2.0));
        let sz = pauli(Axis::Z);
        let sx = pauli(Axis::X);
        let rot = r.adjoint() * &sz * &r;
        let plus = max_abs(&(&rot - &sx));
        let minus = max_abs(&(&rot + &sx));
        assert!(plus.min(minus) < 1e-15);
    }

    #[test]
    fn full_pulse_is_unitary_and_two_pi_is_sign() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let u = pulse_matrix(Basis::full(3), Pulse::new(axis, 2.0 * PI)).unwrap();
            assert!(unitarity_defect(&u) < 1e-14);
            // (−1)^3
            assert!(max_abs(&(u + CMatrix::identity(8, 8))) < 1e-14);
        }
    }

    #[test]
    fn single_excitation_rejects_transverse() {
        assert_eq!(
            pulse_matrix(Basis::single_excitation(3), Pulse::new(Axis::X, 1.0)),
            Err(Error::PulseOutsideSector('x'))
        );
    }

    #[test]
    fn z_pulse_projection_agrees() {
        let p = Pulse::new(Axis::Z, 0.37);
        let full = pulse_matrix(Basis::full(3), p).unwrap();
        let se = pulse_matrix(Basis::single_excitation(3), p).unwrap();
        let idx = [0usize, 1, 2, 4];
        for (r, &a) in idx.iter().enumerate() {
            for (c, &b) in idx.iter().enumerate() {
                assert!((full[(a, b)] - se[(r, c)]).norm() < 1e-14);
            }
        }
    }
}
