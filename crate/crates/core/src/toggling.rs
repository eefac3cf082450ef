//! Toggling-frame sequences and their zeroth-order average Hamiltonian.
//!
//! A sequence is a list of frames. Each frame applies its pulses (relative to
//! the previous frame) and then dwells for a fraction of the loop under its
//! recipe. After the last frame the accumulated rotation is undone, so a loop
//! is closed. With accumulated rotation `R_k` the exact loop propagator is
//! `Π_k exp(−i R_k† H_k R_k f_k T)` and the zeroth-order average is
//! `Σ_k f_k R_k† H_k R_k`.

use alloc::vec::Vec;

use crate::hamiltonian::{assemble, build_xy, Basis, HamiltonianRecipe, OperatorMatrix, PairSelection};
use crate::linalg::{hermitian_part, max_abs, real, spectral_norm, CMatrix, exp_i_blockwise};
use crate::network::{Pair, SpinNetwork};
use crate::propagation::{Executor, Schedule, Segment};
use crate::spin::{pulse_matrix, Axis, Pulse};
use crate::{Error, Result};

/// Tolerance on Σ dwell = 1.
pub const DWELL_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Frame {
    /// Pulses applied on entering the frame, in order.
    pub pulses: Vec<Pulse>,
    /// Fraction of the loop spent in this frame.
    pub dwell: f64,
    /// Overrides the sequence's base recipe for this frame.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub recipe: Option<HamiltonianRecipe>,
}

impl Frame {
    pub fn new(pulses: Vec<Pulse>, dwell: f64) -> Self {
        Self {
            pulses,
            dwell,
            recipe: None,
        }
    }

    pub fn with_recipe(mut self, recipe: HamiltonianRecipe) -> Self {
        self.recipe = Some(recipe);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TogglingSequence {
    pub frames: Vec<Frame>,
    /// Number of loops per cycle.
    pub loops: usize,
    pub base_recipe: HamiltonianRecipe,
}

impl TogglingSequence {
    pub fn validate(&self, net: &SpinNetwork) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::InvalidSequence("no frames"));
        }
        if self.loops == 0 {
            return Err(Error::InvalidSequence("loop count must be at least 1"));
        }
        if self.frames.iter().any(|f| !(f.dwell > 0.0 && f.dwell.is_finite())) {
            return Err(Error::InvalidSequence("dwell fractions must be positive"));
        }
        let sum: f64 = self.frames.iter().map(|f| f.dwell).sum();
        if (sum - 1.0).abs() > DWELL_SUM_TOL {
            return Err(Error::InvalidSequence("dwell fractions must sum to 1"));
        }
        for f in &self.frames {
            self.recipe_of(f).validate(net)?;
        }
        Ok(())
    }

    fn recipe_of<'a>(&'a self, frame: &'a Frame) -> &'a HamiltonianRecipe {
        frame.recipe.as_ref().unwrap_or(&self.base_recipe)
    }

    fn has_transverse_pulses(&self) -> bool {
        self.frames
            .iter()
            .flat_map(|f| f.pulses.iter())
            .any(|p| p.axis != Axis::Z)
    }

    /// Smallest basis able to represent the sequence: the single-excitation
    /// sector when every pulse is a z rotation, otherwise the full basis.
    pub fn natural_basis(&self, net: &SpinNetwork) -> Basis {
        if self.has_transverse_pulses() {
            Basis::full(net.len())
        } else {
            Basis::single_excitation(net.len())
        }
    }

    /// Accumulated frame rotations `R_k`; `None` when the frame is the
    /// identity frame (no pulses so far).
    fn frame_rotations(&self, basis: Basis) -> Result<Vec<Option<CMatrix>>> {
        let mut acc: Option<CMatrix> = None;
        let mut out = Vec::with_capacity(self.frames.len());
        for f in &self.frames {
            for &p in &f.pulses {
                let m = pulse_matrix(basis, p)?;
                acc = Some(match acc {
                    Some(a) => m * a,
                    None => m,
                });
            }
            out.push(acc.clone());
        }
        Ok(out)
    }

    /// One loop as a schedule of duration `loop_time`, repeated `loops`
    /// times. Extra pulses and the closing rotation ride on zero-length
    /// segments.
    pub fn to_schedule(&self, loop_time: f64) -> Schedule {
        let mut segments = Vec::new();
        let mut applied: Vec<Pulse> = Vec::new();
        for f in &self.frames {
            let recipe = self.recipe_of(f).clone();
            let (last, rest) = match f.pulses.split_last() {
                Some((l, r)) => (Some(*l), r),
                None => (None, &[][..]),
            };
            for &p in rest {
                segments.push(Segment::new(recipe.clone(), 0.0).after_pulse(p));
            }
            let mut seg = Segment::new(recipe, f.dwell * loop_time);
            seg.pre_pulse = last;
            segments.push(seg);
            applied.extend_from_slice(&f.pulses);
        }
        for p in applied.iter().rev() {
            segments.push(Segment::new(self.base_recipe.clone(), 0.0).after_pulse(p.inverse()));
        }
        Schedule::new(segments, self.loops)
    }
}

/// `Σ_k f_k R_k† H_k R_k`, Hermitian.
pub fn average_hamiltonian_zero_order(
    seq: &TogglingSequence,
    net: &SpinNetwork,
    basis: Basis,
) -> Result<OperatorMatrix> {
    seq.validate(net)?;
    let rotations = seq.frame_rotations(basis)?;
    let d = basis.dim();
    let mut acc = CMatrix::zeros(d, d);
    for (f, r) in seq.frames.iter().zip(&rotations) {
        let h = assemble(seq.recipe_of(f), net, basis)?.into_data();
        let toggled = match r {
            Some(r) => r.adjoint() * h * r,
            None => h,
        };
        acc += toggled * real(f.dwell);
    }
    OperatorMatrix::hermitian(hermitian_part(&acc), basis)
}

/// Exact propagator of one full cycle (all loops) lasting `cycle_time`.
pub fn exact_cycle_propagator(
    seq: &TogglingSequence,
    cycle_time: f64,
    net: &SpinNetwork,
    basis: Basis,
) -> Result<CMatrix> {
    seq.validate(net)?;
    let sched = seq.to_schedule(cycle_time / seq.loops as f64);
    let mut exec = Executor::new(net, basis)?;
    let one = exec.cycle_unitary(&sched)?;
    let mut acc = one.clone();
    for _ in 1..seq.loops {
        acc = &one * acc;
    }
    Ok(acc)
}

/// Operator-norm distance between the exact cycle propagator and
/// `exp(−i H_avg T)`.
pub fn propagator_distance(seq: &TogglingSequence, cycle_time: f64, net: &SpinNetwork) -> Result<f64> {
    if !(cycle_time > 0.0 && cycle_time.is_finite()) {
        return Err(Error::InvalidDuration(cycle_time));
    }
    let basis = seq.natural_basis(net);
    let exact = exact_cycle_propagator(seq, cycle_time, net, basis)?;
    let avg = average_hamiltonian_zero_order(seq, net, basis)?;
    let ideal = exp_i_blockwise(avg.data(), cycle_time);
    Ok(spectral_norm(&(exact - ideal)))
}

/// [`propagator_distance`] divided by the cycle time.
pub fn truncation_error(seq: &TogglingSequence, cycle_time: f64, net: &SpinNetwork) -> Result<f64> {
    Ok(propagator_distance(seq, cycle_time, net)? / cycle_time)
}

/// An XY mixing sequence built from the Ising coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledXy {
    pub sequence: TogglingSequence,
    /// Effective H_XY per unit of native coupling: the average equals
    /// `coupling_scale · H_XY`, so transfer times stretch by its inverse.
    pub coupling_scale: f64,
}

/// Two frames of equal dwell that carry the z axis onto x, then onto y.
/// The zz coupling averages to (H_xx + H_yy)/2 = H_XY/2.
pub fn compile_xy_from_ising(_net: &SpinNetwork, loops: usize) -> CompiledXy {
    use core::f64::consts::FRAC_PI_2;
    let frames = alloc::vec![
        Frame::new(alloc::vec![Pulse::new(Axis::Y, FRAC_PI_2)], 0.5),
        Frame::new(
            alloc::vec![Pulse::new(Axis::Y, -FRAC_PI_2), Pulse::new(Axis::X, FRAC_PI_2)],
            0.5,
        ),
    ];
    CompiledXy {
        sequence: TogglingSequence {
            frames,
            loops,
            base_recipe: HamiltonianRecipe::zz(),
        },
        coupling_scale: 0.5,
    }
}

/// The mix/free cycle `(XY for τ_mix, Zeeman without i, j for τ_free)` as a
/// two-frame sequence. Its average is the τ-weighted mean of the two terms.
pub fn mix_free_sequence(pair: Pair, tau_mix: f64, tau_free: f64) -> TogglingSequence {
    let total = tau_mix + tau_free;
    TogglingSequence {
        frames: alloc::vec![
            Frame::new(Vec::new(), tau_mix / total),
            Frame::new(Vec::new(), tau_free / total)
                .with_recipe(HamiltonianRecipe::zeeman_excluding(&[pair.0, pair.1])),
        ],
        loops: 1,
        base_recipe: HamiltonianRecipe::xy(),
    }
}

/// `max |H_avg − s·H_XY|` for a compiled sequence against its ideal target.
pub fn distance_to_scaled_xy(avg: &OperatorMatrix, net: &SpinNetwork, scale: f64) -> Result<f64> {
    let xy = build_xy(net, &PairSelection::All, avg.basis())?;
    Ok(max_abs(&(avg.data() - xy.data() * real(scale))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_zeeman, build_zz, total_z};
    use crate::linalg::commutator;
    use crate::network::NetworkBuilder;
    use crate::propagation::{evolve, QuantumState, Sampling};
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn chain(n: usize, j: f64) -> SpinNetwork {
        let mut b = NetworkBuilder::new();
        for k in 0..n {
            b.site(&alloc::format!("s{k}"), 0.0);
        }
        for k in 0..n - 1 {
            b.couple(k, k + 1, j * (1.0 + 0.2 * k as f64));
        }
        b.build().unwrap()
    }

    #[test]
    fn single_identity_frame_keeps_zz() {
        let net = chain(3, 50.0);
        let seq = TogglingSequence {
            frames: vec![Frame::new(vec![], 1.0)],
            loops: 1,
            base_recipe: HamiltonianRecipe::zz(),
        };
        let basis = Basis::full(3);
        let avg = average_hamiltonian_zero_order(&seq, &net, basis).unwrap();
        assert_eq!(avg.data(), build_zz(&net, basis).unwrap().data());
        assert_eq!(truncation_error(&seq, 1e-3, &net).unwrap(), 0.0);
        assert_eq!(truncation_error(&seq, 7e-2, &net).unwrap(), 0.0);
    }

    #[test]
    fn canonical_average_is_half_xy() {
        for n in 2..=4 {
            let net = chain(n, 50.0);
            let c = compile_xy_from_ising(&net, 1);
            let basis = Basis::full(n);
            let avg = average_hamiltonian_zero_order(&c.sequence, &net, basis).unwrap();
            assert!(distance_to_scaled_xy(&avg, &net, c.coupling_scale).unwrap() < 1e-12);
            let sz = total_z(basis);
            assert!(max_abs(&commutator(avg.data(), sz.data())) < 1e-12);
        }
    }

    #[test]
    fn average_is_linear_in_base() {
        let net = chain(3, 40.0);
        let basis = Basis::full(3);
        let mut seq = compile_xy_from_ising(&net, 1).sequence;
        let a = average_hamiltonian_zero_order(&seq, &net, basis).unwrap();
        seq.base_recipe = HamiltonianRecipe::zz().scaled(2.0).plus(HamiltonianRecipe::zeeman().scaled(-0.5));
        let b = average_hamiltonian_zero_order(&seq, &net, basis).unwrap();
        seq.base_recipe = HamiltonianRecipe::zeeman();
        let z = average_hamiltonian_zero_order(&seq, &net, basis).unwrap();
        let expect = a.data() * real(2.0) - z.data() * real(0.5);
        assert!(max_abs(&(b.data() - expect)) < 1e-10);
    }

    #[test]
    fn mix_free_average_is_weighted_mean() {
        let mut b = NetworkBuilder::new();
        b.site("a", 1408.0);
        b.site("b", 0.0);
        b.site("c", -2062.0);
        b.couple(0, 1, 35.0).couple(1, 2, 35.0);
        let net = b.build().unwrap();
        let (tm, tf) = (0.3e-3, 1.0 / 1408.0);
        let seq = mix_free_sequence((0, 1), tm, tf);
        let basis = seq.natural_basis(&net);
        assert_eq!(basis, Basis::single_excitation(3));
        let avg = average_hamiltonian_zero_order(&seq, &net, basis).unwrap();
        let hz = build_zeeman(&net, &BTreeSet::from([0, 1]), basis).unwrap();
        let hxy = build_xy(&net, &PairSelection::All, basis).unwrap();
        let expect = (hz.data() * real(tf) + hxy.data() * real(tm)) / real(tf + tm);
        assert!(max_abs(&(avg.data() - expect)) < 1e-9);
    }

    #[test]
    fn validation() {
        let net = chain(2, 10.0);
        let mut seq = compile_xy_from_ising(&net, 1).sequence;
        seq.frames[0].dwell = 0.4;
        assert!(matches!(seq.validate(&net), Err(Error::InvalidSequence(_))));
        seq.frames[0].dwell = 0.5;
        seq.loops = 0;
        assert!(seq.validate(&net).is_err());
        seq.loops = 1;
        seq.frames[1].dwell = -0.5;
        assert!(seq.validate(&net).is_err());
    }

    #[test]
    fn two_spin_compiled_transfer() {
        // H_XY/2 moves the excitation in 2·1/(2J).
        let j = 50.0;
        let net = chain(2, j);
        let c = compile_xy_from_ising(&net, 1);
        let basis = Basis::full(2);
        let total = 2.0 / (2.0 * j);
        let s0 = QuantumState::excitation(basis, 0);
        for loops in [10, 40, 160] {
            let sched = c.sequence.to_schedule(total / loops as f64);
            let sched = Schedule::new(sched.segments, loops);
            let mut exec = Executor::new(&net, basis).unwrap();
            let (_, out) = exec.run(&s0, &sched, Sampling::PerRepetition).unwrap();
            assert!((out.site_probabilities()[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn more_loops_track_ideal_better() {
        let net = chain(3, 50.0);
        let t = 2e-3;
        let one = compile_xy_from_ising(&net, 1).sequence;
        let four = compile_xy_from_ising(&net, 4).sequence;
        let d1 = propagator_distance(&one, t, &net).unwrap();
        let d4 = propagator_distance(&four, t, &net).unwrap();
        assert!(d4 < d1, "{d4} vs {d1}");

        // Compare against ideal XY/2 evolution of a state directly.
        let basis = Basis::full(3);
        let avg = average_hamiltonian_zero_order(&one, &net, basis).unwrap();
        let s0 = QuantumState::excitation(basis, 0);
        let ideal = evolve(&s0, &avg, t).unwrap();
        let run = |seq: &TogglingSequence| {
            let mut exec = Executor::new(&net, basis).unwrap();
            let u = exec.cycle_unitary(&seq.to_schedule(t / seq.loops as f64)).unwrap();
            let mut a = s0.amplitudes().clone();
            for _ in 0..seq.loops {
                a = &u * a;
            }
            QuantumState::from_amplitudes(basis, a).unwrap().fidelity(&ideal)
        };
        assert!(run(&four) > run(&one));
    }

    #[test]
    fn distance_scales_quadratically() {
        let net = chain(3, 50.0);
        let seq = compile_xy_from_ising(&net, 1).sequence;
        let d1 = propagator_distance(&seq, 4e-4, &net).unwrap();
        let d2 = propagator_distance(&seq, 2e-4, &net).unwrap();
        let ratio = d1 / d2;
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
        let e1 = truncation_error(&seq, 4e-4, &net).unwrap();
        let e2 = truncation_error(&seq, 2e-4, &net).unwrap();
        assert!(e2 < e1);
    }

    #[test]
    fn schedule_closes_the_frame() {
        // Negligible coupling: the pulses alone must compose to the identity.
        let net = chain(2, 1e-9);
        let seq = compile_xy_from_ising(&net, 1).sequence;
        let mut exec = Executor::new(&net, Basis::full(2)).unwrap();
        let u = exec.cycle_unitary(&seq.to_schedule(1e-6)).unwrap();
        assert!(max_abs(&(u - CMatrix::identity(4, 4))) < 1e-12);
    }
}
