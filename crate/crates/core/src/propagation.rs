//! Exact unitary evolution and stroboscopic schedule execution.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::hamiltonian::{assemble, Basis, HamiltonianRecipe, OperatorMatrix, RecipeKey};
use crate::linalg::{hermitian_defect, CMatrix, CVector, exp_i_blockwise, ONE, ZERO};
use crate::network::SpinNetwork;
use crate::spin::{pulse_matrix, spin_rotation, Axis, Pulse};
use crate::{Error, Result};

/// Norm tolerance for a valid state.
pub const NORM_TOL: f64 = 1e-10;

/// A pure state in one of the two bases.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
    basis: Basis,
}

impl QuantumState {
    pub fn from_amplitudes(basis: Basis, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        let n = amplitudes.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NonFinite(alloc::format!("state norm {n}")));
        }
        Ok(Self { amplitudes, basis })
    }

    pub fn basis_state(basis: Basis, index: usize) -> Self {
        let mut a = CVector::from_element(basis.dim(), ZERO);
        a[index] = ONE;
        Self {
            amplitudes: a,
            basis,
        }
    }

    /// All spins down (|0⟩ on every site).
    pub fn vacuum(basis: Basis) -> Self {
        Self::basis_state(basis, 0)
    }

    /// `site` up, every other site down.
    pub fn excitation(basis: Basis, site: usize) -> Self {
        Self::basis_state(basis, basis.excitation_index(site))
    }

    /// Source site in α|0⟩ + β|1⟩, channel in |0⟩. `(α, β)` is normalized.
    pub fn superposition(basis: Basis, site: usize, alpha: Complex64, beta: Complex64) -> Self {
        let n = libm::sqrt(alpha.norm_sqr() + beta.norm_sqr());
        let mut a = CVector::from_element(basis.dim(), ZERO);
        a[0] = alpha / n;
        a[basis.excitation_index(site)] = beta / n;
        Self {
            amplitudes: a,
            basis,
        }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// Probability of |↑⟩_z on each site.
    pub fn site_probabilities(&self) -> Vec<f64> {
        let sites = self.basis.sites();
        let mut p = alloc::vec![0.0; sites];
        match self.basis {
            Basis::Full { .. } => {
                for (idx, a) in self.amplitudes.iter().enumerate() {
                    let w = a.norm_sqr();
                    let mut bits = idx;
                    while bits != 0 {
                        let k = bits.trailing_zeros() as usize;
                        p[k] += w;
                        bits &= bits - 1;
                    }
                }
            }
            Basis::SingleExcitation { .. } => {
                for (k, pk) in p.iter_mut().enumerate() {
                    *pk = self.amplitudes[k + 1].norm_sqr();
                }
            }
        }
        p
    }

    /// ⟨Σ_i n_i⟩, the expected number of up spins.
    pub fn total_excitation(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(idx, a)| self.basis.excitations(idx) as f64 * a.norm_sqr())
            .sum()
    }

    /// Same state written in the full basis.
    pub fn to_full(&self) -> Self {
        match self.basis {
            Basis::Full { .. } => self.clone(),
            Basis::SingleExcitation { sites } => {
                let full = Basis::full(sites);
                let mut a = CVector::from_element(full.dim(), ZERO);
                a[0] = self.amplitudes[0];
                for k in 0..sites {
                    a[1 << k] = self.amplitudes[k + 1];
                }
                Self {
                    amplitudes: a,
                    basis: full,
                }
            }
        }
    }

    fn apply(&mut self, u: &CMatrix) {
        self.amplitudes = u * &self.amplitudes;
    }

    fn apply_adjoint(&mut self, u: &CMatrix) {
        self.amplitudes = u.ad_mul(&self.amplitudes);
    }
}

/// `exp(−iHt)`, computed from the eigendecomposition of `H`.
pub fn propagator(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(hermitian_defect(h.data())));
    }
    if !t.is_finite() {
        return Err(Error::InvalidDuration(t));
    }
    let u = if t == 0.0 {
        CMatrix::identity(h.dim(), h.dim())
    } else {
        exp_i_blockwise(h.data(), t)
    };
    OperatorMatrix::general(u, h.basis())
}

pub fn evolve(state: &QuantumState, h: &OperatorMatrix, t: f64) -> Result<QuantumState> {
    if state.basis != h.basis() {
        return Err(Error::BasisMismatch {
            expected: h.dim(),
            found: state.basis.dim(),
        });
    }
    let u = propagator(h, t)?;
    let mut out = state.clone();
    out.apply(u.data());
    Ok(out)
}

/// Applies an ideal collective rotation. Transverse pulses need the full
/// basis.
pub fn global_pulse(state: &QuantumState, pulse: Pulse) -> Result<QuantumState> {
    let mut out = state.clone();
    apply_pulse(&mut out, pulse)?;
    Ok(out)
}

fn apply_pulse(state: &mut QuantumState, pulse: Pulse) -> Result<()> {
    match state.basis {
        Basis::Full { sites } => {
            let r = spin_rotation(pulse);
            let a = &mut state.amplitudes;
            for k in 0..sites {
                let bit = 1usize << k;
                for idx in 0..a.len() {
                    if idx & bit == 0 {
                        let (lo, hi) = (a[idx], a[idx | bit]);
                        a[idx] = r[(0, 0)] * lo + r[(0, 1)] * hi;
                        a[idx | bit] = r[(1, 0)] * lo + r[(1, 1)] * hi;
                    }
                }
            }
            Ok(())
        }
        Basis::SingleExcitation { .. } => {
            let m = pulse_matrix(state.basis, pulse)?;
            for k in 0..state.amplitudes.len() {
                state.amplitudes[k] *= m[(k, k)];
            }
            Ok(())
        }
    }
}

/// One piece of a schedule: an optional pulse, then evolution under
/// `recipe` for `duration` seconds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub recipe: HamiltonianRecipe,
    pub duration: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub pre_pulse: Option<Pulse>,
}

impl Segment {
    pub fn new(recipe: HamiltonianRecipe, duration: f64) -> Self {
        Self {
            recipe,
            duration,
            pre_pulse: None,
        }
    }

    pub fn after_pulse(mut self, pulse: Pulse) -> Self {
        self.pre_pulse = Some(pulse);
        self
    }
}

/// Ordered segments repeated `repetitions` times.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub segments: Vec<Segment>,
    pub repetitions: usize,
}

impl Schedule {
    pub fn new(segments: Vec<Segment>, repetitions: usize) -> Self {
        Self {
            segments,
            repetitions,
        }
    }

    /// The mix/free cycle: `mix` for `tau_mix`, then `free` for `tau_free`.
    pub fn mix_free(
        mix: HamiltonianRecipe,
        tau_mix: f64,
        free: HamiltonianRecipe,
        tau_free: f64,
        repetitions: usize,
    ) -> Self {
        Self::new(
            alloc::vec![Segment::new(mix, tau_mix), Segment::new(free, tau_free)],
            repetitions,
        )
    }

    pub fn validate(&self, net: &SpinNetwork) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::ZeroRepetitions);
        }
        for s in &self.segments {
            if !(s.duration >= 0.0 && s.duration.is_finite()) {
                return Err(Error::InvalidDuration(s.duration));
            }
            s.recipe.validate(net)?;
        }
        Ok(())
    }

    pub fn cycle_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn total_duration(&self) -> f64 {
        self.cycle_duration() * self.repetitions as f64
    }

    /// True when no segment carries an x or y pulse, i.e. the schedule can run
    /// in the single-excitation basis.
    pub fn preserves_z(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.pre_pulse.map_or(true, |p| p.axis == Axis::Z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Sampling {
    PerSegment,
    /// After every full cycle (t = k·T_cycle); the default.
    #[default]
    PerRepetition,
}

/// Per-site |↑⟩_z probabilities sampled along a run.
///
/// Samples are taken after each step, never at t = 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransferTrace {
    pub times: Vec<f64>,
    pub site_probabilities: Vec<Vec<f64>>,
    pub description: String,
    pub sampling: Sampling,
}

/// A violated trace invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceViolation {
    TimeNotMonotone { row: usize },
    ProbabilityOutOfRange { row: usize, site: usize, value: f64 },
    ConservationBroken { row: usize, total: f64, expected: f64 },
}

impl TransferTrace {
    pub fn new(description: impl Into<String>, sampling: Sampling) -> Self {
        Self {
            description: description.into(),
            sampling,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn push(&mut self, time: f64, state: &QuantumState) {
        self.times.push(time);
        self.site_probabilities.push(state.site_probabilities());
    }

    pub fn series(&self, site: usize) -> impl Iterator<Item = f64> + '_ {
        self.site_probabilities.iter().map(move |row| row[site])
    }

    /// Largest probability on `site` and the first time it is reached.
    pub fn peak(&self, site: usize) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (t, p) in self.times.iter().zip(self.series(site)) {
            if best.map_or(true, |(_, b)| p > b) {
                best = Some((*t, p));
            }
        }
        best
    }

    pub fn max_on(&self, site: usize) -> f64 {
        self.series(site).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.site_probabilities.last().map(|r| r.as_slice())
    }

    /// Appends `other` shifted to start where this trace ends.
    pub fn append_shifted(&mut self, other: &TransferTrace, offset: f64) {
        self.times.extend(other.times.iter().map(|t| t + offset));
        self.site_probabilities
            .extend(other.site_probabilities.iter().cloned());
    }

    /// Checks range, monotone time and conservation of Σ_site P against
    /// `expected_total` (the excitation number of the initial state).
    pub fn check(&self, expected_total: f64, tol: f64) -> core::result::Result<(), TraceViolation> {
        for (row, w) in self.times.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(TraceViolation::TimeNotMonotone { row: row + 1 });
            }
        }
        for (row, probs) in self.site_probabilities.iter().enumerate() {
            for (site, &value) in probs.iter().enumerate() {
                if !(-tol..=1.0 + tol).contains(&value) {
                    return Err(TraceViolation::ProbabilityOutOfRange { row, site, value });
                }
            }
            let total: f64 = probs.iter().sum();
            if (total - expected_total).abs() > tol {
                return Err(TraceViolation::ConservationBroken {
                    row,
                    total,
                    expected: expected_total,
                });
            }
        }
        Ok(())
    }
}

/// Runs schedules against one network in one basis, caching segment
/// propagators by `(recipe, duration)`.
#[derive(Debug)]
pub struct Executor<'a> {
    net: &'a SpinNetwork,
    basis: Basis,
    cache: BTreeMap<(RecipeKey, u64), CMatrix>,
    misses: usize,
}

impl<'a> Executor<'a> {
    pub fn new(net: &'a SpinNetwork, basis: Basis) -> Result<Self> {
        basis.check(net)?;
        Ok(Self {
            net,
            basis,
            cache: BTreeMap::new(),
            misses: 0,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn network(&self) -> &SpinNetwork {
        self.net
    }

    /// Number of propagators computed so far.
    pub fn cache_misses(&self) -> usize {
        self.misses
    }

    pub fn segment_propagator(&mut self, recipe: &HamiltonianRecipe, duration: f64) -> Result<&CMatrix> {
        let key = (recipe.key(), duration.to_bits());
        if !self.cache.contains_key(&key) {
            let h = assemble(recipe, self.net, self.basis)?;
            let u = propagator(&h, duration)?.into_data();
            self.misses += 1;
            self.cache.insert(key.clone(), u);
        }
        Ok(&self.cache[&key])
    }

    fn check_state(&self, state: &QuantumState) -> Result<()> {
        if state.basis != self.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis.dim(),
                found: state.basis.dim(),
            });
        }
        Ok(())
    }

    /// Evolves `state` through `sched`, appending samples to `trace`. Sample
    /// times continue from `start`.
    pub fn run_into(
        &mut self,
        state: &mut QuantumState,
        sched: &Schedule,
        sampling: Sampling,
        start: f64,
        trace: &mut TransferTrace,
    ) -> Result<()> {
        self.check_state(state)?;
        sched.validate(self.net)?;
        let cycle = sched.cycle_duration();
        for rep in 0..sched.repetitions {
            let mut t = start + rep as f64 * cycle;
            for seg in &sched.segments {
                if let Some(p) = seg.pre_pulse {
                    apply_pulse(state, p)?;
                }
                let u = self.segment_propagator(&seg.recipe, seg.duration)?;
                state.apply(u);
                t += seg.duration;
                if sampling == Sampling::PerSegment {
                    trace.push(t, state);
                }
            }
            if sampling == Sampling::PerRepetition {
                trace.push(start + (rep + 1) as f64 * cycle, state);
            }
        }
        Ok(())
    }

    pub fn run(
        &mut self,
        state: &QuantumState,
        sched: &Schedule,
        sampling: Sampling,
    ) -> Result<(TransferTrace, QuantumState)> {
        let mut s = state.clone();
        let mut trace = TransferTrace::new("", sampling);
        self.run_into(&mut s, sched, sampling, 0.0, &mut trace)?;
        Ok((trace, s))
    }

    /// Undoes `sched`: adjoint propagators and inverse pulses in reverse
    /// order.
    pub fn run_inverse(&mut self, state: &mut QuantumState, sched: &Schedule) -> Result<()> {
        self.check_state(state)?;
        sched.validate(self.net)?;
        for _ in 0..sched.repetitions {
            for seg in sched.segments.iter().rev() {
                let u = self.segment_propagator(&seg.recipe, seg.duration)?;
                state.apply_adjoint(u);
                if let Some(p) = seg.pre_pulse {
                    apply_pulse(state, p.inverse())?;
                }
            }
        }
        Ok(())
    }

    /// Propagator of one complete cycle of `sched` (repetitions ignored).
    pub fn cycle_unitary(&mut self, sched: &Schedule) -> Result<CMatrix> {
        sched.validate(self.net)?;
        let d = self.basis.dim();
        let mut acc = CMatrix::identity(d, d);
        for seg in &sched.segments {
            if let Some(p) = seg.pre_pulse {
                acc = pulse_matrix(self.basis, p)? * acc;
            }
            let u = self.segment_propagator(&seg.recipe, seg.duration)?;
            acc = u * acc;
        }
        Ok(acc)
    }
}

/// Runs `sched` from `state` and returns the sampled trace.
pub fn run_schedule(
    state: &QuantumState,
    sched: &Schedule,
    net: &SpinNetwork,
    sampling: Sampling,
) -> Result<TransferTrace> {
    let mut exec = Executor::new(net, state.basis())?;
    Ok(exec.run(state, sched, sampling)?.0)
}

/// Evolves under a fixed Hamiltonian, sampling every `dt` up to `duration`.
/// A zero duration gives an empty trace.
pub fn sample_evolution(
    state: &QuantumState,
    recipe: &HamiltonianRecipe,
    net: &SpinNetwork,
    duration: f64,
    dt: f64,
) -> Result<TransferTrace> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidDuration(duration));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidDuration(dt));
    }
    let h = assemble(recipe, net, state.basis())?;
    let mut trace = TransferTrace::new("", Sampling::PerSegment);
    if duration == 0.0 {
        return Ok(trace);
    }
    let steps = libm::ceil(duration / dt - 1e-9) as usize;
    let step_u = exp_i_blockwise(h.data(), dt);
    let mut s = state.clone();
    for k in 1..=steps {
        let t = (k as f64 * dt).min(duration);
        if k == steps && t < k as f64 * dt {
            let u = exp_i_blockwise(h.data(), t - (k - 1) as f64 * dt);
            s.apply(&u);
        } else {
            s.apply(&step_u);
        }
        trace.push(t, &s);
    }
    Ok(trace)
}
