use std::path::Path;

use pst::config::load_network;
use pst_core::hamiltonian::{Basis, HamiltonianRecipe};
use pst_core::propagation::{sample_evolution, QuantumState};
use pst_core::scheduler::{
    relay_plan_with_harmonics, simulate_relay, triad_transfer_schedule, HopCompletion, HopSearch,
    TRIAD_N_MAX,
};
use pst_core::{relay_plan, SpinNetwork};

fn net() -> SpinNetwork {
    load_network(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../networks/leucine.toml")).unwrap()
}

fn path(net: &SpinNetwork, labels: &[&str]) -> Vec<usize> {
    labels.iter().map(|l| net.index_of(l).unwrap()).collect()
}

#[test]
fn relay_with_chosen_harmonics_keeps_every_hop() {
    let net = net();
    let p = path(&net, &["CO", "Ca", "Cb", "Cg", "Cd1"]);
    let plan = relay_plan_with_harmonics(&net, &p, 3e-4, &[3, 1, 2, 2]).unwrap();
    let run = simulate_relay(&net, &plan, Basis::single_excitation(6), HopCompletion::FixedBudget).unwrap();
    for h in &run.hops {
        assert!(h.conditional >= 0.99, "{:?}", run.hops);
    }
    assert!(run.end_to_end() >= 0.95);
    assert!(run.trace.max_on(net.index_of("Cd2").unwrap()) < 0.05);
    assert!(plan.predicted_end_to_end() <= plan.min_hop_fidelity());
}

#[test]
fn peak_detect_relay_matches_budget_on_leucine() {
    let net = net();
    let p = path(&net, &["CO", "Ca", "Cb", "Cg", "Cd1"]);
    let plan = relay_plan(&net, &p, 3e-4).unwrap();
    let basis = Basis::single_excitation(6);
    let fixed = simulate_relay(&net, &plan, basis, HopCompletion::FixedBudget).unwrap();
    let peak = simulate_relay(&net, &plan, basis, HopCompletion::PeakDetect { max_cycles: 200 }).unwrap();
    assert!(peak.end_to_end() >= fixed.end_to_end() - 0.01);
}

#[test]
fn baseline_from_co_stays_below_relay() {
    let net = net();
    let p = path(&net, &["CO", "Ca", "Cb", "Cg", "Cd1"]);
    let basis = Basis::single_excitation(6);
    let plan = relay_plan(&net, &p, 3e-4).unwrap();
    let run = simulate_relay(&net, &plan, basis, HopCompletion::FixedBudget).unwrap();
    let base = sample_evolution(
        &QuantumState::excitation(basis, p[0]),
        &HamiltonianRecipe::xy(),
        &net,
        plan.total_duration(),
        2e-4,
    )
    .unwrap();
    assert!(base.max_on(p[4]) < run.end_to_end() - 0.3);
}

#[test]
fn optimizer_recovers_double_resonance() {
    let net = net();
    let [b, g, d2] = [net.index_of("Cb").unwrap(), net.index_of("Cg").unwrap(), net.index_of("Cd2").unwrap()];
    let search = HopSearch {
        harmonics: 1..=12,
        tau_mix: vec![3e-4],
        relay_to: Some(d2),
    };
    let choice = pst::parallel::optimize_hop(&net, b, g, &search).unwrap();
    assert_eq!(choice.best.harmonic, 8);
    assert!(choice.best.fidelity > 0.99);
    assert!(!choice.flat_landscape);
}

#[test]
fn triad_modes() {
    let net = net();
    let [b, g, d1, d2] = ["Cb", "Cg", "Cd1", "Cd2"].map(|l| net.index_of(l).unwrap());
    let plan = triad_transfer_schedule(&net, b, g, d2, 3e-4, TRIAD_N_MAX).unwrap();
    assert_eq!(plan.harmonics, vec![8, 1]);
    assert!((plan.tau_free - 3.88e-3).abs() < 0.005 * 3.88e-3);
    // γ-δ1 resonates at 4.81 ms = 10 × 2π/Δβγ to within 2% of a period.
    let plan = triad_transfer_schedule(&net, b, g, d1, 3e-4, TRIAD_N_MAX).unwrap();
    assert_eq!(plan.harmonics[0], 10);
}
