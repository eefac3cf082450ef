//! Grid search on the rayon pool.

use pst_core::scheduler::{evaluate_candidate, select_best, HopChoice, HopSearch};
use pst_core::{Error, Result, SpinNetwork};
use rayon::prelude::*;

/// Same result as [`pst_core::optimize_hop`]; grid points are simulated in
/// parallel and reduced in grid order.
pub fn optimize_hop(net: &SpinNetwork, i: usize, j: usize, search: &HopSearch) -> Result<HopChoice> {
    let points = search.points();
    if points.is_empty() {
        return Err(Error::EmptySearch);
    }
    let candidates = points
        .par_iter()
        .map(|&(n, t)| evaluate_candidate(net, i, j, search.relay_to, n, t))
        .collect::<Result<Vec<_>>>()?;
    select_best(candidates)
}
