//! Data-parallel batches: independent replicas and oracle sweeps.
//!
//! With the `parallel` feature the batches run on the rayon pool; without it
//! they run in index order on the calling thread. Results are collected in
//! index order either way, so output does not depend on the feature.

use crate::engine::{SimulationResult, SimulationSchedule, Simulator};
use crate::error::SimError;
use crate::state::UniverseState;

/// Maps `f` over `0..count`, in parallel when the feature is enabled.
pub fn map_indices<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indices_sequential(count, f)
    }
}

pub fn map_indices_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

/// Runs `replicas` independent paths; replica `r` uses stream `r` of the seed.
pub fn simulate_replicas(
    sim: &Simulator<'_>,
    schedule: &SimulationSchedule,
    replicas: usize,
    initial: Option<&UniverseState>,
) -> Result<Vec<SimulationResult>, SimError> {
    map_indices(replicas, |r| sim.run_stream(schedule, r as u64, initial.cloned()))
        .into_iter()
        .collect()
}

pub fn simulate_replicas_sequential(
    sim: &Simulator<'_>,
    schedule: &SimulationSchedule,
    replicas: usize,
    initial: Option<&UniverseState>,
) -> Result<Vec<SimulationResult>, SimError> {
    map_indices_sequential(replicas, |r| {
        sim.run_stream(schedule, r as u64, initial.cloned())
    })
    .into_iter()
    .collect()
}
