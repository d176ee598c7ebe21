//! End-to-end runs shared by the command line and the acceptance suite.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytics::{chi_square_homogeneity, chi_square_uniform, watts_closed, watts_composed, ChiSquare};
use crate::geometry::{build_vase_grid, build_wedge_lattice, layer_range, Shape, Site, WedgeSpec};
use crate::green::{green_vector, nagasawa_reverse};
use crate::kernels::{vase_rate_matrix, wedge_kernel, TransverseScheme};
use crate::simulation::{
    exit_distribution, exit_side_counts, last_side_curve, run_paths, CurveScore, EmpiricalDistribution, PathRecord,
    RunConfig, SamplingTable, SideCurve, SideObserver, Start, Stop,
};
use crate::{Error, Result};

/// Apex-started wedge walk stopped on layer `spec.layers`.
pub fn simulate_wedge(spec: &WedgeSpec, config: &RunConfig) -> Result<Vec<PathRecord>> {
    let lattice = build_wedge_lattice(spec)?;
    let kernel = wedge_kernel::<f64>(&lattice, spec.layers)?;
    let table = SamplingTable::new(&kernel, true);
    run_paths(&table, &Start::State(0), Stop::Layer(spec.layers), SideObserver::LastBeforeStop, config)
}

/// Apex-started vase walk (embedded jump chain) stopped on layer `layers`.
pub fn simulate_vase(
    shape: Arc<dyn Shape>,
    resolution: usize,
    layers: usize,
    apex_rate: f64,
    scheme: &dyn TransverseScheme,
    config: &RunConfig,
) -> Result<Vec<PathRecord>> {
    let grid = build_vase_grid(shape, resolution, layers)?;
    let chain = vase_rate_matrix(&grid, apex_rate, scheme)?.jump_chain()?;
    let table = SamplingTable::new(&chain, true);
    run_paths(&table, &Start::State(0), Stop::Layer(layers), SideObserver::LastBeforeStop, config)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub exit: EmpiricalDistribution,
    pub uniformity: ChiSquare,
    /// Largest `|c(y) − c(−y)| / sqrt(c(y) + c(−y))` over `y > 0`.
    pub symmetry_max_z: f64,
    pub mean_steps: f64,
}

pub fn hitting_report(records: &[PathRecord], layer: usize, config: &RunConfig) -> Result<HittingReport> {
    let exit = exit_distribution(records, layer, config.seed, config.workers)?;
    let uniformity = chi_square_uniform(&exit.counts)?;
    let mut symmetry_max_z: f64 = 0.0;
    for y in 1..=layer {
        let (a, b) = (exit.counts[layer + y] as f64, exit.counts[layer - y] as f64);
        if a + b > 0.0 {
            symmetry_max_z = symmetry_max_z.max((a - b).abs() / (a + b).sqrt());
        }
    }
    let mean_steps = records.iter().map(|r| r.steps as f64).sum::<f64>() / records.len() as f64;
    Ok(HittingReport {
        exit,
        uniformity,
        symmetry_max_z,
        mean_steps,
    })
}

/// The empirical last-side curve scored against both candidate predictions:
/// `watts_closed(s)` and `watts_closed(sc_inverse(s))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WattsComparison {
    pub curve: SideCurve,
    pub closed: CurveScore,
    pub composed: CurveScore,
}

pub fn watts_comparison(records: &[PathRecord], layer: usize, bins: usize, k: f64) -> Result<WattsComparison> {
    let curve = last_side_curve(records, layer, bins)?;
    let closed = curve.score("watts_closed", k, watts_closed)?;
    let composed = curve.score("watts_composed", k, watts_composed)?;
    Ok(WattsComparison {
        curve,
        closed,
        composed,
    })
}

/// Forward runs from the apex against reversed runs from the forward exit law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReversalConsistency {
    pub layers: usize,
    pub n_paths: u64,
    /// Forward exit sites against reversed start sites.
    pub exit_law: ChiSquare,
    /// Forward `(exit, last side)` against reversed `(start, first side)`.
    pub joint: ChiSquare,
    /// Reversed paths killed anywhere but the apex (should be zero).
    pub misplaced_kills: u64,
}

pub fn reversal_consistency(spec: &WedgeSpec, config: &RunConfig) -> Result<ReversalConsistency> {
    let m = spec.layers;
    let lattice = build_wedge_lattice(spec)?;
    let kernel = wedge_kernel::<f64>(&lattice, m)?;
    let green = green_vector(&kernel, 0, m)?;
    let reversal = nagasawa_reverse(&kernel, &green)?;

    let forward = run_paths(
        &SamplingTable::new(&kernel, true),
        &Start::State(0),
        Stop::Layer(m),
        SideObserver::LastBeforeStop,
        config,
    )?;
    let law: Vec<(usize, f64)> = reversal.initial.iter().map(|(z, w)| (*z, *w)).collect();
    if law.iter().any(|(z, _)| !layer_range(m).contains(z)) {
        return Err(Error::Solver("reversal starts off the exit layer".into()));
    }
    let reverse_config = RunConfig {
        seed: config.seed ^ 0xA5A5_5A5A_C3C3_3C3C,
        ..*config
    };
    let backward = run_paths(
        &SamplingTable::new(&reversal.kernel, true),
        &Start::Law(law),
        Stop::Killed,
        SideObserver::FirstAfterStart,
        &reverse_config,
    )?;
    let misplaced_kills = backward.iter().filter(|r| r.exit != Site::APEX.index()).count() as u64;

    let count_sites = |recs: &[PathRecord], key: fn(&PathRecord) -> usize| {
        let start = layer_range(m).start;
        let mut c = vec![0u64; 2 * m + 1];
        for r in recs {
            c[key(r) - start] += 1;
        }
        c
    };
    let exit_law = chi_square_homogeneity(&count_sites(&forward, |r| r.exit), &count_sites(&backward, |r| r.start))?;
    let joint = chi_square_homogeneity(
        &exit_side_counts(&forward, m, |r| r.exit),
        &exit_side_counts(&backward, m, |r| r.start),
    )?;
    Ok(ReversalConsistency {
        layers: m,
        n_paths: config.n_paths,
        exit_law,
        joint,
        misplaced_kills,
    })
}
