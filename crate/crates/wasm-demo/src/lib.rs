//! Browser bindings: random grid generation, persistency maps and TRW-S
//! lower-bound traces. Results cross the boundary as JSON strings.

use persistency::model::{generate_grid, Family, GraphicalModel, GridSpec};
use persistency::persist::{choose_test_labeling, find_persistency, Mode, PersistencyConfig};
use persistency::trws::{self, Costs};
use persistency::Reparametrization;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid side accepted from the page.
pub const MAX_SIDE: usize = 64;

#[derive(Debug, Serialize)]
pub struct MapResult {
    pub rows: usize,
    pub cols: usize,
    pub labels: usize,
    /// Remaining labels per node in row-major order.
    pub remaining: Vec<usize>,
    pub test_labeling: Vec<usize>,
    pub label_fraction: f64,
    pub log_fraction: f64,
    pub outer_rounds: usize,
    pub total_sweeps: usize,
}

#[derive(Debug, Serialize)]
pub struct TraceResult {
    pub lower_bound: Vec<f64>,
    pub energy: Vec<f64>,
}

fn grid(
    family: &str,
    rows: usize,
    cols: usize,
    labels: usize,
    cost_max: i64,
    seed: u64,
) -> Result<GraphicalModel, String> {
    if rows > MAX_SIDE || cols > MAX_SIDE {
        return Err(format!("grid sides are limited to {MAX_SIDE}"));
    }
    let family: Family = family
        .parse()
        .map_err(|e: persistency::Error| e.to_string())?;
    let spec = GridSpec {
        cost_range: (0, cost_max),
        ..GridSpec::new(family, rows, cols, labels, seed)
    };
    generate_grid(&spec).map_err(|e| e.to_string())
}

/// Persistency map of a random grid under a dual mode.
#[allow(clippy::too_many_arguments)]
pub fn map(
    family: &str,
    rows: usize,
    cols: usize,
    labels: usize,
    cost_max: i64,
    seed: u64,
    mode: &str,
    sweeps_per_round: usize,
) -> Result<MapResult, String> {
    let f = grid(family, rows, cols, labels, cost_max, seed)?;
    let mode: Mode = mode
        .parse()
        .map_err(|e: persistency::Error| e.to_string())?;
    if mode == Mode::Exact {
        return Err("exact mode is only available for tiny models".into());
    }
    let cfg = PersistencyConfig {
        mode,
        sweeps_per_round,
        ..PersistencyConfig::default()
    };
    let y = choose_test_labeling(&f, &cfg).map_err(|e| e.to_string())?;
    let r = find_persistency(&f, &y, &cfg).map_err(|e| e.to_string())?;
    Ok(MapResult {
        rows,
        cols,
        labels,
        remaining: r
            .substitution
            .remaining(f.labels())
            .iter()
            .map(Vec::len)
            .collect(),
        test_labeling: y.0,
        label_fraction: r.measures.label_fraction,
        log_fraction: r.measures.log_fraction,
        outer_rounds: r.outer_rounds,
        total_sweeps: r.total_sweeps,
    })
}

/// Lower bound and energy of the backward-pass labeling after every sweep.
pub fn trace(
    family: &str,
    rows: usize,
    cols: usize,
    labels: usize,
    cost_max: i64,
    seed: u64,
    sweeps: usize,
) -> Result<TraceResult, String> {
    let f = grid(family, rows, cols, labels, cost_max, seed)?;
    let dec = trws::default_chains(&f);
    let mut phi = Reparametrization::zeros(&f);
    let mut out = TraceResult {
        lower_bound: Vec::with_capacity(sweeps),
        energy: Vec::with_capacity(sweeps),
    };
    for _ in 0..sweeps {
        let s = trws::sweep(Costs::Naive(&f), &mut phi, &dec, 1e-7);
        out.lower_bound.push(s.backward.lower_bound);
        out.energy
            .push(f.energy(&s.backward.labeling).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn persistency_map(
    family: &str,
    rows: usize,
    cols: usize,
    labels: usize,
    cost_max: i32,
    seed: u32,
    mode: &str,
    sweeps_per_round: usize,
) -> Result<String, JsError> {
    to_json(map(
        family,
        rows,
        cols,
        labels,
        cost_max.into(),
        seed.into(),
        mode,
        sweeps_per_round,
    ))
}

#[wasm_bindgen]
pub fn lower_bound_trace(
    family: &str,
    rows: usize,
    cols: usize,
    labels: usize,
    cost_max: i32,
    seed: u32,
    sweeps: usize,
) -> Result<String, JsError> {
    to_json(trace(
        family,
        rows,
        cols,
        labels,
        cost_max.into(),
        seed.into(),
        sweeps,
    ))
}
