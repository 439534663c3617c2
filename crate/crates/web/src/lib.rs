//! Browser bindings for three interactive views: a redundancy landscape,
//! an observable time series and a diagram export.

use hamdd::dd::dot::DiagramObject;
use hamdd::models::ModelFamily;
use hamdd::sweeps::{grid_points, landscape_point};
use hamdd::{Config, EvolutionPlan, Manager, ModelSpec, ObservableSpec};
use wasm_bindgen::prelude::*;

/// Largest system the page accepts, to keep the tab responsive.
pub const MAX_SITES: usize = 64;

fn family(name: &str) -> Result<ModelFamily, String> {
    name.parse().map_err(|e: hamdd::Error| e.to_string())
}

fn check_sites(sites: usize) -> Result<(), String> {
    if sites > MAX_SITES {
        Err(format!("at most {MAX_SITES} sites in the browser"))
    } else {
        Ok(())
    }
}

/// Node counts after `steps` Trotter steps over a `grid x grid` angle grid
/// on `[-pi, pi]^2`, single-site angle major.
pub fn landscape_counts(model: &str, sites: usize, steps: usize, grid: usize) -> Result<Vec<u32>, String> {
    check_sites(sites)?;
    if steps == 0 {
        return Err("at least one Trotter step".into());
    }
    let family = family(model)?;
    let pi = std::f64::consts::PI;
    let g = grid_points(-pi, pi, grid).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(grid * grid);
    for &a in &g {
        for &b in &g {
            let pts = landscape_point(family, sites, steps, a, b, Config::default()).map_err(|e| e.to_string())?;
            out.push(pts.last().map_or(0, |p| p.node_count as u32));
        }
    }
    Ok(out)
}

/// Rows `(t, value, node_count)` flattened, starting at `t = 0` from
/// `|0...0>`. `field` is ignored for the spin glass, which uses `seed`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_rows(
    model: &str,
    sites: usize,
    coupling: f64,
    field: f64,
    seed: u64,
    dt: f64,
    steps: usize,
    observable: &str,
) -> Result<Vec<f64>, String> {
    check_sites(sites)?;
    let e = |e: hamdd::Error| e.to_string();
    let spec = match family(model)? {
        ModelFamily::Ising => ModelSpec::ising(sites, coupling, field),
        ModelFamily::Heisenberg => ModelSpec::heisenberg(sites, coupling, field),
        ModelFamily::SpinGlass => ModelSpec::spin_glass(sites, seed).map_err(e)?,
    };
    let obs: ObservableSpec = observable.parse().map_err(e)?;
    let plan = EvolutionPlan::new(spec, dt, steps).with_observables([obs]);
    let mut m = Manager::default();
    let psi0 = m.zero_state(sites).map_err(e)?;
    let ev = m.evolve(&plan, &psi0).map_err(e)?;
    Ok(ev.samples.iter().flat_map(|s| [s.t, s.values[0], s.node_count as f64]).collect())
}

/// Graphviz source for an object such as `ghz 4` or `rxx pi/2`.
pub fn dot_for(object: &str) -> Result<String, String> {
    let obj: DiagramObject = object.parse().map_err(|e: hamdd::Error| e.to_string())?;
    let mut m = Manager::default();
    let root = obj.build(&mut m).map_err(|e| e.to_string())?;
    Ok(m.dot_string(root))
}

#[wasm_bindgen]
pub fn redundancy_landscape(model: &str, sites: usize, steps: usize, grid: usize) -> Result<Vec<u32>, JsError> {
    landscape_counts(model, sites, steps, grid).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn evolve_series(
    model: &str,
    sites: usize,
    coupling: f64,
    field: f64,
    seed: u64,
    dt: f64,
    steps: usize,
    observable: &str,
) -> Result<Vec<f64>, JsError> {
    evolve_rows(model, sites, coupling, field, seed, dt, steps, observable).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn diagram_dot(object: &str) -> Result<String, JsError> {
    dot_for(object).map_err(|e| JsError::new(&e))
}
