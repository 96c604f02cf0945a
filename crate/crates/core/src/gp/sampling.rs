use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::JointModel;
use crate::error::{Error, Result};

/// Draws the full state Ū = L⁻¹D^{−½}Z, component by component.
///
/// Component c reads its normals from ChaCha8 stream c of `seed`, so each
/// component's draw depends only on (seed, c).
pub fn sample_state(model: &JointModel, seed: u64) -> Vec<f64> {
    let mut state = vec![0.0; model.state_dim()];
    for (c, comp) in model.components.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let f = &comp.factor;
        let mut x: Vec<f64> = f.d().iter().map(|d| rng.sample::<f64, _>(StandardNormal) / d.sqrt()).collect();
        f.solve_lower_in_place(&mut x);
        for (k, v) in x.into_iter().enumerate() {
            state[model.global_index(c, k)] = v;
        }
    }
    state
}

/// One draw of u at the model locations.
pub fn sample(model: &JointModel, seed: u64) -> Vec<f64> {
    model.observe(&sample_state(model, seed))
}

/// One draw of (u, u', ..., u^{(order)}) at the model locations; `out[d][j]` is
/// the d-th derivative at location j.
///
/// Every component must carry derivatives up to `order` in its state.
pub fn sample_derivatives(model: &JointModel, seed: u64, order: usize) -> Result<Vec<Vec<f64>>> {
    if let Some(c) = model.components.iter().find(|c| c.state_dim() <= order) {
        return Err(Error::NotSmooth { order, j: c.kernel.index });
    }
    let state = sample_state(model, seed);
    Ok((0..=order)
        .map(|d| {
            (0..model.n())
                .map(|j| (0..model.components.len()).map(|c| state[model.value_index(j, c) + d]).sum())
                .collect()
        })
        .collect())
}
