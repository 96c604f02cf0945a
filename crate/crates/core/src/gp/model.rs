//! The joint state-space model: m + 1 independent Markov components whose
//! states are interleaved by location.

use crate::banded::{ldl_construct, BandFactor, BandMatrix};
use crate::decomposition::{components, ComponentKernel, CrossCovSpec};
use crate::error::{Error, Result};
use crate::kernels::MaternParams;

/// One Markov component with its precision factor Q_i = L_iᵀ D_i L_i.
#[derive(Debug, Clone)]
pub struct ComponentModel {
    pub kernel: ComponentKernel,
    pub factor: BandFactor,
    /// Position of this component's state within each location block.
    pub offset: usize,
}

impl ComponentModel {
    pub fn state_dim(&self) -> usize {
        self.kernel.state_dim
    }
}

/// Approximate Matérn process at n sorted locations.
///
/// The full state Ū holds, for each location in turn, the states of
/// components 0..=m; u(t_j) is the sum of the components' value entries.
#[derive(Debug, Clone)]
pub struct JointModel {
    pub params: MaternParams,
    pub m: usize,
    pub locations: Vec<f64>,
    pub components: Vec<ComponentModel>,
    block: usize,
}

impl JointModel {
    pub fn n(&self) -> usize {
        self.locations.len()
    }

    /// State size per location, m⌈α⌉ + max(⌊α⌋, 1).
    pub fn block_size(&self) -> usize {
        self.block
    }

    /// Total state dimension N.
    pub fn state_dim(&self) -> usize {
        self.block * self.n()
    }

    /// Index in Ū of u_c(t_j).
    pub fn value_index(&self, j: usize, c: usize) -> usize {
        j * self.block + self.components[c].offset
    }

    /// Index in Ū of the component-local state entry `k` (location-major within the component).
    pub fn global_index(&self, c: usize, k: usize) -> usize {
        let p = self.components[c].state_dim();
        (k / p) * self.block + self.components[c].offset + k % p
    }

    /// Half-bandwidth of the joint precision in location-major order.
    pub fn bandwidth(&self) -> usize {
        if self.n() < 2 {
            return self.block - 1;
        }
        let pmax = self.components.iter().map(|c| c.state_dim()).max().unwrap_or(1);
        self.block + pmax - 1
    }

    /// log det Q.
    pub fn log_det_precision(&self) -> f64 {
        self.components.iter().map(|c| c.factor.log_det()).sum()
    }

    /// Joint prior precision Q in location-major band storage.
    pub fn prior_precision(&self) -> BandMatrix {
        let mut q = BandMatrix::zeros(self.state_dim(), self.bandwidth());
        for (c, comp) in self.components.iter().enumerate() {
            let f = &comp.factor;
            let nc = f.dim();
            let bw = f.bandwidth();
            let d = f.d();
            // Q_c = Σ_k d_k ℓ_kᵀ ℓ_k over the rows ℓ_k of L_c
            for k in 0..nc {
                let lo = k.saturating_sub(bw);
                for a in lo..=k {
                    let la = f.l_entry(k, a);
                    if la == 0.0 {
                        continue;
                    }
                    let ga = self.global_index(c, a);
                    for b in lo..=a {
                        let lb = f.l_entry(k, b);
                        if lb != 0.0 {
                            q.add(ga, self.global_index(c, b), d[k] * la * lb);
                        }
                    }
                }
            }
        }
        q
    }

    /// u = AŪ for a full state vector.
    pub fn observe(&self, state: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|j| (0..self.components.len()).map(|c| state[self.value_index(j, c)]).sum())
            .collect()
    }
}

/// Builds the order-m model at strictly increasing locations.
///
/// Integer α uses the exact Matérn process as its only component and ignores m.
pub fn build_joint(params: &MaternParams, m: usize, locations: &[f64]) -> Result<JointModel> {
    if locations.is_empty() {
        return Err(Error::InvalidArgument("no locations".into()));
    }
    if locations.windows(2).any(|w| !(w[1] > w[0])) {
        let j = locations.windows(2).position(|w| !(w[1] > w[0])).unwrap_or(0);
        if locations[j + 1] == locations[j] {
            return Err(Error::DuplicateLocations(j, j + 1));
        }
        return Err(Error::InvalidArgument("locations must be strictly increasing".into()));
    }
    let kernels = components(params, m)?;
    // components are independent, so their factors are built concurrently
    let factors: Vec<Result<BandFactor>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kernels
            .iter()
            .map(|k| scope.spawn(move || ldl_construct(&CrossCovSpec::new(k.clone()), locations)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("component construction panicked")).collect()
    });
    let mut offset = 0;
    let mut comps = Vec::with_capacity(kernels.len());
    for (kernel, factor) in kernels.into_iter().zip(factors) {
        let p = kernel.state_dim;
        comps.push(ComponentModel { kernel, factor: factor?, offset });
        offset += p;
    }
    Ok(JointModel { params: *params, m, locations: locations.to_vec(), components: comps, block: offset })
}
