//! Seeded Monte-Carlo reference estimates.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, CartesianMesh, Implicit, TestCase};
use crate::quadrature::QuadratureData;
use crate::scalar::Real;

use super::quadtree::{param_usize, reject_unknown};
use super::{Estimate, Integrator, IntegratorDescriptor, InterfaceType, MethodResult, Operation};

/// Hit-or-miss estimate of `|{phi <= 0} ∩ bbox|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate<T> {
    pub value: T,
    /// One standard deviation of `value`, from the observed hit fraction.
    pub sigma: f64,
    pub hits: usize,
    pub samples: usize,
    /// The hits, each weighted `|bbox| / samples`.
    pub quadrature: QuadratureData<T>,
}

/// Standard deviation of a hit-or-miss estimate with hit fraction `p`.
pub fn monte_carlo_sigma(p: f64, box_measure: f64, samples: usize) -> f64 {
    box_measure * (p * (1.0 - p) / samples as f64).sqrt()
}

/// Uniform sampling of `bbox` with a ChaCha8 stream seeded by `seed`;
/// identical inputs give identical estimates.
pub fn monte_carlo_measure<T: Real, L: Implicit<T> + ?Sized>(
    ls: &L,
    bbox: &Aabb<T>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<T>> {
    if samples == 0 {
        return Err(Error::invalid("monte carlo needs at least one sample"));
    }
    let dim = bbox.dim();
    let lo: Vec<f64> = bbox.lo.iter().map(|v| v.to_f64_lossy()).collect();
    let w: Vec<f64> = (0..dim).map(|a| bbox.width(a).to_f64_lossy()).collect();
    let box_measure = bbox.measure();
    let weight = box_measure / T::from_usize_lossy(samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = QuadratureData::new(dim, MonteCarlo::NAME);
    let mut x = vec![T::zero(); dim];
    for _ in 0..samples {
        for a in 0..dim {
            x[a] = T::lit(lo[a] + w[a] * rng.gen::<f64>());
        }
        if ls.value(&x) <= T::zero() {
            q.push(&x, weight, None);
        }
    }
    let hits = q.len();
    let p = hits as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        value: box_measure * T::from_usize_lossy(hits) / T::from_usize_lossy(samples),
        sigma: monte_carlo_sigma(p, box_measure.to_f64_lossy(), samples),
        hits,
        samples,
        quadrature: q,
    })
}

/// Monte-Carlo oracle over the test-case domain; the mesh only fixes the box.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo {
            samples: 100_000,
            seed: 42,
        }
    }
}

impl MonteCarlo {
    pub const NAME: &'static str = "monte-carlo";

    pub fn from_params(params: &IndexMap<String, String>) -> Result<Self> {
        reject_unknown(params, &["samples", "seed"], Self::NAME)?;
        let d = MonteCarlo::default();
        let samples = param_usize(params, "samples", d.samples)?;
        if samples == 0 {
            return Err(Error::invalid("monte-carlo.samples must be positive"));
        }
        let seed = match params.get("seed") {
            None => d.seed,
            Some(v) => v
                .parse()
                .map_err(|_| Error::invalid(format!("parameter 'seed' expects an unsigned integer, got '{v}'")))?,
        };
        Ok(MonteCarlo { samples, seed })
    }

    fn run<T: Real>(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>) -> MethodResult<T> {
        let est = monte_carlo_measure(&tc.level_set, &mesh.bounds, self.samples, self.seed)?;
        Ok(Estimate {
            value: est.value,
            quadrature: est.quadrature,
            fallback_cells: 0,
        })
    }
}

impl<T: Real> Integrator<T> for MonteCarlo {
    fn descriptor(&self) -> IntegratorDescriptor {
        IntegratorDescriptor {
            name: Self::NAME.into(),
            interface_type: InterfaceType::Implicit,
            supported_dims: vec![2, 3],
            capabilities: vec![Operation::Area2d, Operation::Volume3d],
            parameters: IndexMap::from([
                ("samples".to_string(), self.samples.to_string()),
                ("seed".to_string(), self.seed.to_string()),
            ]),
        }
    }

    fn compute_area_2d(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, _order: usize) -> MethodResult<T> {
        self.run(tc, mesh)
    }

    fn compute_volume_3d(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, _order: usize) -> MethodResult<T> {
        self.run(tc, mesh)
    }

    /// Four standard deviations, using the reference measure for the hit fraction.
    fn error_bound(&self, op: Operation, tc: &TestCase<T>, mesh: &CartesianMesh<T>, _order: usize) -> Option<f64> {
        if !op.is_volume_measure() {
            return None;
        }
        let b = mesh.bounds.measure().to_f64_lossy();
        let p = tc.reference(op.reference_kind())?.to_f64_lossy() / b;
        Some(4.0 * monte_carlo_sigma(p, b, self.samples))
    }
}
