//! Name-based construction of integrators.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Integrator, LinearReconstruction, MomentFitting, MonteCarlo, ParametricFlux, Quadtree, TessellatedQuadtree};

/// Registered integrators, in report order.
pub const INTEGRATOR_NAMES: [&str; 6] = [
    Quadtree::NAME,
    TessellatedQuadtree::NAME,
    LinearReconstruction::NAME,
    MomentFitting::NAME,
    ParametricFlux::NAME,
    MonteCarlo::NAME,
];

/// An integrator name plus parameter overrides.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub name: String,
    #[serde(default)]
    pub params: IndexMap<String, String>,
}

impl IntegratorSpec {
    pub fn new(name: impl Into<String>) -> Self {
        IntegratorSpec {
            name: name.into(),
            params: IndexMap::new(),
        }
    }

    pub fn build<T: Real>(&self) -> Result<Box<dyn Integrator<T>>> {
        build_integrator(&self.name, &self.params)
    }
}

pub fn build_integrator<T: Real>(name: &str, params: &IndexMap<String, String>) -> Result<Box<dyn Integrator<T>>> {
    Ok(match name {
        Quadtree::NAME => Box::new(Quadtree::from_params(params)?),
        TessellatedQuadtree::NAME => Box::new(TessellatedQuadtree::from_params(params)?),
        LinearReconstruction::NAME => Box::new(LinearReconstruction::from_params(params)?),
        MomentFitting::NAME => Box::new(MomentFitting::from_params(params)?),
        ParametricFlux::NAME => Box::new(ParametricFlux::from_params(params)?),
        MonteCarlo::NAME => Box::new(MonteCarlo::from_params(params)?),
        _ => {
            return Err(Error::invalid(format!(
                "unknown integrator '{name}' (known: {})",
                INTEGRATOR_NAMES.join(", ")
            )))
        }
    })
}

/// All registered integrators with default parameters.
pub fn standard_integrators<T: Real>() -> Vec<Box<dyn Integrator<T>>> {
    INTEGRATOR_NAMES
        .iter()
        .map(|n| build_integrator(n, &IndexMap::new()).expect("defaults are valid"))
        .collect()
}

/// Parses `integrator.key=value` assignments, grouped by integrator.
pub fn parse_param_assignments<S: AsRef<str>>(items: &[S]) -> Result<IndexMap<String, IndexMap<String, String>>> {
    let mut out: IndexMap<String, IndexMap<String, String>> = IndexMap::new();
    for item in items {
        let item = item.as_ref();
        let (lhs, value) = item
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("parameter '{item}' is not of the form integrator.key=value")))?;
        let (integ, key) = lhs
            .split_once('.')
            .ok_or_else(|| Error::invalid(format!("parameter '{item}' is not of the form integrator.key=value")))?;
        if !INTEGRATOR_NAMES.contains(&integ) {
            return Err(Error::invalid(format!("parameter '{item}' names unknown integrator '{integ}'")));
        }
        if key.is_empty() || value.is_empty() {
            return Err(Error::invalid(format!("parameter '{item}' has an empty key or value")));
        }
        out.entry(integ.to_string())
            .or_default()
            .insert(key.to_string(), value.to_string());
    }
    Ok(out)
}
