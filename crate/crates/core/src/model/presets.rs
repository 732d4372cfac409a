//! Named systems used throughout the examples and scenarios.
//!
//! All presets are returned in their original (unshifted) coordinates;
//! combine with [`crate::pde::equilibrium_solve`] and
//! [`NonlinearCyclicSystem::shifted`] to move the equilibrium to the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompartmentalSystem, GainVector, NonlinearCyclicSystem, ScalarFn};

/// The saturating nonlinearity of the three-state counterexample:
/// `exp(-10(s-1)) + 0.1·sat(25(s-1))`.
pub fn counterexample_phi() -> ScalarFn {
    ScalarFn::ExpSat {
        alpha: 10.0,
        beta: 0.1,
        gain: 25.0,
        center: 1.0,
    }
}

/// `ẋ1 = -x1 + φ(x3)`, `ẋ2 = -x2 + x1`, `ẋ3 = -x3 + x2`.
///
/// Locally stable at (1, 1, 1) (linearized gain product 7.5 < 8) yet it
/// carries a periodic orbit.
pub fn counterexample() -> NonlinearCyclicSystem {
    let one = ScalarFn::Linear { slope: 1.0 };
    NonlinearCyclicSystem::lumped(
        vec![one.clone(), one.clone(), one.clone()],
        vec![one.clone(), one, counterexample_phi().scaled(-1.0)],
    )
    .expect("static preset is well formed")
}

pub const COUNTEREXAMPLE_EQUILIBRIUM: [f64; 3] = [1.0, 1.0, 1.0];

/// Two copies of [`counterexample`] exchanging every species with linear
/// flux `d·(x_1 - x_2)`.
pub fn two_compartment(d: f64) -> Result<CompartmentalSystem> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::invalid("d", format!("coupling must be non-negative, got {d}")));
    }
    CompartmentalSystem::uniform(2, counterexample(), vec![ScalarFn::Linear { slope: d }; 3])
}

/// Parameters of the three-stage kinase cascade with inhibitory feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapkParams {
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d2: f64,
    pub d3: f64,
    pub k: f64,
    pub mu: f64,
    /// Diffusion coefficient shared by the three species.
    #[serde(default = "default_mapk_diffusion")]
    pub diffusion: f64,
}

fn default_mapk_diffusion() -> f64 {
    1e-3
}

impl Default for MapkParams {
    fn default() -> Self {
        Self {
            b: [1.0; 3],
            c: [1.0; 3],
            d2: 0.4,
            d3: 0.4,
            k: 1.0,
            mu: 0.4,
            diffusion: default_mapk_diffusion(),
        }
    }
}

impl MapkParams {
    fn validate(&self) -> Result<()> {
        let named = [
            ("b1", self.b[0]),
            ("b2", self.b[1]),
            ("b3", self.b[2]),
            ("c1", self.c[0]),
            ("c2", self.c[1]),
            ("c3", self.c[2]),
            ("d2", self.d2),
            ("d3", self.d3),
            ("k", self.k),
            ("mu", self.mu),
        ];
        for (name, v) in named {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid("mapk", format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.diffusion > 0.0) {
            return Err(Error::invalid("diffusion", format!("must be positive, got {}", self.diffusion)));
        }
        Ok(())
    }

    /// `ẋ1 = -b1 x1/(c1+x1) + μ/(1+k x3)`, `ẋ2 = -b2 x2/(c2+x2) + d2 x1`,
    /// `ẋ3 = -b3 x3/(c3+x3) + d3 x2`, with constant diffusion on every species.
    pub fn system(&self) -> Result<NonlinearCyclicSystem> {
        self.validate()?;
        let f = (0..3)
            .map(|i| ScalarFn::michaelis_menten(self.b[i], self.c[i]))
            .collect::<Result<Vec<_>>>()?;
        let g = vec![
            ScalarFn::linear(self.d2)?,
            ScalarFn::linear(self.d3)?,
            ScalarFn::inhibitory_hill(self.mu, self.k, 1)?.scaled(-1.0),
        ];
        let h = vec![ScalarFn::constant(self.diffusion)?; 3];
        NonlinearCyclicSystem::new(f, g, Some(h))
    }

    pub fn gains(&self) -> Result<GainVector> {
        mapk_gains(self.b, self.c, self.d2, self.d3, self.k, self.mu)
    }
}

/// Closed-form sector gains of the cascade for states in [0, 1]:
/// the supremum of the slope ratio g_i'/f_i' over that interval.
pub fn mapk_gains(b: [f64; 3], c: [f64; 3], d2: f64, d3: f64, k: f64, mu: f64) -> Result<GainVector> {
    let params = MapkParams {
        b,
        c,
        d2,
        d3,
        k,
        mu,
        diffusion: 1.0,
    };
    params.validate()?;
    let d = [d2, d3];
    let mut gains = Vec::with_capacity(3);
    for i in 0..2 {
        gains.push(d[i] * (c[i] + 1.0).powi(2) / (b[i] * c[i]));
    }
    let tail = (c[2] * c[2]).max((c[2] + 1.0).powi(2) / (1.0 + k).powi(2));
    gains.push(k * mu / (b[2] * c[2]) * tail);
    GainVector::new(gains)
}
