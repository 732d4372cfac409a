use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg::Matrix;
use crate::model::ScalarFn;

fn positive_vec(name: &'static str, v: &[f64]) -> Result<()> {
    if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::invalid(name, format!("entries must be positive and finite, got {bad}")));
    }
    Ok(())
}

/// Linear cyclic system: decay rates `a`, coupling gains `b`, diffusion `c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearCyclicSystem {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl LinearCyclicSystem {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("n", "system needs at least one subsystem"));
        }
        check_len("coupling gains b", a.len(), b.len())?;
        check_len("diffusion coefficients c", a.len(), c.len())?;
        positive_vec("a", &a)?;
        positive_vec("b", &b)?;
        positive_vec("c", &c)?;
        Ok(Self { a, b, c })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// The same system with `f_i = a_i s`, `g_i = b_i s`, `h_i = c_i`.
    pub fn to_nonlinear(&self) -> NonlinearCyclicSystem {
        let lin = |v: &[f64]| v.iter().map(|&x| ScalarFn::Linear { slope: x }).collect();
        NonlinearCyclicSystem {
            f: lin(&self.a),
            g: lin(&self.b),
            h: Some(self.c.iter().map(|&x| ScalarFn::Constant { value: x }).collect()),
        }
    }
}

/// Cyclic interconnection of scalar subsystems.
///
/// Subsystem 1 receives `-g_n(x_n)`; subsystem `i > 1` receives `+g_{i-1}(x_{i-1})`.
/// `h` holds the diffusion nonlinearities and is absent for lumped models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearCyclicSystem {
    f: Vec<ScalarFn>,
    g: Vec<ScalarFn>,
    h: Option<Vec<ScalarFn>>,
}

impl NonlinearCyclicSystem {
    pub fn new(f: Vec<ScalarFn>, g: Vec<ScalarFn>, h: Option<Vec<ScalarFn>>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::invalid("n", "system needs at least one subsystem"));
        }
        check_len("coupling functions g", f.len(), g.len())?;
        if let Some(h) = &h {
            check_len("diffusion functions h", f.len(), h.len())?;
        }
        Ok(Self { f, g, h })
    }

    /// Lumped system without diffusion.
    pub fn lumped(f: Vec<ScalarFn>, g: Vec<ScalarFn>) -> Result<Self> {
        Self::new(f, g, None)
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self) -> &[ScalarFn] {
        &self.f
    }

    pub fn g(&self) -> &[ScalarFn] {
        &self.g
    }

    pub fn h(&self) -> Option<&[ScalarFn]> {
        self.h.as_deref()
    }

    pub fn with_diffusion(mut self, h: Vec<ScalarFn>) -> Result<Self> {
        check_len("diffusion functions h", self.n(), h.len())?;
        self.h = Some(h);
        Ok(self)
    }

    pub fn without_diffusion(mut self) -> Self {
        self.h = None;
        self
    }

    /// Writes `-f_i(x_i) ± g_{i∓1}(x_{i∓1})` into `out`.
    pub fn reaction_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        let feedback = self.g[n - 1].eval(x[n - 1])?;
        out[0] = -self.f[0].eval(x[0])? - feedback;
        for i in 1..n {
            out[i] = -self.f[i].eval(x[i])? + self.g[i - 1].eval(x[i - 1])?;
        }
        Ok(())
    }

    pub fn reaction(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("state", self.n(), x.len())?;
        let mut out = vec![0.0; self.n()];
        self.reaction_into(x, &mut out)?;
        Ok(out)
    }

    /// Jacobian of the reaction terms at `x`: cyclic structure with
    /// `-f_i'` on the diagonal, `g_{i-1}'` below it and `-g_n'` in the corner.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        let n = self.n();
        check_len("state", n, x.len())?;
        let mut j = Matrix::zeros(n, n);
        for i in 0..n {
            j[(i, i)] -= self.f[i].derivative(x[i])?;
        }
        j[(0, n - 1)] -= self.g[n - 1].derivative(x[n - 1])?;
        for i in 1..n {
            j[(i, i - 1)] += self.g[i - 1].derivative(x[i - 1])?;
        }
        Ok(j)
    }

    /// Deviation coordinates `x̃ = x - x̄`: `f`, `g` become shifted functions
    /// vanishing at zero and `h` is translated.
    pub fn shifted(&self, equilibrium: &[f64]) -> Result<Self> {
        check_len("equilibrium", self.n(), equilibrium.len())?;
        let shift = |fns: &[ScalarFn]| -> Vec<ScalarFn> {
            fns.iter()
                .zip(equilibrium)
                .map(|(f, &e)| f.clone().shifted(e))
                .collect()
        };
        let h = self.h.as_ref().map(|h| {
            h.iter()
                .zip(equilibrium)
                .map(|(f, &e)| f.clone().translated(e))
                .collect()
        });
        Ok(Self {
            f: shift(&self.f),
            g: shift(&self.g),
            h,
        })
    }
}

/// Strictly positive sector gains γ_i.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::invalid("gains", "gain vector is empty"));
        }
        positive_vec("gains", &gains)?;
        Ok(Self(gains))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn product(&self) -> f64 {
        self.0.iter().product()
    }
}

/// `m` well-mixed copies of a lumped cyclic system joined by flux functions.
///
/// `flux[j][i]` is μ_{j+1,i+1}: the exchange of species `i` between
/// compartments `j` and `j + 1`, driven by `x_{j,i} - x_{j+1,i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompartmentalSystem {
    m: usize,
    base: NonlinearCyclicSystem,
    flux: Vec<Vec<ScalarFn>>,
}

impl CompartmentalSystem {
    pub fn new(m: usize, base: NonlinearCyclicSystem, flux: Vec<Vec<ScalarFn>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m", "need at least one compartment"));
        }
        check_len("flux interfaces", m - 1, flux.len())?;
        for row in &flux {
            check_len("flux functions per interface", base.n(), row.len())?;
        }
        Ok(Self {
            m,
            base: base.without_diffusion(),
            flux,
        })
    }

    /// Same per-species flux functions on every interface.
    pub fn uniform(m: usize, base: NonlinearCyclicSystem, per_species: Vec<ScalarFn>) -> Result<Self> {
        check_len("flux functions per interface", base.n(), per_species.len())?;
        let flux = vec![per_species; m.saturating_sub(1)];
        Self::new(m, base, flux)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn base(&self) -> &NonlinearCyclicSystem {
        &self.base
    }

    pub fn flux(&self) -> &[Vec<ScalarFn>] {
        &self.flux
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_system_validation() {
        assert!(LinearCyclicSystem::new(vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]).is_ok());
        assert!(LinearCyclicSystem::new(vec![1.0; 3], vec![1.0; 2], vec![1.0; 3]).is_err());
        assert!(LinearCyclicSystem::new(vec![1.0, -1.0, 1.0], vec![1.0; 3], vec![1.0; 3]).is_err());
        assert!(LinearCyclicSystem::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn reaction_matches_matrix_vector_product() {
        let sys = LinearCyclicSystem::new(vec![1.0, 2.0, 3.0], vec![0.5, 1.5, 2.5], vec![1.0; 3])
            .unwrap()
            .to_nonlinear();
        let x = [0.3, -0.7, 1.1];
        let j = sys.jacobian(&x).unwrap();
        let jx = j.mul_vec(&x);
        let r = sys.reaction(&x).unwrap();
        for (a, b) in jx.iter().zip(&r) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_subsystem_self_loop() {
        let sys = LinearCyclicSystem::new(vec![2.0], vec![3.0], vec![1.0])
            .unwrap()
            .to_nonlinear();
        assert_eq!(sys.reaction(&[1.0]).unwrap(), vec![-5.0]);
        assert_eq!(sys.jacobian(&[0.0]).unwrap()[(0, 0)], -5.0);
    }

    #[test]
    fn gains_must_be_positive() {
        assert!(GainVector::new(vec![1.0, 0.0]).is_err());
        assert!((GainVector::new(vec![2.0, 3.0]).unwrap().product() - 6.0).abs() < 1e-15);
    }
}
