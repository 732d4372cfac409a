//! Method-of-lines simulation of the one-dimensional reaction-diffusion
//! system with zero-flux boundaries, plus equilibrium solving and norms.

use std::io::Write;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::{NonlinearCyclicSystem, ScalarFn};
use crate::quadrature::trapezoid_weights;
use crate::trajectory::{integrate_rk4, Layout, Schedule, TimeStep, Trajectory};

/// Fraction of the explicit diffusive limit used by the automatic step.
const AUTO_SAFETY: f64 = 0.4;
/// Upper bound on the automatic step when diffusion is weak.
pub const AUTO_DT_CAP: f64 = 0.05;
/// Largest `dt·λ` on the negative real axis inside the RK4 stability region.
const RK4_REAL_LIMIT: f64 = 2.78;

/// Uniform grid `ξ_j = j/(N-1)` on the unit interval, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpatialGrid {
    nodes: usize,
}

impl SpatialGrid {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::invalid("nodes", format!("grid needs at least 3 nodes, got {nodes}")));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.nodes - 1) as f64
    }

    pub fn xi(&self, j: usize) -> f64 {
        if j + 1 == self.nodes {
            1.0
        } else {
            j as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.xi(j)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.nodes, self.spacing())
    }
}

/// `n` components sampled on the grid, stored component-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    n: usize,
    nodes: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(n: usize, grid: &SpatialGrid) -> Self {
        Self {
            n,
            nodes: grid.nodes(),
            data: vec![0.0; n * grid.nodes()],
        }
    }

    /// Spatially constant field with the given component values.
    pub fn uniform(values: &[f64], grid: &SpatialGrid) -> Self {
        let nodes = grid.nodes();
        let data = values.iter().flat_map(|&v| std::iter::repeat_n(v, nodes)).collect();
        Self {
            n: values.len(),
            nodes,
            data,
        }
    }

    pub fn from_components(components: Vec<Vec<f64>>, grid: &SpatialGrid) -> Result<Self> {
        let nodes = grid.nodes();
        for c in &components {
            check_len("field component nodes", nodes, c.len())?;
        }
        Ok(Self {
            n: components.len(),
            nodes,
            data: components.concat(),
        })
    }

    /// Evaluates `profile(i, ξ)` at every node.
    pub fn from_fn(n: usize, grid: &SpatialGrid, mut profile: impl FnMut(usize, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * grid.nodes());
        for i in 0..n {
            for j in 0..grid.nodes() {
                data.push(profile(i, grid.xi(j)));
            }
        }
        Self {
            n,
            nodes: grid.nodes(),
            data,
        }
    }

    pub fn from_flat(n: usize, grid: &SpatialGrid, data: Vec<f64>) -> Result<Self> {
        check_len("field values", n * grid.nodes(), data.len())?;
        Ok(Self {
            n,
            nodes: grid.nodes(),
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.data[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Values of all components at node `j`.
    pub fn at_node(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.nodes + j]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_per_component(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.component(i).iter().fold(0.0, |m: f64, v| m.max(v.abs())))
            .collect()
    }

    /// Adds a constant to each component.
    pub fn offset(&self, values: &[f64]) -> Result<Field> {
        check_len("offset", self.n, values.len())?;
        let mut out = self.clone();
        for (i, v) in values.iter().enumerate() {
            out.component_mut(i).iter_mut().for_each(|x| *x += v);
        }
        Ok(out)
    }
}

fn diffusion_fns(sys: &NonlinearCyclicSystem) -> Result<&[ScalarFn]> {
    sys.h()
        .ok_or_else(|| Error::invalid("h", "the PDE simulator needs diffusion functions"))
}

/// Workspace-reusing evaluator of the semi-discrete right-hand side.
struct Discretization<'a> {
    sys: &'a NonlinearCyclicSystem,
    h: &'a [ScalarFn],
    nodes: usize,
    dx: f64,
    x: Vec<f64>,
    r: Vec<f64>,
    flux: Vec<f64>,
}

impl<'a> Discretization<'a> {
    fn new(sys: &'a NonlinearCyclicSystem, grid: &SpatialGrid) -> Result<Self> {
        let n = sys.n();
        Ok(Self {
            sys,
            h: diffusion_fns(sys)?,
            nodes: grid.nodes(),
            dx: grid.spacing(),
            x: vec![0.0; n],
            r: vec![0.0; n],
            flux: vec![0.0; grid.nodes() - 1],
        })
    }

    /// Largest face value of h over all components.
    fn max_h(&self, psi: &[f64]) -> Result<f64> {
        let mut max = 0.0_f64;
        for (i, h) in self.h.iter().enumerate() {
            let comp = &psi[i * self.nodes..(i + 1) * self.nodes];
            for j in 0..self.nodes - 1 {
                let mid = 0.5 * (comp[j] + comp[j + 1]);
                max = max.max(positive_h(h, i, mid)?);
            }
        }
        Ok(max)
    }

    fn eval(&mut self, psi: &[f64], out: &mut [f64]) -> Result<()> {
        let (nodes, dx) = (self.nodes, self.dx);
        let n = self.sys.n();
        for (i, h) in self.h.iter().enumerate() {
            let comp = &psi[i * nodes..(i + 1) * nodes];
            let dst = &mut out[i * nodes..(i + 1) * nodes];
            for j in 0..nodes - 1 {
                let mid = 0.5 * (comp[j] + comp[j + 1]);
                self.flux[j] = positive_h(h, i, mid)? * (comp[j + 1] - comp[j]) / dx;
            }
            // boundary nodes own half a cell, so their flux difference is doubled
            dst[0] = 2.0 * self.flux[0] / dx;
            for j in 1..nodes - 1 {
                dst[j] = (self.flux[j] - self.flux[j - 1]) / dx;
            }
            dst[nodes - 1] = -2.0 * self.flux[nodes - 2] / dx;
        }
        for j in 0..nodes {
            for i in 0..n {
                self.x[i] = psi[i * nodes + j];
            }
            self.sys.reaction_into(&self.x, &mut self.r)?;
            for i in 0..n {
                out[i * nodes + j] += self.r[i];
            }
        }
        Ok(())
    }
}

fn positive_h(h: &ScalarFn, component: usize, at: f64) -> Result<f64> {
    let v = h.eval(at)?;
    if !(v > 0.0) {
        return Err(Error::NonPositiveDiffusion {
            component: component + 1,
            value: v,
            at,
        });
    }
    Ok(v)
}

fn check_field(sys: &NonlinearCyclicSystem, grid: &SpatialGrid, psi: &Field) -> Result<()> {
    check_len("field components", sys.n(), psi.n())?;
    check_len("field nodes", grid.nodes(), psi.nodes())
}

/// Semi-discrete time derivative: conservative diffusion fluxes
/// `h((ψ_j+ψ_{j+1})/2)(ψ_{j+1}-ψ_j)/Δξ` with zero flux through the ends,
/// plus the pointwise cyclic reaction terms.
pub fn rhs(sys: &NonlinearCyclicSystem, grid: &SpatialGrid, psi: &Field) -> Result<Field> {
    check_field(sys, grid, psi)?;
    let mut disc = Discretization::new(sys, grid)?;
    let mut out = Field::zeros(sys.n(), grid);
    disc.eval(psi.as_slice(), &mut out.data)?;
    Ok(out)
}

/// Largest fixed step admitted for the given maximal diffusion.
pub fn diffusive_step_limit(grid: &SpatialGrid, max_h: f64) -> f64 {
    let dx2 = grid.spacing().powi(2);
    RK4_REAL_LIMIT * dx2 / (4.0 * max_h)
}

/// Integrates the semi-discrete system with classical RK4.
///
/// `TimeStep::Auto` uses `0.4·Δξ²/(2·max h)` (capped at [`AUTO_DT_CAP`]),
/// recomputed from the current state before every step; a fixed step is
/// checked against the diffusive stability limit before every step.
pub fn simulate_pde(
    sys: &NonlinearCyclicSystem,
    grid: &SpatialGrid,
    psi0: &Field,
    schedule: &Schedule,
) -> Result<Trajectory> {
    check_field(sys, grid, psi0)?;
    let layout = Layout::Field {
        n: sys.n(),
        nodes: grid.nodes(),
    };
    let dx2 = grid.spacing().powi(2);
    let probe = Discretization::new(sys, grid)?;
    let mut disc = Discretization::new(sys, grid)?;
    let policy = schedule.dt;
    let step_for = |psi: &[f64]| -> Result<f64> {
        let max_h = probe.max_h(psi)?;
        match policy {
            TimeStep::Auto => Ok((AUTO_SAFETY * dx2 / (2.0 * max_h)).min(AUTO_DT_CAP)),
            TimeStep::Fixed(dt) => {
                let limit = RK4_REAL_LIMIT * dx2 / (4.0 * max_h);
                if dt > limit {
                    return Err(Error::UnstableStep { dt, limit });
                }
                Ok(dt)
            }
        }
    };
    integrate_rk4(
        psi0.as_slice().to_vec(),
        schedule,
        layout,
        |x, out| disc.eval(x, out),
        step_for,
    )
}

/// Converts a stored trajectory sample back into a field.
pub fn field_at(traj: &Trajectory, k: usize, grid: &SpatialGrid) -> Result<Field> {
    match traj.layout() {
        Layout::Field { n, nodes } => {
            check_len("grid nodes", nodes, grid.nodes())?;
            Field::from_flat(n, grid, traj.state(k).to_vec())
        }
        _ => Err(Error::invalid("trajectory", "not a field trajectory")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub jacobian: Matrix,
}

pub const NEWTON_MAX_ITER: usize = 200;
pub const NEWTON_TOL: f64 = 1e-12;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residual of the lumped equations, or `None` when `x` leaves the domain.
fn trial_residual(sys: &NonlinearCyclicSystem, x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let r = sys.reaction(x).ok()?;
    let m = max_abs(&r);
    m.is_finite().then_some((r, m))
}

/// Damped Newton iteration on the spatially uniform equations
/// `f_i(x_i) = ±g_{i∓1}(x_{i∓1})`.
pub fn equilibrium_solve(sys: &NonlinearCyclicSystem, guess: &[f64]) -> Result<Equilibrium> {
    check_len("initial guess", sys.n(), guess.len())?;
    let mut x = guess.to_vec();
    let (mut r, mut res) = trial_residual(sys, &x)
        .ok_or_else(|| Error::invalid("initial_guess", "reaction terms undefined at the initial guess"))?;
    let mut best = (x.clone(), res);
    for iteration in 0..=NEWTON_MAX_ITER {
        if res <= NEWTON_TOL {
            let jacobian = sys.jacobian(&x)?;
            return Ok(Equilibrium {
                x,
                residual: res,
                iterations: iteration,
                jacobian,
            });
        }
        if iteration == NEWTON_MAX_ITER {
            break;
        }
        let j = sys.jacobian(&x)?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let Ok(dx) = linalg::solve_linear(&j, &neg) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + lambda * d).collect();
            if let Some((tr, tres)) = trial_residual(sys, &trial) {
                if tres < res || tres <= NEWTON_TOL {
                    x = trial;
                    r = tr;
                    res = tres;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if res < best.1 {
            best = (x.clone(), res);
        }
        if !accepted {
            break;
        }
    }
    Err(Error::EquilibriumNonConvergence {
        iterations: NEWTON_MAX_ITER,
        best: best.0,
        residual: best.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
}

/// Trapezoid-rule norm of one sampled component.
pub fn component_norm(values: &[f64], grid: &SpatialGrid, which: Norm) -> f64 {
    let w = grid.weights();
    match which {
        Norm::L1 => values.iter().zip(&w).map(|(v, w)| w * v.abs()).sum(),
        Norm::L2 => values.iter().zip(&w).map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
    }
}

/// Norm of the whole field; for L2 this is `(Σ_i ∫ψ_i²)^{1/2}`.
pub fn field_norm(psi: &Field, grid: &SpatialGrid, which: Norm) -> f64 {
    let per = field_norms(psi, grid, which);
    match which {
        Norm::L1 => per.iter().sum(),
        Norm::L2 => per.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

pub fn field_norms(psi: &Field, grid: &SpatialGrid, which: Norm) -> Vec<f64> {
    (0..psi.n())
        .map(|i| component_norm(psi.component(i), grid, which))
        .collect()
}

/// Writes `t,xi,psi_1..psi_n`, one row per stored time and node.
pub fn write_pde_csv<W: Write>(traj: &Trajectory, grid: &SpatialGrid, out: &mut W) -> Result<()> {
    let Layout::Field { n, nodes } = traj.layout() else {
        return Err(Error::invalid("trajectory", "not a field trajectory"));
    };
    check_len("grid nodes", nodes, grid.nodes())?;
    write!(out, "t,xi")?;
    for i in 1..=n {
        write!(out, ",psi_{i}")?;
    }
    writeln!(out)?;
    for (t, state) in traj.times().iter().zip(traj.states()) {
        for j in 0..nodes {
            write!(out, "{t},{}", grid.xi(j))?;
            for i in 0..n {
                write!(out, ",{}", state[i * nodes + j])?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
