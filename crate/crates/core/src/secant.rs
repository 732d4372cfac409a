//! Linear analysis of cyclic systems: the secant criterion, the diagonal
//! Lyapunov scaling that certifies it, and the modal decomposition of the
//! one-dimensional linear reaction-diffusion operator.

use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, Eigenvalue, Matrix};
use crate::model::{GainVector, LinearCyclicSystem};

/// Serializes an extended real: finite values as numbers, ±∞ as `"inf"` / `"-inf"`.
pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// `sec(π/n)ⁿ`; `+∞` for `n ≤ 2`, where every positive cyclic matrix is Hurwitz.
pub fn secant_threshold(n: usize) -> Result<f64> {
    match n {
        0 => Err(Error::invalid("n", "need at least one subsystem")),
        1 | 2 => Ok(f64::INFINITY),
        _ => Ok((1.0 / (PI / n as f64).cos()).powi(n as i32)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecantCheck {
    pub product: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub threshold: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub margin: f64,
    pub holds: bool,
}

pub fn secant_satisfied(gains: &GainVector) -> SecantCheck {
    let product = gains.product();
    let threshold = secant_threshold(gains.n()).expect("gain vectors are non-empty");
    SecantCheck {
        product,
        threshold,
        margin: threshold - product,
        holds: product < threshold,
    }
}

/// Dense matrix with the cyclic sparsity pattern: negative diagonal, positive
/// subdiagonal, negative top-right corner, zeros elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CyclicMatrix(Matrix);

impl CyclicMatrix {
    /// Assembles the matrix from its diagonal magnitudes and couplings,
    /// where `coupling[i]` feeds subsystem `i` into `i + 1` (cyclically).
    pub fn from_parts(decay: &[f64], coupling: &[f64]) -> Result<Self> {
        let n = decay.len();
        if n == 0 {
            return Err(Error::invalid("n", "need at least one subsystem"));
        }
        check_len("couplings", n, coupling.len())?;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = -decay[i];
        }
        for i in 1..n {
            m[(i, i - 1)] = coupling[i - 1];
        }
        m[(0, n - 1)] -= coupling[n - 1];
        Ok(CyclicMatrix(m))
    }

    /// Validates the sign and sparsity pattern of an arbitrary matrix.
    pub fn try_from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::invalid("matrix", "must be square and non-empty"));
        }
        let n = m.rows();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                let ok = if n == 1 || i == j {
                    v < 0.0
                } else if i == j + 1 {
                    v > 0.0
                } else if i == 0 && j == n - 1 {
                    v < 0.0
                } else {
                    v == 0.0
                };
                if !ok {
                    return Err(Error::invalid(
                        "matrix",
                        format!("entry ({i}, {j}) = {v} breaks the cyclic pattern"),
                    ));
                }
            }
        }
        Ok(CyclicMatrix(m))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// `A₀`: diagonal `-a_i`, subdiagonal `b_1..b_{n-1}`, corner `-b_n`.
pub fn build_a0(sys: &LinearCyclicSystem) -> CyclicMatrix {
    CyclicMatrix::from_parts(sys.a(), sys.b()).expect("validated system")
}

/// `Ā₀`: unit diagonal, `γ_2..γ_n` below it and `-γ_1` in the corner.
pub fn normalized_matrix(gains: &GainVector) -> CyclicMatrix {
    let g = gains.as_slice();
    let n = g.len();
    let mut coupling: Vec<f64> = g[1..].to_vec();
    coupling.push(g[0]);
    CyclicMatrix::from_parts(&vec![1.0; n], &coupling).expect("positive gains")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalized {
    pub gains: GainVector,
    pub a0_bar: CyclicMatrix,
}

/// Left-multiplies `A₀` by `diag(1/a_i)`. The resulting gains are
/// `γ_1 = b_n/a_1` and `γ_i = b_{i-1}/a_i`, so `∏γ_i = ∏b_i / ∏a_i`.
pub fn normalize(sys: &LinearCyclicSystem) -> Normalized {
    let (a, b) = (sys.a(), sys.b());
    let n = sys.n();
    let gains: Vec<f64> = (0..n)
        .map(|i| if i == 0 { b[n - 1] / a[0] } else { b[i - 1] / a[i] })
        .collect();
    let gains = GainVector::new(gains).expect("ratios of positive numbers");
    let a0_bar = normalized_matrix(&gains);
    Normalized { gains, a0_bar }
}

/// The decoupled Lyapunov certificate built from the sector gains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalScaling {
    /// Geometric mean of the gains.
    pub r: f64,
    /// Diagonal of Γ, alternating in sign.
    pub gamma_diag: Vec<f64>,
    /// Diagonal of D = Γ⁻² (the Lyapunov weights d_i).
    pub d: Vec<f64>,
    /// Q = -(AᵀD + DA).
    pub q: Matrix,
    pub lambda_min: f64,
}

/// Tolerance (relative to the largest entry of Q) below which a negative
/// λ_min is attributed to rounding rather than to a broken certificate.
const SCALING_ROUNDOFF: f64 = 1e-9;

fn gamma_diagonal(g: &[f64], r: f64) -> Vec<f64> {
    let mut diag = Vec::with_capacity(g.len());
    let mut entry = 1.0;
    diag.push(entry);
    for &gi in &g[1..] {
        entry *= -gi / r;
        diag.push(entry);
    }
    diag
}

fn scaling_with(r: f64, gamma_diag: Vec<f64>, d: Vec<f64>, a: &Matrix, holds: bool) -> Result<DiagonalScaling> {
    let dm = Matrix::from_diagonal(&d);
    let q = (&a.transpose() * &dm).add(&(&dm * a)).scale(-1.0).symmetrized();
    let lambda_min = linalg::lambda_min(&q)?;
    if holds && lambda_min < -SCALING_ROUNDOFF * q.max_abs().max(1.0) {
        return Err(Error::InternalConsistency(format!(
            "secant criterion holds but lambda_min(Q) = {lambda_min:e}"
        )));
    }
    Ok(DiagonalScaling {
        r,
        gamma_diag,
        d,
        q,
        lambda_min,
    })
}

/// r, Γ, D = Γ⁻² and Q = -(Ā₀ᵀD + DĀ₀) for the normalized matrix of `gains`.
pub fn diagonal_scaling(gains: &GainVector) -> Result<DiagonalScaling> {
    let g = gains.as_slice();
    let n = g.len();
    let r = gains.product().powf(1.0 / n as f64);
    let gamma_diag = gamma_diagonal(g, r);
    let d: Vec<f64> = gamma_diag.iter().map(|x| 1.0 / (x * x)).collect();
    let a_bar = normalized_matrix(gains);
    scaling_with(r, gamma_diag, d, a_bar.as_matrix(), secant_satisfied(gains).holds)
}

/// Variant for an unnormalized system: `D = Γ⁻² diag(1/a_i)` certifies `A₀`
/// itself and yields the same Q as the normalized construction.
pub fn diagonal_scaling_for_system(sys: &LinearCyclicSystem) -> Result<DiagonalScaling> {
    let norm = normalize(sys);
    let g = norm.gains.as_slice();
    let r = norm.gains.product().powf(1.0 / g.len() as f64);
    let gamma_diag = gamma_diagonal(g, r);
    let d: Vec<f64> = gamma_diag
        .iter()
        .zip(sys.a())
        .map(|(x, a)| 1.0 / (x * x * a))
        .collect();
    let a0 = build_a0(sys);
    scaling_with(r, gamma_diag, d, a0.as_matrix(), secant_satisfied(&norm.gains).holds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurwitzCheck {
    pub is_hurwitz: bool,
    pub spectral_abscissa: f64,
    pub eigenvalues: Vec<Eigenvalue>,
}

pub fn hurwitz(m: &Matrix) -> Result<HurwitzCheck> {
    let eigenvalues = linalg::eigenvalues(m)?;
    let spectral_abscissa = eigenvalues
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(HurwitzCheck {
        is_hurwitz: spectral_abscissa < 0.0,
        spectral_abscissa,
        eigenvalues,
    })
}

/// Solves `AᵀP + PA = -I` through the n²-dimensional vectorized system.
///
/// Fails unless the solution exists and is positive definite, which is the
/// case exactly when A is Hurwitz.
pub fn solve_lyapunov(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::invalid("a", "matrix must be square"));
    }
    let n = a.rows();
    let dim = n * n;
    let mut k = Matrix::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for l in 0..n {
                // (AᵀP)_ij = Σ_l A_li P_lj ; (PA)_ij = Σ_l P_il A_lj
                k[(row, l * n + j)] += a[(l, i)];
                k[(row, i * n + l)] += a[(l, j)];
            }
            if i == j {
                rhs[row] = -1.0;
            }
        }
    }
    let vec_p = linalg::solve_linear(&k, &rhs).map_err(|_| Error::NoPositiveDefiniteSolution {
        reason: "Lyapunov operator is singular (eigenvalues of A sum to zero)".into(),
    })?;
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = vec_p[i * n + j];
        }
    }
    let p = p.symmetrized();
    let lmin = linalg::lambda_min(&p)?;
    if !(lmin > 0.0) {
        return Err(Error::NoPositiveDefiniteSolution {
            reason: format!("solution is indefinite (lambda_min = {lmin:e}); A is not Hurwitz"),
        });
    }
    Ok(p)
}

/// max-abs entry of `AᵀP + PA + I`.
pub fn lyapunov_residual(a: &Matrix, p: &Matrix) -> f64 {
    let n = a.rows();
    let mut r = (&a.transpose() * p).add(&(p * a));
    for i in 0..n {
        r[(i, i)] += 1.0;
    }
    r.max_abs()
}

/// One block of the cosine-mode decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalBlock {
    pub k: usize,
    /// α_{i,k} = a_i + c_i (kπ)².
    pub alpha: Vec<f64>,
    pub a_k: CyclicMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_k: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_bound: Option<NormBound>,
}

/// `A_k` for `k = 0..=k_max`: the diffusion term shifts the diagonal by
/// `-c_i (kπ)²` and leaves the couplings unchanged.
pub fn modal_matrices(sys: &LinearCyclicSystem, k_max: usize) -> Vec<ModalBlock> {
    (0..=k_max)
        .map(|k| {
            let nu = (k as f64 * PI).powi(2);
            let alpha: Vec<f64> = sys
                .a()
                .iter()
                .zip(sys.c())
                .map(|(a, c)| a + c * nu)
                .collect();
            let a_k = CyclicMatrix::from_parts(&alpha, sys.b()).expect("positive decay");
            ModalBlock {
                k,
                alpha,
                a_k,
                p_k: None,
                norm_bound: None,
            }
        })
        .collect()
}

/// Upper bound on ‖P_k‖ from the perturbation series about the pure
/// diffusion part; inapplicable until the series converges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormBound {
    Applicable(f64),
    Inapplicable,
}

impl NormBound {
    pub fn value(self) -> Option<f64> {
        match self {
            NormBound::Applicable(v) => Some(v),
            NormBound::Inapplicable => None,
        }
    }
}

impl Serialize for NormBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormBound::Applicable(v) => s.serialize_f64(*v),
            NormBound::Inapplicable => s.serialize_str("inapplicable"),
        }
    }
}

/// ‖V₀‖ = 1/(2π² c_min).
pub fn v0_norm(c: &[f64]) -> f64 {
    let c_min = c.iter().copied().fold(f64::INFINITY, f64::min);
    1.0 / (2.0 * PI * PI * c_min)
}

/// `‖V₀‖ / (k² - 2‖A₀‖‖V₀‖)` when `k² > 2‖A₀‖‖V₀‖` (spectral norms).
pub fn pk_norm_bound(a0: &CyclicMatrix, c: &[f64], k: usize) -> Result<NormBound> {
    if k == 0 {
        return Err(Error::invalid("k", "the perturbation bound needs k >= 1"));
    }
    check_len("diffusion coefficients", a0.n(), c.len())?;
    if c.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("c", "diffusion coefficients must be positive"));
    }
    let v0 = v0_norm(c);
    let a_norm = a0.as_matrix().spectral_norm()?;
    let k2 = (k * k) as f64;
    let critical = 2.0 * a_norm * v0;
    Ok(if k2 > critical {
        NormBound::Applicable(v0 / (k2 - critical))
    } else {
        NormBound::Inapplicable
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionStrength {
    /// Equal decay rates: the secant bound is necessary and sufficient.
    NecessaryAndSufficient,
    /// Unequal decay rates: the bound is only sufficient.
    Sufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeEntry {
    pub k: usize,
    pub hurwitz: bool,
    pub abscissa: f64,
    pub p_norm: Option<f64>,
    pub bound: Option<NormBound>,
    pub within_bound: Option<bool>,
    pub residual: Option<f64>,
    #[serde(skip)]
    pub p: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalReport {
    pub gains: GainVector,
    pub product: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub threshold: f64,
    pub holds: bool,
    pub criterion: CriterionStrength,
    pub lambda_min: f64,
    pub per_mode: Vec<ModeEntry>,
    /// max_k ‖P_k‖ over solved modes.
    pub sup_p_norm: Option<f64>,
    pub non_hurwitz_modes: Vec<usize>,
}

impl ModalReport {
    /// Partial sums `s_m = Σ_{k≤m} x_kᵀ P_k x_k` for modal coefficients
    /// `coeffs[k]`; stops at the first unsolved mode.
    pub fn partial_sums(&self, coeffs: &[Vec<f64>]) -> Vec<f64> {
        let mut total = 0.0;
        let mut sums = Vec::new();
        for (entry, x) in self.per_mode.iter().zip(coeffs) {
            let Some(p) = &entry.p else { break };
            let px = p.mul_vec(x);
            total += x.iter().zip(&px).map(|(a, b)| a * b).sum::<f64>();
            sums.push(total);
        }
        sums
    }

    pub fn all_within_bound(&self) -> bool {
        self.per_mode.iter().all(|e| e.within_bound != Some(false))
    }
}

/// Per-mode Hurwitz check, Lyapunov solve and norm bound for `k = 0..=k_max`.
pub fn verify_modal_series(sys: &LinearCyclicSystem, k_max: usize) -> Result<ModalReport> {
    let norm = normalize(sys);
    let secant = secant_satisfied(&norm.gains);
    let scaling = diagonal_scaling(&norm.gains)?;
    let a0 = build_a0(sys);
    let first = sys.a()[0];
    let criterion = if sys.a().iter().all(|&a| a == first) {
        CriterionStrength::NecessaryAndSufficient
    } else {
        CriterionStrength::Sufficient
    };

    let mut per_mode = Vec::with_capacity(k_max + 1);
    let mut non_hurwitz = Vec::new();
    for block in modal_matrices(sys, k_max) {
        let a_k = block.a_k.as_matrix();
        let hw = hurwitz(a_k)?;
        if !hw.is_hurwitz {
            if secant.holds {
                return Err(Error::InternalConsistency(format!(
                    "mode {} is not Hurwitz (abscissa {}) although the secant criterion holds",
                    block.k, hw.spectral_abscissa
                )));
            }
            non_hurwitz.push(block.k);
        }
        let bound = if block.k == 0 {
            None
        } else {
            Some(pk_norm_bound(&a0, sys.c(), block.k)?)
        };
        let (p, p_norm, residual) = if hw.is_hurwitz {
            let p = solve_lyapunov(a_k)?;
            let p_norm = linalg::symmetric_eigenvalues(&p)?
                .last()
                .copied()
                .unwrap_or(0.0);
            let residual = lyapunov_residual(a_k, &p);
            (Some(p), Some(p_norm), Some(residual))
        } else {
            (None, None, None)
        };
        let within_bound = match (p_norm, bound.and_then(NormBound::value)) {
            (Some(pn), Some(b)) => Some(pn <= b * (1.0 + 1e-12)),
            _ => None,
        };
        per_mode.push(ModeEntry {
            k: block.k,
            hurwitz: hw.is_hurwitz,
            abscissa: hw.spectral_abscissa,
            p_norm,
            bound,
            within_bound,
            residual,
            p,
        });
    }
    let sup_p_norm = per_mode
        .iter()
        .filter_map(|e| e.p_norm)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));

    Ok(ModalReport {
        gains: norm.gains,
        product: secant.product,
        threshold: secant.threshold,
        holds: secant.holds,
        criterion,
        lambda_min: scaling.lambda_min,
        per_mode,
        sup_p_norm,
        non_hurwitz_modes: non_hurwitz,
    })
}
