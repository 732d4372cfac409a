use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Absolute tolerance used when an antiderivative falls back to quadrature.
pub const ANTIDERIVATIVE_TOL: f64 = 1e-10;

/// `sgn(x)·min(1, |x|)`.
pub fn sat(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// ∫₀ᵘ sat(v) dv.
fn sat_integral(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.5 * u * u
    } else {
        u.abs() - 0.5
    }
}

/// Piecewise-linear table on strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::invalid("table", "needs at least two points"));
        }
        crate::error::check_len("table ordinates", xs.len(), ys.len())?;
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("table", "abscissae must be strictly increasing"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("table", "entries must be finite"));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn segment(&self, s: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&s) {
            return Err(Error::OutOfTable {
                function: "tabulated",
                at: s,
                lo,
                hi,
            });
        }
        let idx = self.xs.partition_point(|&x| x <= s);
        Ok(idx.clamp(1, self.xs.len() - 1) - 1)
    }

    fn slope(&self, seg: usize) -> f64 {
        (self.ys[seg + 1] - self.ys[seg]) / (self.xs[seg + 1] - self.xs[seg])
    }

    fn eval(&self, s: f64) -> Result<f64> {
        let seg = self.segment(s)?;
        Ok(self.ys[seg] + self.slope(seg) * (s - self.xs[seg]))
    }

    /// ∫_{x₀}^{s} of the interpolant.
    fn integral_from_start(&self, s: f64) -> Result<f64> {
        let seg = self.segment(s)?;
        let mut total = 0.0;
        for k in 0..seg {
            total += 0.5 * (self.ys[k] + self.ys[k + 1]) * (self.xs[k + 1] - self.xs[k]);
        }
        let ys = self.eval(s)?;
        total += 0.5 * (self.ys[seg] + ys) * (s - self.xs[seg]);
        Ok(total)
    }
}

/// A scalar nonlinearity from the catalog.
///
/// The composite variants (`Shifted`, `Translated`, `Scaled`) express a
/// catalog function in deviation coordinates about an equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    /// `slope·s`
    Linear { slope: f64 },
    /// `vmax·s / (km + s)`
    MichaelisMenten { vmax: f64, km: f64 },
    /// `mu / (1 + k·sⁿ)`
    InhibitoryHill { mu: f64, k: f64, n: u32 },
    /// `exp(-alpha·(s - center)) + beta·sat(gain·(s - center))`
    ExpSat {
        alpha: f64,
        beta: f64,
        gain: f64,
        center: f64,
    },
    Constant { value: f64 },
    Tabulated(Table),
    /// `inner(s + center) - inner(center)`
    Shifted { inner: Box<ScalarFn>, center: f64 },
    /// `inner(s + offset)`
    Translated { inner: Box<ScalarFn>, offset: f64 },
    /// `factor·inner(s)`
    Scaled { inner: Box<ScalarFn>, factor: f64 },
}

fn finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

impl ScalarFn {
    pub fn linear(slope: f64) -> Result<Self> {
        Ok(ScalarFn::Linear {
            slope: finite("slope", slope)?,
        })
    }

    pub fn michaelis_menten(vmax: f64, km: f64) -> Result<Self> {
        finite("vmax", vmax)?;
        if !(km > 0.0) || !km.is_finite() {
            return Err(Error::invalid("km", format!("must be positive, got {km}")));
        }
        Ok(ScalarFn::MichaelisMenten { vmax, km })
    }

    pub fn inhibitory_hill(mu: f64, k: f64, n: u32) -> Result<Self> {
        finite("mu", mu)?;
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::invalid("k", format!("must be non-negative, got {k}")));
        }
        if n == 0 {
            return Err(Error::invalid("n", "Hill exponent must be at least 1"));
        }
        Ok(ScalarFn::InhibitoryHill { mu, k, n })
    }

    pub fn exp_sat(alpha: f64, beta: f64, gain: f64, center: f64) -> Result<Self> {
        finite("alpha", alpha)?;
        finite("beta", beta)?;
        finite("center", center)?;
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::invalid("gain", format!("must be positive, got {gain}")));
        }
        Ok(ScalarFn::ExpSat {
            alpha,
            beta,
            gain,
            center,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Ok(ScalarFn::Constant {
            value: finite("value", value)?,
        })
    }

    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Table::new(xs, ys).map(ScalarFn::Tabulated)
    }

    /// Deviation form about `center`: vanishes at zero.
    pub fn shifted(self, center: f64) -> Self {
        if center == 0.0 {
            return self;
        }
        ScalarFn::Shifted {
            inner: Box::new(self),
            center,
        }
    }

    pub fn translated(self, offset: f64) -> Self {
        if offset == 0.0 {
            return self;
        }
        ScalarFn::Translated {
            inner: Box::new(self),
            offset,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        if factor == 1.0 {
            return self;
        }
        ScalarFn::Scaled {
            inner: Box::new(self),
            factor,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ScalarFn::Linear { .. } => "linear",
            ScalarFn::MichaelisMenten { .. } => "michaelis_menten",
            ScalarFn::InhibitoryHill { .. } => "inhibitory_hill",
            ScalarFn::ExpSat { .. } => "exp_sat",
            ScalarFn::Constant { .. } => "constant",
            ScalarFn::Tabulated(_) => "tabulated",
            ScalarFn::Shifted { .. } => "shifted",
            ScalarFn::Translated { .. } => "translated",
            ScalarFn::Scaled { .. } => "scaled",
        }
    }

    /// Open interval on which the function is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ScalarFn::MichaelisMenten { km, .. } => (-km, f64::INFINITY),
            ScalarFn::InhibitoryHill { k, n, .. } if *k > 0.0 && n % 2 == 1 => {
                (-(1.0 / k).powf(1.0 / f64::from(*n)), f64::INFINITY)
            }
            ScalarFn::Tabulated(t) => t.range(),
            ScalarFn::Shifted { inner, center } => {
                let (lo, hi) = inner.domain();
                (lo - center, hi - center)
            }
            ScalarFn::Translated { inner, offset } => {
                let (lo, hi) = inner.domain();
                (lo - offset, hi - offset)
            }
            ScalarFn::Scaled { inner, .. } => inner.domain(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Points where the derivative jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            ScalarFn::ExpSat { gain, center, .. } => vec![center - 1.0 / gain, center + 1.0 / gain],
            ScalarFn::Tabulated(t) => t.xs[1..t.xs.len() - 1].to_vec(),
            ScalarFn::Shifted { inner, center } => {
                inner.kinks().into_iter().map(|x| x - center).collect()
            }
            ScalarFn::Translated { inner, offset } => {
                inner.kinks().into_iter().map(|x| x - offset).collect()
            }
            ScalarFn::Scaled { inner, .. } => inner.kinks(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        match self {
            ScalarFn::Linear { slope } => Ok(slope * s),
            ScalarFn::MichaelisMenten { vmax, km } => {
                mm_guard(*km, s)?;
                Ok(vmax * s / (km + s))
            }
            ScalarFn::InhibitoryHill { mu, k, n } => {
                let denom = hill_denominator(*k, *n, s)?;
                Ok(mu / denom)
            }
            ScalarFn::ExpSat {
                alpha,
                beta,
                gain,
                center,
            } => {
                let u = s - center;
                Ok((-alpha * u).exp() + beta * sat(gain * u))
            }
            ScalarFn::Constant { value } => Ok(*value),
            ScalarFn::Tabulated(t) => t.eval(s),
            ScalarFn::Shifted { inner, center } => Ok(inner.eval(s + center)? - inner.eval(*center)?),
            ScalarFn::Translated { inner, offset } => inner.eval(s + offset),
            ScalarFn::Scaled { inner, factor } => Ok(factor * inner.eval(s)?),
        }
    }

    /// Analytic derivative; at a kink the right-hand branch is used except on
    /// the saturation boundary, where the saturated (zero-slope) branch is.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        match self {
            ScalarFn::Linear { slope } => Ok(*slope),
            ScalarFn::MichaelisMenten { vmax, km } => {
                mm_guard(*km, s)?;
                Ok(vmax * km / ((km + s) * (km + s)))
            }
            ScalarFn::InhibitoryHill { mu, k, n } => {
                let denom = hill_denominator(*k, *n, s)?;
                let nf = f64::from(*n);
                Ok(-mu * k * nf * s.powi(*n as i32 - 1) / (denom * denom))
            }
            ScalarFn::ExpSat {
                alpha,
                beta,
                gain,
                center,
            } => {
                let u = s - center;
                let sat_slope = if (gain * u).abs() < 1.0 { beta * gain } else { 0.0 };
                Ok(-alpha * (-alpha * u).exp() + sat_slope)
            }
            ScalarFn::Constant { .. } => Ok(0.0),
            ScalarFn::Tabulated(t) => {
                let seg = t.segment(s)?;
                Ok(t.slope(seg))
            }
            ScalarFn::Shifted { inner, center } => inner.derivative(s + center),
            ScalarFn::Translated { inner, offset } => inner.derivative(s + offset),
            ScalarFn::Scaled { inner, factor } => Ok(factor * inner.derivative(s)?),
        }
    }

    /// ∫₀ˢ of the function.
    pub fn antiderivative(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match self {
            ScalarFn::Linear { slope } => Ok(0.5 * slope * s * s),
            ScalarFn::MichaelisMenten { vmax, km } => {
                mm_guard(*km, s)?;
                Ok(vmax * (s - km * (s / km).ln_1p()))
            }
            ScalarFn::InhibitoryHill { mu, k, n } => {
                hill_denominator(*k, *n, s)?;
                if *k == 0.0 {
                    return Ok(mu * s);
                }
                match n {
                    1 => Ok(mu / k * (k * s).ln_1p()),
                    2 => Ok(mu / k.sqrt() * (k.sqrt() * s).atan()),
                    _ => adaptive_simpson(|x| self.eval(x), 0.0, s, ANTIDERIVATIVE_TOL),
                }
            }
            ScalarFn::ExpSat {
                alpha,
                beta,
                gain,
                center,
            } => {
                let exp_part = if *alpha == 0.0 {
                    s
                } else {
                    ((alpha * center).exp() - (-alpha * (s - center)).exp()) / alpha
                };
                let sat_part = (sat_integral(gain * (s - center)) - sat_integral(-gain * center)) / gain;
                Ok(exp_part + beta * sat_part)
            }
            ScalarFn::Constant { value } => Ok(value * s),
            ScalarFn::Tabulated(t) => Ok(t.integral_from_start(s)? - t.integral_from_start(0.0)?),
            ScalarFn::Shifted { inner, center } => Ok(inner.antiderivative(s + center)?
                - inner.antiderivative(*center)?
                - s * inner.eval(*center)?),
            ScalarFn::Translated { inner, offset } => {
                Ok(inner.antiderivative(s + offset)? - inner.antiderivative(*offset)?)
            }
            ScalarFn::Scaled { inner, factor } => Ok(factor * inner.antiderivative(s)?),
        }
    }
}

fn mm_guard(km: f64, s: f64) -> Result<()> {
    if km + s <= 0.0 {
        return Err(Error::Domain {
            function: "michaelis_menten",
            at: s,
            pole: -km,
        });
    }
    Ok(())
}

fn hill_denominator(k: f64, n: u32, s: f64) -> Result<f64> {
    let denom = 1.0 + k * s.powi(n as i32);
    if denom <= 0.0 {
        let pole = if k > 0.0 {
            -(1.0 / k).powf(1.0 / f64::from(n))
        } else {
            f64::NAN
        };
        return Err(Error::Domain {
            function: "inhibitory_hill",
            at: s,
            pole,
        });
    }
    Ok(denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample_phi() -> ScalarFn {
        ScalarFn::exp_sat(10.0, 0.1, 25.0, 1.0).unwrap()
    }

    #[test]
    fn exp_sat_at_equilibrium_is_one() {
        assert_eq!(counterexample_phi().eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn exp_sat_slope_at_equilibrium() {
        let d = counterexample_phi().derivative(1.0).unwrap();
        assert!((d + 7.5).abs() < 1e-12);
    }

    #[test]
    fn linear_eval() {
        assert!((ScalarFn::linear(0.4).unwrap().eval(2.0).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn sat_definition() {
        assert_eq!(sat(3.0), 1.0);
        assert_eq!(sat(-2.0), -1.0);
        assert_eq!(sat(0.5), 0.5);
    }

    #[test]
    fn michaelis_menten_pole_is_reported() {
        let f = ScalarFn::michaelis_menten(1.0, 2.0).unwrap();
        match f.eval(-2.0) {
            Err(Error::Domain { pole, .. }) => assert_eq!(pole, -2.0),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn linear_antiderivative() {
        let f = ScalarFn::linear(3.0).unwrap();
        assert!((f.antiderivative(2.0).unwrap() - 6.0).abs() < 1e-15);
        assert_eq!(f.antiderivative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_interpolates_and_integrates() {
        let t = ScalarFn::tabulated(vec![-1.0, 0.0, 2.0], vec![-2.0, 0.0, 1.0]).unwrap();
        assert!((t.eval(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((t.antiderivative(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((t.antiderivative(-1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(t.eval(3.0), Err(Error::OutOfTable { .. })));
    }

    #[test]
    fn shifted_vanishes_at_zero() {
        let f = ScalarFn::michaelis_menten(1.0, 1.0).unwrap().shifted(0.55);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert!((f.derivative(0.0).unwrap() - 1.0 / (1.55f64 * 1.55)).abs() < 1e-15);
    }

    #[test]
    fn hill_quadrature_fallback_matches_closed_forms() {
        // n = 3 has no closed form branch; compare against a composite rule.
        let f = ScalarFn::inhibitory_hill(2.0, 0.5, 3).unwrap();
        let s = 1.3;
        let m = 20_000;
        let h = s / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            let x0 = i as f64 * h;
            let xm = x0 + 0.5 * h;
            acc += h / 6.0
                * (f.eval(x0).unwrap() + 4.0 * f.eval(xm).unwrap() + f.eval(x0 + h).unwrap());
        }
        assert!((f.antiderivative(s).unwrap() - acc).abs() < 1e-9);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ScalarFn::michaelis_menten(1.0, 0.0).is_err());
        assert!(ScalarFn::inhibitory_hill(1.0, -1.0, 1).is_err());
        assert!(ScalarFn::exp_sat(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ScalarFn::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }
}
