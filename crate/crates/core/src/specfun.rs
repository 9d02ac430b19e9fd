//! Normalized Hermite functions, generalized Laguerre polynomials and the
//! phase-space Laguerre functions `L_n(x, xi) = L_n^{(d-1)}(|(x,xi)|^2/2) exp(-|(x,xi)|^2/4)`.
//!
//! All recurrences run on rescaled mantissas with a separately tracked log
//! scale, so the Gaussian factor never underflows before the polynomial part
//! has been accumulated.

use crate::error::{Error, Result};

pub const DEFAULT_N_MAX: usize = 512;

/// `pi^{-1/4}`, the value of `h_0(0)`.
pub const PI_POW_MINUS_QUARTER: f64 = 0.751_125_544_464_942_5;

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BY: f64 = 1e-150;
const LN_RESCALE: f64 = 345.387_763_949_107; // 150 ln 10

/// Point `(x, xi)` of phase space `R^d x R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    x: Vec<f64>,
    xi: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::param("x", "phase point needs d >= 1"));
        }
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: xi.len() });
        }
        Ok(PhasePoint { x, xi })
    }

    pub fn one_dim(x: f64, xi: f64) -> Self {
        PhasePoint { x: vec![x], xi: vec![xi] }
    }

    pub fn origin(d: usize) -> Self {
        PhasePoint { x: vec![0.0; d.max(1)], xi: vec![0.0; d.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// `|x|^2 + |xi|^2`
    pub fn norm_sqr(&self) -> f64 {
        self.x.iter().chain(&self.xi).map(|v| v * v).sum()
    }
}

/// Special-function evaluator with a configurable degree limit.
#[derive(Debug, Clone, Copy)]
pub struct SpecFun {
    pub n_max: usize,
}

impl Default for SpecFun {
    fn default() -> Self {
        SpecFun { n_max: DEFAULT_N_MAX }
    }
}

impl SpecFun {
    pub fn with_n_max(n_max: usize) -> Self {
        SpecFun { n_max }
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::DegreeTooLarge { n, n_max: self.n_max });
        }
        Ok(())
    }

    /// `h_n(x)`, the L^2(R)-normalized Hermite function.
    pub fn hermite(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.hermite_table(n, x)?[n])
    }

    /// `[h_0(x), ..., h_n(x)]` via the normalized three-term recurrence.
    pub fn hermite_table(&self, n: usize, x: f64) -> Result<Vec<f64>> {
        self.check_degree(n)?;
        let mut out = Vec::with_capacity(n + 1);
        // true value = mantissa * exp(log_scale)
        let mut log_scale = -0.5 * x * x;
        let mut prev = 0.0_f64;
        let mut cur = PI_POW_MINUS_QUARTER;
        out.push(descale(cur, log_scale));
        for k in 0..n {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_ABOVE {
                cur *= RESCALE_BY;
                prev *= RESCALE_BY;
                log_scale += LN_RESCALE;
            }
            out.push(descale(cur, log_scale));
        }
        Ok(out)
    }

    /// Tensor-product Hermite function `h_{n_1}(x_1) ... h_{n_d}(x_d)`.
    pub fn hermite_multi(&self, n: &[usize], x: &[f64]) -> Result<f64> {
        if n.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: n.len(), found: x.len() });
        }
        n.iter().zip(x).try_fold(1.0, |acc, (&nk, &xk)| Ok(acc * self.hermite(nk, xk)?))
    }

    /// `L_n^{(alpha)}(r)`.
    pub fn laguerre(&self, n: usize, alpha: f64, r: f64) -> Result<f64> {
        Ok(*self.laguerre_table(n, alpha, r)?.last().expect("table has n+1 entries"))
    }

    /// `[L_0^{(alpha)}(r), ..., L_n^{(alpha)}(r)]`.
    pub fn laguerre_table(&self, n: usize, alpha: f64, r: f64) -> Result<Vec<f64>> {
        self.check_degree(n)?;
        check_alpha(alpha)?;
        let mut out = Vec::with_capacity(n + 1);
        let mut prev = 0.0;
        let mut cur = 1.0;
        out.push(cur);
        for k in 0..n {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0 + alpha - r) * cur - (kf + alpha) * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
            out.push(cur);
        }
        Ok(out)
    }

    /// Phase-space Laguerre function of type `d-1` at `p`.
    pub fn laguerre_phase(&self, n: usize, p: &PhasePoint) -> Result<f64> {
        Ok(self.laguerre_phase_table(n, p.dim(), p.norm_sqr())?[n])
    }

    /// `[L_0(p), ..., L_n(p)]` for a point with `|p|^2 = norm_sqr` in dimension `d`.
    pub fn laguerre_phase_table(&self, n: usize, d: usize, norm_sqr: f64) -> Result<Vec<f64>> {
        self.check_degree(n)?;
        let alpha = d as f64 - 1.0;
        let r = 0.5 * norm_sqr;
        let mut out = Vec::with_capacity(n + 1);
        let mut log_scale = -0.5 * r;
        let mut prev = 0.0_f64;
        let mut cur = 1.0_f64;
        out.push(descale(cur, log_scale));
        for k in 0..n {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0 + alpha - r) * cur - (kf + alpha) * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_ABOVE {
                cur *= RESCALE_BY;
                prev *= RESCALE_BY;
                log_scale += LN_RESCALE;
            }
            out.push(descale(cur, log_scale));
        }
        Ok(out)
    }

    /// `sum_{n < coeffs.len()} coeffs[n] * L_n(p)` for `|p|^2 = norm_sqr`,
    /// accumulated in the rescaled representation.
    pub fn laguerre_phase_series(&self, coeffs: &[f64], d: usize, norm_sqr: f64) -> Result<f64> {
        if coeffs.is_empty() {
            return Ok(0.0);
        }
        self.check_degree(coeffs.len() - 1)?;
        let alpha = d as f64 - 1.0;
        let r = 0.5 * norm_sqr;
        let mut log_scale = -0.5 * r;
        let mut prev = 0.0_f64;
        let mut cur = 1.0_f64;
        let mut sum = coeffs[0];
        for (k, &c) in coeffs.iter().enumerate().skip(1) {
            let kf = (k - 1) as f64;
            let next = ((2.0 * kf + 1.0 + alpha - r) * cur - (kf + alpha) * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_ABOVE {
                cur *= RESCALE_BY;
                prev *= RESCALE_BY;
                sum *= RESCALE_BY;
                log_scale += LN_RESCALE;
            }
            sum += c * cur;
        }
        Ok(descale(sum, log_scale))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) {
        return Err(Error::param("alpha", format!("Laguerre type must exceed -1, got {alpha}")));
    }
    Ok(())
}

fn descale(mantissa: f64, log_scale: f64) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    mantissa.signum() * (mantissa.abs().ln() + log_scale).exp()
}

/// `h_n(x)` with the default degree limit.
pub fn hermite_fn(n: usize, x: f64) -> Result<f64> {
    SpecFun::default().hermite(n, x)
}

/// `L_n^{(alpha)}(r)` with the default degree limit.
pub fn laguerre_poly(n: usize, alpha: f64, r: f64) -> Result<f64> {
    SpecFun::default().laguerre(n, alpha, r)
}

/// Phase-space Laguerre function with the default degree limit.
pub fn laguerre_phase_fn(n: usize, p: &PhasePoint) -> Result<f64> {
    SpecFun::default().laguerre_phase(n, p)
}

/// Binomial coefficient `C(n + alpha, n)` for real `alpha`.
pub fn binomial_shifted(n: usize, alpha: f64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * (k as f64 + alpha) / k as f64)
}
