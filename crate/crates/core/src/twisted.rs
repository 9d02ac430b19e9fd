//! The twisted Laplacian on `R^2` (`d = 1`): its Weyl pair
//! `Q~ = -1/2 Q_2 - P_1`, `P~ = 1/2 Q_1 - P_2`, the heat semigroup through
//! the explicit twisted-convolution kernel, and the Gaussian kernel bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hermite_model::{GridFunction, GridSpec, SpectrumConvention};
use crate::multiplier::Multiplier;
use crate::specfun::{PhasePoint, SpecFun};
use crate::weyl_quantization::{peetre_symbol, PhaseGrid, PhaseVector, Quantized, WeylAction};

/// Kernel values below this fraction of the peak are dropped from the band.
const KERNEL_CUTOFF: f64 = 1e-17;

/// Largest admissible `a^_t(R, 0) / a^_t(0, 0)` at the box half-width `R`.
pub const KERNEL_TAIL_LIMIT: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Closed forms of the oscillator heat symbol `a_t` and its transform `a^_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatSymbol {
    t: f64,
    lambda: f64,
}

impl HeatSymbol {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", format!("heat time must be positive, got {t}")));
        }
        let e = (-t).exp();
        Ok(HeatSymbol { t, lambda: -(-t).exp_m1() / (1.0 + e) })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `(1 - e^{-t}) / (1 + e^{-t})`
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(1 - e^{-t})^{-1}`, the per-dimension peak of `a^_t`.
    pub fn amplitude(&self) -> f64 {
        1.0 / -(-self.t).exp_m1()
    }

    /// Gaussian rate of `a^_t`: `1/4 coth(t/2)`.
    pub fn rate(&self) -> f64 {
        0.25 / (0.5 * self.t).tanh()
    }

    /// `(1 + lambda)^d exp(-lambda |p|^2)`
    pub fn a(&self, p: &PhasePoint) -> f64 {
        (1.0 + self.lambda).powi(p.dim() as i32) * (-self.lambda * p.norm_sqr()).exp()
    }

    /// `(1 - e^{-t})^{-d} exp(-1/4 coth(t/2) |p|^2)`
    pub fn a_hat(&self, p: &PhasePoint) -> f64 {
        self.a_hat_radial(p.dim(), p.norm_sqr())
    }

    pub fn a_hat_radial(&self, d: usize, norm_sqr: f64) -> f64 {
        self.amplitude().powi(d as i32) * (-self.rate() * norm_sqr).exp()
    }

    /// `(1 + lambda)^{-d} a_t(p) = exp(-lambda |p|^2)`
    pub fn normalized(&self, p: &PhasePoint) -> f64 {
        self.a(p) / (1.0 + self.lambda).powi(p.dim() as i32)
    }
}

/// Partial sum against closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCheck {
    pub partial_sum: f64,
    pub closed_form: f64,
    pub gap: f64,
}

/// `sum_{n < n_terms} e^{-nt} L_n(p)` against `a^_t(p)`.
pub fn laguerre_series_check(t: f64, p: &PhasePoint, n_terms: usize) -> Result<SeriesCheck> {
    if !(t >= 0.05) {
        return Err(Error::param("t", "the series check needs t >= 0.05"));
    }
    let heat = HeatSymbol::new(t)?;
    let coeffs: Vec<f64> = (0..n_terms).map(|n| (-(n as f64) * t).exp()).collect();
    let partial_sum = SpecFun::default().laguerre_phase_series(&coeffs, p.dim(), p.norm_sqr())?;
    let closed_form = heat.a_hat(p);
    Ok(SeriesCheck { partial_sum, closed_form, gap: (partial_sum - closed_form).abs() })
}

/// `sum_{n < n_terms} a^n / (a+1)^{n+1} L_n(r)` against `exp(-a r)`.
/// The series converges for `a > -1/2` only.
pub fn generating_function_check(a: f64, r: f64, n_terms: usize) -> Result<SeriesCheck> {
    if !(a > -0.5) {
        return Err(Error::param("a", "the Laguerre generating series converges only for a > -1/2"));
    }
    if !(r >= 0.0) {
        return Err(Error::param("r", "need r >= 0"));
    }
    let table = SpecFun::default().laguerre_table(n_terms.saturating_sub(1), 0.0, r)?;
    let ratio = a / (a + 1.0);
    let mut w = 1.0 / (a + 1.0);
    let mut partial_sum = 0.0;
    for l in table.iter().take(n_terms) {
        partial_sum += w * l;
        w *= ratio;
    }
    let closed_form = (-a * r).exp();
    Ok(SeriesCheck { partial_sum, closed_form, gap: (partial_sum - closed_form).abs() })
}

/// Sup error of the discrete transform `(2 pi)^{-1} sum a_t(x, xi) e^{-i(ux + v xi)} h^2`
/// against `a^_t(u, v)` over the frequency lattice (`d = 1`).
pub fn fourier_pair_check(t: f64, half_count: usize, step: f64) -> Result<f64> {
    let heat = HeatSymbol::new(t)?;
    let n = 2 * half_count;
    let edge = heat.a(&PhasePoint::one_dim(half_count as f64 * step, 0.0));
    if edge >= KERNEL_TAIL_LIMIT * 1e-6 {
        return Err(Error::KernelTail { tail: edge, limit: KERNEL_TAIL_LIMIT * 1e-6 });
    }
    let coord = |j: usize| (j as f64 - half_count as f64) * step;
    let mut data: Vec<Complex64> = (0..n * n)
        .map(|k| Complex64::new(heat.a(&PhasePoint::one_dim(coord(k / n), coord(k % n))), 0.0))
        .collect();
    fft_2d(&mut data, n);
    let dw = 2.0 * PI / (n as f64 * step);
    let freq = |k: usize| if k < n / 2 { k as f64 } else { k as f64 - n as f64 } * dw;
    let x0 = coord(0);
    let mut err: f64 = 0.0;
    for k in 0..n * n {
        let (u, v) = (freq(k / n), freq(k % n));
        // the grid starts at x0, not 0
        let shift = Complex64::from_polar(1.0, -(u + v) * x0);
        let got = data[k] * shift * step * step / (2.0 * PI);
        let want = heat.a_hat(&PhasePoint::one_dim(u, v));
        err = err.max((got - Complex64::new(want, 0.0)).norm());
    }
    Ok(err)
}

fn fft_2d(data: &mut [Complex64], n: usize) {
    let fft = FftPlanner::new().plan_fft_forward(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![ZERO; n];
    for c in 0..n {
        for r in 0..n {
            col[r] = data[r * n + c];
        }
        fft.process(&mut col);
        for r in 0..n {
            data[r * n + c] = col[r];
        }
    }
}

/// Samples `u(x, y)` on a box in `R^2`; axis 0 is `x`, axis 1 is `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedGridFunction(pub GridFunction);

impl TwistedGridFunction {
    pub fn new(g: GridFunction) -> Result<Self> {
        if g.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: g.dim() });
        }
        Ok(TwistedGridFunction(g))
    }

    /// Default box for the kernel quadrature: `R = 10, h = 0.1`.
    pub fn desk_spec() -> GridSpec {
        GridSpec::isotropic(2, 10.0, 0.1).expect("valid desk grid")
    }

    pub fn sample(spec: &GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        TwistedGridFunction::new(spec.sample(|p| f(p[0], p[1])))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.0.spec
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.0.samples
    }

    pub fn sub(&self, other: &Self) -> Self {
        TwistedGridFunction(self.0.sub(&other.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }
}

impl PhaseVector for TwistedGridFunction {
    fn zeros_like(&self) -> Self {
        TwistedGridFunction(GridFunction::zeros(&self.0.spec))
    }

    fn axpy(&mut self, a: Complex64, x: &Self) {
        self.0.axpy(a, &x.0)
    }

    fn inner(&self, other: &Self) -> Complex64 {
        self.0.inner(&other.0)
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn sup_distance(&self, other: &Self) -> f64 {
        self.0.sub(&other.0).sup_norm()
    }
}

/// `W(a, b) = exp(i(a Q~ + b P~))`: `W(a, b) u(x, y) = e^{i(b x - a y)/2} u(x - a, y - b)`,
/// zero outside the box. Shifts must be grid multiples.
#[derive(Debug, Clone)]
pub struct TwistedAction {
    pub spec: GridSpec,
}

impl TwistedAction {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: spec.dim() });
        }
        Ok(TwistedAction { spec })
    }

    fn grid_shift(&self, axis: usize, shift: f64) -> Result<i64> {
        let h = self.spec.axis(axis).step;
        let r = shift / h;
        let k = r.round();
        if (r - k).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::OffGridShift { shift, step: h });
        }
        Ok(k as i64)
    }
}

impl WeylAction for TwistedAction {
    type Vector = TwistedGridFunction;

    fn dim(&self) -> usize {
        1
    }

    fn accumulate(
        &self,
        p: &PhasePoint,
        c: Complex64,
        v: &TwistedGridFunction,
        out: &mut TwistedGridFunction,
    ) -> Result<()> {
        if p.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: p.dim() });
        }
        let (a, b) = (p.x()[0], p.xi()[0]);
        let (sa, sb) = (self.grid_shift(0, a)?, self.grid_shift(1, b)?);
        let (ax, ay) = (self.spec.axis(0), self.spec.axis(1));
        let (n0, n1) = (ax.len() as i64, ay.len() as i64);
        let px: Vec<Complex64> = (0..n0).map(|i| c * Complex64::from_polar(1.0, 0.5 * b * ax.coord(i as usize))).collect();
        let py: Vec<Complex64> = (0..n1).map(|j| Complex64::from_polar(1.0, -0.5 * a * ay.coord(j as usize))).collect();
        let (j_lo, j_hi) = (sb.max(0), (n1 + sb).min(n1));
        for i in sa.max(0)..(n0 + sa).min(n0) {
            let src = ((i - sa) * n1) as usize;
            let dst = (i * n1) as usize;
            let row_phase = px[i as usize];
            for j in j_lo..j_hi {
                out.0.samples[dst + j as usize] += row_phase * py[j as usize] * v.0.samples[src + (j - sb) as usize];
            }
        }
        Ok(())
    }

    fn spatial_extent(&self, _v: &TwistedGridFunction) -> f64 {
        self.spec.extent()
    }
}

/// `exp(i(x Q~ + xi P~)) u` for `d = 1`.
pub fn twisted_weyl_op(x: f64, xi: f64, u: &TwistedGridFunction) -> Result<TwistedGridFunction> {
    TwistedAction::new(u.spec().clone())?.apply(&PhasePoint::one_dim(x, xi), u)
}

/// Sup distance between `(W(t e_1, 0) u - u) / t` and `i Q~_1 u = -i y u / 2 - d_x u`,
/// with `d_x` by second-order central differences (interior points only).
pub fn twisted_generator_defect(u: &TwistedGridFunction, t: f64) -> Result<f64> {
    let moved = twisted_weyl_op(t, 0.0, u)?;
    let spec = u.spec();
    let (ax, ay) = (spec.axis(0), spec.axis(1));
    let (n0, n1) = (ax.len(), ay.len());
    let s = u.samples();
    let mut defect: f64 = 0.0;
    for i in 1..n0 - 1 {
        for j in 0..n1 {
            let k = i * n1 + j;
            let dx = (s[k + n1] - s[k - n1]) / (2.0 * ax.step);
            let gen = Complex64::new(0.0, -0.5 * ay.coord(j)) * s[k] - dx;
            let diff = (moved.samples()[k] - s[k]) / t;
            defect = defect.max((diff - gen).norm());
        }
    }
    Ok(defect)
}

fn check_kernel_tail(heat: &HeatSymbol, spec: &GridSpec) -> Result<()> {
    let r = spec.axes().iter().map(|a| a.extent()).fold(f64::INFINITY, f64::min);
    let tail = (-heat.rate() * r * r).exp();
    if tail >= KERNEL_TAIL_LIMIT {
        return Err(Error::KernelTail { tail, limit: KERNEL_TAIL_LIMIT });
    }
    Ok(())
}

/// `exp(-rate (k h)^2)` for `k = 0..` until it drops below the cutoff.
fn band_table(rate: f64, h: f64, max_len: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..max_len {
        let v = (-rate * (k as f64 * h).powi(2)).exp();
        if v < KERNEL_CUTOFF {
            break;
        }
        out.push(v);
    }
    out
}

struct KernelSetup {
    n0: usize,
    n1: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    /// `e^{i xi_k y_j / 2}`, `[k][j]`
    mod_y: Vec<Complex64>,
    /// `e^{-i eta_l x_i / 2}`, `[i][l]`
    mod_x: Vec<Complex64>,
    prefactor: f64,
}

impl KernelSetup {
    fn new(t: f64, u: &TwistedGridFunction) -> Result<Self> {
        let heat = HeatSymbol::new(t)?;
        u.0.check_decay()?;
        check_kernel_tail(&heat, u.spec())?;
        let (ax, ay) = (*u.spec().axis(0), *u.spec().axis(1));
        let (n0, n1) = (ax.len(), ay.len());
        let mut mod_y = vec![ZERO; n0 * n1];
        let mut mod_x = vec![ZERO; n0 * n1];
        for i in 0..n0 {
            for j in 0..n1 {
                mod_y[i * n1 + j] = Complex64::from_polar(1.0, 0.5 * ax.coord(i) * ay.coord(j));
                mod_x[i * n1 + j] = Complex64::from_polar(1.0, -0.5 * ay.coord(j) * ax.coord(i));
            }
        }
        Ok(KernelSetup {
            n0,
            n1,
            gx: band_table(heat.rate(), ax.step, n0),
            gy: band_table(heat.rate(), ay.step, n1),
            mod_y,
            mod_x,
            prefactor: heat.amplitude() * ax.step * ay.step / (2.0 * PI),
        })
    }
}

/// `exp(-t(L~ - 1/2)) u (x, y) = (2 pi)^{-1} int a^_t(x - xi, y - eta) e^{i(xi y - eta x)/2} u(xi, eta)`
/// by the direct band-limited double sum over the grid.
pub fn heat_twisted(t: f64, u: &TwistedGridFunction) -> Result<TwistedGridFunction> {
    let ks = KernelSetup::new(t, u)?;
    let (n0, n1) = (ks.n0, ks.n1);
    let (bx, by) = (ks.gx.len() as i64 - 1, ks.gy.len() as i64 - 1);
    let s = u.samples();
    let rows: Vec<Vec<Complex64>> = (0..n0)
        .into_par_iter()
        .map(|i| {
            let k_lo = (i as i64 - bx).max(0) as usize;
            let k_hi = (i as i64 + bx).min(n0 as i64 - 1) as usize;
            // U[k][l] = e^{-i eta_l x_i / 2} u[k][l] for the rows in the band
            let modulated: Vec<Vec<Complex64>> = (k_lo..=k_hi)
                .map(|k| (0..n1).map(|l| ks.mod_x[i * n1 + l] * s[k * n1 + l]).collect())
                .collect();
            (0..n1)
                .map(|j| {
                    let l_lo = (j as i64 - by).max(0) as usize;
                    let l_hi = (j as i64 + by).min(n1 as i64 - 1) as usize;
                    let mut acc = ZERO;
                    for (kk, urow) in modulated.iter().enumerate() {
                        let k = k_lo + kk;
                        let mut inner = ZERO;
                        for (l, uv) in urow.iter().enumerate().take(l_hi + 1).skip(l_lo) {
                            inner += uv * ks.gy[j.abs_diff(l)];
                        }
                        acc += inner * ks.mod_y[k * n1 + j] * ks.gx[i.abs_diff(k)];
                    }
                    acc * ks.prefactor
                })
                .collect()
        })
        .collect();
    TwistedGridFunction::from_rows(u.spec(), rows)
}

impl TwistedGridFunction {
    fn from_rows(spec: &GridSpec, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        TwistedGridFunction::new(GridFunction::from_samples(spec, rows.into_iter().flatten().collect())?)
    }
}

/// Same sum as [`heat_twisted`], with the inner `eta`-sums done as FFT convolutions:
/// `sum_l g(y_j - eta_l) e^{-i eta_l x/2} u_l = e^{-i y_j x/2} (g e^{i . x/2} * u)_j`.
pub fn heat_twisted_fast(t: f64, u: &TwistedGridFunction) -> Result<TwistedGridFunction> {
    let ks = KernelSetup::new(t, u)?;
    let (n0, n1) = (ks.n0, ks.n1);
    let bx = ks.gx.len() as i64 - 1;
    let by = ks.gy.len() - 1;
    let m = (n1 + by + 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let ay = *u.spec().axis(1);
    let ax = *u.spec().axis(0);
    let s = u.samples();
    let spectra: Vec<Vec<Complex64>> = (0..n0)
        .map(|k| {
            let mut row = vec![ZERO; m];
            row[..n1].copy_from_slice(&s[k * n1..(k + 1) * n1]);
            fwd.process(&mut row);
            row
        })
        .collect();
    let scale = 1.0 / m as f64;
    let rows: Vec<Vec<Complex64>> = (0..n0)
        .into_par_iter()
        .map(|i| {
            let x = ax.coord(i);
            // modulated kernel g(delta) e^{i delta h x / 2}, circularly placed
            let mut ker = vec![ZERO; m];
            for (d, g) in ks.gy.iter().enumerate() {
                let ph = 0.5 * d as f64 * ay.step * x;
                ker[d] = Complex64::from_polar(*g, ph);
                if d > 0 {
                    ker[m - d] = Complex64::from_polar(*g, -ph);
                }
            }
            fwd.process(&mut ker);
            let k_lo = (i as i64 - bx).max(0) as usize;
            let k_hi = (i as i64 + bx).min(n0 as i64 - 1) as usize;
            let mut out = vec![ZERO; n1];
            let mut buf = vec![ZERO; m];
            for k in k_lo..=k_hi {
                for ((b, a), c) in buf.iter_mut().zip(&spectra[k]).zip(&ker) {
                    *b = a * c;
                }
                inv.process(&mut buf);
                let gk = ks.gx[i.abs_diff(k)] * scale;
                for j in 0..n1 {
                    out[j] += buf[j] * ks.mod_y[k * n1 + j] * gk;
                }
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o *= ks.mod_x[i * n1 + j] * ks.prefactor;
            }
            out
        })
        .collect();
    TwistedGridFunction::from_rows(u.spec(), rows)
}

/// Integral kernel `K_t(z; w) = (2 pi)^{-1} a^_t(z - w) e^{i(xi y - eta x)/2}`, `z = (x, y)`, `w = (xi, eta)`.
pub fn twisted_kernel(t: f64, z: (f64, f64), w: (f64, f64)) -> Result<Complex64> {
    let heat = HeatSymbol::new(t)?;
    let amp = heat.a_hat(&PhasePoint::one_dim(z.0 - w.0, z.1 - w.1)) / (2.0 * PI);
    Ok(Complex64::from_polar(amp, 0.5 * (w.0 * z.1 - w.1 * z.0)))
}

/// `f(L~) u` as the quantization of the Peetre symbol of `f` under the twisted action.
/// A constant `f` is applied exactly, since its Laguerre series does not converge.
pub fn apply_twisted_multiplier(
    f: &Multiplier,
    u: &TwistedGridFunction,
    n_terms: usize,
    convention: SpectrumConvention,
    grid: PhaseGrid,
) -> Result<Quantized<TwistedGridFunction>> {
    if let Some(c) = f.as_constant() {
        let mut value = u.zeros_like();
        value.axpy(Complex64::new(c, 0.0), u);
        return Ok(Quantized { value, error_estimate: 0.0 });
    }
    u.0.check_decay()?;
    let action = TwistedAction::new(u.spec().clone())?;
    let g = peetre_symbol(f, 1, n_terms, convention, grid)?;
    action.quantize(&g.symbol, u)
}

/// Fitted Gaussian bound `|K_t| <= C t^{-d} exp(-c r^2 / t)` and its validation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBoundReport {
    pub big_c: f64,
    pub small_c: f64,
    /// Largest `|K_t| - bound` over the validation set (<= 0 means no violation).
    pub max_violation: f64,
    pub violations: usize,
    pub checked: usize,
}

/// Fits `(C, c)` on the sampled `(t, |z - w|)` pairs, then validates on a refined set
/// (log-midpoints in `t`, midpoints in offset) inside the same ranges.
pub fn gaussian_bound_check(t_grid: &[f64], offsets: &[f64], d: usize) -> Result<GaussianBoundReport> {
    if t_grid.is_empty() || offsets.is_empty() {
        return Err(Error::param("t_grid", "need at least one time and one offset"));
    }
    if t_grid.iter().any(|&t| !(t > 0.0 && t <= 4.0)) {
        return Err(Error::param("t_grid", "times must lie in (0, 4]"));
    }
    let dd = d as i32;
    let modulus = |t: f64, r: f64| -> Result<f64> {
        let heat = HeatSymbol::new(t)?;
        Ok(heat.a_hat_radial(d, r * r) / (2.0 * PI).powi(dd))
    };
    // the exponent of |K_t| is rate_t r^2 and t * rate_t increases with t
    let small_c = t_grid
        .iter()
        .map(|&t| Ok(t * HeatSymbol::new(t)?.rate()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let mut big_c: f64 = 0.0;
    for &t in t_grid {
        for &r in offsets {
            big_c = big_c.max(t.powi(dd) * modulus(t, r)? * (small_c * r * r / t).exp());
        }
    }
    let mut ts: Vec<f64> = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    let mut rs: Vec<f64> = offsets.to_vec();
    rs.sort_by(f64::total_cmp);
    let refine = |v: &[f64], mid: &dyn Fn(f64, f64) -> f64| {
        let mut out = v.to_vec();
        out.extend(v.windows(2).map(|w| mid(w[0], w[1])));
        out
    };
    let t_check = refine(&ts, &|a, b| (a * b).sqrt());
    let r_check = refine(&rs, &|a, b| 0.5 * (a + b));
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0;
    for &t in &t_check {
        for &r in &r_check {
            let k = modulus(t, r)?;
            let bound = big_c * t.powi(-dd) * (-small_c * r * r / t).exp();
            let excess = k - bound;
            max_violation = max_violation.max(excess);
            if excess > 1e-12 * bound {
                violations += 1;
            }
        }
    }
    Ok(GaussianBoundReport { big_c, small_c, max_violation, violations, checked: t_check.len() * r_check.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite_model::Axis;
    use crate::weyl_quantization::weyl_relation_defect;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Random combination of `h_m(x) h_n(y)`, `m, n <= 3`.
    fn random_input(spec: &GridSpec, seed: u64) -> TwistedGridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = GridFunction::zeros(spec);
        for m in 0..=3 {
            for n in 0..=3 {
                let w = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                acc.axpy(w, &spec.hermite(&[m, n]).unwrap());
            }
        }
        TwistedGridFunction::new(acc).unwrap()
    }

    fn small_spec() -> GridSpec {
        GridSpec::isotropic(2, 10.0, 0.125).unwrap()
    }

    #[test]
    fn heat_symbol_examples() {
        let h = HeatSymbol::new(3f64.ln()).unwrap();
        assert!((h.lambda() - 0.5).abs() < 1e-15);
        let p = PhasePoint::one_dim(0.7, -1.1);
        assert!((h.a(&p) - 1.5 * (-0.5 * p.norm_sqr()).exp()).abs() < 1e-15);
        let p2 = PhasePoint::new(vec![0.3, 0.1], vec![-0.2, 0.5]).unwrap();
        assert!((h.a(&p2) - 2.25 * (-0.5 * p2.norm_sqr()).exp()).abs() < 1e-15);
        let big = HeatSymbol::new(60.0).unwrap();
        assert!((big.a(&p) - 2.0 * (-p.norm_sqr()).exp()).abs() < 1e-14);
        for t in [1e-3, 0.05, 1.0, 4.0, 30.0] {
            let l = HeatSymbol::new(t).unwrap().lambda();
            assert!(l > 0.0 && l < 1.0);
        }
        assert!(HeatSymbol::new(1e-8).unwrap().lambda() < 1e-8);
        assert!(1.0 - HeatSymbol::new(40.0).unwrap().lambda() < 1e-15);
        assert!(HeatSymbol::new(0.0).is_err());
        assert!(HeatSymbol::new(-1.0).is_err());
    }

    #[test]
    fn lambda_identities() {
        for t in [0.1, 0.5, 2.0] {
            let (h, h2) = (HeatSymbol::new(t).unwrap(), HeatSymbol::new(2.0 * t).unwrap());
            for (x, xi) in [(0.0, 0.0), (0.5, -1.5), (2.0, 3.0)] {
                let p = PhasePoint::one_dim(x, xi);
                let r2 = p.norm_sqr();
                assert!((h2.a(&p) / (1.0 + h2.lambda()) - (-h2.lambda() * r2).exp()).abs() < 1e-14);
                let diff = h2.normalized(&p) - h.normalized(&p);
                let closed = (-h2.lambda() * r2).exp() - (-h.lambda() * r2).exp();
                assert!((diff - closed).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn series_checks() {
        let s = laguerre_series_check(1.0, &PhasePoint::origin(1), 30).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((s.partial_sum - (1.0 - (-30.0f64).exp()) / (1.0 - e1)).abs() < 1e-14);
        assert!(s.gap <= (-30.0f64).exp() / (1.0 - e1) * (1.0 + 1e-9));
        let mut worst: f64 = 0.0;
        for i in -8..=8 {
            for j in -8..=8 {
                let p = PhasePoint::one_dim(0.5 * i as f64, 0.5 * j as f64);
                worst = worst.max(laguerre_series_check(0.5, &p, 200).unwrap().gap);
            }
        }
        assert!(worst <= 1e-6, "{worst}");
        // (1 - e^{-t}) sum e^{-nt} L_n(r) = exp(-r/(e^t - 1)) is the a = 1/(e^t - 1) case
        let t: f64 = 0.7;
        let g = generating_function_check(1.0 / t.exp_m1(), 2.0, 300).unwrap();
        assert!(g.gap <= 1e-8);
        let one = generating_function_check(1.0, 0.0, 201).unwrap();
        assert!((one.partial_sum - 1.0).abs() < 1e-12);
        assert!(laguerre_series_check(0.01, &PhasePoint::origin(1), 10).is_err());
        assert!(generating_function_check(-0.6, 1.0, 10).is_err());
    }

    #[test]
    fn fourier_pair() {
        for t in [0.25, 0.5, 1.0] {
            let err = fourier_pair_check(t, 128, 0.2).unwrap();
            assert!(err <= 1e-8, "t={t}: {err}");
        }
    }

    #[test]
    fn twisted_action_examples() {
        let spec = small_spec();
        let u = random_input(&spec, 1);
        let id = twisted_weyl_op(0.0, 0.0, &u).unwrap();
        assert_eq!(id, u);
        assert!(matches!(twisted_weyl_op(0.05, 0.0, &u), Err(Error::OffGridShift { .. })));
        // the BCH-composed form equals the product of the one-parameter groups
        let (a, b) = (0.625, -1.0);
        let w = twisted_weyl_op(a, b, &u).unwrap();
        let split = twisted_weyl_op(a, 0.0, &twisted_weyl_op(0.0, b, &u).unwrap()).unwrap();
        let mut scaled = split.zeros_like();
        scaled.axpy(Complex64::from_polar(1.0, 0.5 * a * b), &split);
        assert!(w.sub(&scaled).sup_norm() < 1e-12);
    }

    #[test]
    fn twisted_generator_is_linear_in_t() {
        // fine x-step so that t = k h is an exact shift
        let h = 1e-3;
        let spec = GridSpec::new(vec![Axis::with_half_count(8000, h).unwrap(), Axis::new(8.0, 0.25).unwrap()]).unwrap();
        let u = TwistedGridFunction::sample(&spec, |x, y| c((-0.5 * (x - 0.3) * (x - 0.3) - 0.5 * y * y).exp())).unwrap();
        let d4 = twisted_generator_defect(&u, 4e-3).unwrap();
        let d2 = twisted_generator_defect(&u, 2e-3).unwrap();
        let d1 = twisted_generator_defect(&u, 1e-3).unwrap();
        assert!(d1 <= 2.0 * (1e-3 + h * h), "{d1}");
        assert!((d4 / d2 - 2.0).abs() < 0.1 && (d2 / d1 - 2.0).abs() < 0.1, "{d4} {d2} {d1}");
    }

    #[test]
    fn twisted_weyl_relation() {
        for s in [0.5, 1.0, PI / 3.0] {
            for t in [0.5, 1.0, PI / 3.0] {
                let hx = s / (s / 0.1).round();
                let hy = t / (t / 0.1).round();
                let spec = GridSpec::new(vec![
                    Axis::with_half_count((10.0 / hx).ceil() as usize, hx).unwrap(),
                    Axis::with_half_count((10.0 / hy).ceil() as usize, hy).unwrap(),
                ])
                .unwrap();
                let action = TwistedAction::new(spec.clone()).unwrap();
                let u = TwistedGridFunction::new(spec.hermite(&[1, 2]).unwrap()).unwrap();
                let defect = weyl_relation_defect(&action, s, t, &u).unwrap();
                assert!(defect <= 1e-10, "s={s} t={t}: {defect}");
            }
        }
    }

    #[test]
    fn heat_small_time_and_kernel_tail() {
        // the kernel at t = 1e-3 has width ~0.03, so the grid must be fine
        let spec = GridSpec::isotropic(2, 10.0, 0.04).unwrap();
        for width in [4.0, 2.0] {
            let u = TwistedGridFunction::sample(&spec, |x, y| c((-(x * x + y * y) / width).exp())).unwrap();
            let out = heat_twisted(1e-3, &u).unwrap();
            assert!(out.sub(&u).sup_norm() < 1e-3, "width {width}: {}", out.sub(&u).sup_norm());
        }
        // a^_t / a^_t(0) >= e^{-R^2/4} for every t, which is above 1e-10 at R = 8
        let short = GridSpec::isotropic(2, 8.0, 0.2).unwrap();
        let v = TwistedGridFunction::new(short.hermite(&[0, 0]).unwrap()).unwrap();
        assert!(matches!(heat_twisted(30.0, &v), Err(Error::KernelTail { .. })));
    }

    #[test]
    fn heat_routes_agree_and_semigroup() {
        let spec = small_spec();
        let u = random_input(&spec, 7);
        let a = heat_twisted(0.25, &u).unwrap();
        let b = heat_twisted_fast(0.25, &u).unwrap();
        assert!(a.sub(&b).sup_norm() < 1e-12 * a.sup_norm().max(1.0));
        let twice = heat_twisted(0.25, &a).unwrap();
        let once = heat_twisted(0.5, &u).unwrap();
        assert!(twice.sub(&once).norm() <= 1e-6 * once.norm());
        // commutation of different times
        let st = heat_twisted(0.3, &heat_twisted(0.7, &u).unwrap()).unwrap();
        let ts = heat_twisted(0.7, &heat_twisted(0.3, &u).unwrap()).unwrap();
        assert!(st.sub(&ts).norm() <= 1e-8 * st.norm());
        // exp(-t L~) is a contraction; the normalized semigroup grows at most by e^{t/2}
        for t in [0.25, 1.0] {
            let out = heat_twisted(t, &u).unwrap();
            assert!(out.norm() <= (0.5 * t).exp() * u.norm() * (1.0 + 1e-8));
        }
    }

    #[test]
    fn heat_route_matches_quantization() {
        let spec = small_spec();
        let u = random_input(&spec, 3);
        let grid = PhaseGrid::new(1, 10.0, 0.125).unwrap();
        let via_symbol = apply_twisted_multiplier(&Multiplier::heat(0.5).unwrap(), &u, 200, SpectrumConvention::Shifted, grid).unwrap();
        let kernel = heat_twisted(0.5, &u).unwrap();
        assert!(via_symbol.value.sub(&kernel).sup_norm() < 1e-3);
        let zero = apply_twisted_multiplier(&Multiplier::constant(0.0), &u, 50, SpectrumConvention::Shifted, grid).unwrap();
        assert_eq!(zero.value.sup_norm(), 0.0);
    }

    #[test]
    fn bottom_projection_is_idempotent() {
        // the bottom eigenspace is {F(x + iy) e^{-|z|^2/4} : F entire}
        let spec = GridSpec::isotropic(2, 11.0, 0.125).unwrap();
        let gauss = |x: f64, y: f64| (-(x * x + y * y) / 4.0).exp();
        let bottom = TwistedGridFunction::sample(&spec, |x, y| Complex64::new(1.0 + x, y) * gauss(x, y)).unwrap();
        let higher = TwistedGridFunction::sample(&spec, |x, y| Complex64::new(x, -y) * gauss(x, y)).unwrap();
        let mut u = bottom.clone();
        u.axpy(Complex64::new(0.5, 0.5), &higher);
        let grid = PhaseGrid::new(1, 11.0, 0.125).unwrap();
        // isolates mu_0 = 0 of the shifted spectrum
        let f = Multiplier::smoothed_indicator(0.0, 0.2, 0.3).unwrap();
        let conv = SpectrumConvention::Shifted;
        let once = apply_twisted_multiplier(&f, &u, 10, conv, grid).unwrap().value;
        assert!(once.sub(&bottom).sup_norm() < 1e-3);
        let twice = apply_twisted_multiplier(&f, &once, 10, conv, grid).unwrap().value;
        assert!(twice.sub(&once).sup_norm() < 1e-3);
    }

    #[test]
    fn kernel_properties() {
        let t = 0.4;
        // modulus depends on z - w only
        let diff = (0.7, -0.3);
        let mut spread: f64 = 0.0;
        let base = twisted_kernel(t, diff, (0.0, 0.0)).unwrap().norm();
        for (a, b) in [(1.0, 2.0), (-3.0, 0.5), (4.0, -4.0)] {
            let k = twisted_kernel(t, (a + diff.0, b + diff.1), (a, b)).unwrap().norm();
            spread = spread.max((k - base).abs());
        }
        assert!(spread < 1e-15);
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let v = twisted_kernel(t, (0.15 * k as f64, 0.0), (0.0, 0.0)).unwrap().norm();
            assert!(v <= prev);
            prev = v;
        }
        let scaled: Vec<f64> = [0.05, 0.1, 0.2, 0.4]
            .iter()
            .map(|&t| (t * twisted_kernel(t, (0.0, 0.0), (0.0, 0.0)).unwrap().norm()).ln())
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi - lo < 0.5);
    }

    #[test]
    fn gaussian_bound_fit() {
        let ts = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0];
        let rs: Vec<f64> = (0..=24).map(|k| 0.25 * k as f64).collect();
        let rep = gaussian_bound_check(&ts, &rs, 1).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.max_violation <= 0.0 + 1e-12 * rep.big_c);
        assert!(rep.small_c > 0.0 && rep.big_c.is_finite());
        assert!(gaussian_bound_check(&[5.0], &rs, 1).is_err());
    }
}
