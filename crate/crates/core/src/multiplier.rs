//! Spectral multiplier families, smooth cut-offs, and the scale-invariant
//! Hörmander-type norms `sup_t ||eta . delta_t f||` and
//! `sum_n ||eta . delta_{2^n} f||`.
//!
//! Derivatives are exact: every family and cut-off is evaluated on Taylor
//! jets (see [`crate::jet`]).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Highest derivative order served by `derivative_at` and the `W^infinity` norm.
pub const K_MAX: usize = 8;

/// Cut-off below which a smooth-step argument is treated as exactly zero;
/// `exp(-1/u)` is below 1e-200 there.
const FLAT_EDGE: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Constant { c: f64 },
    /// `x^{i alpha}`
    ImaginaryPower { alpha: f64 },
    /// `(1 - x/R)_+^delta`
    BochnerRiesz { delta: f64, radius: f64 },
    /// `exp(-((x - center)/width)^2)`
    GaussianBump { center: f64, width: f64 },
    /// `exp(-t x)`
    Heat { t: f64 },
    /// Smooth indicator: 1 on `[lo, hi]`, 0 outside `[lo - ramp, hi + ramp]`.
    SmoothedIndicator { lo: f64, hi: f64, ramp: f64 },
}

impl Family {
    fn value(&self, y: f64) -> Complex64 {
        match *self {
            Family::Constant { c } => Complex64::new(c, 0.0),
            Family::ImaginaryPower { alpha } => {
                if y > 0.0 {
                    Complex64::from_polar(1.0, alpha * y.ln())
                } else {
                    Complex64::new(1.0, 0.0)
                }
            }
            Family::BochnerRiesz { delta, radius } => {
                let u = 1.0 - y / radius;
                if u > 0.0 {
                    Complex64::new(u.powf(delta), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Family::GaussianBump { center, width } => {
                let u = (y - center) / width;
                Complex64::new((-u * u).exp(), 0.0)
            }
            Family::Heat { t } => Complex64::new((-t * y).exp(), 0.0),
            Family::SmoothedIndicator { lo, hi, ramp } => Complex64::new(
                smooth_step((y - (lo - ramp)) / ramp) * smooth_step((hi + ramp - y) / ramp),
                0.0,
            ),
        }
    }

    fn jet(&self, y: f64, order: usize) -> Jet {
        let var = Jet::variable(y, order);
        match *self {
            Family::Constant { c } => Jet::real(c, order),
            Family::ImaginaryPower { alpha } => {
                if y > 0.0 {
                    var.ln().scale(Complex64::new(0.0, alpha)).exp()
                } else {
                    Jet::real(1.0, order)
                }
            }
            Family::BochnerRiesz { delta, radius } => {
                let u = var.scale(Complex64::new(-1.0 / radius, 0.0)).add_scalar(Complex64::new(1.0, 0.0));
                if u.value().re > 0.0 {
                    u.powc(Complex64::new(delta, 0.0))
                } else {
                    Jet::real(0.0, order)
                }
            }
            Family::GaussianBump { center, width } => {
                let u = var.add_scalar(Complex64::new(-center, 0.0)).scale(Complex64::new(1.0 / width, 0.0));
                (&u * &u).scale(Complex64::new(-1.0, 0.0)).exp()
            }
            Family::Heat { t } => var.scale(Complex64::new(-t, 0.0)).exp(),
            Family::SmoothedIndicator { lo, hi, ramp } => {
                let rise = var
                    .add_scalar(Complex64::new(-(lo - ramp), 0.0))
                    .scale(Complex64::new(1.0 / ramp, 0.0));
                let fall = var
                    .add_scalar(Complex64::new(-(hi + ramp), 0.0))
                    .scale(Complex64::new(-1.0 / ramp, 0.0));
                &smooth_step_jet(&rise) * &smooth_step_jet(&fall)
            }
        }
    }
}

/// A spectral symbol `f` on `[0, infinity)`, possibly dilated: `value_at(x) = family(scale * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multiplier {
    family: Family,
    scale: f64,
}

impl Multiplier {
    pub fn new(family: Family) -> Result<Self> {
        validate(&family)?;
        Ok(Multiplier { family, scale: 1.0 })
    }

    pub fn constant(c: f64) -> Self {
        Multiplier { family: Family::Constant { c }, scale: 1.0 }
    }

    pub fn heat(t: f64) -> Result<Self> {
        Self::new(Family::Heat { t })
    }

    pub fn imaginary_power(alpha: f64) -> Result<Self> {
        Self::new(Family::ImaginaryPower { alpha })
    }

    pub fn bochner_riesz(delta: f64, radius: f64) -> Result<Self> {
        Self::new(Family::BochnerRiesz { delta, radius })
    }

    pub fn gaussian_bump(center: f64, width: f64) -> Result<Self> {
        Self::new(Family::GaussianBump { center, width })
    }

    pub fn smoothed_indicator(lo: f64, hi: f64, ramp: f64) -> Result<Self> {
        Self::new(Family::SmoothedIndicator { lo, hi, ramp })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `Some(c)` when `f` is identically `c`.
    pub fn as_constant(&self) -> Option<f64> {
        match self.family {
            Family::Constant { c } => Some(c),
            _ => None,
        }
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        self.family.value(self.scale * x)
    }

    /// Taylor jet of `x -> f(x)` at `x`, up to `order`.
    pub fn jet_at(&self, x: f64, order: usize) -> Jet {
        self.family.jet(self.scale * x, order).chain_scale(self.scale)
    }

    pub fn derivative_at(&self, k: usize, x: f64) -> Result<Complex64> {
        if k > K_MAX {
            return Err(Error::param("k", format!("derivative order {k} exceeds K_MAX = {K_MAX}")));
        }
        if !(x > 0.0) {
            return Err(Error::param("x", "derivatives are taken at x > 0"));
        }
        Ok(self.jet_at(x, k).derivative(k))
    }

    /// `delta_t f : x -> f(t x)`.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", format!("dilation factor must be positive, got {t}")));
        }
        Ok(Multiplier { family: self.family, scale: self.scale * t })
    }

    /// Closed interval outside of which `f` vanishes, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self.family {
            Family::BochnerRiesz { radius, .. } => Some((0.0, radius / self.scale)),
            Family::SmoothedIndicator { lo, hi, ramp } => {
                Some(((lo - ramp).max(0.0) / self.scale, (hi + ramp) / self.scale))
            }
            _ => None,
        }
    }

    /// `f(0+)`; `None` for imaginary powers, which oscillate at the origin.
    pub fn limit_at_zero(&self) -> Option<Complex64> {
        match self.family {
            Family::ImaginaryPower { .. } => None,
            _ => Some(self.family.value(0.0)),
        }
    }

    /// `|f(0+)|`; imaginary powers have constant modulus 1.
    pub fn abs_limit_at_zero(&self) -> f64 {
        self.limit_at_zero().map_or(1.0, |v| v.norm())
    }

    /// `c * f`, available for the families closed under scaling.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match self.family {
            Family::Constant { c: c0 } => Ok(Multiplier { family: Family::Constant { c: c * c0 }, scale: self.scale }),
            _ => Err(Error::Unsupported(format!("scalar multiple of {self}"))),
        }
    }
}

fn validate(f: &Family) -> Result<()> {
    let finite = |name: &'static str, v: f64| {
        if v.is_finite() { Ok(()) } else { Err(Error::param(name, "must be finite")) }
    };
    match *f {
        Family::Constant { c } => finite("c", c),
        Family::ImaginaryPower { alpha } => finite("alpha", alpha),
        Family::BochnerRiesz { delta, radius } => {
            finite("delta", delta)?;
            if delta < 0.0 {
                return Err(Error::param("delta", "Bochner-Riesz order must be >= 0"));
            }
            if !(radius > 0.0) || !radius.is_finite() {
                return Err(Error::param("R", "radius must be positive"));
            }
            Ok(())
        }
        Family::GaussianBump { center, width } => {
            finite("center", center)?;
            if !(width > 0.0) || !width.is_finite() {
                return Err(Error::param("width", "width must be positive"));
            }
            Ok(())
        }
        Family::Heat { t } => {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::param("t", "heat time must be positive"));
            }
            Ok(())
        }
        Family::SmoothedIndicator { lo, hi, ramp } => {
            finite("lo", lo)?;
            finite("hi", hi)?;
            if !(ramp > 0.0) || !ramp.is_finite() {
                return Err(Error::param("ramp", "ramp must be positive"));
            }
            if !(lo <= hi) {
                return Err(Error::param("lo", "need lo <= hi"));
            }
            Ok(())
        }
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Constant { c } => write!(f, "const:c={c}")?,
            Family::ImaginaryPower { alpha } => write!(f, "power:alpha={alpha}")?,
            Family::BochnerRiesz { delta, radius } => write!(f, "briesz:delta={delta},R={radius}")?,
            Family::GaussianBump { center, width } => write!(f, "gauss:center={center},width={width}")?,
            Family::Heat { t } => write!(f, "heat:t={t}")?,
            Family::SmoothedIndicator { lo, hi, ramp } => write!(f, "sind:lo={lo},hi={hi},ramp={ramp}")?,
        }
        if self.scale != 1.0 {
            write!(f, " (dilated by {})", self.scale)?;
        }
        Ok(())
    }
}

impl FromStr for Multiplier {
    type Err = Error;

    /// Mini-grammar `family:key=value,...`; every key of the family is required
    /// and unknown or repeated keys are rejected.
    fn from_str(spec: &str) -> Result<Self> {
        let perr = |reason: String| Error::Parse { spec: spec.to_string(), reason };
        let (name, rest) = spec
            .split_once(':')
            .ok_or_else(|| perr("expected `family:key=value,...`".into()))?;
        let keys: &[&str] = match name {
            "const" => &["c"],
            "power" => &["alpha"],
            "briesz" => &["delta", "R"],
            "gauss" => &["center", "width"],
            "heat" => &["t"],
            "sind" => &["lo", "hi", "ramp"],
            other => return Err(perr(format!("unknown family `{other}`"))),
        };
        let mut values = vec![None; keys.len()];
        for item in rest.split(',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| perr(format!("expected key=value, got `{item}`")))?;
            let slot = keys
                .iter()
                .position(|&name| name == k)
                .ok_or_else(|| perr(format!("unknown key `{k}` for `{name}`")))?;
            if values[slot].is_some() {
                return Err(perr(format!("repeated key `{k}`")));
            }
            let parsed: f64 = v.parse().map_err(|_| perr(format!("`{v}` is not a number")))?;
            values[slot] = Some(parsed);
        }
        let mut vals = Vec::with_capacity(keys.len());
        for (k, v) in keys.iter().zip(values) {
            vals.push(v.ok_or_else(|| perr(format!("missing key `{k}`")))?);
        }
        let family = match name {
            "const" => Family::Constant { c: vals[0] },
            "power" => Family::ImaginaryPower { alpha: vals[0] },
            "briesz" => Family::BochnerRiesz { delta: vals[0], radius: vals[1] },
            "gauss" => Family::GaussianBump { center: vals[0], width: vals[1] },
            "heat" => Family::Heat { t: vals[0] },
            _ => Family::SmoothedIndicator { lo: vals[0], hi: vals[1], ramp: vals[2] },
        };
        Multiplier::new(family)
    }
}

/// `psi(u) / (psi(u) + psi(1 - u))` with `psi(u) = exp(-1/u)`; 0 below 0, 1 above 1.
pub fn smooth_step(u: f64) -> f64 {
    let psi = |v: f64| if v > FLAT_EDGE { (-1.0 / v).exp() } else { 0.0 };
    let a = psi(u);
    let b = psi(1.0 - u);
    if a + b == 0.0 {
        return if u > 0.5 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

fn psi_jet(u: &Jet) -> Jet {
    if u.value().re > FLAT_EDGE {
        (-&u.recip()).exp()
    } else {
        Jet::real(0.0, u.order())
    }
}

fn smooth_step_jet(u: &Jet) -> Jet {
    let order = u.order();
    let v = u.value().re;
    if v <= FLAT_EDGE {
        return Jet::real(0.0, order);
    }
    if v >= 1.0 - FLAT_EDGE {
        return Jet::real(1.0, order);
    }
    let a = psi_jet(u);
    let one_minus = (-u).add_scalar(Complex64::new(1.0, 0.0));
    let b = psi_jet(&one_minus);
    &a * &(&a + &b).recip()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutOffShape {
    /// `exp(1 - 1/(1 - v^2))`, `v = (x - center)/half_width`; peak value 1.
    Bump { center: f64, half_width: f64 },
    /// Smooth rise on `[rise_start, rise_end]`, 1 in between, fall on `[fall_start, fall_end]`.
    Plateau { rise_start: f64, rise_end: f64, fall_start: f64, fall_end: f64 },
}

/// Fixed smooth compactly supported cut-off `eta` on `[0, infinity)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutOff {
    shape: CutOffShape,
}

impl CutOff {
    pub fn bump(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(center - half_width >= 0.0) {
            return Err(Error::param("half_width", "bump must be supported in [0, infinity)"));
        }
        Ok(CutOff { shape: CutOffShape::Bump { center, half_width } })
    }

    pub fn plateau(rise_start: f64, rise_end: f64, fall_start: f64, fall_end: f64) -> Result<Self> {
        if !(0.0 <= rise_start && rise_start < rise_end && rise_end <= fall_start && fall_start < fall_end) {
            return Err(Error::param("plateau", "need 0 <= rise_start < rise_end <= fall_start < fall_end"));
        }
        Ok(CutOff { shape: CutOffShape::Plateau { rise_start, rise_end, fall_start, fall_end } })
    }

    /// Bump supported on `[0.5, 2]`.
    pub fn standard() -> Self {
        CutOff { shape: CutOffShape::Bump { center: 1.25, half_width: 0.75 } }
    }

    /// Equal to 1 on `[1, 2]`, supported on `[0.5, 4]`.
    pub fn standard_plateau() -> Self {
        CutOff {
            shape: CutOffShape::Plateau { rise_start: 0.5, rise_end: 1.0, fall_start: 2.0, fall_end: 4.0 },
        }
    }

    pub fn shape(&self) -> &CutOffShape {
        &self.shape
    }

    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            CutOffShape::Bump { center, half_width } => (center - half_width, center + half_width),
            CutOffShape::Plateau { rise_start, fall_end, .. } => (rise_start, fall_end),
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        match self.shape {
            CutOffShape::Bump { center, half_width } => {
                let v = (x - center) / half_width;
                let gap = 1.0 - v * v;
                if gap > FLAT_EDGE { (1.0 - 1.0 / gap).exp() } else { 0.0 }
            }
            CutOffShape::Plateau { rise_start, rise_end, fall_start, fall_end } => {
                smooth_step((x - rise_start) / (rise_end - rise_start))
                    * smooth_step((fall_end - x) / (fall_end - fall_start))
            }
        }
    }

    pub fn jet_at(&self, x: f64, order: usize) -> Jet {
        let var = Jet::variable(x, order);
        match self.shape {
            CutOffShape::Bump { center, half_width } => {
                let v = var.add_scalar(Complex64::new(-center, 0.0)).scale(Complex64::new(1.0 / half_width, 0.0));
                let gap = (-&(&v * &v)).add_scalar(Complex64::new(1.0, 0.0));
                if gap.value().re > FLAT_EDGE {
                    (-&gap.recip()).add_scalar(Complex64::new(1.0, 0.0)).exp()
                } else {
                    Jet::real(0.0, order)
                }
            }
            CutOffShape::Plateau { rise_start, rise_end, fall_start, fall_end } => {
                let rise = var
                    .add_scalar(Complex64::new(-rise_start, 0.0))
                    .scale(Complex64::new(1.0 / (rise_end - rise_start), 0.0));
                let fall = var
                    .add_scalar(Complex64::new(-fall_end, 0.0))
                    .scale(Complex64::new(-1.0 / (fall_end - fall_start), 0.0));
                &smooth_step_jet(&rise) * &smooth_step_jet(&fall)
            }
        }
    }

    /// Sampled check that `eta == 1` on `(1, 2)`.
    pub fn plateau_one_on_1_2(&self) -> bool {
        (1..200).all(|k| {
            let x = 1.0 + k as f64 / 200.0;
            (self.value_at(x) - 1.0).abs() <= 1e-15
        })
    }

    /// Localization grid over `[0, support end + 1/2]`, step `2^-9`.
    pub fn default_grid(&self) -> UniformGrid1 {
        let (_, hi) = self.support();
        UniformGrid1::covering(0.0, hi + 0.5, 1.0 / 512.0)
    }
}

/// Uniform 1-D grid `origin + k * step`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid1 {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformGrid1 {
    pub fn new(origin: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || count < 2 {
            return Err(Error::param("grid", "need step > 0 and count >= 2"));
        }
        Ok(UniformGrid1 { origin, step, count })
    }

    /// Smallest grid from `lo` with the given step whose last point reaches `hi`.
    pub fn covering(lo: f64, hi: f64, step: f64) -> Self {
        let count = ((hi - lo) / step).ceil() as usize + 1;
        UniformGrid1 { origin: lo, step, count: count.max(2) }
    }

    pub fn point(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: UniformGrid1,
    pub samples: Vec<Complex64>,
}

impl SampledFunction {
    pub fn from_fn(grid: UniformGrid1, f: impl Fn(f64) -> Complex64) -> Self {
        SampledFunction { grid, samples: grid.points().map(f).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledFunction { grid: self.grid, samples: self.samples.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::param("grid", "sampled functions live on different grids"));
        }
        Ok(SampledFunction {
            grid: self.grid,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Samples of `g, g', ..., g^{(order)}` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSamples {
    pub grid: UniformGrid1,
    pub derivs: Vec<Vec<Complex64>>,
}

impl DerivativeSamples {
    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }
}

fn check_covers(eta: &CutOff, grid: &UniformGrid1) -> Result<()> {
    let (lo, hi) = eta.support();
    if grid.origin > lo || grid.end() < hi {
        return Err(Error::GridCoverage { lo: grid.origin, hi: grid.end(), need_lo: lo, need_hi: hi });
    }
    Ok(())
}

/// Samples of `x -> eta(x) f(t x)`.
pub fn localize(f: &Multiplier, eta: &CutOff, t: f64, grid: &UniformGrid1) -> Result<SampledFunction> {
    check_covers(eta, grid)?;
    let g = f.dilate(t)?;
    Ok(SampledFunction::from_fn(*grid, |x| {
        let e = eta.value_at(x);
        if e == 0.0 { Complex64::new(0.0, 0.0) } else { g.value_at(x) * e }
    }))
}

/// Exact derivatives of `x -> eta(x) f(t x)` (product rule on jets).
pub fn localize_derivatives(
    f: &Multiplier,
    eta: &CutOff,
    t: f64,
    grid: &UniformGrid1,
    order: usize,
) -> Result<DerivativeSamples> {
    if order > K_MAX {
        return Err(Error::param("order", format!("exceeds K_MAX = {K_MAX}")));
    }
    check_covers(eta, grid)?;
    let g = f.dilate(t)?;
    let mut derivs = vec![Vec::with_capacity(grid.count); order + 1];
    for x in grid.points() {
        let ej = eta.jet_at(x, order);
        if ej.coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
            for d in derivs.iter_mut() {
                d.push(Complex64::new(0.0, 0.0));
            }
            continue;
        }
        let prod = &ej * &g.jet_at(x, order);
        for (k, d) in derivs.iter_mut().enumerate() {
            d.push(prod.derivative(k));
        }
    }
    Ok(DerivativeSamples { grid: *grid, derivs })
}

/// End modulus above which the zero-extended samples are considered non-decaying.
pub const DECAY_LIMIT: f64 = 1e-12;

/// Bessel-potential norm `(int (1+tau^2)^s |g^(tau)|^2 dtau)^{1/2}` with the unitary
/// Fourier transform, from the DFT of the zero-padded samples (padding factor >= 4).
pub fn sobolev_norm_2(g: &SampledFunction, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::param("s", "smoothness must be >= 0"));
    }
    let n = g.samples.len();
    let ends = g.samples[0].norm().max(g.samples[n - 1].norm());
    if ends >= DECAY_LIMIT {
        return Err(Error::NonDecaying { observed: ends });
    }
    let m = (4 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(&g.samples);
    let fft = fft_forward(m);
    fft.process(&mut buf);
    let h = g.grid.step;
    let dtau = 2.0 * std::f64::consts::PI / (m as f64 * h);
    // |g^(tau_k)|^2 dtau = h^2/(2 pi) |DFT_k|^2 dtau = (h / m) |DFT_k|^2
    let mut acc = 0.0;
    for (k, v) in buf.iter().enumerate() {
        let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        let tau = kk * dtau;
        let w = if s == 0.0 { 1.0 } else { (1.0 + tau * tau).powf(s) };
        acc += w * v.norm_sqr();
    }
    Ok((acc * h / m as f64).sqrt())
}

fn fft_forward(m: usize) -> Arc<dyn rustfft::Fft<f64>> {
    FftPlanner::new().plan_fft_forward(m)
}

/// `max_{k <= s} sup |g^{(k)}|` over the grid.
pub fn sobolev_norm_inf(g: &DerivativeSamples, s: usize) -> Result<f64> {
    if s > K_MAX {
        return Err(Error::param("s", format!("W^infinity order {s} exceeds K_MAX = {K_MAX}")));
    }
    if s > g.order() {
        return Err(Error::param("s", format!("only {} derivatives were sampled", g.order())));
    }
    Ok(g.derivs[..=s]
        .iter()
        .flat_map(|d| d.iter().map(|v| v.norm()))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Bessel-potential `W_s^2`.
    Two,
    /// `W_s^infinity`, integer `s`.
    Inf,
}

/// Geometric grid `lo * ratio^k <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGrid {
    pub lo: f64,
    pub hi: f64,
    pub ratio: f64,
}

impl GeometricGrid {
    pub fn new(lo: f64, hi: f64, ratio: f64) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && ratio > 1.0) {
            return Err(Error::param("t_grid", "need 0 < lo <= hi and ratio > 1"));
        }
        Ok(GeometricGrid { lo, hi, ratio })
    }

    /// `[2^-10, 2^10]` with ratio `2^{1/8}`.
    pub fn standard() -> Self {
        GeometricGrid { lo: 2f64.powi(-10), hi: 2f64.powi(10), ratio: 2f64.powf(0.125) }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi / self.lo).ln() / self.ratio.ln() + 1e-9).floor() as i32;
        (0..=n).map(|k| self.lo * self.ratio.powi(k)).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        GeometricGrid { lo: self.lo * c, hi: self.hi * c, ratio: self.ratio }
    }

    pub fn refined(&self) -> Self {
        GeometricGrid { lo: self.lo, hi: self.hi, ratio: self.ratio.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HormanderNorm {
    pub value: f64,
    pub arg_sup: f64,
    /// `(t, ||eta . delta_t f||)` over the sweep.
    pub profile: Vec<(f64, f64)>,
}

/// `sup_{t in t_grid} ||eta . delta_t f||` in `W_s^2` or `W_s^infinity`.
pub fn hormander_norm(f: &Multiplier, eta: &CutOff, s: f64, q: NormKind, t_grid: &GeometricGrid) -> Result<HormanderNorm> {
    hormander_norm_on(f, eta, s, q, t_grid, &eta.default_grid())
}

pub fn hormander_norm_on(
    f: &Multiplier,
    eta: &CutOff,
    s: f64,
    q: NormKind,
    t_grid: &GeometricGrid,
    grid: &UniformGrid1,
) -> Result<HormanderNorm> {
    if t_grid.lo > 1e-3 * (1.0 + 1e-12) || t_grid.hi < 1e3 * (1.0 - 1e-12) {
        return Err(Error::param("t_grid", "the dilation sweep must span [1e-3, 1e3]"));
    }
    let order = match q {
        NormKind::Inf => {
            if s.fract() != 0.0 || s < 0.0 {
                return Err(Error::param("s", "W^infinity is only defined for integer s >= 0"));
            }
            Some(s as usize)
        }
        NormKind::Two => None,
    };
    let mut profile = Vec::new();
    for t in t_grid.points() {
        let v = match order {
            Some(k) => sobolev_norm_inf(&localize_derivatives(f, eta, t, grid, k)?, k)?,
            None => sobolev_norm_2(&localize(f, eta, t, grid)?, s)?,
        };
        profile.push((t, v));
    }
    let (arg_sup, value) = profile
        .iter()
        .copied()
        .fold((t_grid.lo, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok(HormanderNorm { value, arg_sup, profile })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicSum {
    pub value: f64,
    /// Sum of the two window-edge terms.
    pub tail: f64,
    pub terms: Vec<(i32, f64)>,
}

pub const DYADIC_WINDOW: i32 = 40;

/// `sum_{|n| <= 40} ||eta . delta_{2^n} f||_{W_s^2}` for a cut-off equal to 1 on `(1, 2)`.
pub fn hormander_sum_norm(f: &Multiplier, eta: &CutOff, s: f64) -> Result<DyadicSum> {
    if !eta.plateau_one_on_1_2() {
        return Err(Error::param("eta", "the dyadic sum needs a cut-off equal to 1 on (1, 2)"));
    }
    let grid = eta.default_grid();
    let mut terms = Vec::with_capacity(2 * DYADIC_WINDOW as usize + 1);
    for n in -DYADIC_WINDOW..=DYADIC_WINDOW {
        let g = localize(f, eta, 2f64.powi(n), &grid)?;
        terms.push((n, sobolev_norm_2(&g, s)?));
    }
    let value: f64 = terms.iter().map(|t| t.1).sum();
    let tail = terms[0].1 + terms[terms.len() - 1].1;
    if tail > 1e-8 * value {
        return Err(Error::DivergentTail { tail, tolerance: 1e-8 * value });
    }
    Ok(DyadicSum { value, tail, terms })
}
