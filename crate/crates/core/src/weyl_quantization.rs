//! Weyl quantization `(2 pi)^{-d} int int g(x, xi) exp(i(x A + xi B)) dx dxi`
//! by trapezoidal phase-space quadrature, generic over the representation
//! `(A, B)`. Peetre's Laguerre series supplies the symbol of `f(L)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermite_model::{GridFunction, GridSpec, SpectrumConvention};
use crate::multiplier::Multiplier;
use crate::specfun::{binomial_shifted, PhasePoint, SpecFun};

/// Symbol modulus allowed on the phase-grid boundary.
pub const SYMBOL_BOUNDARY_LIMIT: f64 = 1e-10;

/// Tail bound above which a truncated Laguerre series is rejected.
pub const PEETRE_TAIL_LIMIT: f64 = 1e-8;

/// Symbol values below this fraction of the peak are skipped by the quadrature.
const NEGLIGIBLE: f64 = 1e-18;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Isotropic lattice on `R^d x R^d`: every coordinate is `k * step`, `|k| <= half_count`.
/// Flat order is `(x_1, .., x_d, xi_1, .., xi_d)`, last coordinate fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub dim: usize,
    pub half_count: usize,
    pub step: f64,
}

impl PhaseGrid {
    pub fn new(dim: usize, extent: f64, step: f64) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::param("dim", "phase grids support d in {1, 2}"));
        }
        if !(step > 0.0) || !(extent > 0.0) {
            return Err(Error::param("step", "phase grid needs positive extent and step"));
        }
        let ratio = extent / step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::param("extent", format!("extent {extent} is not a multiple of step {step}")));
        }
        Ok(PhaseGrid { dim, half_count: ratio.round() as usize, step })
    }

    /// Default for `d = 1`: extent 12, step 0.05.
    pub fn desk() -> Self {
        PhaseGrid { dim: 1, half_count: 240, step: 0.05 }
    }

    pub fn extent(&self) -> f64 {
        self.half_count as f64 * self.step
    }

    fn side(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(2 * self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed lattice indices of flat point `k`.
    pub fn indices(&self, mut k: usize) -> Vec<i64> {
        let side = self.side();
        let mut out = vec![0i64; 2 * self.dim];
        for slot in out.iter_mut().rev() {
            *slot = (k % side) as i64 - self.half_count as i64;
            k /= side;
        }
        out
    }

    pub fn point(&self, k: usize) -> PhasePoint {
        let idx = self.indices(k);
        let c: Vec<f64> = idx.iter().map(|&i| i as f64 * self.step).collect();
        PhasePoint::new(c[..self.dim].to_vec(), c[self.dim..].to_vec()).expect("matching halves")
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.indices(k).iter().any(|i| i.unsigned_abs() as usize == self.half_count)
    }

    /// Cell volume `step^{2d}`.
    pub fn cell(&self) -> f64 {
        self.step.powi(2 * self.dim as i32)
    }
}

/// Samples of a phase-space symbol, decaying at the grid boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylSymbol {
    pub grid: PhaseGrid,
    pub values: Vec<Complex64>,
}

impl WeylSymbol {
    pub fn from_values(grid: PhaseGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        let s = WeylSymbol { grid, values };
        s.check_boundary()?;
        Ok(s)
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&PhasePoint) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        WeylSymbol::from_values(grid, values)
    }

    /// Radial symbol `g(|p|^2)`, evaluated once per distinct lattice radius.
    pub fn from_radial(grid: PhaseGrid, g: impl Fn(f64) -> Result<Complex64>) -> Result<Self> {
        let mut cache: HashMap<u64, Complex64> = HashMap::new();
        let mut values = Vec::with_capacity(grid.len());
        let h2 = grid.step * grid.step;
        for k in 0..grid.len() {
            let key: u64 = grid.indices(k).iter().map(|&i| (i * i) as u64).sum();
            let v = match cache.get(&key) {
                Some(v) => *v,
                None => {
                    let v = g(key as f64 * h2)?;
                    cache.insert(key, v);
                    v
                }
            };
            values.push(v);
        }
        WeylSymbol::from_values(grid, values)
    }

    pub fn zero(grid: PhaseGrid) -> Self {
        WeylSymbol { grid, values: vec![ZERO; grid.len()] }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn boundary_max(&self) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.grid.is_boundary(k))
            .map(|k| self.values[k].norm())
            .fold(0.0, f64::max)
    }

    fn check_boundary(&self) -> Result<()> {
        let observed = self.boundary_max();
        if observed >= SYMBOL_BOUNDARY_LIMIT {
            return Err(Error::BoundaryDecay { observed, limit: SYMBOL_BOUNDARY_LIMIT });
        }
        Ok(())
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::param("grid", "symbols live on different phase grids"));
        }
        Ok(WeylSymbol {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
        })
    }
}

/// Truncated Peetre series with its tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PeetreSymbol {
    pub symbol: WeylSymbol,
    pub coefficients: Vec<Complex64>,
    /// `sum_{n_terms <= n < 2 n_terms} |f(mu_n)| max |L_n|`.
    pub tail: f64,
}

/// Coefficients `f(mu_n)`, `n < n_terms`, and the tail bound of the omitted terms.
pub fn peetre_coefficients(
    f: &Multiplier,
    d: usize,
    n_terms: usize,
    convention: SpectrumConvention,
) -> (Vec<Complex64>, f64) {
    let coeffs = (0..n_terms).map(|n| f.value_at(convention.eigenvalue(n, d))).collect();
    // max |L_n| over phase space is its value at the origin, C(n + d - 1, n)
    let tail = (n_terms..2 * n_terms.max(1))
        .map(|n| f.value_at(convention.eigenvalue(n, d)).norm() * binomial_shifted(n, d as f64 - 1.0))
        .sum();
    (coeffs, tail)
}

/// `sum_{n < n_terms} f(mu_n) L_n` on the phase grid.
pub fn peetre_symbol(
    f: &Multiplier,
    d: usize,
    n_terms: usize,
    convention: SpectrumConvention,
    grid: PhaseGrid,
) -> Result<PeetreSymbol> {
    if grid.dim != d {
        return Err(Error::DimensionMismatch { expected: d, found: grid.dim });
    }
    let sf = SpecFun::default();
    if n_terms > sf.n_max + 1 {
        return Err(Error::DegreeTooLarge { n: n_terms - 1, n_max: sf.n_max });
    }
    let (coefficients, tail) = peetre_coefficients(f, d, n_terms, convention);
    if tail > PEETRE_TAIL_LIMIT {
        return Err(Error::DivergentTail { tail, tolerance: PEETRE_TAIL_LIMIT });
    }
    let re: Vec<f64> = coefficients.iter().map(|c| c.re).collect();
    let im: Vec<f64> = coefficients.iter().map(|c| c.im).collect();
    let has_im = im.iter().any(|v| *v != 0.0);
    let symbol = WeylSymbol::from_radial(grid, |r2| {
        let a = sf.laguerre_phase_series(&re, d, r2)?;
        let b = if has_im { sf.laguerre_phase_series(&im, d, r2)? } else { 0.0 };
        Ok(Complex64::new(a, b))
    })?;
    Ok(PeetreSymbol { symbol, coefficients, tail })
}

/// The single Laguerre term `L_n` as a symbol; it quantizes to the projection `P_n`.
pub fn laguerre_term_symbol(n: usize, grid: PhaseGrid) -> Result<WeylSymbol> {
    let sf = SpecFun::default();
    let d = grid.dim;
    WeylSymbol::from_radial(grid, |r2| Ok(Complex64::new(sf.laguerre_phase_table(n, d, r2)?[n], 0.0)))
}

/// Vectors a Weyl action can act on.
pub trait PhaseVector: Clone + Send + Sync {
    fn zeros_like(&self) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: Complex64, x: &Self);
    fn inner(&self, other: &Self) -> Complex64;
    fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }
    fn sup_distance(&self, other: &Self) -> f64;
}

impl PhaseVector for GridFunction {
    fn zeros_like(&self) -> Self {
        GridFunction::zeros(&self.spec)
    }

    fn axpy(&mut self, a: Complex64, x: &Self) {
        for (s, v) in self.samples.iter_mut().zip(&x.samples) {
            *s += a * v;
        }
    }

    fn inner(&self, other: &Self) -> Complex64 {
        GridFunction::inner(self, other)
    }

    fn norm(&self) -> f64 {
        GridFunction::norm(self)
    }

    fn sup_distance(&self, other: &Self) -> f64 {
        self.sub(other).sup_norm()
    }
}

/// Output of a quadrature together with its step-doubling error estimate.
#[derive(Debug, Clone)]
pub struct Quantized<V> {
    pub value: V,
    /// Sup distance between the step-`h` and step-`2h` quadratures.
    pub error_estimate: f64,
}

/// `(x, xi) -> exp(i(x A + xi B))` in some representation.
pub trait WeylAction: Sync {
    type Vector: PhaseVector;

    fn dim(&self) -> usize;

    fn apply(&self, p: &PhasePoint, v: &Self::Vector) -> Result<Self::Vector> {
        let mut out = v.zeros_like();
        self.accumulate(p, Complex64::new(1.0, 0.0), v, &mut out)?;
        Ok(out)
    }

    /// `out += c * W(p) v`.
    fn accumulate(&self, p: &PhasePoint, c: Complex64, v: &Self::Vector, out: &mut Self::Vector) -> Result<()>;

    /// Radius beyond which `v` is negligible; sets the resolution requirement.
    fn spatial_extent(&self, v: &Self::Vector) -> f64;

    fn quantize(&self, g: &WeylSymbol, v: &Self::Vector) -> Result<Quantized<Self::Vector>> {
        direct_quantize(self, g, v)
    }

    fn quantize_many(&self, g: &WeylSymbol, vs: &[Self::Vector]) -> Result<Vec<Quantized<Self::Vector>>> {
        vs.iter().map(|v| self.quantize(g, v)).collect()
    }
}

pub fn check_resolution(step: f64, extent: f64) -> Result<()> {
    if step * extent > PI / 2.0 {
        return Err(Error::Resolution { step, extent });
    }
    Ok(())
}

/// Direct quadrature: one call to `accumulate` per non-negligible lattice point.
pub fn direct_quantize<A: WeylAction + ?Sized>(
    action: &A,
    g: &WeylSymbol,
    v: &A::Vector,
) -> Result<Quantized<A::Vector>> {
    if g.dim() != action.dim() {
        return Err(Error::DimensionMismatch { expected: action.dim(), found: g.dim() });
    }
    check_resolution(g.grid.step, action.spatial_extent(v))?;
    let d = g.dim() as i32;
    let norm = (2.0 * PI).powi(-d);
    let fine_w = g.grid.cell() * norm;
    let coarse_w = fine_w * 2f64.powi(2 * d);
    let floor = NEGLIGIBLE * g.peak();
    let mut fine = v.zeros_like();
    let mut coarse = v.zeros_like();
    for (k, gv) in g.values.iter().enumerate() {
        if gv.norm() <= floor {
            continue;
        }
        let p = g.grid.point(k);
        action.accumulate(&p, gv * fine_w, v, &mut fine)?;
        if g.grid.indices(k).iter().all(|i| i % 2 == 0) {
            action.accumulate(&p, gv * coarse_w, v, &mut coarse)?;
        }
    }
    let error_estimate = fine.sup_distance(&coarse);
    Ok(Quantized { value: fine, error_estimate })
}

/// Dense matrix `<b_m, Op(g) b_n>` over a basis window.
pub fn quantize_matrix<A: WeylAction>(
    g: &WeylSymbol,
    action: &A,
    basis: &[A::Vector],
) -> Result<(DMatrix<Complex64>, f64)> {
    let images = action.quantize_many(g, basis)?;
    let n = basis.len();
    let mut m = DMatrix::from_element(n, n, ZERO);
    let mut err: f64 = 0.0;
    for (j, img) in images.iter().enumerate() {
        err = err.max(img.error_estimate);
        for i in 0..n {
            m[(i, j)] = basis[i].inner(&img.value);
        }
    }
    Ok((m, err))
}

/// `P_n v`, the quantization of the single Laguerre term `L_n`.
pub fn mehler_projection<A: WeylAction>(
    n: usize,
    grid: PhaseGrid,
    action: &A,
    v: &A::Vector,
) -> Result<Quantized<A::Vector>> {
    action.quantize(&laguerre_term_symbol(n, grid)?, v)
}

/// `max |e^{i s t} W(s,0)W(0,t)v - W(0,t)W(s,0)v| / max|v|` for a `d = 1` action.
pub fn weyl_relation_defect<A: WeylAction>(action: &A, s: f64, t: f64, v: &A::Vector) -> Result<f64> {
    let q = PhasePoint::one_dim(s, 0.0);
    let p = PhasePoint::one_dim(0.0, t);
    let qp = action.apply(&q, &action.apply(&p, v)?)?;
    let pq = action.apply(&p, &action.apply(&q, v)?)?;
    let mut lhs = qp.zeros_like();
    lhs.axpy(Complex64::from_polar(1.0, s * t), &qp);
    let scale = v.sup_distance(&v.zeros_like());
    Ok(lhs.sup_distance(&pq) / scale)
}

/// Schrodinger representation `Q = y`, `P = -i d/dy` on a box grid:
/// `W(x, xi) u(y) = e^{i x.xi/2} e^{i x.y} u(y + xi)`, zero outside the box.
#[derive(Debug, Clone)]
pub struct SchrodingerAction {
    pub spec: GridSpec,
    /// Linear interpolation for shifts that are not grid multiples.
    pub interpolate: bool,
}

/// How a shift by `xi` maps onto one axis.
enum AxisShift {
    Exact(i64),
    Linear { base: i64, frac: f64 },
}

impl SchrodingerAction {
    pub fn new(spec: GridSpec) -> Self {
        SchrodingerAction { spec, interpolate: false }
    }

    fn axis_shift(&self, j: usize, xi: f64) -> Result<AxisShift> {
        let h = self.spec.axis(j).step;
        let r = xi / h;
        let k = r.round();
        if (r - k).abs() <= 1e-9 * r.abs().max(1.0) {
            return Ok(AxisShift::Exact(k as i64));
        }
        if !self.interpolate {
            return Err(Error::OffGridShift { shift: xi, step: h });
        }
        let base = r.floor();
        Ok(AxisShift::Linear { base: base as i64, frac: r - base })
    }

    /// `u(idx + shift)` along axis `j`, zero outside.
    fn shifted_axis(&self, j: usize, shift: &AxisShift, i: usize) -> Vec<(usize, f64)> {
        let n = self.spec.axis(j).len() as i64;
        let at = |k: i64, w: f64| if k >= 0 && k < n && w != 0.0 { Some((k as usize, w)) } else { None };
        match *shift {
            AxisShift::Exact(s) => at(i as i64 + s, 1.0).into_iter().collect(),
            AxisShift::Linear { base, frac } => {
                [at(i as i64 + base, 1.0 - frac), at(i as i64 + base + 1, frac)].into_iter().flatten().collect()
            }
        }
    }
}

/// `e^{i x y_k}` along an axis, re-anchored every 64 points.
fn axis_phases(x: f64, coords_start: f64, h: f64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let step = Complex64::from_polar(1.0, x * h);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        if k % 64 == 0 {
            cur = Complex64::from_polar(1.0, x * (coords_start + k as f64 * h));
        }
        out.push(cur);
        cur *= step;
    }
    out
}

impl WeylAction for SchrodingerAction {
    type Vector = GridFunction;

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn accumulate(&self, p: &PhasePoint, c: Complex64, v: &GridFunction, out: &mut GridFunction) -> Result<()> {
        let d = self.dim();
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
        }
        let bch: f64 = p.x().iter().zip(p.xi()).map(|(a, b)| a * b).sum::<f64>() * 0.5;
        let c = c * Complex64::from_polar(1.0, bch);
        let phases: Vec<Vec<Complex64>> = (0..d)
            .map(|j| {
                let a = self.spec.axis(j);
                axis_phases(p.x()[j], a.coord(0), a.step, a.len())
            })
            .collect();
        let shifts: Vec<AxisShift> = (0..d).map(|j| self.axis_shift(j, p.xi()[j])).collect::<Result<_>>()?;
        match d {
            1 => {
                for (i, o) in out.samples.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for (k, w) in self.shifted_axis(0, &shifts[0], i) {
                        acc += v.samples[k] * w;
                    }
                    *o += c * phases[0][i] * acc;
                }
            }
            _ => {
                let n1 = self.spec.axis(1).len();
                let n0 = self.spec.axis(0).len();
                let src1: Vec<Vec<(usize, f64)>> = (0..n1).map(|i| self.shifted_axis(1, &shifts[1], i)).collect();
                for i0 in 0..n0 {
                    let src0 = self.shifted_axis(0, &shifts[0], i0);
                    if src0.is_empty() {
                        continue;
                    }
                    let row_phase = c * phases[0][i0];
                    for i1 in 0..n1 {
                        let mut acc = ZERO;
                        for &(k0, w0) in &src0 {
                            for &(k1, w1) in &src1[i1] {
                                acc += v.samples[k0 * n1 + k1] * (w0 * w1);
                            }
                        }
                        out.samples[i0 * n1 + i1] += row_phase * phases[1][i1] * acc;
                    }
                }
            }
        }
        Ok(())
    }

    fn spatial_extent(&self, _v: &GridFunction) -> f64 {
        self.spec.extent()
    }

    fn quantize(&self, g: &WeylSymbol, v: &GridFunction) -> Result<Quantized<GridFunction>> {
        Ok(self.quantize_many(g, std::slice::from_ref(v))?.remove(0))
    }

    fn quantize_many(&self, g: &WeylSymbol, vs: &[GridFunction]) -> Result<Vec<Quantized<GridFunction>>> {
        if self.dim() == 1 && !self.interpolate {
            if let Some(kernels) = SchrodingerKernels::build(self, g)? {
                return Ok(vs.iter().map(|v| kernels.apply(v)).collect());
            }
        }
        vs.iter().map(|v| direct_quantize(self, g, v)).collect()
    }
}

/// Precomputed `K_xi(y) = c sum_x g(x, xi) e^{i x (y + xi/2)}` for `d = 1`, so that
/// `Op(g) v (y) = sum_xi K_xi(y) v(y + xi)`; one table per quadrature step.
struct SchrodingerKernels {
    fine: KernelTable,
    coarse: KernelTable,
}

struct KernelTable {
    /// `(shift in grid points, K(y) over the grid)`
    rows: Vec<(i64, Vec<Complex64>)>,
}

impl SchrodingerKernels {
    /// `None` when the phase step is not a multiple of the grid step.
    fn build(action: &SchrodingerAction, g: &WeylSymbol) -> Result<Option<Self>> {
        if g.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: g.dim() });
        }
        let axis = *action.spec.axis(0);
        check_resolution(g.grid.step, axis.extent())?;
        let ratio = g.grid.step / axis.step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Ok(None);
        }
        let stride = ratio.round() as i64;
        let fine = KernelTable::build(g, 1, stride, &axis);
        let coarse = KernelTable::build(g, 2, stride, &axis);
        Ok(Some(SchrodingerKernels { fine, coarse }))
    }

    fn apply(&self, v: &GridFunction) -> Quantized<GridFunction> {
        let fine = self.fine.apply(v);
        let coarse = self.coarse.apply(v);
        let error_estimate = fine.sub(&coarse).sup_norm();
        Quantized { value: fine, error_estimate }
    }
}

impl KernelTable {
    /// Uses lattice indices that are multiples of `every` (1: fine, 2: coarse).
    fn build(g: &WeylSymbol, every: i64, stride: i64, axis: &crate::hermite_model::Axis) -> Self {
        let kk = g.grid.half_count as i64;
        let side = (2 * kk + 1) as usize;
        let hp = g.grid.step;
        let weight = (hp * every as f64).powi(2) / (2.0 * PI);
        let floor = NEGLIGIBLE * g.peak();
        let ys = axis.coords();
        let xis: Vec<i64> = (-kk..=kk).filter(|j| j % every == 0).collect();
        let rows: Vec<Option<(i64, Vec<Complex64>)>> = xis
            .par_iter()
            .map(|&j| {
                // column of g at fixed xi; flat index = (i + K) * side + (j + K)
                let col: Vec<(i64, Complex64)> = (-kk..=kk)
                    .filter(|i| i % every == 0)
                    .map(|i| (i, g.values[(i + kk) as usize * side + (j + kk) as usize]))
                    .collect();
                let first = col.iter().position(|(_, v)| v.norm() > floor)?;
                let last = col.iter().rposition(|(_, v)| v.norm() > floor)?;
                let coeffs: Vec<Complex64> = col[first..=last].iter().map(|(_, v)| v * weight).collect();
                let i_lo = col[first].0;
                let xi = j as f64 * hp;
                let kernel = ys
                    .iter()
                    .map(|&y| {
                        let theta = hp * (y + 0.5 * xi);
                        let z = Complex64::from_polar(1.0, theta * every as f64);
                        let mut acc = ZERO;
                        for c in coeffs.iter().rev() {
                            acc = acc * z + c;
                        }
                        acc * Complex64::from_polar(1.0, theta * i_lo as f64)
                    })
                    .collect();
                Some((j * stride, kernel))
            })
            .collect();
        KernelTable { rows: rows.into_iter().flatten().collect() }
    }

    fn apply(&self, v: &GridFunction) -> GridFunction {
        let n = v.samples.len() as i64;
        let mut out = GridFunction::zeros(&v.spec);
        for (shift, kernel) in &self.rows {
            let lo = (-shift).max(0);
            let hi = (n - shift).min(n);
            for m in lo..hi {
                out.samples[m as usize] += kernel[m as usize] * v.samples[(m + shift) as usize];
            }
        }
        out
    }
}
