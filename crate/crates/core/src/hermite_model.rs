//! The harmonic oscillator `-1/2 Laplacian + 1/2 |x|^2` on gridded `L^2(R^d)`,
//! `d <= 2`, with its Hermite diagonalization. This is the brute-force oracle
//! the quantization routes are checked against.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multiplier::Multiplier;
use crate::specfun::SpecFun;

/// Boundary modulus allowed for inputs of spectral operations.
pub const BOUNDARY_LIMIT: f64 = 1e-10;

/// Truncation residual allowed by [`apply_multiplier`].
pub const RESIDUAL_LIMIT: f64 = 1e-6;

/// Smallest admissible box half-width.
pub const MIN_EXTENT: f64 = 8.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One symmetric axis with points `k * step`, `|k| <= half_count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub half_count: usize,
    pub step: f64,
}

impl Axis {
    pub fn new(extent: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::param("step", "grid step must be positive"));
        }
        let ratio = extent / step;
        let half_count = ratio.round();
        if (ratio - half_count).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::param("extent", format!("extent {extent} is not a multiple of step {step}")));
        }
        let axis = Axis { half_count: half_count as usize, step };
        if axis.extent() < MIN_EXTENT * (1.0 - 1e-12) {
            return Err(Error::param("extent", format!("box half-width {extent} is below {MIN_EXTENT}")));
        }
        Ok(axis)
    }

    /// Axis with `half_count` points per side; extent need only reach `MIN_EXTENT`.
    pub fn with_half_count(half_count: usize, step: f64) -> Result<Self> {
        Axis::new(half_count as f64 * step, step)
    }

    pub fn len(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extent(&self) -> f64 {
        self.half_count as f64 * self.step
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.half_count as f64) * self.step
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.coord(i)).collect()
    }
}

/// Uniform symmetric box grid; samples are stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::param("dim", format!("grids support d in {{1, 2}}, got {}", axes.len())));
        }
        Ok(GridSpec { axes })
    }

    pub fn isotropic(d: usize, extent: f64, step: f64) -> Result<Self> {
        GridSpec::new(vec![Axis::new(extent, step)?; d])
    }

    /// Desk-scale defaults: `R = 12, h = 0.01` for `d = 1`; `R = 8, h = 0.05` for `d = 2`.
    pub fn desk(d: usize) -> Result<Self> {
        match d {
            1 => GridSpec::isotropic(1, 12.0, 0.01),
            2 => GridSpec::isotropic(2, 8.0, 0.05),
            _ => Err(Error::param("dim", "grids support d in {1, 2}")),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &Axis {
        &self.axes[j]
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `prod_j h_j`.
    pub fn cell(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    /// Largest box half-width over the axes.
    pub fn extent(&self) -> f64 {
        self.axes.iter().map(Axis::extent).fold(0.0, f64::max)
    }

    /// Flat index of a multi-index.
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.len() + i)
    }

    /// Multi-index of a flat index.
    pub fn unflat(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            let n = self.axes[j].len();
            idx[j] = k % n;
            k /= n;
        }
        idx
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.unflat(k).iter().zip(&self.axes).map(|(&i, a)| a.coord(i)).collect()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.unflat(k).iter().zip(&self.axes).any(|(&i, a)| i == 0 || i + 1 == a.len())
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> Complex64) -> GridFunction {
        let samples = (0..self.len()).map(|k| f(&self.point(k))).collect();
        GridFunction { spec: self.clone(), samples }
    }

    /// Product Hermite function `h_{n_1}(y_1) ... h_{n_d}(y_d)` on the grid.
    pub fn hermite(&self, n: &[usize]) -> Result<GridFunction> {
        if n.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: n.len() });
        }
        let sf = SpecFun::default();
        let tables: Vec<Vec<f64>> = n
            .iter()
            .zip(&self.axes)
            .map(|(&nj, a)| a.coords().iter().map(|&y| sf.hermite(nj, y)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(self.sample_separable(&tables))
    }

    fn sample_separable(&self, tables: &[Vec<f64>]) -> GridFunction {
        let samples = (0..self.len())
            .map(|k| {
                let v: f64 = self.unflat(k).iter().zip(tables).map(|(&i, t)| t[i]).product();
                Complex64::new(v, 0.0)
            })
            .collect();
        GridFunction { spec: self.clone(), samples }
    }
}

/// Complex samples over a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(spec: &GridSpec) -> Self {
        GridFunction { spec: spec.clone(), samples: vec![ZERO; spec.len()] }
    }

    pub fn from_samples(spec: &GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != spec.len() {
            return Err(Error::DimensionMismatch { expected: spec.len(), found: samples.len() });
        }
        Ok(GridFunction { spec: spec.clone(), samples })
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `<self, other> = cell * sum conj(self) other`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum();
        s * self.spec.cell()
    }

    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spec.cell()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn boundary_max(&self) -> f64 {
        (0..self.samples.len())
            .filter(|&k| self.spec.is_boundary(k))
            .map(|k| self.samples[k].norm())
            .fold(0.0, f64::max)
    }

    pub fn check_decay(&self) -> Result<()> {
        let observed = self.boundary_max();
        if observed >= BOUNDARY_LIMIT {
            return Err(Error::BoundaryDecay { observed, limit: BOUNDARY_LIMIT });
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        GridFunction { spec: self.spec.clone(), samples: self.samples.iter().map(|v| v * c).collect() }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        GridFunction {
            spec: self.spec.clone(),
            samples: self.samples.iter().zip(&other.samples).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }
}

/// Which spectrum the Peetre series and `f(L)` are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumConvention {
    /// `mu_n = n + d/2`, the spectrum of the oscillator itself.
    Oscillator,
    /// `mu_n = n`, the spectrum of `L - d/2`.
    Shifted,
}

impl SpectrumConvention {
    pub const ALL: [SpectrumConvention; 2] = [SpectrumConvention::Oscillator, SpectrumConvention::Shifted];

    pub fn offset(&self, d: usize) -> f64 {
        match self {
            SpectrumConvention::Oscillator => 0.5 * d as f64,
            SpectrumConvention::Shifted => 0.0,
        }
    }

    /// `mu_n` for total degree `n`.
    pub fn eigenvalue(&self, n: usize, d: usize) -> f64 {
        n as f64 + self.offset(d)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpectrumConvention::Oscillator => "oscillator",
            SpectrumConvention::Shifted => "shifted",
        }
    }
}

impl std::str::FromStr for SpectrumConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oscillator" | "d/2" => Ok(SpectrumConvention::Oscillator),
            "shifted" | "0" => Ok(SpectrumConvention::Shifted),
            _ => Err(Error::param("spectrum_offset", format!("unknown convention `{s}`"))),
        }
    }
}

/// Multi-indices of total degree `<= n_max` in `d` variables, ordered by
/// total degree, then by decreasing first component.
pub fn multi_indices(d: usize, n_max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=n_max {
        match d {
            1 => out.push(vec![total]),
            _ => {
                for first in (0..=total).rev() {
                    out.push(vec![first, total - first]);
                }
            }
        }
    }
    out
}

/// Coefficients against the product Hermite basis, total degree `<= truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    pub dim: usize,
    pub truncation: usize,
    pub coeffs: Vec<Complex64>,
    /// `1 - sum |c_n|^2 / ||u||^2` when produced by [`analyze`].
    pub residual: Option<f64>,
}

impl HermiteExpansion {
    pub fn zeros(dim: usize, truncation: usize) -> Self {
        let n = multi_indices(dim, truncation).len();
        HermiteExpansion { dim, truncation, coeffs: vec![ZERO; n], residual: None }
    }

    pub fn indices(&self) -> Vec<Vec<usize>> {
        multi_indices(self.dim, self.truncation)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `c_n -> m(|n|) c_n`, with `|n|` the total degree.
    pub fn map_by_degree(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let coeffs = self.indices().iter().zip(&self.coeffs).map(|(n, c)| c * m(n.iter().sum())).collect();
        HermiteExpansion { coeffs, residual: None, ..self.clone() }
    }
}

fn hermite_tables(spec: &GridSpec, n_max: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let sf = SpecFun::default();
    spec.axes()
        .iter()
        .map(|a| {
            let per_point: Vec<Vec<f64>> = a.coords().iter().map(|&y| sf.hermite_table(n_max, y)).collect::<Result<_>>()?;
            // transpose to [degree][point]
            Ok((0..=n_max).map(|n| per_point.iter().map(|row| row[n]).collect()).collect())
        })
        .collect()
}

/// Trapezoidal projection `c_n = <h_n, u>`.
pub fn analyze(u: &GridFunction, truncation: usize) -> Result<HermiteExpansion> {
    u.check_decay()?;
    let spec = &u.spec;
    let tables = hermite_tables(spec, truncation)?;
    let indices = multi_indices(spec.dim(), truncation);
    let cell = spec.cell();
    let coeffs: Vec<Complex64> = match spec.dim() {
        1 => (0..=truncation)
            .map(|n| {
                let s: Complex64 = tables[0][n].iter().zip(&u.samples).map(|(h, v)| v * h).sum();
                s * cell
            })
            .collect(),
        _ => {
            let (n0, n1) = (spec.axis(0).len(), spec.axis(1).len());
            // contract the fast axis first: partial[i][m] = sum_j u[i][j] h_m(y_j)
            let mut partial = vec![ZERO; n0 * (truncation + 1)];
            for i in 0..n0 {
                let row = &u.samples[i * n1..(i + 1) * n1];
                for m in 0..=truncation {
                    partial[i * (truncation + 1) + m] = tables[1][m].iter().zip(row).map(|(h, v)| v * h).sum();
                }
            }
            indices
                .iter()
                .map(|n| {
                    let s: Complex64 =
                        (0..n0).map(|i| partial[i * (truncation + 1) + n[1]] * tables[0][n[0]][i]).sum();
                    s * cell
                })
                .collect()
        }
    };
    let total = u.norm().powi(2);
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let residual = if total > 0.0 { 1.0 - captured / total } else { 0.0 };
    Ok(HermiteExpansion { dim: spec.dim(), truncation, coeffs, residual: Some(residual) })
}

/// `sum_n c_n h_n` on the grid.
pub fn synthesize(c: &HermiteExpansion, spec: &GridSpec) -> Result<GridFunction> {
    if c.dim != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: c.dim });
    }
    let tables = hermite_tables(spec, c.truncation)?;
    let mut out = GridFunction::zeros(spec);
    match spec.dim() {
        1 => {
            for (n, cn) in c.coeffs.iter().enumerate() {
                if *cn == ZERO {
                    continue;
                }
                for (o, h) in out.samples.iter_mut().zip(&tables[0][n]) {
                    *o += cn * h;
                }
            }
        }
        _ => {
            let (n0, n1) = (spec.axis(0).len(), spec.axis(1).len());
            let t = c.truncation + 1;
            // gather[i][m] = sum_{n: n_0 index} c_{n} h_{n_0}(y_i) for second index m
            let mut gather = vec![ZERO; n0 * t];
            for (n, cn) in c.indices().iter().zip(&c.coeffs) {
                if *cn == ZERO {
                    continue;
                }
                for i in 0..n0 {
                    gather[i * t + n[1]] += cn * tables[0][n[0]][i];
                }
            }
            for i in 0..n0 {
                for m in 0..t {
                    let g = gather[i * t + m];
                    if g == ZERO {
                        continue;
                    }
                    for (o, h) in out.samples[i * n1..(i + 1) * n1].iter_mut().zip(&tables[1][m]) {
                        *o += g * h;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Second-order central differences for `-1/2 Laplacian` (zero outside the box)
/// plus multiplication by `1/2 |y|^2`.
pub fn apply_l_fd(u: &GridFunction) -> GridFunction {
    let spec = &u.spec;
    let mut out = GridFunction::zeros(spec);
    let lens: Vec<usize> = spec.axes().iter().map(Axis::len).collect();
    let strides: Vec<usize> = match spec.dim() {
        1 => vec![1],
        _ => vec![lens[1], 1],
    };
    for k in 0..u.samples.len() {
        let idx = spec.unflat(k);
        let mut acc = ZERO;
        let mut r2 = 0.0;
        for j in 0..spec.dim() {
            let a = spec.axis(j);
            let h2 = a.step * a.step;
            let left = if idx[j] > 0 { u.samples[k - strides[j]] } else { ZERO };
            let right = if idx[j] + 1 < lens[j] { u.samples[k + strides[j]] } else { ZERO };
            acc -= 0.5 * (left + right - 2.0 * u.samples[k]) / h2;
            let y = a.coord(idx[j]);
            r2 += y * y;
        }
        out.samples[k] = acc + 0.5 * r2 * u.samples[k];
    }
    out
}

/// `f(L) u` through the Hermite expansion truncated at total degree `truncation`.
pub fn apply_multiplier(
    f: &Multiplier,
    u: &GridFunction,
    truncation: usize,
    convention: SpectrumConvention,
) -> Result<GridFunction> {
    let c = analyze(u, truncation)?;
    let residual = c.residual.unwrap_or(0.0);
    if residual > RESIDUAL_LIMIT {
        return Err(Error::TruncationResidual { residual, tolerance: RESIDUAL_LIMIT });
    }
    let d = u.dim();
    let mapped = c.map_by_degree(|n| f.value_at(convention.eigenvalue(n, d)));
    synthesize(&mapped, &u.spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_expansion(d: usize, n: usize, seed: u64) -> HermiteExpansion {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = HermiteExpansion::zeros(d, n);
        for v in e.coeffs.iter_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        e
    }

    #[test]
    fn grid_shape() {
        let g = GridSpec::desk(1).unwrap();
        assert_eq!(g.len(), 2401);
        assert_eq!(g.axis(0).coord(1200), 0.0);
        assert!(GridSpec::isotropic(1, 6.0, 0.01).is_err());
        assert!(GridSpec::isotropic(1, 12.0, 0.007).is_err());
        let g2 = GridSpec::isotropic(2, 8.0, 0.5).unwrap();
        for k in [0, 17, 288] {
            assert_eq!(g2.flat(&g2.unflat(k)), k);
        }
    }

    #[test]
    fn analyze_single_hermite() {
        let g = GridSpec::isotropic(1, 12.0, 0.01).unwrap();
        let u = g.hermite(&[3]).unwrap();
        let e = analyze(&u, 8).unwrap();
        for (n, cn) in e.coeffs.iter().enumerate() {
            let expect = if n == 3 { 1.0 } else { 0.0 };
            assert!((cn - c(expect)).norm() < 1e-8, "n={n}: {cn}");
        }
        assert!(e.residual.unwrap().abs() < 1e-8);
    }

    #[test]
    fn analyze_linear_and_round_trip() {
        let g = GridSpec::desk(1).unwrap();
        let u = g.hermite(&[0]).unwrap().combine(c(1.0), &g.hermite(&[2]).unwrap(), c(0.5));
        let v = g.hermite(&[5]).unwrap().scale(Complex64::new(0.0, 1.0));
        let (a, b) = (Complex64::new(0.3, -1.2), c(2.0));
        let lhs = analyze(&u.combine(a, &v, b), 12).unwrap();
        let (cu, cv) = (analyze(&u, 12).unwrap(), analyze(&v, 12).unwrap());
        for k in 0..lhs.coeffs.len() {
            assert!((lhs.coeffs[k] - (a * cu.coeffs[k] + b * cv.coeffs[k])).norm() < 1e-12);
        }
        let back = synthesize(&cu, &g).unwrap();
        assert!(back.sub(&u).sup_norm() < 1e-8);
    }

    #[test]
    fn analyze_two_dimensional() {
        let g = GridSpec::desk(2).unwrap();
        let u = g.hermite(&[2, 1]).unwrap();
        let e = analyze(&u, 6).unwrap();
        for (n, cn) in e.indices().iter().zip(&e.coeffs) {
            let expect = if n == &vec![2, 1] { 1.0 } else { 0.0 };
            assert!((cn - c(expect)).norm() < 1e-8, "{n:?}");
        }
        // keep the degree low enough that the input decays by the box edge at 8
        let r = random_expansion(2, 3, 3);
        let back = analyze(&synthesize(&r, &g).unwrap(), 3).unwrap();
        for (a, b) in back.coeffs.iter().zip(&r.coeffs) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn decay_is_enforced() {
        let g = GridSpec::isotropic(1, 8.0, 0.05).unwrap();
        let u = g.sample(|y| c((-0.01 * y[0] * y[0]).exp()));
        assert!(matches!(analyze(&u, 4), Err(Error::BoundaryDecay { .. })));
    }

    #[test]
    fn finite_difference_eigenrelation() {
        let g = GridSpec::desk(1).unwrap();
        let h2 = 0.01f64.powi(2);
        for n in 0..=10 {
            let u = g.hermite(&[n]).unwrap();
            let lu = apply_l_fd(&u);
            let err = lu.sub(&u.scale(c(n as f64 + 0.5))).norm() / u.norm();
            // the leading error is h^2/24 |u''''| ~ h^2 (n + 1/2)^2 / 6
            assert!(err <= 0.5 * h2 * (n as f64 + 1.0).powi(2), "n={n}: {err}");
            let rq = lu.inner(&u).re;
            assert!((rq - (n as f64 + 0.5)).abs() <= 0.1 * h2 * (n as f64 + 1.0).powi(2));
        }
    }

    #[test]
    fn finite_difference_spectrum_two_dimensional() {
        let g = GridSpec::desk(2).unwrap();
        let h2 = 0.05f64.powi(2);
        for n in [[0, 0], [3, 1], [6, 6]] {
            let u = g.hermite(&n).unwrap();
            let rq = apply_l_fd(&u).inner(&u).re;
            let mu = (n[0] + n[1]) as f64 + 1.0;
            assert!((rq - mu).abs() <= 0.1 * h2 * mu * mu, "{n:?}: {rq}");
        }
    }

    #[test]
    fn discrete_l_is_symmetric() {
        let g = GridSpec::desk(1).unwrap();
        let u = synthesize(&random_expansion(1, 10, 1), &g).unwrap();
        let v = synthesize(&random_expansion(1, 10, 2), &g).unwrap();
        let lhs = apply_l_fd(&u).inner(&v);
        let rhs = u.inner(&apply_l_fd(&v));
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn multiplier_examples() {
        let g = GridSpec::desk(1).unwrap();
        let u = synthesize(&random_expansion(1, 10, 5), &g).unwrap();
        let conv = SpectrumConvention::Oscillator;
        let id = apply_multiplier(&Multiplier::constant(1.0), &u, 32, conv).unwrap();
        assert!(id.sub(&u).norm() < 1e-8 * u.norm());
        let h0 = g.hermite(&[0]).unwrap();
        let t = 0.7;
        let heat = apply_multiplier(&Multiplier::heat(t).unwrap(), &h0, 32, conv).unwrap();
        assert!(heat.sub(&h0.scale(c((-t / 2.0).exp()))).sup_norm() < 1e-10);
        // keeps only mu_0 = 1/2
        let sel = Multiplier::smoothed_indicator(0.4, 0.6, 0.2).unwrap();
        let once = apply_multiplier(&sel, &u, 32, conv).unwrap();
        let twice = apply_multiplier(&sel, &once, 32, conv).unwrap();
        assert!(twice.sub(&once).sup_norm() < 1e-10);
        let p0 = h0.scale(h0.inner(&u));
        assert!(once.sub(&p0).sup_norm() < 1e-10);
    }

    #[test]
    fn multiplier_rejects_large_residual() {
        let g = GridSpec::desk(1).unwrap();
        let u = g.hermite(&[20]).unwrap();
        assert!(matches!(
            apply_multiplier(&Multiplier::constant(1.0), &u, 10, SpectrumConvention::Oscillator),
            Err(Error::TruncationResidual { .. })
        ));
    }

    #[test]
    fn heat_semigroup() {
        for d in [1, 2] {
            let g = GridSpec::desk(d).unwrap();
            let u = synthesize(&random_expansion(d, if d == 1 { 8 } else { 3 }, 11), &g).unwrap();
            let conv = SpectrumConvention::Oscillator;
            let (t, s) = (0.3, 0.9);
            let a = apply_multiplier(&Multiplier::heat(s).unwrap(), &u, 24, conv).unwrap();
            let ab = apply_multiplier(&Multiplier::heat(t).unwrap(), &a, 24, conv).unwrap();
            let direct = apply_multiplier(&Multiplier::heat(t + s).unwrap(), &u, 24, conv).unwrap();
            assert!(ab.sub(&direct).norm() < 1e-9 * u.norm(), "d={d}");
        }
    }

    #[test]
    fn conventions() {
        assert_eq!(SpectrumConvention::Oscillator.eigenvalue(3, 2), 4.0);
        assert_eq!(SpectrumConvention::Shifted.eigenvalue(3, 2), 3.0);
        assert_eq!("oscillator".parse::<SpectrumConvention>().unwrap(), SpectrumConvention::Oscillator);
        assert!("half".parse::<SpectrumConvention>().is_err());
        assert_eq!(multi_indices(2, 2), vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn random_expansion_has_decay() {
        let g = GridSpec::desk(1).unwrap();
        synthesize(&random_expansion(1, 12, 9), &g).unwrap().check_decay().unwrap();
    }
}
