//! Truncated Bargmann-Fock model: Taylor coefficients over `e_k(z) = z^k / sqrt(k!)`,
//! ladder and position/momentum matrices, translations `T_a`, and the mixed
//! `A^{p,q}` norms by nested trapezoidal quadrature.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiplier::Multiplier;
use crate::specfun::PhasePoint;
use crate::weyl_quantization::{direct_quantize, PhaseVector, Quantized, WeylAction, WeylSymbol};

pub const DEFAULT_TRUNCATION: usize = 64;

/// Largest coefficient tail a translation may drop.
pub const TRANSLATE_TAIL_LIMIT: f64 = 1e-8;

/// Largest relative mass the `A^{p,q}` box may miss.
pub const APQ_TAIL_LIMIT: f64 = 1e-8;

/// Degrees beyond the truncation used to measure the translation tail.
const TAIL_DEGREES: usize = 96;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_truncation(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param("truncation", format!("need N >= 2, got {n}")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d != 1 && d != 2 {
        return Err(Error::param("d", format!("Fock model supports d = 1, 2, got {d}")));
    }
    Ok(())
}

/// Coefficients `c_k` of `f = sum c_k e_k`; for `d = 2` the index `(k1, k2)` sits at `k1 (N+1) + k2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub dim: usize,
    pub truncation: usize,
    pub coeffs: Vec<Complex64>,
    /// l2 mass dropped by the truncation when this vector was produced.
    pub tail: f64,
}

impl FockVector {
    pub fn zeros(dim: usize, truncation: usize) -> Result<Self> {
        check_dim(dim)?;
        check_truncation(truncation)?;
        let len = (truncation + 1).pow(dim as u32);
        Ok(FockVector { dim, truncation, coeffs: vec![ZERO; len], tail: 0.0 })
    }

    pub fn from_coeffs(truncation: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        check_truncation(truncation)?;
        if coeffs.len() != truncation + 1 {
            return Err(Error::DimensionMismatch { expected: truncation + 1, found: coeffs.len() });
        }
        Ok(FockVector { dim: 1, truncation, coeffs, tail: 0.0 })
    }

    pub fn basis(truncation: usize, k: usize) -> Result<Self> {
        Self::basis_multi(truncation, &[k])
    }

    pub fn basis_multi(truncation: usize, k: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(k.len(), truncation)?;
        if let Some(&bad) = k.iter().find(|&&kj| kj > truncation) {
            return Err(Error::DegreeTooLarge { n: bad, n_max: truncation });
        }
        let idx = k.iter().fold(0, |acc, &kj| acc * (truncation + 1) + kj);
        v.coeffs[idx] = ONE;
        Ok(v)
    }

    /// Normalized coherent state `e^{-|alpha|^2/2} sum alpha^k / sqrt(k!) e_k`, renormalized
    /// after truncation; the dropped mass is kept in `tail`.
    pub fn coherent(alpha: Complex64, truncation: usize) -> Result<Self> {
        check_truncation(truncation)?;
        let mut coeffs = Vec::with_capacity(truncation + 1);
        let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for k in 0..=truncation {
            if k > 0 {
                c *= alpha / (k as f64).sqrt();
            }
            coeffs.push(c);
        }
        let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let scale = 1.0 / kept.sqrt();
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Ok(FockVector { dim: 1, truncation, coeffs, tail: (1.0 - kept).max(0.0).sqrt() })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        FockVector { coeffs: self.coeffs.iter().map(|c| a * c).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        FockVector { coeffs, tail: self.tail.max(other.tail), ..self.clone() }
    }

    /// Highest degree carrying a non-zero coefficient (`d = 1`).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != ZERO).unwrap_or(0)
    }

    fn as_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.coeffs)
    }

    fn require_one_dim(&self) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::Unsupported(format!("operation is implemented for d = 1 only, got d = {}", self.dim)));
        }
        Ok(())
    }
}

impl PhaseVector for FockVector {
    fn zeros_like(&self) -> Self {
        FockVector { coeffs: vec![ZERO; self.coeffs.len()], tail: 0.0, ..self.clone() }
    }

    fn axpy(&mut self, a: Complex64, x: &Self) {
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += a * v;
        }
        self.tail = self.tail.max(x.tail);
    }

    fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    fn norm(&self) -> f64 {
        FockVector::norm(self)
    }

    fn sup_distance(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Dense operator on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: DMatrix<Complex64>,
    pub dim: usize,
    pub truncation: usize,
    pub label: String,
}

impl FockOperator {
    pub fn new(label: impl Into<String>, dim: usize, truncation: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        check_truncation(truncation)?;
        let n = (truncation + 1).pow(dim as u32);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(FockOperator { matrix, dim, truncation, label: label.into() })
    }

    pub fn identity(dim: usize, truncation: usize) -> Result<Self> {
        let n = (truncation + 1).pow(dim as u32);
        Self::new("I", dim, truncation, DMatrix::identity(n, n))
    }

    pub fn diagonal(label: impl Into<String>, dim: usize, truncation: usize, entries: &[Complex64]) -> Result<Self> {
        Self::new(label, dim, truncation, DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if v.dim != self.dim || v.truncation != self.truncation {
            return Err(Error::DimensionMismatch { expected: self.size(), found: v.len() });
        }
        let w = &self.matrix * v.as_dvector();
        Ok(FockVector { coeffs: w.as_slice().to_vec(), ..v.clone() })
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { matrix: self.matrix.adjoint(), label: format!("{}^*", self.label), ..self.clone() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        FockOperator { matrix: &self.matrix * &other.matrix, label: format!("{} {}", self.label, other.label), ..self.clone() }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        FockOperator { matrix: &self.matrix * c, ..self.clone() }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        FockOperator {
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
            label: format!("[{}, {}]", self.label, other.label),
            ..self.clone()
        }
    }

    /// `A (x) I + I (x) B` style tensor product `A (x) B` of two `d = 1` operators.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        if self.dim != 1 || other.dim != 1 || self.truncation != other.truncation {
            return Err(Error::Unsupported("tensor products of d = 1 operators with equal truncation only".into()));
        }
        Self::new(format!("{} (x) {}", self.label, other.label), 2, self.truncation, self.matrix.kronecker(&other.matrix))
    }

    /// Max entry of `self - other` over indices `< interior` (both axes).
    pub fn interior_distance(&self, other: &Self, interior: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..interior {
            for j in 0..interior {
                worst = worst.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
            }
        }
        worst
    }

    /// Max entry of `self - self^*`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `(a^*, a)`: `a^* e_k = sqrt(k+1) e_{k+1}`, `a e_k = sqrt(k) e_{k-1}`, cut at degree `N`.
pub fn ladder_matrices(truncation: usize) -> Result<(FockOperator, FockOperator)> {
    check_truncation(truncation)?;
    let n = truncation + 1;
    let mut raise = DMatrix::from_element(n, n, ZERO);
    for k in 0..truncation {
        raise[(k + 1, k)] = Complex64::new(((k + 1) as f64).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    Ok((FockOperator::new("a^*", 1, truncation, raise)?, FockOperator::new("a", 1, truncation, lower)?))
}

/// `A = (a^* + a)/sqrt 2`, `B = i(a^* - a)/sqrt 2`.
pub fn position_momentum(truncation: usize) -> Result<(FockOperator, FockOperator)> {
    let (raise, lower) = ladder_matrices(truncation)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = (&raise.matrix + &lower.matrix) * Complex64::new(s, 0.0);
    let b = (&raise.matrix - &lower.matrix) * Complex64::new(0.0, s);
    Ok((FockOperator::new("A", 1, truncation, a)?, FockOperator::new("B", 1, truncation, b)?))
}

/// `1/2 (A^2 + B^2)` by matrix products.
pub fn oscillator_from_products(truncation: usize) -> Result<FockOperator> {
    let (a, b) = position_momentum(truncation)?;
    let m = (&a.matrix * &a.matrix + &b.matrix * &b.matrix) * Complex64::new(0.5, 0.0);
    FockOperator::new("L", 1, truncation, m)
}

/// `ln k!` for `k <= n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `sqrt(n! / m!) / (n - m)!` for `m <= n`.
fn shift_weight(lf: &[f64], n: usize, m: usize) -> f64 {
    (0.5 * (lf[n] - lf[m]) - lf[n - m]).exp()
}

fn powers(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = ONE;
    for _ in 0..=n {
        out.push(acc);
        acc *= z;
    }
    out
}

/// `(T_a f)(z) = e^{-|a|^2/2} e^{-conj(a) z} f(z + a)` on coefficients (`d = 1`).
/// The binomial shift is exact on the truncated polynomial; the exponential factor
/// pushes mass past degree `N`, which is measured and must stay below
/// [`TRANSLATE_TAIL_LIMIT`].
pub fn translate_op(a: Complex64, v: &FockVector) -> Result<FockVector> {
    let (out, tail) = translate_unchecked(a, v)?;
    if tail > TRANSLATE_TAIL_LIMIT {
        return Err(Error::DivergentTail { tail, tolerance: TRANSLATE_TAIL_LIMIT });
    }
    Ok(FockVector { tail, ..out })
}

fn translate_unchecked(a: Complex64, v: &FockVector) -> Result<(FockVector, f64)> {
    v.require_one_dim()?;
    let n = v.truncation;
    let top = n + TAIL_DEGREES;
    let lf = log_factorials(top);
    let pa = powers(a, n);
    let pb = powers(-a.conj(), top);
    let shifted: Vec<Complex64> = (0..=n)
        .map(|m| (m..=n).map(|k| v.coeffs[k] * pa[k - m] * shift_weight(&lf, k, m)).sum())
        .collect();
    let damp = (-a.norm_sqr() / 2.0).exp();
    let full: Vec<Complex64> = (0..=top)
        .map(|j| (0..=j.min(n)).map(|m| shifted[m] * pb[j - m] * shift_weight(&lf, j, m)).sum::<Complex64>() * damp)
        .collect();
    let tail = full[n + 1..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let coeffs = full[..=n].to_vec();
    Ok((FockVector { dim: 1, truncation: n, coeffs, tail: v.tail }, tail))
}

/// `exp(i(x A + xi B)) = T_a` with `a = (xi + i x) / sqrt 2`.
pub fn weyl_parameter(x: f64, xi: f64) -> Complex64 {
    Complex64::new(xi, x) * std::f64::consts::FRAC_1_SQRT_2
}

/// Difference quotients of `U(t) = T_{it/sqrt 2}` and `V(t) = T_{t/sqrt 2}` against `iA v`, `iB v`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorReport {
    pub t: Vec<f64>,
    /// `||(U(t)v - v)/t - iA v||_2` per `t`.
    pub defect_u: Vec<f64>,
    /// `||(V(t)v - v)/t - iB v||_2` per `t`.
    pub defect_v: Vec<f64>,
    /// `max_t | ||U(t)v|| - ||v|| |`.
    pub unitarity: f64,
}

impl GeneratorReport {
    pub fn max_defect(&self) -> f64 {
        self.defect_u.iter().chain(&self.defect_v).copied().fold(0.0, f64::max)
    }
}

pub fn group_generator_check(j: usize, t_seq: &[f64], v: &FockVector) -> Result<GeneratorReport> {
    v.require_one_dim()?;
    if j != 0 {
        return Err(Error::param("j", format!("coordinate index {j} out of range for d = 1")));
    }
    let edge = v.coeffs[v.truncation].norm();
    if v.tail.max(edge) >= 1e-10 {
        return Err(Error::DivergentTail { tail: v.tail.max(edge), tolerance: 1e-10 });
    }
    let (a, b) = position_momentum(v.truncation)?;
    let ia = a.apply(v)?.scale(I);
    let ib = b.apply(v)?.scale(I);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut report = GeneratorReport { t: t_seq.to_vec(), defect_u: vec![], defect_v: vec![], unitarity: 0.0 };
    for &t in t_seq {
        if t == 0.0 {
            return Err(Error::param("t", "difference quotient needs t != 0"));
        }
        let u = translate_op(Complex64::new(0.0, t * s), v)?;
        let w = translate_op(Complex64::new(t * s, 0.0), v)?;
        report.defect_u.push(u.sub(v).scale(Complex64::new(1.0 / t, 0.0)).sub(&ia).norm());
        report.defect_v.push(w.sub(v).scale(Complex64::new(1.0 / t, 0.0)).sub(&ib).norm());
        report.unitarity = report.unitarity.max((u.norm() - v.norm()).abs());
    }
    Ok(report)
}

/// `exp(i(x A + xi B))` as the matrix exponential of the truncated tridiagonal generator.
pub fn fock_displacement(x: f64, xi: f64, truncation: usize) -> Result<FockOperator> {
    if x.abs() > 4.0 || xi.abs() > 4.0 {
        return Err(Error::param("(x, xi)", format!("need |x|, |xi| <= 4, got ({x}, {xi})")));
    }
    let (a, b) = position_momentum(truncation)?;
    let gen = (&a.matrix * Complex64::new(0.0, x)) + (&b.matrix * Complex64::new(0.0, xi));
    FockOperator::new(format!("exp(i({x} A + {xi} B))"), 1, truncation, gen.exp())
}

/// Measured phase between `exp(i(x A + xi B))` and `T_a`, `a = (xi + i x)/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementPhase {
    pub phase: Complex64,
    /// Largest deviation of the per-basis-vector phases from `phase`.
    pub spread: f64,
}

/// Compares both routes on `e_0 .. e_{window - 1}`.
pub fn displacement_phase(x: f64, xi: f64, truncation: usize, window: usize) -> Result<DisplacementPhase> {
    let d = fock_displacement(x, xi, truncation)?;
    let a = weyl_parameter(x, xi);
    let mut phases = Vec::with_capacity(window);
    for k in 0..window.max(1) {
        let e = FockVector::basis(truncation, k)?;
        let lhs = d.apply(&e)?;
        let rhs = translate_op(a, &e)?;
        phases.push(rhs.inner(&lhs) / rhs.inner(&rhs));
    }
    let phase = phases[0];
    let spread = phases.iter().map(|p| (p - phase).norm()).fold(0.0, f64::max);
    Ok(DisplacementPhase { phase, spread })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylPhase {
    /// `<w2, w1> / <w2, w2>` with `w1 = e^{isA} e^{itB} v`, `w2 = e^{itB} e^{isA} v`.
    pub phase: Complex64,
    pub expected: Complex64,
    /// `|phase - e^{-ist}|`.
    pub defect: f64,
    /// `||w1 - phase w2||_2`.
    pub residual: f64,
}

/// Test vector: the coherent state at `alpha = 3`, so that truncation effects are visible at small `N`.
pub fn weyl_relation_check(s: f64, t: f64, truncation: usize) -> Result<WeylPhase> {
    if s.abs() > 2.0 || t.abs() > 2.0 {
        return Err(Error::param("(s, t)", format!("need |s|, |t| <= 2, got ({s}, {t})")));
    }
    let v = FockVector::coherent(Complex64::new(3.0, 0.0), truncation)?;
    let q = fock_displacement(s, 0.0, truncation)?;
    let p = fock_displacement(0.0, t, truncation)?;
    let w1 = q.apply(&p.apply(&v)?)?;
    let w2 = p.apply(&q.apply(&v)?)?;
    let phase = w2.inner(&w1) / w2.inner(&w2);
    let expected = Complex64::from_polar(1.0, -s * t);
    let residual = w1.sub(&w2.scale(phase)).norm();
    Ok(WeylPhase { phase, expected, defect: (phase - expected).norm(), residual })
}

/// `f(L)`: `c_k -> f(|k| + d/2) c_k`.
pub fn apply_fock_multiplier(f: &Multiplier, v: &FockVector) -> FockVector {
    let n1 = v.truncation + 1;
    let half = v.dim as f64 / 2.0;
    let coeffs = v
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let degree = if v.dim == 1 { idx } else { idx / n1 + idx % n1 };
            f.value_at(degree as f64 + half) * c
        })
        .collect();
    FockVector { coeffs, ..v.clone() }
}

/// `f(L)` as a diagonal operator.
pub fn fock_multiplier_operator(f: &Multiplier, dim: usize, truncation: usize) -> Result<FockOperator> {
    let n1 = truncation + 1;
    let half = dim as f64 / 2.0;
    check_dim(dim)?;
    let entries: Vec<Complex64> = (0..n1.pow(dim as u32))
        .map(|idx| {
            let degree = if dim == 1 { idx } else { idx / n1 + idx % n1 };
            f.value_at(degree as f64 + half)
        })
        .collect();
    FockOperator::diagonal(format!("{f}(L)"), dim, truncation, &entries)
}

/// `exp(i(x A + xi B))` on the truncated space, through the spectral decomposition of `A`:
/// `x A + xi B = r D A D^*` with `D = diag(e^{i k theta})`, `x + i xi = r e^{i theta}`.
/// Identical to [`fock_displacement`] up to rounding, at `O(N^2)` per point.
#[derive(Debug, Clone)]
pub struct FockAction {
    truncation: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl FockAction {
    pub fn new(truncation: usize) -> Result<Self> {
        check_truncation(truncation)?;
        let n = truncation + 1;
        let mut a = DMatrix::zeros(n, n);
        for k in 0..truncation {
            let v = ((k + 1) as f64 / 2.0).sqrt();
            a[(k + 1, k)] = v;
            a[(k, k + 1)] = v;
        }
        let eig = SymmetricEigen::new(a);
        Ok(FockAction { truncation, eigenvalues: eig.eigenvalues.as_slice().to_vec(), eigenvectors: eig.eigenvectors })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

impl WeylAction for FockAction {
    type Vector = FockVector;

    fn dim(&self) -> usize {
        1
    }

    fn accumulate(&self, p: &PhasePoint, c: Complex64, v: &FockVector, out: &mut FockVector) -> Result<()> {
        v.require_one_dim()?;
        if v.truncation != self.truncation {
            return Err(Error::DimensionMismatch { expected: self.truncation + 1, found: v.len() });
        }
        let (x, xi) = (p.x()[0], p.xi()[0]);
        let r = x.hypot(xi);
        let rot = if r > 0.0 { Complex64::new(x / r, xi / r) } else { ONE };
        let n = self.truncation + 1;
        let mut w: Vec<Complex64> = Vec::with_capacity(n);
        // D^* v
        let mut ph = ONE;
        for k in 0..n {
            w.push(ph.conj() * v.coeffs[k]);
            ph *= rot;
        }
        // V^T w, then the spectral factor
        let vt: Vec<Complex64> = (0..n)
            .map(|j| {
                let col = self.eigenvectors.column(j);
                let s: Complex64 = (0..n).map(|k| w[k] * col[k]).sum();
                s * Complex64::from_polar(1.0, r * self.eigenvalues[j])
            })
            .collect();
        let mut ph = c;
        for k in 0..n {
            let s: Complex64 = (0..n).map(|j| vt[j] * self.eigenvectors[(k, j)]).sum();
            out.coeffs[k] += ph * s;
            ph *= rot;
        }
        Ok(())
    }

    fn spatial_extent(&self, _v: &FockVector) -> f64 {
        (2.0 * self.truncation as f64 + 1.0).sqrt()
    }

    fn quantize(&self, g: &WeylSymbol, v: &FockVector) -> Result<Quantized<FockVector>> {
        direct_quantize(self, g, v)
    }
}

/// Box `[-extent, extent]^2` and step of the `A^{p,q}` quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub extent: f64,
    pub step: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { extent: 8.0, step: 0.02 }
    }
}

impl QuadSpec {
    pub fn new(extent: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && extent > 0.0 && step.is_finite() && extent.is_finite()) {
            return Err(Error::param("quadrature", format!("need extent, step > 0, got ({extent}, {step})")));
        }
        Ok(QuadSpec { extent, step })
    }

    fn half_count(&self) -> usize {
        (self.extent / self.step).round() as usize
    }
}

/// Mixed norm `(int (int |f(x+iy)|^p e^{-p|z|^2/2} dx)^{q/p} dy)^{1/q}` on a fixed box.
#[derive(Debug, Clone)]
pub struct ApqEvaluator {
    pub quad: QuadSpec,
    coords: Vec<f64>,
    /// `e^{-c^2/2}` at each coordinate.
    gauss: Vec<f64>,
    /// Trapezoid weights.
    weights: Vec<f64>,
}

impl ApqEvaluator {
    pub fn new(quad: QuadSpec) -> Self {
        let m = quad.half_count() as i64;
        let coords: Vec<f64> = (-m..=m).map(|k| k as f64 * quad.step).collect();
        let gauss = coords.iter().map(|c| (-c * c / 2.0).exp()).collect();
        let mut weights = vec![quad.step; coords.len()];
        weights[0] *= 0.5;
        *weights.last_mut().unwrap() *= 0.5;
        ApqEvaluator { quad, coords, gauss, weights }
    }

    fn check_exponent(name: &'static str, p: f64) -> Result<()> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::param(name, format!("exponent must lie in (1, inf), got {p}")));
        }
        Ok(())
    }

    /// Polynomial coefficients `c_k / sqrt(k!)` up to the effective degree.
    fn monomials(v: &FockVector) -> Vec<Complex64> {
        let deg = v.degree();
        let mut scale = 1.0;
        (0..=deg)
            .map(|k| {
                if k > 0 {
                    scale /= (k as f64).sqrt();
                }
                v.coeffs[k] * scale
            })
            .collect()
    }

    /// `|f(z)| e^{-|z|^2/2}` over the box, rows indexed by `y`.
    pub fn weighted_modulus(&self, v: &FockVector) -> Result<Vec<Vec<f64>>> {
        v.require_one_dim()?;
        let mono = Self::monomials(v);
        Ok(self
            .coords
            .par_iter()
            .zip(&self.gauss)
            .map(|(&y, &gy)| {
                self.coords
                    .iter()
                    .zip(&self.gauss)
                    .map(|(&x, &gx)| {
                        let z = Complex64::new(x, y);
                        let f = mono.iter().rev().fold(ZERO, |acc, c| acc * z + c);
                        f.norm() * gx * gy
                    })
                    .collect()
            })
            .collect())
    }

    /// Mixed norm of sampled `|f| e^{-|z|^2/2}` (rows indexed by `y`).
    pub fn mixed_norm(&self, rows: &[Vec<f64>], p: f64, q: f64) -> f64 {
        let inner: Vec<f64> = rows
            .iter()
            .map(|row| row.iter().zip(&self.weights).map(|(m, w)| m.powf(p) * w).sum::<f64>().powf(1.0 / p))
            .collect();
        inner.iter().zip(&self.weights).map(|(m, w)| m.powf(q) * w).sum::<f64>().powf(1.0 / q)
    }

    /// Estimated norm outside the box relative to the norm, from the radial majorant
    /// `M(r) = sum |c_k| r^k e^{-r^2/2} / sqrt(k!)`.
    pub fn tail_estimate(&self, v: &FockVector, p: f64, norm: f64) -> f64 {
        let mono: Vec<f64> = Self::monomials(v).iter().map(|c| c.norm()).collect();
        let r0 = self.quad.extent;
        let dr = 0.01;
        let steps = 1200;
        let mass: f64 = (0..=steps)
            .map(|i| {
                let r = r0 + i as f64 * dr;
                let m = mono.iter().rev().fold(0.0, |acc, c| acc * r + c) * (-r * r / 2.0).exp();
                let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                w * m.powf(p) * r
            })
            .sum::<f64>()
            * dr
            * 2.0
            * std::f64::consts::PI;
        if norm > 0.0 {
            mass.powf(1.0 / p) / norm
        } else {
            0.0
        }
    }

    pub fn norm(&self, v: &FockVector, p: f64, q: f64) -> Result<f64> {
        Self::check_exponent("p", p)?;
        Self::check_exponent("q", q)?;
        let rows = self.weighted_modulus(v)?;
        let norm = self.mixed_norm(&rows, p, q);
        let tail = self.tail_estimate(v, p.min(q), norm);
        if tail > APQ_TAIL_LIMIT {
            return Err(Error::QuadratureTail { tail, limit: APQ_TAIL_LIMIT });
        }
        Ok(norm)
    }
}

/// [`ApqEvaluator::norm`] on a fresh evaluator.
pub fn apq_norm(v: &FockVector, p: f64, q: f64, quad: QuadSpec) -> Result<f64> {
    ApqEvaluator::new(quad).norm(v, p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite_model::SpectrumConvention;
    use crate::weyl_quantization::{peetre_symbol, weyl_relation_defect, PhaseGrid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_low(n: usize, degree: usize, seed: u64) -> FockVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = FockVector::zeros(1, n).unwrap();
        for k in 0..=degree {
            v.coeffs[k] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let s = 1.0 / v.norm();
        v.scale(c(s, 0.0))
    }

    #[test]
    fn ladder_examples() {
        let (raise, lower) = ladder_matrices(8).unwrap();
        let e0 = FockVector::basis(8, 0).unwrap();
        let e1 = FockVector::basis(8, 1).unwrap();
        assert_eq!(lower.apply(&e1).unwrap().coeffs, e0.coeffs);
        assert_eq!(raise.apply(&e0).unwrap().coeffs, e1.coeffs);
        let comm = lower.commutator(&raise);
        let id = FockOperator::identity(1, 8).unwrap();
        assert!(comm.interior_distance(&id, 8) < 1e-14);
        assert!((comm.matrix[(8, 8)] - c(-8.0, 0.0)).norm() < 1e-12);
        assert!(ladder_matrices(1).is_err());
    }

    #[test]
    fn position_momentum_examples() {
        let n = 64;
        let (a, b) = position_momentum(n).unwrap();
        assert_eq!(a.hermitian_defect(), 0.0);
        assert_eq!(b.hermitian_defect(), 0.0);
        let comm = a.commutator(&b);
        let ii = FockOperator::identity(1, n).unwrap().scaled(I);
        assert!(comm.interior_distance(&ii, n) < 1e-12);
        let l = oscillator_from_products(n).unwrap();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let expected = if i == j { c(i as f64 + 0.5, 0.0) } else { ZERO };
                if i == j {
                    assert!((l.matrix[(i, j)] - expected).norm() < 1e-12);
                } else {
                    assert_eq!(l.matrix[(i, j)], ZERO);
                }
            }
        }
        assert!((l.matrix[(n, n)] - c(n as f64 / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn translate_examples() {
        let v = random_low(64, 10, 1);
        let t0 = translate_op(ZERO, &v).unwrap();
        assert!(t0.sub(&v).norm() < 1e-15);
        let (a, b) = (c(0.7, 0.0), c(0.0, 0.4));
        let ab = translate_op(a, &translate_op(b, &v).unwrap()).unwrap();
        let phase = Complex64::from_polar(1.0, (a.conj() * b).im);
        let direct = translate_op(a + b, &v).unwrap().scale(phase);
        assert!(ab.sub(&direct).norm() <= 1e-8);
        let moved = translate_op(c(2.0, -2.0), &v).unwrap();
        assert!((moved.norm() - v.norm()).abs() <= 1e-8);
        let far = FockVector::basis(64, 60).unwrap();
        assert!(matches!(translate_op(c(3.0, 0.0), &far), Err(Error::DivergentTail { .. })));
    }

    #[test]
    fn translation_cocycle_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = random_low(64, 6, 2);
        for _ in 0..20 {
            let draw = |rng: &mut ChaCha8Rng| {
                let r = 1.5 * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
            };
            let (a, b) = (draw(&mut rng), draw(&mut rng));
            let lhs = translate_op(a, &translate_op(b, &v).unwrap()).unwrap();
            let rhs = translate_op(a + b, &v).unwrap();
            let measured = rhs.inner(&lhs) / rhs.inner(&rhs);
            assert!((measured - Complex64::from_polar(1.0, (a.conj() * b).im)).norm() <= 1e-8);
        }
    }

    #[test]
    fn generator_defect_is_linear() {
        let v = random_low(64, 6, 3);
        let rep = group_generator_check(0, &[1e-2, 1e-3, 1e-4], &v).unwrap();
        for d in [&rep.defect_u, &rep.defect_v] {
            for w in d.windows(2) {
                let ratio = w[0] / w[1];
                assert!((ratio - 10.0).abs() < 0.5, "ratio {ratio}");
            }
        }
        assert!(rep.unitarity < 1e-10);
        let e0 = FockVector::basis(64, 0).unwrap();
        let (a, _) = position_momentum(64).unwrap();
        let iae0 = a.apply(&e0).unwrap().scale(I);
        assert!((iae0.coeffs[1] - c(0.0, std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn displacement_matches_translation() {
        let id = fock_displacement(0.0, 0.0, 16).unwrap();
        assert!(id.interior_distance(&FockOperator::identity(1, 16).unwrap(), 17) < 1e-15);
        let d = fock_displacement(1.3, -0.8, 64).unwrap();
        let dd = d.adjoint().compose(&d);
        assert!(dd.interior_distance(&FockOperator::identity(1, 64).unwrap(), 40) < 1e-8);
        let ph = displacement_phase(1.3, -0.8, 64, 12).unwrap();
        assert!((ph.phase - ONE).norm() < 1e-8);
        assert!(ph.spread < 1e-8);
    }

    #[test]
    fn spectral_action_matches_matrix_exponential() {
        let act = FockAction::new(32).unwrap();
        let v = random_low(32, 8, 4);
        for (x, xi) in [(0.0, 0.0), (0.7, -1.1), (-2.0, 0.3), (0.0, 1.5)] {
            let lhs = act.apply(&PhasePoint::one_dim(x, xi), &v).unwrap();
            let rhs = fock_displacement(x, xi, 32).unwrap().apply(&v).unwrap();
            assert!(lhs.sup_distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn weyl_relation_examples() {
        let zero = weyl_relation_check(0.0, 1.3, 64).unwrap();
        assert!((zero.phase - ONE).norm() < 1e-12);
        let w64 = weyl_relation_check(1.0, 1.0, 64).unwrap();
        assert!(w64.defect <= 1e-6);
        let w32 = weyl_relation_check(1.0, 1.0, 32).unwrap();
        assert!(w64.defect < w32.defect);
        let act = FockAction::new(64).unwrap();
        let v = FockVector::coherent(c(1.0, 0.5), 64).unwrap();
        assert!(weyl_relation_defect(&act, 1.0, 1.0, &v).unwrap() < 1e-6);
    }

    #[test]
    fn multiplier_examples() {
        let v = random_low(64, 12, 5);
        let one = Multiplier::constant(1.0);
        assert_eq!(apply_fock_multiplier(&one, &v), v);
        let heat = Multiplier::heat(0.3).unwrap();
        let out = apply_fock_multiplier(&heat, &v);
        for k in 0..=64 {
            let expected = v.coeffs[k] * (-0.3 * (k as f64 + 0.5)).exp();
            assert!((out.coeffs[k] - expected).norm() < 1e-15);
        }
        let bump = Multiplier::gaussian_bump(3.0, 1.0).unwrap();
        let fh = fock_multiplier_operator(&bump, 1, 64).unwrap();
        let gh = fock_multiplier_operator(&heat, 1, 64).unwrap();
        assert_eq!(fh.compose(&gh).matrix, gh.compose(&fh).matrix);
        assert_eq!(fh.apply(&v).unwrap(), apply_fock_multiplier(&bump, &v));
        // d = 2: e_(1,2) has eigenvalue 4
        let e = FockVector::basis_multi(8, &[1, 2]).unwrap();
        let out = apply_fock_multiplier(&heat, &e);
        assert!((out.coeffs[9 + 2] - c((-1.2f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn multiplier_route_equivalence() {
        let n = 64;
        let v = random_low(n, 8, 6);
        let bump = Multiplier::gaussian_bump(3.0, 1.0).unwrap();
        let grid = PhaseGrid::new(1, 12.0, 0.1).unwrap();
        let sym = peetre_symbol(&bump, 1, 60, SpectrumConvention::Oscillator, grid).unwrap();
        let act = FockAction::new(n).unwrap();
        let q = act.quantize(&sym.symbol, &v).unwrap();
        let direct = apply_fock_multiplier(&bump, &v);
        assert!(q.value.sup_distance(&direct) < 1e-3);
    }

    #[test]
    fn apq_examples() {
        let quad = QuadSpec::default();
        let ev = ApqEvaluator::new(quad);
        let e0 = FockVector::basis(64, 0).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ev.norm(&e0, 2.0, 2.0).unwrap() - sqrt_pi).abs() < 1e-6);
        let v = random_low(64, 6, 7);
        let base = ev.norm(&v, 4.0, 4.0 / 3.0).unwrap();
        let scaled = ev.norm(&v.scale(c(-1.5, 2.0)), 4.0, 4.0 / 3.0).unwrap();
        assert!((scaled - 2.5 * base).abs() < 1e-10 * scaled);
        let far = FockVector::basis(64, 40).unwrap();
        assert!(matches!(ev.norm(&far, 2.0, 2.0), Err(Error::QuadratureTail { .. })));
        assert!(ev.norm(&e0, 1.0, 2.0).is_err());
    }

    #[test]
    fn apq_translation_isometry() {
        let ev = ApqEvaluator::new(QuadSpec::default());
        let v = random_low(64, 4, 8);
        let moved = translate_op(c(0.5, 0.0), &v).unwrap();
        for (p, q) in [(2.0, 2.0), (4.0, 4.0), (4.0 / 3.0, 4.0), (4.0, 4.0 / 3.0)] {
            let a = ev.norm(&v, p, q).unwrap();
            let b = ev.norm(&moved, p, q).unwrap();
            assert!((a - b).abs() <= 1e-4 * a, "({p}, {q}): {a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn apq_two_two_is_scaled_coefficient_norm(seed in 0u64..1000) {
            let ev = ApqEvaluator::new(QuadSpec::new(8.0, 0.05).unwrap());
            let constant = ev.norm(&FockVector::basis(64, 0).unwrap(), 2.0, 2.0).unwrap();
            let v = random_low(64, 8, seed);
            let quad = ev.norm(&v, 2.0, 2.0).unwrap();
            prop_assert!((quad - constant * v.norm()).abs() < 1e-6);
        }

        #[test]
        fn translation_is_l2_isometry(re in -2.0f64..2.0, im in -2.0f64..2.0, seed in 0u64..1000) {
            let v = random_low(64, 8, seed);
            let w = translate_op(c(re, im), &v).unwrap();
            prop_assert!((w.norm() - v.norm()).abs() <= 1e-8);
        }
    }
}
