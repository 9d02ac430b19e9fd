//! Certified lower bounds for operator norms on `l^p` and on the mixed `A^{p,q}` spaces.
//! Every bound is the ratio attained on a stored witness.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{ApqEvaluator, FockOperator, FockVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub lower_bound: f64,
    pub witness: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub trials: usize,
    pub max_iter: usize,
    /// Relative change of the estimate that ends an iteration.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { trials: 32, max_iter: 200, tol: 1e-8, seed: 42 }
    }
}

/// Matrix-free operator with an adjoint.
pub trait LinearOperator: Sync {
    fn cols(&self) -> usize;
    fn rows(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

impl LinearOperator for DMatrix<Complex64> {
    fn cols(&self) -> usize {
        self.ncols()
    }

    fn rows(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.nrows()).map(|i| (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum()).collect()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        (0..self.ncols()).map(|j| (0..self.nrows()).map(|i| self[(i, j)].conj() * y[i]).sum()).collect()
    }
}

impl LinearOperator for FockOperator {
    fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        LinearOperator::apply(&self.matrix, x)
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        LinearOperator::apply_adjoint(&self.matrix, y)
    }
}

pub fn lp_norm(x: &[Complex64], p: f64) -> f64 {
    x.iter().map(|c| c.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Gradient of `||y||_p` at `y`: `|y_i|^{p-1} sgn(y_i) / ||y||_p^{p-1}`.
fn dual_map(y: &[Complex64], p: f64) -> Vec<Complex64> {
    let n = lp_norm(y, p);
    if n == 0.0 {
        return vec![ZERO; y.len()];
    }
    y.iter()
        .map(|c| {
            let r = c.norm();
            if r == 0.0 {
                ZERO
            } else {
                c / r * (r / n).powf(p - 1.0)
            }
        })
        .collect()
}

fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param(name, format!("exponent must lie in (1, inf), got {p}")));
    }
    Ok(())
}

fn check_config(cfg: &SearchConfig) -> Result<()> {
    if cfg.trials == 0 || cfg.max_iter == 0 || !(cfg.tol > 0.0) {
        return Err(Error::param("search", format!("need trials, max_iter >= 1 and tol > 0, got {cfg:?}")));
    }
    Ok(())
}

/// Independent stream per trial, derived from the master seed.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

fn lp_ratio<T: LinearOperator + ?Sized>(t: &T, x: &[Complex64], p: f64) -> f64 {
    let nx = lp_norm(x, p);
    if nx == 0.0 {
        return 0.0;
    }
    lp_norm(&t.apply(x), p) / nx
}

/// Larger bound wins; ties keep the earlier candidate.
fn best(candidates: Vec<NormEstimate>) -> NormEstimate {
    candidates
        .into_iter()
        .reduce(|a, b| if b.lower_bound > a.lower_bound { b } else { a })
        .expect("at least one candidate")
}

/// Generalized power method: `x <- dual_{p'}(T^* dual_p(T x))`, restarted from
/// `trials` Gaussian vectors; basis vectors are scanned as well.
pub fn lp_opnorm_lower<T: LinearOperator + ?Sized>(t: &T, p: f64, cfg: SearchConfig) -> Result<NormEstimate> {
    check_exponent("p", p)?;
    check_config(&cfg)?;
    let n = t.cols();
    let dual_p = p / (p - 1.0);
    let basis = (0..n)
        .map(|i| {
            let mut e = vec![ZERO; n];
            e[i] = Complex64::new(1.0, 0.0);
            NormEstimate { lower_bound: lp_ratio(t, &e, p), witness: e, iterations: 0, converged: true }
        })
        .reduce(|a, b| if b.lower_bound > a.lower_bound { b } else { a });
    let runs: Vec<NormEstimate> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let mut x = gaussian_vector(&mut rng, n);
            let nx = lp_norm(&x, p);
            x.iter_mut().for_each(|c| *c /= nx);
            let mut est = lp_ratio(t, &x, p);
            let mut converged = false;
            let mut iterations = 0;
            while iterations < cfg.max_iter {
                iterations += 1;
                let z = t.apply_adjoint(&dual_map(&t.apply(&x), p));
                let next = dual_map(&z, dual_p);
                if next.iter().all(|c| *c == ZERO) {
                    converged = true;
                    break;
                }
                let next_est = lp_ratio(t, &next, p);
                let change = (next_est - est).abs();
                if next_est >= est {
                    x = next;
                    est = next_est;
                }
                if change <= cfg.tol * est.max(f64::MIN_POSITIVE) {
                    converged = true;
                    break;
                }
            }
            NormEstimate { lower_bound: est, witness: x, iterations, converged }
        })
        .collect();
    let mut all: Vec<NormEstimate> = basis.into_iter().collect();
    all.extend(runs);
    let mut out = best(all);
    out.lower_bound = lp_ratio(t, &out.witness, p);
    Ok(out)
}

/// `apq_norm(T v) / apq_norm(v)` with both norms on the same evaluator.
pub fn apq_ratio(t: &FockOperator, v: &FockVector, p: f64, q: f64, ev: &ApqEvaluator) -> Result<f64> {
    let nv = ev.norm(v, p, q)?;
    if nv == 0.0 {
        return Ok(0.0);
    }
    Ok(ev.norm(&t.apply(v)?, p, q)? / nv)
}

/// Best ratio over the basis vectors `e_0 .. e_window`, `trials` random vectors supported
/// on the same window, then coordinate ascent from the best candidate.
pub fn apq_opnorm_lower(
    t: &FockOperator,
    p: f64,
    q: f64,
    window: usize,
    cfg: SearchConfig,
    ev: &ApqEvaluator,
) -> Result<NormEstimate> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    check_config(&cfg)?;
    if t.dim != 1 {
        return Err(Error::Unsupported("A^{p,q} norms are implemented for d = 1 only".into()));
    }
    let n = t.truncation;
    if window > n {
        return Err(Error::DegreeTooLarge { n: window, n_max: n });
    }
    let vector = |coeffs: &[Complex64]| {
        let mut full = vec![ZERO; n + 1];
        full[..coeffs.len()].copy_from_slice(coeffs);
        FockVector::from_coeffs(n, full)
    };
    let ratio = |coeffs: &[Complex64]| -> Result<f64> { apq_ratio(t, &vector(coeffs)?, p, q, ev) };
    let mut starts: Vec<Vec<Complex64>> = (0..=window)
        .map(|k| {
            let mut e = vec![ZERO; window + 1];
            e[k] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    starts.extend((0..cfg.trials).map(|trial| gaussian_vector(&mut trial_rng(cfg.seed, trial), window + 1)));
    let scored: Vec<NormEstimate> = starts
        .into_par_iter()
        .map(|w| Ok(NormEstimate { lower_bound: ratio(&w)?, witness: w, iterations: 0, converged: true }))
        .collect::<Result<_>>()?;
    let mut cur = best(scored);
    let scale = cur.witness.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut delta = 0.5 * scale;
    let mut iterations = 0;
    let mut converged = false;
    let dirs = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut improved = false;
        for k in 0..=window {
            for dir in dirs {
                let mut trial = cur.witness.clone();
                trial[k] += dir * delta;
                let r = ratio(&trial)?;
                if r > cur.lower_bound * (1.0 + cfg.tol) {
                    cur.lower_bound = r;
                    cur.witness = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            delta *= 0.5;
            if delta < 1e-3 * scale {
                converged = true;
                break;
            }
        }
    }
    let lower_bound = ratio(&cur.witness)?;
    let witness = vector(&cur.witness)?.coeffs;
    Ok(NormEstimate { lower_bound, witness, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::QuadSpec;
    use crate::multiplier::Multiplier;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_matrix(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = gaussian_vector(&mut rng, n * n);
        DMatrix::from_vec(n, n, v)
    }

    #[test]
    fn lp_examples() {
        let id = DMatrix::<Complex64>::identity(6, 6);
        for p in [1.5, 2.0, 3.0] {
            assert_eq!(lp_opnorm_lower(&id, p, SearchConfig::default()).unwrap().lower_bound, 1.0);
        }
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(1.0), c(0.5)]));
        for p in [4.0 / 3.0, 2.0, 4.0] {
            let est = lp_opnorm_lower(&diag, p, SearchConfig::default()).unwrap();
            assert!((est.lower_bound - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn two_norm_matches_singular_value() {
        for seed in 0..4 {
            let m = random_matrix(8, seed);
            let sigma = m.clone().svd(false, false).singular_values.max();
            let est = lp_opnorm_lower(&m, 2.0, SearchConfig::default()).unwrap();
            assert!((est.lower_bound - sigma).abs() <= 1e-8 * sigma, "{} vs {sigma}", est.lower_bound);
        }
    }

    #[test]
    fn estimates_are_deterministic_and_certified() {
        let m = random_matrix(10, 9);
        let cfg = SearchConfig { seed: 5, ..SearchConfig::default() };
        let a = lp_opnorm_lower(&m, 3.0, cfg).unwrap();
        let b = lp_opnorm_lower(&m, 3.0, cfg).unwrap();
        assert_eq!(a, b);
        let again = lp_ratio(&m, &a.witness, 3.0);
        assert!((again - a.lower_bound).abs() <= 1e-12 * a.lower_bound);
        // Holder bound for the l^3 norm of a square matrix
        let sigma = m.clone().svd(false, false).singular_values.max();
        assert!(a.lower_bound <= sigma * 10f64.powf(1.0 / 3.0 - 0.5).recip() + 1e-9);
    }

    fn quick() -> (ApqEvaluator, SearchConfig) {
        (ApqEvaluator::new(QuadSpec::new(8.0, 0.05).unwrap()), SearchConfig { trials: 4, max_iter: 20, ..SearchConfig::default() })
    }

    #[test]
    fn apq_examples() {
        let (ev, cfg) = quick();
        let id = FockOperator::identity(1, 32).unwrap();
        let est = apq_opnorm_lower(&id, 4.0, 4.0 / 3.0, 4, cfg, &ev).unwrap();
        assert!((est.lower_bound - 1.0).abs() < 1e-10);

        let f = Multiplier::heat(0.7).unwrap();
        let t = crate::fock::fock_multiplier_operator(&f, 1, 32).unwrap();
        let est = apq_opnorm_lower(&t, 4.0, 4.0, 4, cfg, &ev).unwrap();
        for k in 0..=4 {
            let e = FockVector::basis(32, k).unwrap();
            let on_basis = apq_ratio(&t, &e, 4.0, 4.0, &ev).unwrap();
            assert!(est.lower_bound >= on_basis - 1e-6);
        }
        let v = FockVector::from_coeffs(32, est.witness.clone()).unwrap();
        let again = apq_ratio(&t, &v, 4.0, 4.0, &ev).unwrap();
        assert!((again - est.lower_bound).abs() <= 1e-12 * est.lower_bound);
    }

    #[test]
    fn apq_homogeneity() {
        let (ev, cfg) = quick();
        let f = Multiplier::imaginary_power(1.0).unwrap();
        let t = crate::fock::fock_multiplier_operator(&f, 1, 32).unwrap();
        let a = apq_opnorm_lower(&t, 4.0, 4.0 / 3.0, 4, cfg, &ev).unwrap();
        let b = apq_opnorm_lower(&t.scaled(c(2.0)), 4.0, 4.0 / 3.0, 4, cfg, &ev).unwrap();
        assert!((b.lower_bound - 2.0 * a.lower_bound).abs() <= 1e-10 * b.lower_bound);
        assert_eq!(a, apq_opnorm_lower(&t, 4.0, 4.0 / 3.0, 4, cfg, &ev).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn bound_never_exceeds_one_norm_row_bound(seed in 0u64..10_000, p in 1.2f64..5.0) {
            let m = random_matrix(5, seed);
            let est = lp_opnorm_lower(&m, p, SearchConfig { trials: 4, ..SearchConfig::default() }).unwrap();
            // ||T||_p <= ||T||_1^{1/p} ||T||_inf^{1-1/p} (Riesz-Thorin)
            let col = (0..5).map(|j| (0..5).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
            let row = (0..5).map(|i| (0..5).map(|j| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
            let upper = col.powf(1.0 / p) * row.powf(1.0 - 1.0 / p);
            prop_assert!(est.lower_bound <= upper * (1.0 + 1e-12));
            prop_assert!(est.lower_bound >= m.clone().svd(false, false).singular_values.max() * 5f64.powf(-(0.5 - 1.0 / p).abs()) * (1.0 - 1e-9));
        }
    }
}
