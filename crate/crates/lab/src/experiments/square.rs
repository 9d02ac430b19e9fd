use num_complex::Complex64;
use oscillab_core::fock::FockVector;
use oscillab_core::twisted::HeatSymbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::uniform_complex;
use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::record::{Assertion, Outcome, Table};

const KAPPA_TOL: f64 = 1e-10;
const STABILITY_TOL: f64 = 0.2;
const ONE_TERM_TOL: f64 = 1e-12;
/// Trapezoid in `s = ln r` over `[ln w - 20, ln w + 3]`, `w` the Gaussian width: the integrand decays
/// like `e^{2s}` to the left and doubly exponentially to the right, so the rule converges geometrically.
const KAPPA_STEP: f64 = 0.02;
const KAPPA_LEFT: f64 = 20.0;
const KAPPA_RIGHT: f64 = 3.0;

/// `<e_0, Op(a^_t / (1 + lambda_t)) e_0>` by radial quadrature. The normalized heat symbol
/// quantizes to this scalar times `e^{-t(L - 1/2)}`.
pub fn heat_scalar(t: f64) -> Result<f64> {
    let h = HeatSymbol::new(t)?;
    let ln_w = -0.5 * (h.rate() + 0.25).ln();
    let n = ((KAPPA_LEFT + KAPPA_RIGHT) / KAPPA_STEP).round() as usize;
    let sum: f64 = (0..=n)
        .map(|i| {
            let r2 = (2.0 * (ln_w - KAPPA_LEFT + i as f64 * KAPPA_STEP)).exp();
            h.a_hat_radial(1, r2) * (-0.25 * r2).exp() * r2
        })
        .sum();
    Ok(sum * KAPPA_STEP / (1.0 + h.lambda()))
}

/// Diagonal of `b~_t(A, B)` in the Fock basis: `kappa(2t) e^{-2tk} - kappa(t) e^{-tk}`.
fn b_tilde(kappa_t: f64, kappa_2t: f64, t: f64, truncation: usize) -> Vec<f64> {
    (0..=truncation)
        .map(|k| {
            let k = k as f64;
            kappa_2t * (-2.0 * t * k).exp() - kappa_t * (-t * k).exp()
        })
        .collect()
}

/// Monte-Carlo estimate of `E || sum_j eps_j b~_{t_j} u ||^2` over Rademacher `eps`, with the exact
/// mean `sum_j ||b~_{t_j} u||^2`.
struct RandomizedSum {
    mc: f64,
    exact: f64,
}

fn randomized_sum(images: &[FockVector], draws: usize, rng: &mut ChaCha8Rng) -> RandomizedSum {
    let exact = images.iter().map(|w| w.norm().powi(2)).sum();
    let len = images.first().map_or(0, |w| w.coeffs.len());
    let mut total = 0.0;
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    for _ in 0..draws {
        acc.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for w in images {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            for (a, c) in acc.iter_mut().zip(&w.coeffs) {
                *a += c * sign;
            }
        }
        total += acc.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    RandomizedSum { mc: total / draws as f64, exact }
}

fn apply_diagonal(diag: &[f64], u: &FockVector) -> FockVector {
    let mut out = u.clone();
    for (c, b) in out.coeffs.iter_mut().zip(diag) {
        *c *= b;
    }
    out
}

/// Empirical randomized square function over dyadic times `t_j = 2^{-j} s`, `j = 1..n_terms`.
pub fn run_square_function_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let n = cfg.fock_dim;
    let max_terms = cfg.terms.iter().copied().max().unwrap_or(0);
    if max_terms > 12 {
        return Err(LabError::config("terms", format!("at most 12 dyadic terms, got {max_terms}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let inputs: Vec<FockVector> = (0..cfg.samples)
        .map(|_| {
            let coeffs = (0..=n).map(|_| uniform_complex(&mut rng)).collect();
            let v = FockVector::from_coeffs(n, coeffs)?;
            let s = 1.0 / v.norm();
            Ok(v.scale(Complex64::new(s, 0.0)))
        })
        .collect::<Result<_>>()?;

    let mut kappa_table = Table::new(&["t", "quadrature", "closed_form", "gap"]);
    let mut kappa_gap: f64 = 0.0;
    let mut kappa = |t: f64, table: &mut Table| -> Result<f64> {
        let q = heat_scalar(t)?;
        let closed = 1.0 / (1.0 + HeatSymbol::new(t)?.lambda());
        let gap = (q - closed).abs();
        kappa_gap = kappa_gap.max(gap);
        table.push(vec![t.into(), q.into(), closed.into(), gap.into()]);
        Ok(q)
    };

    let mut ratios = Table::new(&["s", "n_terms", "sup_mc_ratio", "sup_exact_ratio", "max_mc_vs_exact"]);
    let mut sup_ratio: f64 = 0.0;
    let mut stability: f64 = 0.0;
    for &s in &cfg.scale {
        let diagonals: Vec<Vec<f64>> = (1..=max_terms)
            .map(|j| {
                let t = s * 0.5f64.powi(j as i32);
                Ok(b_tilde(kappa(t, &mut kappa_table)?, kappa(2.0 * t, &mut kappa_table)?, t, n))
            })
            .collect::<Result<_>>()?;
        let mut per_terms = Vec::new();
        for &terms in &cfg.terms {
            let mut sup_mc: f64 = 0.0;
            let mut sup_exact: f64 = 0.0;
            let mut mc_gap: f64 = 0.0;
            for u in &inputs {
                let images: Vec<FockVector> = diagonals[..terms].iter().map(|d| apply_diagonal(d, u)).collect();
                let est = randomized_sum(&images, cfg.draws, &mut rng);
                sup_mc = sup_mc.max(est.mc);
                sup_exact = sup_exact.max(est.exact);
                mc_gap = mc_gap.max((est.mc - est.exact).abs() / est.exact);
            }
            ratios.push(vec![s.into(), (terms as f64).into(), sup_mc.into(), sup_exact.into(), mc_gap.into()]);
            sup_ratio = sup_ratio.max(sup_mc);
            per_terms.push((terms, sup_mc));
        }
        let lo = per_terms.iter().min_by_key(|p| p.0);
        let hi = per_terms.iter().max_by_key(|p| p.0);
        if let (Some(&(lo_n, lo_r)), Some(&(hi_n, hi_r))) = (lo, hi) {
            if hi_n > lo_n {
                stability = stability.max((hi_r / lo_r - 1.0).abs());
            }
        }
    }
    out.table("square/kappa", kappa_table);
    out.table("square/ratios", ratios);
    out.real("square/kappa_max_gap", kappa_gap);
    out.real("square/sup_ratio", sup_ratio);
    out.real("square/stability", stability);
    out.check(Assertion::at_most("square/kappa_quadrature_vs_closed_form", kappa_gap, KAPPA_TOL));
    out.check(Assertion::holds("square/sup_ratio_finite", sup_ratio, f64::INFINITY, sup_ratio.is_finite()));
    out.check(Assertion::at_most("square/stable_across_terms", stability, STABILITY_TOL));
    out.text("square/note", "empirical ratio; no theorem constant is asserted");

    // eps = 0 sends every input to zero
    let d = b_tilde(heat_scalar(0.5)?, heat_scalar(1.0)?, 0.5, n);
    let zero_draw = inputs.iter().map(|u| apply_diagonal(&d, u).scale(Complex64::new(0.0, 0.0)).norm()).fold(0.0, f64::max);
    out.check(Assertion::at_most("square/zero_signs", zero_draw, 0.0));

    // a single term has eps^2 = 1 on every draw
    if let Some(u) = inputs.first() {
        let t = 0.5;
        let d = b_tilde(heat_scalar(t)?, heat_scalar(2.0 * t)?, t, n);
        let image = apply_diagonal(&d, u);
        let direct = image.norm().powi(2);
        let est = randomized_sum(std::slice::from_ref(&image), cfg.draws, &mut rng);
        let gap = (est.mc - direct).abs() / direct;
        out.real("square/one_term_direct", direct);
        out.check(Assertion::at_most("square/one_term_matches_direct", gap, ONE_TERM_TOL));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_scalar_matches_closed_form() {
        for t in [1e-3, 0.01, 0.5, 1.0, 4.0] {
            let closed = 1.0 / (1.0 + HeatSymbol::new(t).unwrap().lambda());
            assert!((heat_scalar(t).unwrap() - closed).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn b_tilde_bottom_entry() {
        let d = b_tilde(0.9, 0.8, 0.1, 8);
        assert!((d[0] - (0.8 - 0.9)).abs() < 1e-15);
        assert!(d.iter().all(|b| b.is_finite()));
    }
}
