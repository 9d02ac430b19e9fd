use oscillab_core::hermite_model::{GridSpec, SpectrumConvention};
use oscillab_core::multiplier::{Family, Multiplier};
use oscillab_core::specfun::PhasePoint;
use oscillab_core::twisted::{
    apply_twisted_multiplier, fourier_pair_check, gaussian_bound_check, generating_function_check, heat_twisted,
    heat_twisted_fast, laguerre_series_check,
};
use oscillab_core::weyl_quantization::PhaseGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::random_twisted;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{Assertion, Outcome, Table};

const SERIES_TERMS: usize = 200;
const SERIES_TOL: f64 = 1e-6;
const GENERATING_TERMS: usize = 400;
const GENERATING_TOL: f64 = 1e-8;
const FOURIER_TOL: f64 = 1e-8;
const SEMIGROUP_TOL: f64 = 1e-6;
const ROUTE_TOL: f64 = 1e-3;

/// Laguerre series and generating function, the transform pair `a_t <-> a^_t`,
/// the twisted heat semigroup by two routes, and the fitted Gaussian kernel bound.
pub fn run_verify_heat(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();

    let mut series_gap: f64 = 0.0;
    for i in -16..=16 {
        for j in -16..=16 {
            let p = PhasePoint::one_dim(0.25 * i as f64, 0.25 * j as f64);
            series_gap = series_gap.max(laguerre_series_check(0.5, &p, SERIES_TERMS)?.gap);
        }
    }
    out.real("laguerre_series/sup_gap", series_gap);
    out.check(Assertion::at_most("laguerre_series/t=0.5/sup_gap", series_gap, SERIES_TOL));

    let a_values = [-0.25, 0.0, 0.5, 1.0, 1.0 / 0.7f64.exp_m1(), 2.0];
    let r_values = [0.0, 0.5, 1.0, 2.0, 4.0];
    let mut gen_gap: f64 = 0.0;
    for a in a_values {
        for r in r_values {
            gen_gap = gen_gap.max(generating_function_check(a, r, GENERATING_TERMS)?.gap);
        }
    }
    out.real("generating_function/sup_gap", gen_gap);
    out.check(Assertion::at_most("generating_function/sup_gap", gen_gap, GENERATING_TOL));

    let mut fourier = Table::new(&["t", "sup_error"]);
    for t in [0.25, 0.5, 1.0] {
        let err = fourier_pair_check(t, 128, 0.2)?;
        fourier.push(vec![t.into(), err.into()]);
        out.check(Assertion::at_most(format!("fourier_pair/t={t}"), err, FOURIER_TOL));
    }
    out.table("fourier_pair", fourier);

    let spec = GridSpec::isotropic(2, cfg.twisted_extent, cfg.twisted_step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let u = random_twisted(&spec, &mut rng)?;

    let quarter = heat_twisted(0.25, &u)?;
    let twice = heat_twisted(0.25, &quarter)?;
    let half = heat_twisted(0.5, &u)?;
    let semigroup = twice.sub(&half).0.norm() / half.0.norm();
    out.real("twisted/semigroup_defect", semigroup);
    out.check(Assertion::at_most("twisted/semigroup/s=t=0.25", semigroup, SEMIGROUP_TOL));

    let fast = heat_twisted_fast(0.25, &u)?;
    let kernel_routes = fast.sub(&quarter).sup_norm() / quarter.sup_norm();
    out.real("twisted/direct_vs_fft_relative", kernel_routes);
    out.check(Assertion::at_most("twisted/direct_vs_fft", kernel_routes, 1e-10));

    let grid = PhaseGrid::new(1, cfg.twisted_extent, cfg.twisted_step)?;
    for f in cfg.multipliers()? {
        let Family::Heat { t } = *f.family() else { continue };
        let t = t * f.scale();
        let via_symbol = apply_twisted_multiplier(&Multiplier::heat(t)?, &u, cfg.peetre_terms.max(SERIES_TERMS), SpectrumConvention::Shifted, grid)?;
        let kernel = heat_twisted(t, &u)?;
        let gap = via_symbol.value.sub(&kernel).sup_norm();
        out.real(format!("twisted/route_gap/t={t}"), gap);
        out.real(format!("twisted/route_quadrature_estimate/t={t}"), via_symbol.error_estimate);
        out.check(Assertion::at_most(format!("twisted/kernel_vs_quantization/t={t}"), gap, ROUTE_TOL));
    }

    let ts = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0];
    let offsets: Vec<f64> = (0..=24).map(|k| 0.25 * k as f64).collect();
    let bound = gaussian_bound_check(&ts, &offsets, 1)?;
    out.real("gaussian_bound/C", bound.big_c);
    out.real("gaussian_bound/c", bound.small_c);
    out.real("gaussian_bound/max_violation", bound.max_violation);
    out.real("gaussian_bound/checked", bound.checked as f64);
    out.check(Assertion::holds(
        "gaussian_bound/zero_violations",
        bound.violations as f64,
        0.0,
        bound.violations == 0 && bound.big_c.is_finite() && bound.small_c > 0.0,
    ));
    Ok(out)
}
