use num_complex::Complex64;
use oscillab_core::fock::{fock_multiplier_operator, ApqEvaluator, QuadSpec};
use oscillab_core::hermite_model::{GridSpec, SpectrumConvention};
use oscillab_core::multiplier::{Family, Multiplier};
use oscillab_core::opnorm::{apq_opnorm_lower, SearchConfig};
use oscillab_core::twisted::{apply_twisted_multiplier, heat_twisted_fast, TwistedGridFunction};
use oscillab_core::weyl_quantization::{PhaseGrid, PhaseVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{fmt_exp, random_twisted, spread};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{Assertion, Outcome, Table};

const WITNESS_TOL: f64 = 1e-3;
const IDENTITY_TOL: f64 = 1e-10;

/// Lower bound for `||f(L~)||` on `L^2(R^2)` after `iterations` power steps.
fn twisted_norm_lower(f: &Multiplier, start: &TwistedGridFunction, iterations: usize, cfg: &ExperimentConfig) -> Result<f64> {
    if let Some(c) = f.as_constant() {
        return Ok(c.abs());
    }
    let step = |u: &TwistedGridFunction| -> Result<TwistedGridFunction> {
        if let Family::Heat { t } = *f.family() {
            // f(L~) = e^{-t/2} e^{-t(L~ - 1/2)}
            let t = t * f.scale();
            let mut out = u.zeros_like();
            out.axpy(Complex64::new((-0.5 * t).exp(), 0.0), &heat_twisted_fast(t, u)?);
            return Ok(out);
        }
        let grid = PhaseGrid::new(1, cfg.twisted_extent, cfg.twisted_step)?;
        Ok(apply_twisted_multiplier(f, u, cfg.peetre_terms, SpectrumConvention::Oscillator, grid)?.value)
    };
    let mut u = start.clone();
    let mut ratio = 0.0;
    for _ in 0..iterations.max(1) {
        let n = u.norm();
        let image = step(&u)?;
        let m = image.norm();
        ratio = m / n;
        if m == 0.0 {
            break;
        }
        u = TwistedGridFunction::new(image.0.scale(Complex64::new(1.0 / m, 0.0)))?;
    }
    Ok(ratio)
}

/// The same multiplier on the Fock oscillator (`A^{p,p}` lower bound) and on the twisted
/// Laplacian (`L^2(R^2)` lower bound), with their ratio across the family.
pub fn run_transference_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let ev = ApqEvaluator::new(QuadSpec::new(cfg.quad_extent, cfg.quad_step)?);
    let search = SearchConfig { trials: cfg.trials, max_iter: cfg.max_iter, tol: 1e-8, seed: cfg.seed };
    let spec = GridSpec::isotropic(2, cfg.twisted_extent, cfg.twisted_step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = random_twisted(&spec, &mut rng)?;
    let exps: Vec<f64> = cfg.pq.iter().filter(|(p, q)| p == q).map(|(p, _)| *p).collect();

    let mut table = Table::new(&["multiplier", "p", "fock_lower", "twisted_lower", "ratio"]);
    let mut ratios: Vec<Vec<f64>> = vec![Vec::new(); exps.len()];
    let heat_floor = (-0.5f64).exp() * (1.0 - WITNESS_TOL);
    for f in cfg.multipliers()? {
        let rhs = twisted_norm_lower(&f, &start, cfg.max_iter, cfg)?;
        let op = fock_multiplier_operator(&f, 1, cfg.fock_dim)?;
        let heat_one = matches!(*f.family(), Family::Heat { t } if t * f.scale() == 1.0);
        let identity = f.as_constant() == Some(1.0);
        for (i, &p) in exps.iter().enumerate() {
            let lhs = apq_opnorm_lower(&op, p, p, cfg.window, search, &ev)?.lower_bound;
            let ratio = lhs / rhs;
            ratios[i].push(ratio);
            table.push(vec![f.to_string().into(), p.into(), lhs.into(), rhs.into(), ratio.into()]);
            let tag = format!("{f}/p={}", fmt_exp(p));
            if heat_one {
                out.check(Assertion::at_least(format!("transference/bottom_witness/fock/{tag}"), lhs, heat_floor));
                out.check(Assertion::at_least(format!("transference/bottom_witness/twisted/{tag}"), rhs, heat_floor));
            }
            if identity {
                let gap = (lhs - 1.0).abs().max((rhs - 1.0).abs());
                out.check(Assertion::at_most(format!("transference/identity/{tag}"), gap, IDENTITY_TOL));
            }
        }
    }
    out.table("transference/ratios", table);
    for (i, &p) in exps.iter().enumerate() {
        out.real(format!("transference/ratio_spread/p={}", fmt_exp(p)), spread(&ratios[i]));
    }
    out.text(
        "transference/note",
        "scalar-valued X only; the tensor norm with a general Banach space X is out of numerical reach, and no constant is asserted",
    );
    Ok(out)
}
