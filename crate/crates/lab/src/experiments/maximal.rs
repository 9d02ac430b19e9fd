use oscillab_core::fock::{apply_fock_multiplier, ApqEvaluator, FockVector, QuadSpec};
use oscillab_core::multiplier::{hormander_sum_norm, CutOff, GeometricGrid, Multiplier};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{fmt_exp, random_fock};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{Assertion, Outcome, Table};

const REFINEMENT_TOL: f64 = 0.05;
const SINGLETON_TOL: f64 = 1e-12;

/// `|(f(tL) u)(z)| e^{-|z|^2/2}` maximized over `t` at every quadrature node.
fn maximal_modulus(f: &Multiplier, ts: &[f64], u: &FockVector, ev: &ApqEvaluator) -> Result<Vec<Vec<f64>>> {
    let mut acc: Option<Vec<Vec<f64>>> = None;
    for &t in ts {
        let rows = ev.weighted_modulus(&apply_fock_multiplier(&f.dilate(t)?, u))?;
        match acc.as_mut() {
            None => acc = Some(rows),
            Some(m) => {
                for (mr, r) in m.iter_mut().zip(&rows) {
                    for (a, b) in mr.iter_mut().zip(r) {
                        *a = a.max(*b);
                    }
                }
            }
        }
    }
    Ok(acc.unwrap_or_default())
}

/// Maximal function `sup_t |f(tL) u|` in `A^{p,q}` against the dyadic Hormander sum times `||u||`.
pub fn run_maximal_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let ev = ApqEvaluator::new(QuadSpec::new(cfg.quad_extent, cfg.quad_step)?);
    let grid = cfg.t_grid.geometric()?;
    let coarse = grid.points();
    let fine = grid.refined().points();
    let eta = CutOff::standard_plateau();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let inputs: Vec<FockVector> =
        (0..cfg.samples).map(|_| random_fock(cfg.fock_dim, cfg.window, &mut rng)).collect::<Result<_>>()?;

    let mut table =
        Table::new(&["multiplier", "sample", "p", "q", "maximal_norm", "refined_norm", "u_norm", "hormander_sum", "ratio"]);
    let mut refinement: f64 = 0.0;
    let mut sup_ratio: f64 = 0.0;
    for f in cfg.multipliers()? {
        let sum = hormander_sum_norm(&f, &eta, cfg.s)?.value;
        for (i, u) in inputs.iter().enumerate() {
            let rows = maximal_modulus(&f, &coarse, u, &ev)?;
            let rows_fine = maximal_modulus(&f, &fine, u, &ev)?;
            for &(p, q) in &cfg.pq {
                let m = ev.mixed_norm(&rows, p, q);
                let m_fine = ev.mixed_norm(&rows_fine, p, q);
                let nu = ev.norm(u, p, q)?;
                let ratio = m / (sum * nu);
                if m_fine > 0.0 {
                    refinement = refinement.max((m_fine - m).abs() / m_fine);
                }
                sup_ratio = sup_ratio.max(ratio);
                table.push(vec![
                    f.to_string().into(),
                    (i as f64).into(),
                    p.into(),
                    q.into(),
                    m.into(),
                    m_fine.into(),
                    nu.into(),
                    sum.into(),
                    ratio.into(),
                ]);
            }
        }
    }
    out.table("maximal/ratios", table);
    out.real("maximal/sup_ratio", sup_ratio);
    out.real("maximal/refinement_change", refinement);
    out.check(Assertion::at_most("maximal/refinement_2x", refinement, REFINEMENT_TOL));
    out.check(Assertion::holds("maximal/ratio_finite", sup_ratio, f64::INFINITY, sup_ratio.is_finite()));

    // f = 0 has vanishing maximal function; a one-point grid is a single operator
    if let (Some(u), Some(&(p, q))) = (inputs.first(), cfg.pq.first()) {
        let zero = ev.mixed_norm(&maximal_modulus(&Multiplier::constant(0.0), &coarse, u, &ev)?, p, q);
        out.check(Assertion::at_most("maximal/zero_multiplier", zero, 0.0));
        let singleton = GeometricGrid::new(1.0, 1.0, 2.0)?.points();
        for f in cfg.multipliers()? {
            let m = ev.mixed_norm(&maximal_modulus(&f, &singleton, u, &ev)?, p, q);
            let direct = ev.norm(&apply_fock_multiplier(&f, u), p, q)?;
            let gap = if direct > 0.0 { (m - direct).abs() / direct } else { m };
            out.check(Assertion::at_most(
                format!("maximal/singleton_grid/{f}/p={},q={}", fmt_exp(p), fmt_exp(q)),
                gap,
                SINGLETON_TOL,
            ));
        }
    }
    out.text("maximal/note", "empirical ratio; the dyadic sum bound is not certified");
    Ok(out)
}
