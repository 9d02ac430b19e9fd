use oscillab_core::fock::{fock_multiplier_operator, ApqEvaluator, QuadSpec};
use oscillab_core::multiplier::{hormander_norm, CutOff, NormKind};
use oscillab_core::opnorm::{apq_opnorm_lower, SearchConfig};

use super::{fmt_exp, spread};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{Assertion, Cell, Outcome, Table};

const SPREAD_TOL: f64 = 0.25;

/// `A^{p,q}` lower bounds of `f(L)` against `||f||_{Hormander} + |f(0+)|` across a multiplier family.
pub fn run_mihlin_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let ev = ApqEvaluator::new(QuadSpec::new(cfg.quad_extent, cfg.quad_step)?);
    let search = SearchConfig { trials: cfg.trials, max_iter: cfg.max_iter, tol: 1e-8, seed: cfg.seed };
    let eta = CutOff::standard();
    let t_grid = cfg.t_grid.geometric()?;
    let s_inf = cfg.s.ceil();

    let mut table = Table::new(&[
        "multiplier",
        "p",
        "q",
        "lower_bound",
        "converged",
        "hormander_2",
        "hormander_inf",
        "f0",
        "ratio",
    ]);
    let mults = cfg.multipliers()?;
    let mut ratios: Vec<Vec<f64>> = vec![Vec::with_capacity(mults.len()); cfg.pq.len()];
    for f in &mults {
        let op = fock_multiplier_operator(f, 1, cfg.fock_dim)?;
        let h2 = hormander_norm(f, &eta, cfg.s, NormKind::Two, &t_grid)?.value;
        let hinf = hormander_norm(f, &eta, s_inf, NormKind::Inf, &t_grid)?.value;
        let f0 = f.abs_limit_at_zero();
        for (i, &(p, q)) in cfg.pq.iter().enumerate() {
            let est = apq_opnorm_lower(&op, p, q, cfg.window, search, &ev)?;
            let ratio = est.lower_bound / (h2 + f0);
            ratios[i].push(ratio);
            table.push(vec![
                f.to_string().into(),
                p.into(),
                q.into(),
                est.lower_bound.into(),
                Cell::Num(est.converged as u8 as f64),
                h2.into(),
                hinf.into(),
                f0.into(),
                ratio.into(),
            ]);
        }
    }
    out.table("mihlin/ratios", table);

    let mut worst_spread: f64 = 0.0;
    for (i, &(p, q)) in cfg.pq.iter().enumerate() {
        let tag = format!("p={},q={}", fmt_exp(p), fmt_exp(q));
        let max = ratios[i].iter().copied().fold(0.0, f64::max);
        let sp = spread(&ratios[i]);
        worst_spread = worst_spread.max(sp);
        out.real(format!("mihlin/max_ratio/{tag}"), max);
        out.real(format!("mihlin/spread/{tag}"), sp);
        let finite = ratios[i].iter().all(|r| r.is_finite());
        out.check(Assertion::holds(format!("mihlin/ratio_finite/{tag}"), max, f64::INFINITY, finite));
        out.check(Assertion::at_most(format!("mihlin/ratio_stable/{tag}"), sp, SPREAD_TOL));
    }
    out.real("mihlin/worst_spread", worst_spread);
    out.text(
        "mihlin/note",
        "lower bounds from a finite search over a truncated Fock space; these ratios do not certify any theorem constant",
    );
    Ok(out)
}
