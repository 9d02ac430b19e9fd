use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use oscillab_core::fock::{
    apply_fock_multiplier, displacement_phase, group_generator_check, ladder_matrices, oscillator_from_products,
    position_momentum, translate_op, weyl_relation_check, ApqEvaluator, FockAction, FockOperator, QuadSpec,
};
use oscillab_core::hermite_model::{Axis, GridSpec, SpectrumConvention};
use oscillab_core::twisted::{TwistedAction, TwistedGridFunction};
use oscillab_core::weyl_quantization::{peetre_symbol, weyl_relation_defect, PhaseGrid, PhaseVector, SchrodingerAction, WeylAction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fmt_exp, random_fock};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::record::{Assertion, Outcome, Table};

const EXACT_TOL: f64 = 1e-12;
const COCYCLE_TOL: f64 = 1e-8;
const APQ_ISOMETRY_TOL: f64 = 1e-4;
const FOCK_WEYL_TOL: f64 = 1e-6;
const GRID_WEYL_TOL: f64 = 1e-10;
const ROUTE_TOL: f64 = 1e-3;
/// Fock vectors reach out to `sqrt(2N + 1)`, so the Schrodinger phase step is too fine to afford here.
const FOCK_PHASE_STEP: f64 = 0.1;
/// Translations are drawn from the disc `|a| <= 1.5`, so `|a + b| <= 3`.
const DISC_RADIUS: f64 = 1.5;
const WEYL_PARAMS: [f64; 3] = [0.5, 1.0, PI / 3.0];

/// Ladder algebra, translations and their cocycle, generators, the Weyl pair in three
/// representations, and `f(L)` by the diagonal and the quantization routes.
pub fn run_verify_fock(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let n = cfg.fock_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (raise, lower) = ladder_matrices(n)?;
    let id = FockOperator::identity(1, n)?;
    let ladder = lower.commutator(&raise).interior_distance(&id, n);
    out.real("ladder/commutator_interior_deviation", ladder);
    out.check(Assertion::at_most("ladder/[a,a*]=I_interior", ladder, EXACT_TOL));

    let (a, b) = position_momentum(n)?;
    let herm = a.hermitian_defect().max(b.hermitian_defect());
    out.check(Assertion::at_most("position_momentum/hermitian", herm, 0.0));
    let ccr = a.commutator(&b).interior_distance(&id.scaled(Complex64::new(0.0, 1.0)), n);
    out.real("position_momentum/ccr_interior_deviation", ccr);
    out.check(Assertion::at_most("position_momentum/[A,B]=iI_interior", ccr, EXACT_TOL));

    let l = oscillator_from_products(n)?;
    let mut diag_dev: f64 = 0.0;
    let mut off_diag: f64 = 0.0;
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            if i == j {
                diag_dev = diag_dev.max((l.matrix[(i, i)] - Complex64::new(i as f64 + 0.5, 0.0)).norm());
            } else {
                off_diag = off_diag.max(l.matrix[(i, j)].norm());
            }
        }
    }
    out.real("oscillator/diagonal_deviation", diag_dev);
    out.real("oscillator/off_diagonal_max", off_diag);
    out.check(Assertion::at_most("oscillator/diagonal_k+1/2", diag_dev, EXACT_TOL));
    out.check(Assertion::at_most("oscillator/off_diagonal_zero", off_diag, 0.0));

    // translations
    let v = random_fock(n, cfg.window, &mut rng)?;
    let mut cocycle: f64 = 0.0;
    let mut phase_gap: f64 = 0.0;
    let mut isometry: f64 = 0.0;
    for _ in 0..cfg.samples {
        let mut draw = || Complex64::from_polar(DISC_RADIUS * rng.random::<f64>().sqrt(), rng.random_range(0.0..TAU));
        let (ta, tb) = (draw(), draw());
        let lhs = translate_op(ta, &translate_op(tb, &v)?)?;
        let rhs = translate_op(ta + tb, &v)?;
        let expected = Complex64::from_polar(1.0, (ta.conj() * tb).im);
        cocycle = cocycle.max(lhs.sub(&rhs.scale(expected)).norm());
        phase_gap = phase_gap.max((rhs.inner(&lhs) / rhs.inner(&rhs) - expected).norm());
        isometry = isometry.max((translate_op(ta, &v)?.norm() - v.norm()).abs());
    }
    out.real("translate/cocycle_defect", cocycle);
    out.real("translate/cocycle_phase_gap", phase_gap);
    out.real("translate/l2_isometry_defect", isometry);
    out.check(Assertion::at_most("translate/cocycle", cocycle.max(phase_gap), COCYCLE_TOL));
    out.check(Assertion::at_most("translate/l2_isometry", isometry, COCYCLE_TOL));

    let ev = ApqEvaluator::new(QuadSpec::new(cfg.quad_extent, cfg.quad_step)?);
    let w = random_fock(n, 4, &mut rng)?;
    let moved = translate_op(Complex64::new(0.5, 0.0), &w)?;
    let mut apq = Table::new(&["p", "q", "norm", "translated_norm", "relative_change"]);
    for &(p, q) in &cfg.pq {
        let before = ev.norm(&w, p, q)?;
        let after = ev.norm(&moved, p, q)?;
        let rel = (after - before).abs() / before;
        apq.push(vec![p.into(), q.into(), before.into(), after.into(), rel.into()]);
        out.check(Assertion::at_most(format!("translate/apq_isometry/p={},q={}", fmt_exp(p), fmt_exp(q)), rel, APQ_ISOMETRY_TOL));
    }
    out.table("translate/apq_isometry", apq);

    let t_seq = [1e-2, 1e-3, 1e-4];
    let gen = group_generator_check(0, &t_seq, &v)?;
    let mut gen_table = Table::new(&["t", "defect_u", "defect_v"]);
    for (i, t) in t_seq.iter().enumerate() {
        gen_table.push(vec![(*t).into(), gen.defect_u[i].into(), gen.defect_v[i].into()]);
    }
    out.table("generator/defects", gen_table);
    let ratio_gap = [&gen.defect_u, &gen.defect_v]
        .iter()
        .flat_map(|d| d.windows(2).map(|w| (w[0] / w[1] - 10.0).abs()))
        .fold(0.0, f64::max);
    out.real("generator/max_ratio_deviation_from_10", ratio_gap);
    out.check(Assertion::at_most("generator/linear_in_t", ratio_gap, 1.0));
    out.check(Assertion::at_most("generator/unitary", gen.unitarity, 1e-10));

    let ph = displacement_phase(1.3, -0.8, n, cfg.window.max(1))?;
    out.complex("displacement/measured_phase", ph.phase);
    out.real("displacement/phase_spread", ph.spread);

    weyl_pairs(cfg, &mut out)?;

    // f(L) by the diagonal route and by quantization in the Fock representation
    let action = FockAction::new(n)?;
    let grid = PhaseGrid::new(1, cfg.phase_extent, FOCK_PHASE_STEP)?;
    for f in cfg.multipliers()? {
        let sym = peetre_symbol(&f, 1, cfg.peetre_terms, SpectrumConvention::Oscillator, grid)?;
        let q = action.quantize(&sym.symbol, &w)?;
        let gap = q.value.sup_distance(&apply_fock_multiplier(&f, &w));
        out.real(format!("multiplier_route/{f}/gap"), gap);
        out.check(Assertion::at_most(format!("multiplier_route/{f}"), gap, ROUTE_TOL));
    }
    Ok(out)
}

/// `e^{isA} e^{itB} = e^{-ist} e^{itB} e^{isA}` on the Fock space, the Schrodinger grid and the twisted grid.
fn weyl_pairs(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let mut table = Table::new(&["s", "t", "fock_defect", "fock_defect_n32", "schrodinger_defect", "twisted_defect"]);
    let mut fock_worst: f64 = 0.0;
    let mut grid_worst: f64 = 0.0;
    let mut decreasing = true;
    for s in WEYL_PARAMS {
        for t in WEYL_PARAMS {
            let fine = weyl_relation_check(s, t, cfg.fock_dim)?;
            let coarse = weyl_relation_check(s, t, 32)?;
            decreasing &= fine.defect < coarse.defect;
            fock_worst = fock_worst.max(fine.defect);

            // grid steps commensurate with the shifts
            let h = t / (t / 0.01).round();
            let spec = GridSpec::new(vec![Axis::with_half_count((12.0 / h).ceil() as usize, h)?])?;
            let schrod = weyl_relation_defect(&SchrodingerAction::new(spec.clone()), s, t, &spec.hermite(&[3])?)?;

            let hx = s / (s / 0.1).round();
            let hy = t / (t / 0.1).round();
            let spec2 = GridSpec::new(vec![
                Axis::with_half_count((10.0 / hx).ceil() as usize, hx)?,
                Axis::with_half_count((10.0 / hy).ceil() as usize, hy)?,
            ])?;
            let u = TwistedGridFunction::new(spec2.hermite(&[1, 2])?)?;
            let twisted = weyl_relation_defect(&TwistedAction::new(spec2)?, s, t, &u)?;
            grid_worst = grid_worst.max(schrod).max(twisted);
            table.push(vec![s.into(), t.into(), fine.defect.into(), coarse.defect.into(), schrod.into(), twisted.into()]);
        }
    }
    out.table("weyl/defects", table);
    out.check(Assertion::at_most("weyl/fock", fock_worst, FOCK_WEYL_TOL));
    out.check(Assertion::at_most("weyl/grids", grid_worst, GRID_WEYL_TOL));
    out.check(Assertion::holds("weyl/fock_defect_decreases_n32_to_n", decreasing as u8 as f64, 1.0, decreasing));
    Ok(())
}
