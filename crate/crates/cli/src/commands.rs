//! One pipeline per subcommand. Each fills its own parameter defaults into
//! the config so that the echoed config is complete.

use std::f64::consts::PI;
use std::str::FromStr;

use muntz_core::biortho::{
    incompleteness_witness, monomial, recover_coefficients, representation_crosscheck, sector_kernel, BoundaryFunctional,
};
use muntz_core::fuchs::{
    certify_fuchs_bounds, half_plane_grid, LogKernel, NormalizedKernel, PsiKernel, SieveRegion, TruncatedProduct, Truncation,
};
use muntz_core::sequences::{muntz_density_test, ExponentSequence};
use muntz_core::surgery::{adjust_double_points, build_lambda_star, combined_residual, comparison_phi, surgery_epsilon, HORIZON_MARGIN};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Command, RunConfig};
use crate::report::{CsvTable, Report};
use crate::seq::SeqSpec;
use crate::CliError;

type Outcome = Result<Report, CliError>;

pub fn run(command: Command, cfg: &mut RunConfig) -> Outcome {
    match command {
        Command::Density => density(cfg),
        Command::FuchsEval => fuchs_eval(cfg),
        Command::FuchsVerify => fuchs_verify(cfg),
        Command::Surgery => surgery(cfg),
        Command::Biortho => biortho(cfg),
        Command::Recover => recover(cfg),
        Command::Witness => witness(cfg),
        Command::Crosscheck => crosscheck(cfg),
    }
}

fn build(spec: &SeqSpec, horizon: f64, flag: &str) -> Result<ExponentSequence, CliError> {
    spec.build(horizon).map_err(|e| CliError::Usage(format!("{flag}: {e}")))
}

fn sequence(cfg: &RunConfig) -> Result<ExponentSequence, CliError> {
    build(&cfg.seq_spec(), cfg.horizon(), "--seq")
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed())
}

fn open_sector(cfg: &RunConfig) -> Result<f64, CliError> {
    let alpha = cfg.alpha();
    if alpha > 0.0 {
        Ok(alpha)
    } else {
        Err(CliError::Usage("--alpha must be positive for sector functionals".into()))
    }
}

fn positive(value: f64, flag: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("{flag} must be positive, got {value}")))
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn density(cfg: &mut RunConfig) -> Outcome {
    let points = *cfg.params.points.get_or_insert(50);
    let seq = sequence(cfg)?;
    let mut report = Report::new(true);
    report.set("verdict", muntz_density_test(&seq).to_string());
    report.set("gap", seq.gap()?);
    report.set_count("materialized", seq.values().len());
    let lo = seq.values()[0];
    let hi = seq.values().last().copied().unwrap_or(lo);
    let mut table = CsvTable::new("lambda", &["t", "lambda_t", "count_t"]);
    for i in 0..points.max(2) {
        let t = lo * (hi / lo).powf(i as f64 / (points.max(2) - 1) as f64);
        table.push(vec![t.into(), seq.characteristic_logarithm(t)?.into(), seq.counting_function(t)?.into()]);
    }
    report.tables.push(table);
    Ok(report)
}

fn fuchs_eval(cfg: &mut RunConfig) -> Outcome {
    let text = cfg.params.z.clone().ok_or_else(|| CliError::Usage("--z is required".into()))?;
    let z = Complex64::from_str(text.trim()).map_err(|_| CliError::Usage(format!("--z: `{text}` is not a complex number")))?;
    let truncation = cfg.params.truncation.map_or(Truncation::Adaptive, Truncation::Fixed);
    let product = TruncatedProduct::with_truncation(sequence(cfg)?, truncation)?;
    let e = product.log_eval(z)?;
    let mut report = Report::new(true);
    report.set_complex("z", z);
    report.set_complex("log_g", e.log_value);
    report.set_complex("g", e.value());
    report.set_count("order", e.order);
    report.set("remainder_bound", e.remainder_bound);
    Ok(report)
}

fn fuchs_verify(cfg: &mut RunConfig) -> Outcome {
    let r_max = positive(*cfg.params.r_max.get_or_insert(50.0), "--r-max")?;
    let points = *cfg.params.points.get_or_insert(200);
    let angles = 10;
    let radii = (points / angles).max(2);
    let seq = sequence(cfg)?;
    let product = TruncatedProduct::new(seq.clone())?;
    let sieve = SieveRegion::for_sequence(&seq)?;
    let certify = |radii: usize, angles: usize| {
        let upper = half_plane_grid(0.05, r_max, radii, angles);
        let lower: Vec<Complex64> = upper.iter().copied().filter(|&z| sieve.contains(&seq, z)).collect();
        certify_fuchs_bounds(&product, &upper, &lower)
    };
    let base = certify(radii, angles)?;
    let fine = certify(2 * radii, 2 * angles)?;
    let spread = base.a_upper - base.a_lower;
    let fine_spread = fine.a_upper - fine.a_lower;
    let finite = [base.a_upper, base.a_lower, fine.a_upper, fine.a_lower].iter().all(|v| v.is_finite());
    let stable = (fine_spread - spread).abs() <= 0.5 * spread.abs().max(1.0);
    let mut report = Report::new(finite && stable);
    report.set("a_upper", base.a_upper);
    report.set("a_lower", base.a_lower);
    report.set("a_upper_refined", fine.a_upper);
    report.set("a_lower_refined", fine.a_lower);
    report.set("stable", stable);
    for (name, samples, sign, a) in [("upper", &base.upper_samples, 1.0, base.a_upper), ("lower", &base.lower_samples, -1.0, base.a_lower)] {
        let mut table = CsvTable::new(name, &["re", "im", "log_abs_g", "normalized", "slack"]);
        for s in samples {
            let slack = a - sign * s.normalized;
            table.push(vec![s.z.re.into(), s.z.im.into(), s.log_abs.into(), s.normalized.into(), slack.into()]);
        }
        report.tables.push(table);
    }
    Ok(report)
}

fn surgery(cfg: &mut RunConfig) -> Outcome {
    let target_text = cfg.params.target.get_or_insert_with(|| "progression:0.5".into()).clone();
    let points = *cfg.params.points.get_or_insert(100);
    let target: SeqSpec = target_text.parse().map_err(|e| CliError::Usage(format!("--target: {e}")))?;
    let horizon = cfg.horizon();
    let lam = sequence(cfg)?;
    let lam_p = build(&target, horizon, "--target")?;
    let phi = comparison_phi(&lam, &lam_p, horizon)?;
    let result = build_lambda_star(&phi, &lam, &lam_p)?;
    let eps = surgery_epsilon(&lam, &lam_p, &phi)?;
    let subset = result.lambda_star.iter().all(|&s| lam_p.nearest(s).is_some_and(|(_, v)| v == s));
    let mut r = rng(cfg);
    let mut xs: Vec<f64> = (0..points).map(|_| r.gen_range(1.0..HORIZON_MARGIN * horizon)).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut within = true;
    let mut residuals = CsvTable::new("residual", &["x", "residual", "epsilon", "bound"]);
    for &x in &xs {
        let res = result.residual(&lam, &lam_p, x)?;
        let bound = eps.at(x) + 1.0 / x;
        within &= res.abs() <= bound;
        residuals.push(vec![x.into(), res.into(), eps.at(x).into(), bound.into()]);
    }
    let mut report = Report::new(false);
    report.set_count("lambda_star_len", result.lambda_star.len());
    report.set("a1", result.a1);
    report.set("a1_tail_average", result.a1_tail_average);
    report.set("subset", subset);
    report.set("residual_within_bound", within);
    let mut passed = subset && within;
    let mut stars = CsvTable::new("lambda_star", &["index", "lambda_star"]);
    for (i, &s) in result.lambda_star.iter().enumerate() {
        stars.push(vec![(i + 1).into(), s.into()]);
    }
    if let Some(b) = target.progression_parameter() {
        let adj = adjust_double_points(&lam, &result.lambda_star, b)?;
        let separated = adj.disjoint && adj.union_gap >= adj.h1;
        let mut combined = CsvTable::new("combined", &["x", "combined_residual", "bound"]);
        let mut combined_ok = true;
        for &x in &xs {
            let res = combined_residual(&lam, &result, &adj, b, x)?;
            let bound = 13.0 / x + eps.at(x);
            combined_ok &= res.abs() <= bound;
            combined.push(vec![x.into(), res.into(), bound.into()]);
        }
        report.set("h1", adj.h1);
        report.set("a3", adj.a3);
        report.set("union_gap", adj.union_gap);
        report.set("separated", separated);
        report.set("combined_within_bound", combined_ok);
        passed &= separated && combined_ok;
        stars = CsvTable::new("lambda_star", &["index", "lambda_star", "lambda_double_star"]);
        for (i, (&s, &d)) in result.lambda_star.iter().zip(&adj.lambda_double_star).enumerate() {
            stars.push(vec![(i + 1).into(), s.into(), d.into()]);
        }
        report.tables.push(combined);
    }
    report.passed = passed;
    report.tables.insert(0, stars);
    report.tables.insert(1, residuals);
    Ok(report)
}

/// `(b, A2)` for the normalized kernel; `A2` is estimated from the sequence.
fn normalization(cfg: &mut RunConfig, seq: &ExponentSequence) -> Result<(f64, f64), CliError> {
    let b = *cfg.params.b.get_or_insert(0.0);
    if b.is_nan() || b < 0.0 {
        return Err(CliError::Usage(format!("--b must be nonnegative, got {b}")));
    }
    Ok((b, seq.log_growth_constant(b, HORIZON_MARGIN * cfg.horizon())?))
}

fn default_delta(cfg: &mut RunConfig, seq: &ExponentSequence, terms: usize) -> Result<f64, CliError> {
    let lambda_k = seq.nth(terms).ok_or_else(|| CliError::Usage(format!("--terms {terms} exceeds the sequence")))?;
    positive(*cfg.params.delta.get_or_insert(1.0 / lambda_k), "--delta")
}

fn biortho(cfg: &mut RunConfig) -> Outcome {
    let alpha = open_sector(cfg)?;
    let size = *cfg.params.terms.get_or_insert(4);
    if size == 0 {
        return Err(CliError::Usage("--terms must be at least 1".into()));
    }
    let seq = sequence(cfg)?;
    let delta = default_delta(cfg, &seq, size)?;
    let (b, a2) = normalization(cfg, &seq)?;
    let quad = cfg.quadrature_spec();
    let product = TruncatedProduct::new(seq.clone())?;
    let kernel = NormalizedKernel::new(&product, b, a2)?;
    let lambdas: Vec<f64> = (1..=size).map(|k| seq.nth(k).expect("checked by default_delta")).collect();
    let mut table = CsvTable::new("matrix", &["k", "m", "re", "im", "expected_re", "expected_im", "error_estimate"]);
    let mut ok = true;
    let mut worst = 0.0f64;
    for k in 1..=size {
        let psi = PsiKernel { kernel, k, damping: delta };
        let functional = BoundaryFunctional::new(&psi, alpha, quad)?;
        let diagonal = psi.eval(c(lambdas[k - 1], 0.0))?;
        for (m, &lm) in lambdas.iter().enumerate() {
            let value = functional.apply(&monomial(c(lm, 0.0)))?;
            let expected = if m + 1 == k { diagonal } else { c(0.0, 0.0) };
            let err = (value.value - expected).norm();
            worst = worst.max(err / diagonal.norm());
            ok &= err <= 1e-6 * diagonal.norm() + value.total_error();
            table.push(vec![
                k.into(),
                (m + 1).into(),
                value.value.re.into(),
                value.value.im.into(),
                expected.re.into(),
                expected.im.into(),
                value.total_error().into(),
            ]);
        }
    }
    let mut report = Report::new(ok);
    report.set("max_relative_error", worst);
    report.set("a2", a2);
    report.tables.push(table);
    Ok(report)
}

fn recover(cfg: &mut RunConfig) -> Outcome {
    let alpha = open_sector(cfg)?;
    let coefficients = cfg.params.coefficients.clone().ok_or_else(|| CliError::Usage("--coefficients is required".into()))?;
    if coefficients.is_empty() {
        return Err(CliError::Usage("--coefficients must not be empty".into()));
    }
    let terms = *cfg.params.terms.get_or_insert(coefficients.len());
    let points = *cfg.params.points.get_or_insert(20);
    let seq = sequence(cfg)?;
    let delta = default_delta(cfg, &seq, terms.max(coefficients.len()))?;
    let (b, a2) = normalization(cfg, &seq)?;
    let quad = cfg.quadrature_spec();
    let exponents: Vec<f64> = (1..=coefficients.len()).map(|k| seq.nth(k).expect("checked by default_delta")).collect();
    let f = |z: Complex64| exponents.iter().zip(&coefficients).map(|(&l, &a)| a * monomial(c(l, 0.0))(z)).sum::<Complex64>();
    let product = TruncatedProduct::new(seq.clone())?;
    let kernel = NormalizedKernel::new(&product, b, a2)?;
    let expansion = recover_coefficients(&kernel, &f, terms, delta, alpha, &quad, true)?;

    let mut coeff_ok = true;
    let mut table = CsvTable::new("expansion", &["k", "lambda", "re", "im", "error_estimate", "delta_discrepancy"]);
    for (i, &(lambda, a)) in expansion.terms.iter().enumerate() {
        let truth = coefficients.get(i).copied().unwrap_or(0.0);
        coeff_ok &= (a - truth).norm() <= 1e-6 + expansion.errors[i];
        table.push(vec![
            (i + 1).into(),
            lambda.into(),
            a.re.into(),
            a.im.into(),
            expansion.errors[i].into(),
            expansion.delta_discrepancy.get(i).copied().unwrap_or(f64::NAN).into(),
        ]);
    }
    let mut r = rng(cfg);
    let mut recon_ok = true;
    let mut worst = 0.0f64;
    let mut checks = CsvTable::new("reconstruction", &["re", "im", "series_re", "series_im", "exact_re", "exact_im", "error_bound"]);
    for _ in 0..points {
        let z = Complex64::from_polar(0.5 * r.gen::<f64>().sqrt(), r.gen_range(-0.95 * PI..0.95 * PI));
        let (value, bound) = expansion.reconstruct(z)?;
        let exact = f(z);
        let err = (value - exact).norm();
        worst = worst.max(err);
        recon_ok &= err <= 1e-5 + bound;
        checks.push(vec![z.re.into(), z.im.into(), value.re.into(), value.im.into(), exact.re.into(), exact.im.into(), bound.into()]);
    }
    let mut report = Report::new(coeff_ok && recon_ok);
    report.set("coefficients_within_tolerance", coeff_ok);
    report.set("max_reconstruction_error", worst);
    report.set("radius", expansion.radius);
    report.tables.push(table);
    report.tables.push(checks);
    Ok(report)
}

fn witness(cfg: &mut RunConfig) -> Outcome {
    let alpha = open_sector(cfg)?;
    let mu = positive(cfg.params.mu.ok_or_else(|| CliError::Usage("--mu is required".into()))?, "--mu")?;
    let terms = *cfg.params.terms.get_or_insert(6);
    let seq = sequence(cfg)?;
    let product = TruncatedProduct::new(seq)?;
    let w = incompleteness_witness(&product, mu, alpha, &cfg.quadrature_spec(), terms)?;
    let mut report = Report::new(w.consistent);
    report.set("g_mu", w.g_mu);
    report.set("norm_upper", w.norm_upper);
    report.set("lower_bound", w.lower_bound);
    report.set("ls_residual", w.ls_residual);
    report.set("ls_rms", w.ls_rms);
    report.set("consistent", w.consistent);
    Ok(report)
}

fn crosscheck(cfg: &mut RunConfig) -> Outcome {
    let alpha = open_sector(cfg)?;
    let points = *cfg.params.points.get_or_insert(10);
    let product = TruncatedProduct::new(sequence(cfg)?)?;
    let kernel = sector_kernel(&product, alpha)?;
    let functional = BoundaryFunctional::new(&kernel, alpha, cfg.quadrature_spec())?;
    let mut r = rng(cfg);
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut table = CsvTable::new(
        "crosscheck",
        &["re", "im", "represented_re", "represented_im", "direct_re", "direct_im", "residual", "error_estimate"],
    );
    for _ in 0..points {
        let z = c(r.gen_range(0.1..1.5), r.gen_range(-3.0..3.0));
        let rep = representation_crosscheck(&functional, z)?;
        let bound = 10.0 * rep.represented.total_error();
        worst = worst.max(rep.residual / bound);
        ok &= rep.residual <= bound;
        let v = rep.represented.value;
        table.push(vec![
            z.re.into(),
            z.im.into(),
            v.re.into(),
            v.im.into(),
            rep.direct.re.into(),
            rep.direct.im.into(),
            rep.residual.into(),
            rep.represented.total_error().into(),
        ]);
    }
    let mut report = Report::new(ok);
    report.set("max_residual_over_bound", worst);
    report.tables.push(table);
    Ok(report)
}
