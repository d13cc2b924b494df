use cqlab_core::coercivity::sigma_tilde;
use cqlab_core::solver::{tau_ladder, NewtonOptions};
use cqlab_core::transfer::interior_sphere_certified;
use cqlab_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{emit, num, Table};

pub fn run(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Weights(a) => weights(a),
        Command::CoercivityScan(a) => coercivity_scan(a),
        Command::Herglotz(a) => herglotz(a),
        Command::March(a) => march_cmd(a),
        Command::Converge(a) => converge(a),
    }
}

fn weight_options(c: &ContourArgs) -> CliResult<WeightOptions> {
    if c.oversampling < 2 {
        return Err(CliError::Config(format!("oversampling must be at least 2, got {}", c.oversampling)));
    }
    Ok(WeightOptions { oversampling: c.oversampling, radius: c.radius, max_cond: c.max_cond })
}

fn transfer_by_name(name: &str) -> CliResult<TransferFunction> {
    Ok(match name {
        "identity" => TransferFunction::identity(),
        "s" => TransferFunction::derivative(),
        "1/s" => TransferFunction::integrator(1),
        "1/s^2" => TransferFunction::integrator(2),
        other => other.parse::<Problem>()?.transfer(),
    })
}

fn impedance_by_name(name: &str) -> CliResult<Impedance> {
    if let Some(k) = name.strip_prefix("linear:") {
        let k: f64 = k.parse().map_err(|_| CliError::Config(format!("bad linear impedance constant `{k}`")))?;
        if !(k > 0.0) {
            return Err(CliError::Config(format!("linear impedance needs kappa > 0, got {k}")));
        }
        return Ok(Impedance::Linear(k));
    }
    Ok(name.parse()?)
}

fn weights(a: &WeightsArgs) -> CliResult<()> {
    let t = make_tableau(&a.method)?;
    let mut l = transfer_by_name(&a.transfer)?;
    if let Some(s) = a.shift {
        l = l.shifted(s);
    }
    let w = compute_weights(&l, &t, a.tau, a.n, &weight_options(&a.contour)?)?;
    let m = t.stages();
    let mut header = vec!["n".to_string()];
    for i in 0..m {
        for j in 0..m {
            header.push(format!("w{}{}_re", i + 1, j + 1));
            header.push(format!("w{}{}_im", i + 1, j + 1));
        }
    }
    let mut table = Table::new(header);
    for (n, wn) in w.weights().iter().enumerate() {
        let mut row = vec![n.to_string()];
        for i in 0..m {
            for j in 0..m {
                row.push(num(wn[(i, j)].re));
                row.push(num(wn[(i, j)].im));
            }
        }
        table.push(row);
    }
    let summary = json!({
        "transfer_id": w.transfer_id(),
        "rho": w.rho(),
        "contour_points": w.oversampling() * w.len(),
        "aliasing_bound": w.aliasing_bound,
        "max_eigenvector_cond": w.max_cond,
        "schur_parlett_points": w.schur_parlett_points,
        "max_imag": w.max_imag(),
    });
    emit(a.output.out.as_deref(), "weights", a, summary, &table)
}

fn coercivity_scan(a: &ScanArgs) -> CliResult<()> {
    let t = make_tableau(&a.method)?;
    let scan = scan_numerical_range(&t, a.delta, a.ntheta)?;
    let mut table = Table::new(["theta", "lambda_min"]);
    for (th, lam) in scan.theta.iter().zip(&scan.lambda_min) {
        table.push(vec![num(*th), num(*lam)]);
    }
    // Closed-form lower bound for two-stage Radau IIA.
    let bound = (t.method() == Method::Radau2).then(|| 0.5 * (1.0 - (-2.0 * a.delta).exp()));
    let summary = json!({
        "min_lambda": scan.min_lambda,
        "argmin_theta": scan.argmin_theta,
        "noise_floor": scan.noise_floor,
        "resolved_min": scan.resolved_min(),
        "worst_ratio": scan.worst_ratio,
        "hermitian_defect": scan.hermitian_defect,
        "violations": scan.violations,
        "coercivity_constant": t.method().coercivity_constant(),
        "radau2_bound": bound,
        "radau2_bound_holds": bound.map(|b| scan.min_lambda >= b - 1e-12),
    });
    emit(a.output.out.as_deref(), "coercivity-scan", a, summary, &table)
}

/// Transfer function with its coercivity certificate `(α, I, σ)`.
fn certified(name: &str, sigma: f64) -> CliResult<(TransferFunction, f64)> {
    if !(sigma >= 0.0) {
        return Err(CliError::Config(format!("sigma must be non-negative, got {sigma}")));
    }
    let id = TransferFunction::identity();
    Ok(match name {
        "exterior-sphere" | "exterior" => (TransferFunction::exterior_sphere().with_certificate(1.0, id, sigma), 1.0),
        "interior-sphere" | "interior" if sigma > 0.0 => interior_sphere_certified(sigma)?,
        "interior-sphere" | "interior" => (TransferFunction::interior_sphere().with_certificate(0.0, id, 0.0), 0.0),
        "s" => (TransferFunction::derivative().with_certificate(0.0, id, sigma), 0.0),
        other => return Err(CliError::Config(format!("no coercivity certificate known for transfer `{other}`"))),
    })
}

fn herglotz(a: &HerglotzArgs) -> CliResult<()> {
    let t = make_tableau(&a.method)?;
    // Refuse the order barrier before doing any work.
    sigma_tilde(t.method(), a.sigma)?;
    let (l, alpha) = certified(&a.transfer, a.sigma)?;
    let opts = weight_options(&a.contour)?;
    let reports: Vec<_> = (0..a.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rng.set_stream(k as u64);
            let f = random_causal_sequence(&mut rng, a.n, t.stages(), a.tau, a.leading_zeros);
            discrete_herglotz_test(&l, &t, &f, &opts)
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(["trial", "lhs", "rhs", "margin", "scale"]);
    let mut worst = f64::INFINITY;
    for (k, r) in reports.iter().enumerate() {
        table.push(vec![k.to_string(), num(r.lhs), num(r.rhs), num(r.margin), num(r.scale())]);
        worst = worst.min(if r.scale() > 0.0 { r.margin / r.scale() } else { 0.0 });
    }
    let holds = reports.iter().all(|r| r.holds(a.tol));
    let first = reports.first();
    let summary = json!({
        "alpha": alpha,
        "sigma_tilde": first.map(|r| r.sigma_tilde),
        "small_step": first.map(|r| r.small_step),
        "worst_relative_margin": worst,
        "holds": holds,
    });
    emit(a.output.out.as_deref(), "herglotz", a, summary, &table)?;
    if holds {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("coercivity inequality violated: worst margin/scale {worst:e} < -{}", a.tol)))
    }
}

fn problem_setup(p: &ProblemArgs) -> CliResult<(ProblemSetup, ButcherTableau, SolverOptions)> {
    let l = p.problem.parse::<Problem>()?.transfer();
    let mut wave = IncidentWave::default();
    if let Some(w) = p.causalize {
        if !(w > 0.0) {
            return Err(CliError::Config(format!("cutoff width must be positive, got {w}")));
        }
        wave = wave.causalized(w);
    }
    let mut setup = ProblemSetup::new(l, impedance_by_name(&p.g)?)
        .with_variant(p.variant.parse()?)
        .with_wave(wave)
        .with_final_time(p.final_time)
        .with_discrete_derivatives(p.discrete_derivatives);
    if let Some(s) = p.shift {
        setup = setup.with_shift(s);
    }
    setup.validate()?;
    let newton =
        NewtonOptions { tolerance: p.newton_tol, max_iterations: p.newton_max_iter, ..NewtonOptions::default() };
    let opts = SolverOptions { newton, weights: weight_options(&p.contour)? };
    Ok((setup, make_tableau(&p.method)?, opts))
}

fn march_cmd(a: &MarchArgs) -> CliResult<()> {
    let (setup, t, opts) = problem_setup(&a.problem)?;
    if a.steps == 0 {
        return Err(CliError::Config("steps must be positive".into()));
    }
    let tau = setup.final_time / a.steps as f64;
    let sol = march(&setup, &t, tau, &opts)?;
    let mut table = Table::new(["step", "stage", "t", "psi"]);
    let m = sol.stages();
    for (k, (time, psi)) in sol.nodes().into_iter().enumerate() {
        table.push(vec![(k / m).to_string(), (k % m + 1).to_string(), num(time), num(psi)]);
    }
    let summary = json!({
        "tau": tau,
        "steps": sol.steps,
        "newton_max_iterations": sol.max_newton_iterations(),
        "newton_total_iterations": sol.newton.iter().map(|s| s.iterations).sum::<usize>(),
        "newton_max_residual": sol.max_newton_residual(),
        "newton_halvings": sol.newton.iter().map(|s| s.halvings).sum::<usize>(),
    });
    emit(a.output.out.as_deref(), "march", a, summary, &table)
}

fn converge(a: &ConvergeArgs) -> CliResult<()> {
    let (setup, t, opts) = problem_setup(&a.problem)?;
    if a.kmin > a.kmax || a.kmax > 20 {
        return Err(CliError::Config(format!("need kmin <= kmax <= 20, got {}..{}", a.kmin, a.kmax)));
    }
    if a.ref_k < a.kmax + 3 || a.ref_k > 22 {
        return Err(CliError::Config(format!("reference exponent must lie in kmax+3..=22, got {}", a.ref_k)));
    }
    let t_ref = make_tableau(&a.ref_method)?;
    let tau_ref = setup.final_time / (1u64 << a.ref_k) as f64;
    let reference = reference_solution(&setup, &t_ref, tau_ref, &opts)?;
    let taus = tau_ladder(setup.final_time, a.kmin, a.kmax);
    let rep = convergence_study(&setup, &t, &taus, &reference, a.drop, &opts)?;
    let mut table = Table::new(["tau", "N", "error", "newton_max_iters", "slope"]);
    for k in 0..taus.len() {
        table.push(vec![
            num(rep.taus[k]),
            rep.steps[k].to_string(),
            num(rep.errors[k]),
            rep.newton_max_iters[k].to_string(),
            String::new(),
        ]);
    }
    table.push(vec![String::new(), String::new(), String::new(), String::new(), num(rep.slope)]);
    let summary = json!({
        "slope": rep.slope,
        "fit_residual": rep.fit_residual,
        "dropped": rep.dropped,
        "reference_tau": tau_ref,
        "reference_newton_max_iterations": reference.max_newton_iterations(),
    });
    emit(a.output.out.as_deref(), "converge", a, summary, &table)
}
