use rayon::prelude::*;

use qmetro_core::bayes::{build_cost_matrix, lossy_lower_bound, optimal_state_and_cost, CostModel};
use qmetro_core::bounds::{
    asymptotic_dephasing_bound, asymptotic_loss_bound, cs_epsilons, dephasing_qs_problem, loss_qs_problem,
    phase_diffusion_bounds, qs_optimize, QsOptions, QsProblem,
};
use qmetro_core::channels::{dephasing_kraus, loss_output_state, qubit_phase_generator, LossParams};
use qmetro_core::errorprop::{optimal_split, DecoherencePenalty};
use qmetro_core::estimation::{
    bayes_mmse, binomial_phase_circular_cost, binomial_phase_circular_estimate, crb, fisher_information,
    ml_estimate, prior_averaged_mse, BinomialP, PriorSpec,
};
use qmetro_core::fock::{build_j_operators, make_named_state, FockStateN, NamedState};
use qmetro_core::linalg::c;
use qmetro_core::particle::{particle_qfi, ParticleCaps};
use qmetro_core::qfi::{qfi_blocks, qfi_pure};
use qmetro_core::seesaw::{optimal_loss_qfi, SeesawOptions};

use crate::cli::{flag_name, BoundModel, Cli, Command, CostKind, FigureMethod, NRange, Noise, QfiModel, StateKind};
use crate::error::{param, CliError, CliResult};
use crate::output::{Table, Value};

/// Largest N accepted by `figure-loss`.
pub const FIGURE_N_MAX: usize = 40;

type Config = Vec<(String, String)>;

fn config(pairs: &[(&str, String)]) -> Config {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn noise_config(noise: &Noise) -> Vec<(&'static str, String)> {
    vec![
        ("eta", opt(noise.eta)),
        ("eta_a", opt(noise.eta_a)),
        ("eta_b", opt(noise.eta_b)),
        ("gamma", opt(noise.gamma)),
    ]
}

fn loss_params(noise: &Noise) -> CliResult<LossParams> {
    let a = noise.eta_a.or(noise.eta);
    let b = noise.eta_b.or(noise.eta);
    match (a, b) {
        (Some(a), Some(b)) => Ok(LossParams::new(a, b)?),
        _ => Err(param("loss needs --eta or both --eta-a and --eta-b")),
    }
}

fn visibility(noise: &Noise) -> CliResult<f64> {
    noise.eta.ok_or_else(|| param("dephasing needs --eta"))
}

fn gamma(noise: &Noise) -> CliResult<f64> {
    noise.gamma.ok_or_else(|| param("phase diffusion needs --gamma"))
}

fn cost_model(kind: CostKind, noise: &Noise) -> CliResult<CostModel> {
    Ok(match kind {
        CostKind::Ideal => CostModel::Ideal,
        CostKind::Loss => CostModel::Loss(loss_params(noise)?),
        CostKind::PhaseDiffusion => CostModel::PhaseDiffusion { gamma: gamma(noise)? },
    })
}

fn per_n<T: Send>(range: NRange, f: impl Fn(usize) -> CliResult<T> + Sync + Send) -> CliResult<Vec<T>> {
    range.iter().collect::<Vec<_>>().into_par_iter().map(f).collect()
}

pub fn run(cli: &Cli) -> CliResult<Table> {
    match &cli.command {
        Command::Bounds { model, noise, n, simulation } => cmd_bounds(*model, noise, *n, *simulation, cli.seed),
        Command::OptimalState { model, noise, n } => cmd_optimal_state(*model, noise, *n),
        Command::CostTable { model, noise, n } => cmd_cost_table(*model, noise, *n),
        Command::Qfi { state, model, noise, n } => cmd_qfi(*state, *model, noise, *n),
        Command::FigureLoss { eta, n_max, method, iterations } => {
            cmd_figure_loss(*eta, *n_max, *method, *iterations)
        }
        Command::LigoCheck { eta, squeeze_factor } => cmd_ligo_check(*eta, *squeeze_factor),
        Command::Binomial { trials, p, repetitions } => cmd_binomial(*trials, *p, *repetitions),
    }
}

/// Per-probe Fisher information allowed by the quantum-simulation bound.
fn simulation_fi(problem: &QsProblem, seed: u64) -> CliResult<f64> {
    let r = qs_optimize(problem, QsOptions { seed, ..QsOptions::default() })?;
    if !r.feasible {
        return Err(CliError::Numeric("quantum-simulation constraint not met".into()));
    }
    Ok(r.f_qs)
}

fn finite_bound(n: usize, per_probe: f64) -> f64 {
    if per_probe.is_infinite() { 0.0 } else { 1.0 / (n as f64 * per_probe).sqrt() }
}

pub fn cmd_bounds(model: BoundModel, noise: &Noise, range: NRange, simulation: bool, seed: u64) -> CliResult<Table> {
    let mut cfg = vec![("model", flag_name(&model)), ("n", range.to_string())];
    cfg.extend(noise_config(noise));
    if simulation {
        cfg.push(("simulation", "true".to_string()));
        cfg.push(("seed", seed.to_string()));
    }
    let mut t = Table::new("bounds", config(&cfg), &["N", "method", "delta_phi"]);
    let mut rows: Vec<Vec<Value>> = Vec::new();
    match model {
        BoundModel::Loss => {
            let p = loss_params(noise)?;
            let fqs = if simulation && p.eta_a < 1.0 && p.eta_b < 1.0 && p.eta_a > 0.0 && p.eta_b > 0.0 {
                Some(simulation_fi(&loss_qs_problem(p)?, seed)?)
            } else {
                None
            };
            for n in range.iter() {
                let b = asymptotic_loss_bound(n, p.eta_a, p.eta_b)?;
                rows.push(vec![n.into(), b.method.name().into(), b.delta_phi.into()]);
                if let Some(f) = fqs {
                    rows.push(vec![n.into(), "quantum_simulation".into(), finite_bound(n, f).into()]);
                }
            }
        }
        BoundModel::Dephasing => {
            let eta = visibility(noise)?;
            let sims = if simulation && eta > 0.0 && eta < 1.0 {
                let problem = dephasing_qs_problem(eta)?;
                let cs = cs_epsilons(&problem.kraus, &problem.dkraus)?;
                Some((cs.fi_bound(), simulation_fi(&problem, seed)?))
            } else {
                None
            };
            for n in range.iter() {
                let b = asymptotic_dephasing_bound(n, eta)?;
                rows.push(vec![n.into(), b.method.name().into(), b.delta_phi.into()]);
                if let Some((fcs, fqs)) = sims {
                    rows.push(vec![n.into(), "classical_simulation".into(), finite_bound(n, fcs).into()]);
                    rows.push(vec![n.into(), "quantum_simulation".into(), finite_bound(n, fqs).into()]);
                }
            }
        }
        BoundModel::PhaseDiffusion => {
            let g = gamma(noise)?;
            for n in range.iter() {
                let b = phase_diffusion_bounds(n, g)?;
                for r in [b.exact, b.purification] {
                    rows.push(vec![n.into(), r.method.name().into(), r.delta_phi.into()]);
                }
            }
        }
    }
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn cmd_optimal_state(model: CostKind, noise: &Noise, n: usize) -> CliResult<Table> {
    if n == 0 {
        return Err(param("need at least one photon"));
    }
    let mut cfg = vec![("model", flag_name(&model)), ("n", n.to_string())];
    cfg.extend(noise_config(noise));
    let cm = cost_model(model, noise)?;
    let a = build_cost_matrix(cm, n)?;
    let (state, cost) = optimal_state_and_cost(&a)?;
    let mut t = Table::new("optimal-state", config(&cfg), &["n_a", "amplitude"]);
    t.note("cost", cost);
    t.note("sqrt_cost", cost.sqrt());
    if let CostModel::Loss(_) = cm {
        t.note("lower_bound", lossy_lower_bound(&a)?);
    }
    for (k, z) in state.coeffs().iter().enumerate() {
        t.push(vec![k.into(), z.re.into()]);
    }
    Ok(t)
}

pub fn cmd_cost_table(model: CostKind, noise: &Noise, range: NRange) -> CliResult<Table> {
    let mut cfg = vec![("model", flag_name(&model)), ("n", range.to_string())];
    cfg.extend(noise_config(noise));
    let cm = cost_model(model, noise)?;
    let lossy = matches!(cm, CostModel::Loss(_));
    let mut cols = vec!["N", "cost", "sqrt_cost", "sqrt_cost_times_n"];
    if lossy {
        cols.push("lower_bound");
    }
    let mut t = Table::new("cost-table", config(&cfg), &cols);
    let rows = per_n(range, |n| {
        let a = build_cost_matrix(cm, n)?;
        let (_, cost) = optimal_state_and_cost(&a)?;
        let mut row: Vec<Value> = vec![n.into(), cost.into(), cost.sqrt().into(), (cost.sqrt() * n as f64).into()];
        if lossy {
            row.push(lossy_lower_bound(&a)?.into());
        }
        Ok(row)
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn named(kind: StateKind) -> NamedState {
    match kind {
        StateKind::Noon => NamedState::Noon,
        StateKind::Sine => NamedState::Sine,
        StateKind::Balanced => NamedState::Balanced,
        StateKind::TwinFock => NamedState::TwinFock,
    }
}

fn ideal_qfi(s: &FockStateN) -> CliResult<f64> {
    let psi = s.to_vector();
    let dpsi = (build_j_operators(s.n_total()).number_a() * &psi) * c(0.0, -1.0);
    Ok(qfi_pure(&psi, &dpsi)?)
}

pub fn cmd_qfi(state: StateKind, model: QfiModel, noise: &Noise, range: NRange) -> CliResult<Table> {
    let mut cfg = vec![
        ("state", flag_name(&state)),
        ("model", flag_name(&model)),
        ("n", range.to_string()),
    ];
    cfg.extend(noise_config(noise));
    let mut t = Table::new("qfi", config(&cfg), &["N", "qfi", "delta_phi"]);
    let loss = if model == QfiModel::Loss { Some(loss_params(noise)?) } else { None };
    let deph = if model == QfiModel::Dephasing { Some(dephasing_kraus(visibility(noise)?)?) } else { None };
    let caps = ParticleCaps::default();
    let rows = per_n(range, |n| {
        let s = make_named_state(named(state), n)?;
        let f = match model {
            QfiModel::Ideal => ideal_qfi(&s)?,
            QfiModel::Loss => qfi_blocks(&loss_output_state(&s, 0.0, loss.expect("set above")))?,
            QfiModel::Dephasing => {
                particle_qfi(&s, &qubit_phase_generator(), deph.as_ref().expect("set above"), &caps)?
            }
        };
        let d = if f > 0.0 { 1.0 / f.sqrt() } else { f64::INFINITY };
        Ok(vec![n.into(), f.into(), d.into()])
    })?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn cmd_figure_loss(eta: f64, n_max: usize, method: FigureMethod, iterations: usize) -> CliResult<Table> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(param(format!("eta = {eta} must lie in (0, 1)")));
    }
    if n_max == 0 || n_max > FIGURE_N_MAX {
        return Err(param(format!("n-max must be in 1..={FIGURE_N_MAX}")));
    }
    let cfg = [
        ("eta", eta.to_string()),
        ("n_max", n_max.to_string()),
        ("method", flag_name(&method)),
        ("iterations", iterations.to_string()),
    ];
    let mut t = Table::new("figure-loss", config(&cfg), &["N", "series", "delta_phi"]);
    let p = LossParams::equal(eta)?;
    let opts = SeesawOptions { max_iterations: iterations, ..SeesawOptions::default() };
    let rows = per_n(NRange { start: 1, end: n_max }, |n| {
        let optimal = match method {
            FigureMethod::Qfi => 1.0 / optimal_loss_qfi(n, p, opts)?.qfi.sqrt(),
            FigureMethod::Bayes => optimal_state_and_cost(&build_cost_matrix(CostModel::Loss(p), n)?)?.1.sqrt(),
        };
        let nf = n as f64;
        let noon = 1.0 / (eta.powi(n as i32).sqrt() * nf);
        let bound = asymptotic_loss_bound(n, eta, eta)?.delta_phi;
        let (_, cs) = optimal_split(nf, DecoherencePenalty::Loss { eta })?;
        Ok([("optimal", optimal), ("noon", noon), ("bound", bound), ("coherent_squeezed", cs)]
            .into_iter()
            .map(|(name, d)| vec![n.into(), name.into(), d.into()])
            .collect::<Vec<_>>())
    })?;
    rows.into_iter().flatten().for_each(|r| t.push(r));
    Ok(t)
}

/// Gap `1 - sqrt(f / (e^{-2r} + f))` between a squeezed interferometer and
/// the loss bound, both scaled by `sqrt(N̄)`.
pub fn cmd_ligo_check(eta: f64, squeeze_factor: f64) -> CliResult<Table> {
    let penalty = DecoherencePenalty::Loss { eta }.validate()?;
    if !(0.0..=1.0).contains(&squeeze_factor) {
        return Err(param(format!("squeeze factor {squeeze_factor} outside [0, 1]")));
    }
    let f = penalty.f();
    if squeeze_factor + f == 0.0 {
        return Err(param("no loss and infinite squeezing leave nothing to compare"));
    }
    let achieved = (squeeze_factor + f).sqrt();
    let bound = f.sqrt();
    let gap = 1.0 - bound / achieved;
    let cfg = [("eta", eta.to_string()), ("squeeze_factor", squeeze_factor.to_string())];
    let mut t = Table::new(
        "ligo-check",
        config(&cfg),
        &["eta", "squeeze_factor", "f", "achieved_scaled", "bound_scaled", "gap"],
    );
    t.push(vec![eta.into(), squeeze_factor.into(), f.into(), achieved.into(), bound.into(), gap.into()]);
    Ok(t)
}

pub fn cmd_binomial(trials: usize, p: f64, repetitions: f64) -> CliResult<Table> {
    if trials == 0 {
        return Err(param("need at least one trial"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(param(format!("p = {p} must lie in (0, 1)")));
    }
    if repetitions.is_nan() || repetitions <= 0.0 {
        return Err(param("repetitions must be positive"));
    }
    let cfg = [("trials", trials.to_string()), ("p", p.to_string()), ("repetitions", repetitions.to_string())];
    let mut t = Table::new("binomial", config(&cfg), &["n", "ml", "mmse", "circular_phase"]);
    let model = BinomialP { trials };
    let prior = PriorSpec::flat(0.0, 1.0);
    t.note("fisher_information", fisher_information(&model, p)?);
    t.note("crb", crb(&model, p, repetitions)?);
    t.note("average_mse", prior_averaged_mse(&model, &prior)?);
    t.note("circular_cost", binomial_phase_circular_cost(trials));
    for n in 0..=trials {
        let mut counts = vec![0u64; trials + 1];
        counts[n] = 1;
        let ml = ml_estimate(&model, &counts)?[0];
        let (mmse, _) = bayes_mmse(&model, &prior, &counts)?;
        let circ = binomial_phase_circular_estimate(trials, n);
        t.push(vec![n.into(), ml.into(), mmse.into(), circ.into()]);
    }
    Ok(t)
}
