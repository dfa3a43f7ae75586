use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use ufl_core::augmentation::augment;
use ufl_core::clustering::{cluster_conn, cluster_greedy};
use ufl_core::conditions::{default_gamma_grid, parse_grid, validate_parameters};
use ufl_core::game::{game_table, worst_case_ratio, GammaDistribution, Variant};
use ufl_core::generators::{generate_hardness, generate_random, GenSpec, GraphInput, Profile};
use ufl_core::jms::jms_solve;
use ufl_core::lp::solve_relaxation;
use ufl_core::rounding::{estimate_with_best, is_connection_dominant, run_bifactor, run_unifactor};
use ufl_core::verification::{appendix_grid_search, brute_force_opt, certify_bifactor, check_lemmas, LemmaStatus};
use ufl_core::{Instance, ParamSet, UflError};

mod report;

use report::Checks;

#[derive(Parser, Debug)]
#[command(name = "ufl", version, about = "Euclidean facility location: LP rounding, oracles and checkers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded random instance, or the hardness instance of a graph.
    Generate(GenerateArgs),
    /// Solve an instance and write the solution as TSV.
    Solve(SolveArgs),
    /// Run the checkers on an instance.
    Verify(VerifyArgs),
    /// Compare algorithms over a batch of seeded instances.
    Bench(BenchArgs),
    /// Tabulate the threshold game for a γ distribution.
    Game(GameArgs),
    /// Check the constants against the sufficient conditions.
    Params(ParamsArgs),
}

#[derive(Parser, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    facilities: usize,
    #[arg(long, default_value_t = 12)]
    clients: usize,
    #[arg(long, default_value = "uniform_box")]
    profile: String,
    #[arg(long, default_value_t = 0.0)]
    cost_min: f64,
    #[arg(long, default_value_t = 1.0)]
    cost_max: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Graph file (`n m` then `u v` lines); switches to the hardness construction.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0.25)]
    q: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Algo {
    Bifactor,
    Unifactor,
    Jms,
    GreedyBaseline,
}

#[derive(Parser, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "bifactor")]
    algo: Algo,
    #[arg(long, default_value_t = 1.6774)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    kappa2: Option<f64>,
    /// Solution TSV; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Per-client or per-trial diagnostics TSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Parser, Debug)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Also check rounding probabilities and compare against the exact optimum.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 1.6774)]
    gamma: f64,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Parser, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    instances: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    facilities: usize,
    #[arg(long, default_value_t = 12)]
    clients: usize,
    #[arg(long, default_value = "uniform_box")]
    profile: String,
    #[arg(long, default_value_t = 1.0)]
    cost_max: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Dist {
    Mu1,
    Mu2,
    Mixed,
    Jms,
    Point,
}

#[derive(Parser, Debug)]
struct GameArgs {
    #[arg(long, value_enum, default_value = "mu1")]
    dist: Dist,
    #[arg(long, default_value = "nu")]
    variant: String,
    #[arg(long, default_value_t = 0.0)]
    eps7: f64,
    /// JMS weight for `li` and `mu2`.
    #[arg(long)]
    kappa: Option<f64>,
    /// Support point for `point`.
    #[arg(long, default_value_t = 1.6774)]
    gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Print only the adversary's best threshold and the ratio.
    #[arg(long)]
    worst: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    Published,
    Inflated,
}

#[derive(Parser, Debug)]
struct ParamsArgs {
    /// `lo:hi:step`, inclusive.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value = "published")]
    preset: Preset,
    /// Also run the (γ, k, l, r) grid search with this step.
    #[arg(long)]
    appendix: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

enum Outcome {
    Ok,
    CheckFailed,
}

fn input(msg: impl Into<String>) -> UflError {
    UflError::Input(msg.into())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), UflError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Instance, UflError> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    Instance::parse(&text)
}

fn generate(a: &GenerateArgs) -> Result<Outcome, UflError> {
    let inst = match &a.graph {
        Some(g) => {
            let text = fs::read_to_string(g).map_err(|e| input(format!("cannot read {}: {e}", g.display())))?;
            let h = generate_hardness(&GraphInput::parse(&text)?, a.q, a.lambda)?;
            eprintln!("lambda {} completeness_cost {}", h.lambda, h.completeness_cost);
            h.instance
        }
        None => {
            let mut spec = GenSpec::new(a.seed, a.dim, a.facilities, a.clients, a.profile.parse::<Profile>()?);
            spec.cost_range = (a.cost_min, a.cost_max);
            spec.coordinate_scale = a.scale;
            generate_random(&spec)?
        }
    };
    emit(a.out.as_deref(), &inst.to_text())?;
    Ok(Outcome::Ok)
}

fn solve(a: &SolveArgs) -> Result<Outcome, UflError> {
    let inst = load(&a.instance)?;
    let mut params = ParamSet::published().with_gamma(a.gamma);
    if let Some(k) = a.kappa2 {
        params.kappa2 = k;
    }
    let (sol, diag, summary) = match a.algo {
        Algo::Jms => {
            let sol = jms_solve(&inst);
            let s = format!("jms\t-\t-\t{}\t{}", sol.total_cost, sol.total_cost);
            (sol, None, s)
        }
        Algo::Bifactor => {
            let run = run_bifactor(&inst, &params, a.gamma, a.trials, a.seed)?;
            let s = format!("bifactor\t{}\t{}\t{}\t{}", format!("{:?}", run.branch).to_lowercase(), run.lp.primal.objective, run.best.total_cost, run.mean_cost());
            let d = run.diagnostics.as_ref().map(report::client_probabilities);
            (run.best, d, s)
        }
        Algo::GreedyBaseline => {
            let lp = solve_relaxation(&inst)?;
            let aug = augment(&lp, &inst, a.gamma)?;
            let all: Vec<usize> = (0..inst.n_clients()).collect();
            let cl = cluster_greedy(&all, &aug, &params)?;
            let (d, best) = estimate_with_best(&aug, &cl, a.trials, a.seed)?;
            let s = format!("greedy-baseline\t-\t{}\t{}\t{}", lp.primal.objective, best.total_cost, d.mean_cost);
            (best, Some(report::client_probabilities(&d)), s)
        }
        Algo::Unifactor => {
            let (best, rep) = run_unifactor(&inst, &params, a.trials, a.seed)?;
            let s = format!("unifactor\t-\t{}\t{}\t{}", rep.lp_objective, best.total_cost, rep.mean_cost);
            (best, Some(report::unifactor_trials(&rep)), s)
        }
    };
    emit(a.out.as_deref(), &sol.to_tsv(&inst))?;
    if let (Some(p), Some(d)) = (&a.diagnostics, diag) {
        emit(Some(p), &d)?;
    }
    if a.out.is_some() {
        println!("algo\tbranch\tlp\tbest\tmean\n{summary}");
    } else {
        eprintln!("algo\tbranch\tlp\tbest\tmean\n{summary}");
    }
    Ok(Outcome::Ok)
}

fn verify(a: &VerifyArgs) -> Result<Outcome, UflError> {
    let inst = load(&a.instance)?;
    let params = ParamSet::published().with_gamma(a.gamma);
    let mut checks = Checks::default();

    let lp = solve_relaxation(&inst)?;
    let gap = lp.duality_gap();
    checks.push("lp_duality_gap", gap <= 1e-6, format!("{gap:e}"));
    let aug = augment(&lp, &inst, a.gamma)?;
    let dominant = is_connection_dominant(&lp, &params);
    let all: Vec<usize> = (0..inst.n_clients()).collect();
    let cl = if dominant { cluster_conn(&aug, &params)? } else { cluster_greedy(&all, &aug, &params)? };
    checks.push("clustering_partition", cl.is_partition_of(&all, inst.n_clients()), format!("{} clusters", cl.clusters.len()));
    for o in check_lemmas(&aug, &cl, &params)?.outcomes {
        let detail = format!("checked {} failures {} worst_slack {}", o.checked, o.failures, o.worst_slack);
        checks.push_status(o.name, o.status(), detail);
    }

    if a.full {
        let (d, best) = estimate_with_best(&aug, &cl, a.trials, a.seed)?;
        let g = a.gamma;
        let close_floor = 1.0 - (-1.0f64).exp();
        let near_floor = 1.0 - (-g).exp();
        let bad_close = (0..inst.n_clients()).filter(|&j| d.p_close[j] < close_floor - 3.0 * d.sigma(d.p_close[j])).count();
        let bad_near = (0..inst.n_clients())
            .filter(|&j| {
                let p = d.p_close[j] + d.p_distant[j];
                p < near_floor - 3.0 * d.sigma(p)
            })
            .count();
        checks.push("p_close_open", bad_close == 0, format!("{bad_close} clients below 1-1/e"));
        checks.push("p_near_open", bad_near == 0, format!("{bad_near} clients below 1-e^-gamma"));

        if inst.n_facilities() <= 20 {
            let opt = brute_force_opt(&inst)?.opt_cost;
            let tol = 1e-9 * opt.max(1.0);
            let lpv = lp.primal.objective;
            checks.push("lp_below_opt", lpv <= opt + tol, format!("lp {lpv} opt {opt}"));
            let jms = jms_solve(&inst);
            for (name, cost) in [("opt_below_rounding", best.total_cost), ("opt_below_jms", jms.total_cost)] {
                checks.push(name, cost >= opt - tol, format!("cost {cost} opt {opt}"));
            }
            if inst.n_facilities() <= 16 {
                let cert = certify_bifactor(&jms, &inst, 1.11, 1.7764)?;
                checks.push("jms_bifactor", cert.holds, format!("worst slack {} at {:?}", cert.worst_slack, cert.worst_set));
            }
        } else {
            checks.push_status("exact_oracle", LemmaStatus::NotApplicable, "more than 20 facilities".into());
        }
    }
    emit(a.report.as_deref(), &checks.to_tsv())?;
    Ok(if checks.failed() { Outcome::CheckFailed } else { Outcome::Ok })
}

fn bench(a: &BenchArgs) -> Result<Outcome, UflError> {
    let profile: Profile = a.profile.parse()?;
    let params = ParamSet::published();
    let mut s = String::from("seed\tlp\topt\tjms\tbifactor_best\tbifactor_mean\tunifactor_best\tunifactor_mean\n");
    let start = Instant::now();
    for k in 0..a.instances {
        let seed = a.seed + k;
        let mut spec = GenSpec::new(seed, a.dim, a.facilities, a.clients, profile);
        spec.cost_range = (0.0, a.cost_max);
        let inst = generate_random(&spec)?;
        let opt = if inst.n_facilities() <= 20 { brute_force_opt(&inst)?.opt_cost.to_string() } else { "-".into() };
        let bi = run_bifactor(&inst, &params, params.gamma, a.trials, seed)?;
        let (uni, rep) = run_unifactor(&inst, &params, a.trials, seed)?;
        s.push_str(&format!(
            "{seed}\t{}\t{opt}\t{}\t{}\t{}\t{}\t{}\n",
            bi.lp.primal.objective,
            jms_solve(&inst).total_cost,
            bi.best.total_cost,
            bi.mean_cost(),
            uni.total_cost,
            rep.mean_cost
        ));
    }
    eprintln!("{} instances in {:.2?}", a.instances, start.elapsed());
    emit(a.out.as_deref(), &s)?;
    Ok(Outcome::Ok)
}

fn game(a: &GameArgs) -> Result<Outcome, UflError> {
    let variant: Variant = a.variant.parse()?;
    let kappa = a.kappa.unwrap_or(ufl_core::params::MIX_KAPPA);
    let dist = match a.dist {
        Dist::Mu1 => GammaDistribution::mu1(),
        Dist::Mu2 => GammaDistribution::mu2(a.eps7, kappa)?,
        Dist::Mixed => GammaDistribution::mixed(kappa)?,
        Dist::Jms => GammaDistribution::jms_only(),
        Dist::Point => GammaDistribution::point(a.gamma)?,
    };
    let text = if a.worst {
        let (ratio, q) = worst_case_ratio(&dist, variant, a.eps7, a.step.min(1e-3))?;
        format!("q\tratio\n{q}\t{ratio}\n")
    } else {
        game_table(&dist, variant, a.eps7, a.step)?
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Ok)
}

fn params_cmd(a: &ParamsArgs) -> Result<Outcome, UflError> {
    let params = match a.preset {
        Preset::Published => ParamSet::published(),
        Preset::Inflated => ParamSet::inflated(),
    };
    params.validate()?;
    let grid = match &a.grid {
        Some(g) => parse_grid(g).ok_or_else(|| input(format!("bad grid `{g}`, expected lo:hi:step")))?,
        None => default_gamma_grid(),
    };
    let rep = validate_parameters(&params, &grid);
    let mut text = rep.to_tsv();
    let mut ok = rep.all_passed();
    if let Some(d) = a.appendix {
        let g = appendix_grid_search(&params, d)?;
        let w = g.worst.map_or("-".to_string(), |p| format!("{}\t{}\t{}\t{}", p.gamma, p.k, p.l, p.r));
        text.push_str(&format!(
            "\nstep\tpoints\tmin_robust_margin\tgamma\tk\tl\tr\n{}\t{}\t{}\t{w}\n",
            g.step, g.points, g.min_robust_margin
        ));
        ok &= g.covered();
    }
    emit(a.out.as_deref(), &text)?;
    Ok(if ok { Outcome::Ok } else { Outcome::CheckFailed })
}

fn init_threads() -> Result<(), UflError> {
    let Ok(v) = std::env::var("UFL_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| input(format!("UFL_THREADS must be a count, got `{v}`")))?;
    // 0 leaves rayon's default
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| UflError::Internal(e.to_string()))
}

fn run(cli: &Cli) -> Result<Outcome, UflError> {
    init_threads()?;
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
        Command::Game(a) => game(a),
        Command::Params(a) => params_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
