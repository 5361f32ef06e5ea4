use crate::{BatchArgs, CapsimMode, Command, GbtArgs, GenArgs, SolverArgs, SourceArgs};
use anyhow::{bail, ensure, Context, Result};
use radsched_core::domain::{schedule_cost, Calendar, Schedule};
use radsched_core::explain::{global_summary, tree_shap, waterfall_from, write_beeswarm_csv, write_waterfall_csv};
use radsched_core::harness::{
    capacity_sim_uncapped, capacity_sim_waiting, compare, reservation_sweep, run_grid, run_pipeline, run_simulation,
    write_records_csv, write_summary_csv, write_sweep_csv, PipelineConfig, PipelineReport, SimConfig, SimResult,
};
use radsched_core::instancegen::{
    generate_instances, presets, Instance, InstanceConfig, InstanceSetting, PatientPool, RateVariation,
};
use radsched_core::ipcore::{InfeasibilityCertificate, SolverStats};
use radsched_core::learning::{
    evaluate, feature_correlation, fit_gbt, make_training_examples, read_examples_csv, write_examples_csv,
    TrainingExample,
};
use radsched_core::strategies::schedule_offline_reserved;
use radsched_core::{
    BranchAndBound, GbtModel, GbtParams, ObjectiveWeights, Patient, SolveStatus, SolverBudget, StrategyKind,
    WaitingPredictor,
};
use radsched_service::{serve, ServeOptions, ServiceConfig};
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::BufWriter;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Output of `radsched solve`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance_seed: u64,
    pub gamma: f64,
    /// Status of the curative IP; palliatives are always placed.
    pub status: SolveStatus,
    /// Cost of the whole schedule.
    pub objective: f64,
    /// Cost of the curative part, as minimized by the solver.
    pub curative_objective: f64,
    pub root_bound: f64,
    pub assignment: Schedule,
    pub stats: SolverStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<InfeasibilityCertificate>,
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen { gen, out } => cmd_gen(&gen, &out),
        Command::Solve { instance, gamma, solver, out } => cmd_solve(&instance, gamma, solver, &out),
        Command::Run { instance, strategy, gamma, model, solver, out, records } => {
            cmd_run(&instance, strategy, gamma, model.as_deref(), solver, &out, records.as_deref())
        }
        Command::Extract { instances, solutions, out } => cmd_extract(&instances, &solutions, &out),
        Command::Train { examples, params, out } => cmd_train(&examples, params, &out),
        Command::Explain { model, input, out, row } => cmd_explain(&model, &input, &out, row),
        Command::Sim { source, run, gamma, out } => cmd_sim(&source, &run, gamma, &out),
        Command::Capsim { mode, linacs, rate, days, seed, pool, out } => {
            cmd_capsim(mode, linacs, rate, days, seed, pool.as_deref(), &out)
        }
        Command::Sweep { source, run, gammas, out } => cmd_sweep(&source, &run, &gammas, &out),
        Command::Compare { source, run, gamma, out } => cmd_compare(&source, &run, gamma, &out),
        Command::Corr { examples, out } => cmd_corr(&examples, &out),
        Command::Pipeline { linacs, rate, days, train, test, train_seed, test_seed, gamma, params, solver, out } => {
            let config = PipelineConfig {
                setting: InstanceSetting::new(linacs, rate)?,
                instance: InstanceConfig { num_days: days, ..Default::default() },
                train_instances: train,
                test_instances: test,
                train_seed,
                test_seed,
                gamma,
                gbt: gbt_params(params),
                sim: sim_config(solver),
            };
            cmd_pipeline(&config, &out)
        }
        Command::Serve { scenario, model, gamma, port, host, journal, start_day, epoch } => {
            let calendar = match epoch {
                Some(d) => Calendar::new(d)?,
                None => Calendar::default(),
            };
            let config = ServiceConfig { gamma, calendar, start_day, ..Default::default() };
            let options = ServeOptions { scenario, model, journal, config, addr: SocketAddr::new(host, port) };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(options)).map_err(|e| anyhow::anyhow!(e))
        }
    }
}

fn budget(args: SolverArgs) -> SolverBudget {
    SolverBudget { node_limit: Some(args.node_limit), time_limit: args.time_limit.map(Duration::from_secs_f64) }
}

fn sim_config(args: SolverArgs) -> SimConfig {
    let solver = BranchAndBound::new(budget(args));
    SimConfig { batch_solver: solver.clone(), offline_solver: solver, ..Default::default() }
}

fn gbt_params(args: GbtArgs) -> GbtParams {
    GbtParams {
        n_trees: args.trees,
        max_depth: args.depth,
        learning_rate: args.learning_rate,
        min_samples_leaf: args.min_leaf,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn load_pool(path: Option<&Path>) -> Result<PatientPool> {
    match path {
        Some(p) => Ok(PatientPool::from_json(&fs::read_to_string(p)?)?),
        None => Ok(PatientPool::default()),
    }
}

fn load_model(path: Option<&Path>) -> Result<Option<GbtModel>> {
    Ok(path.map(GbtModel::load).transpose()?)
}

fn instance_file_name(seed: u64) -> String {
    format!("instance_{seed:06}.json")
}

/// JSON files of `dir`, sorted by name.
fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    Ok(files)
}

fn generate(args: &GenArgs) -> Result<Vec<Instance>> {
    let pool = load_pool(args.pool.as_deref())?;
    let (setting, mut rate_variation) = match &args.preset {
        Some(name) => {
            let preset =
                presets().into_iter().find(|p| &p.name == name).with_context(|| format!("unknown preset {name}"))?;
            (preset.setting, preset.rate_variation)
        }
        None => (InstanceSetting::new(args.linacs, args.rate)?, None),
    };
    if let Some(delta) = args.rate_delta {
        rate_variation = Some(RateVariation { delta, interval_days: args.rate_interval });
    }
    let config = InstanceConfig { num_days: args.days, rate_variation, ..Default::default() };
    Ok(generate_instances(&setting, &pool, &config, args.seed, args.count)?)
}

fn instances_from(source: &SourceArgs) -> Result<Vec<Instance>> {
    match &source.instances {
        Some(dir) => {
            let files = json_files(dir)?;
            ensure!(!files.is_empty(), "no instance files in {}", dir.display());
            files.iter().map(|f| Instance::load(f).with_context(|| format!("loading {}", f.display()))).collect()
        }
        None => generate(&source.gen),
    }
}

fn cmd_gen(args: &GenArgs, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let instances = generate(args)?;
    for inst in &instances {
        inst.save(&out.join(instance_file_name(inst.rng_seed)))?;
    }
    tracing::info!(count = instances.len(), dir = %out.display(), "instances written");
    Ok(())
}

fn cmd_solve(instance: &Path, gamma: f64, solver: SolverArgs, out: &Path) -> Result<()> {
    let instance = Instance::load(instance)?;
    let weights = ObjectiveWeights::default();
    let offline = schedule_offline_reserved(&instance, gamma, weights, &BranchAndBound::new(budget(solver)))?;
    let patients: Vec<Patient> = instance.flow.patients().cloned().collect();
    let file = SolutionFile {
        instance_seed: instance.rng_seed,
        gamma,
        status: offline.solution.status,
        objective: schedule_cost(&offline.schedule, &patients, &weights)?,
        curative_objective: offline.solution.objective,
        root_bound: offline.solution.stats.root_bound,
        assignment: offline.schedule,
        stats: offline.solution.stats,
        certificate: offline.solution.certificate,
    };
    tracing::info!(status = ?file.status, objective = file.objective, nodes = file.stats.nodes, "solved");
    write_json(out, &file)
}

fn cmd_run(
    instance: &Path,
    strategy: StrategyKind,
    gamma: f64,
    model: Option<&Path>,
    solver: SolverArgs,
    out: &Path,
    records: Option<&Path>,
) -> Result<()> {
    let instance = Instance::load(instance)?;
    let model = load_model(model)?;
    let predictor = model.as_ref().map(|m| m as &dyn WaitingPredictor);
    let result = run_simulation(&instance, strategy, gamma, &sim_config(solver), predictor)?;
    if let Some(path) = records {
        write_records_csv(std::slice::from_ref(&result), create(path)?)?;
    }
    tracing::info!(strategy = %strategy, objective = result.objective, "simulated");
    write_json(out, &result)
}

fn cmd_extract(instances: &Path, solutions: &Path, out: &Path) -> Result<()> {
    let mut examples: Vec<TrainingExample> = Vec::new();
    let files = json_files(instances)?;
    ensure!(!files.is_empty(), "no instance files in {}", instances.display());
    for file in files {
        let instance = Instance::load(&file)?;
        let name = file.file_name().expect("listed files have names");
        let solution_path = solutions.join(name);
        let solution: SolutionFile = serde_json::from_str(
            &fs::read_to_string(&solution_path).with_context(|| format!("reading {}", solution_path.display()))?,
        )?;
        if solution.instance_seed != instance.rng_seed {
            bail!(
                "{} was solved for seed {}, not {}",
                solution_path.display(),
                solution.instance_seed,
                instance.rng_seed
            );
        }
        examples.extend(make_training_examples(&instance, &solution.assignment)?);
    }
    write_examples_csv(&examples, create(out)?)?;
    tracing::info!(examples = examples.len(), "examples written");
    Ok(())
}

fn read_examples(path: &Path) -> Result<Vec<TrainingExample>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_examples_csv(std::io::BufReader::new(file))?)
}

fn cmd_train(examples: &Path, params: GbtArgs, out: &Path) -> Result<()> {
    let examples = read_examples(examples)?;
    let model = fit_gbt(&examples, &gbt_params(params))?;
    let fit = evaluate(&model, &examples)?;
    tracing::info!(examples = examples.len(), r2 = fit.r_squared, mse = fit.mse, "training fit");
    model.save(out)?;
    Ok(())
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "explain".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn cmd_explain(model: &Path, input: &Path, out: &Path, row: usize) -> Result<()> {
    let model = GbtModel::load(model)?;
    let examples = read_examples(input)?;
    ensure!(row < examples.len(), "row {row} out of range for {} examples", examples.len());
    let attributions = examples.iter().map(|e| tree_shap(&model, &e.x)).collect::<radsched_core::Result<Vec<_>>>()?;
    let rows: Vec<_> = examples.iter().map(|e| e.x.clone()).collect();
    let summary = global_summary(&model, &rows)?;
    let chart = waterfall_from(&attributions[row], examples[row].x.as_slice());
    write_waterfall_csv(&chart, create(&sibling(out, "waterfall.csv"))?)?;
    write_beeswarm_csv(&summary, create(&sibling(out, "beeswarm.csv"))?)?;
    write_json(out, &attributions)
}

fn strategies_for(run: &BatchArgs, model: Option<&GbtModel>) -> Result<Vec<StrategyKind>> {
    let list: Vec<StrategyKind> = if run.strategies.is_empty() {
        StrategyKind::ALL.into_iter().filter(|s| !s.needs_model() || model.is_some()).collect()
    } else {
        run.strategies.clone()
    };
    if model.is_none() {
        if let Some(s) = list.iter().find(|s| s.needs_model()) {
            bail!("strategy {s} needs --model");
        }
    }
    Ok(list)
}

/// Results without per-patient records, for the JSON summaries.
fn without_records(results: &[SimResult]) -> Vec<SimResult> {
    results.iter().map(|r| SimResult { records: Vec::new(), ..r.clone() }).collect()
}

fn cmd_sim(source: &SourceArgs, run: &BatchArgs, gamma: f64, out: &Path) -> Result<()> {
    let instances = instances_from(source)?;
    let model = load_model(run.model.as_deref())?;
    let strategies = strategies_for(run, model.as_ref())?;
    let predictor = model.as_ref().map(|m| m as &dyn WaitingPredictor);
    let results = run_grid(&instances, &strategies, &[gamma], &sim_config(run.solver), predictor)?;
    fs::create_dir_all(out)?;
    write_records_csv(&results, create(&out.join("records.csv"))?)?;
    write_summary_csv(&results, create(&out.join("summary.csv"))?)?;
    write_json(&out.join("results.json"), &without_records(&results))
}

fn cmd_sweep(source: &SourceArgs, run: &BatchArgs, gammas: &[f64], out: &Path) -> Result<()> {
    let instances = instances_from(source)?;
    let model = load_model(run.model.as_deref())?;
    let strategies = strategies_for(run, model.as_ref())?;
    let predictor = model.as_ref().map(|m| m as &dyn WaitingPredictor);
    let report = reservation_sweep(&instances, &strategies, gammas, &sim_config(run.solver), predictor)?;
    fs::create_dir_all(out)?;
    write_sweep_csv(&report, create(&out.join("sweep.csv"))?)?;
    write_json(&out.join("sweep.json"), &report)
}

fn cmd_compare(source: &SourceArgs, run: &BatchArgs, gamma: f64, out: &Path) -> Result<()> {
    let instances = instances_from(source)?;
    let model = load_model(run.model.as_deref())?;
    let strategies = strategies_for(run, model.as_ref())?;
    let predictor = model.as_ref().map(|m| m as &dyn WaitingPredictor);
    let results = run_grid(&instances, &strategies, &[gamma], &sim_config(run.solver), predictor)?;
    let report = compare(&results)?;
    fs::create_dir_all(out)?;
    write_records_csv(&results, create(&out.join("records.csv"))?)?;
    write_summary_csv(&results, create(&out.join("summary.csv"))?)?;
    write_json(&out.join("comparison.json"), &report)
}

fn cmd_capsim(
    mode: CapsimMode,
    linacs: usize,
    rate: f64,
    days: u32,
    seed: u64,
    pool: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let setting = InstanceSetting::new(linacs, rate)?;
    let pool = load_pool(pool)?;
    match mode {
        CapsimMode::Uncapped => {
            let report = capacity_sim_uncapped(&setting, &pool, days, seed)?;
            tracing::info!(
                mean = report.mean_weekly_demand,
                capacity = report.weekly_capacity,
                over = report.weeks_over_capacity,
                "weekly demand"
            );
            write_json(out, &report)
        }
        CapsimMode::Waiting => {
            let trend = capacity_sim_waiting(&setting, &pool, days, seed)?;
            tracing::info!(slope = ?trend.slope, "waiting trend");
            write_json(out, &trend)
        }
    }
}

fn cmd_corr(examples: &Path, out: &Path) -> Result<()> {
    let examples = read_examples(examples)?;
    let m = feature_correlation(&examples)?;
    let mut w = create(out)?;
    use std::io::Write;
    writeln!(w, "feature,{}", m.names.join(","))?;
    for (name, row) in m.names.iter().zip(&m.values) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{name},{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PipelineSummary<'a> {
    config: &'a PipelineConfig,
    train_examples: usize,
    test_examples: usize,
    gbt_r2: f64,
    gbt_mse: f64,
    linear_r2: f64,
    prediction_palliative_overdue: &'a [f64],
    greedy_palliative_overdue: &'a [f64],
    sign_test: &'a radsched_core::harness::stats::SignTest,
}

fn cmd_pipeline(config: &PipelineConfig, out: &Path) -> Result<()> {
    let report: PipelineReport = run_pipeline(config, &PatientPool::default())?;
    fs::create_dir_all(out)?;
    report.model.save(&out.join("model.json"))?;
    tracing::info!(
        r2 = report.gbt_eval.r_squared,
        linear_r2 = report.linear_eval.r_squared,
        p = report.sign_test.p_value,
        "pipeline finished"
    );
    write_json(
        &out.join("report.json"),
        &PipelineSummary {
            config,
            train_examples: report.train_examples,
            test_examples: report.test_examples,
            gbt_r2: report.gbt_eval.r_squared,
            gbt_mse: report.gbt_eval.mse,
            linear_r2: report.linear_eval.r_squared,
            prediction_palliative_overdue: &report.prediction_palliative_overdue,
            greedy_palliative_overdue: &report.greedy_palliative_overdue,
            sign_test: &report.sign_test,
        },
    )
}
