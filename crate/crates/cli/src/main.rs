//! Command-line surface of the notification-timing toolkit.
//!
//! Subcommands: `solve-offline`, `build-model`, `train-onp`, `tune-naw`,
//! `simulate`, `experiment`, `reduce`, `adversary`. Every run is seeded
//! (explicitly or by the default), and every report file embeds the seed,
//! the config hash, and the artifact version in its header, so any output
//! is regenerable bit-exact.

mod parse;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ntp_core::experiment::run_experiment;
use ntp_core::io::{
    parse_experiment_config, plot_data_csv, report_header, threshold_table_to_csv,
};
use ntp_core::milp::{
    build_dntps, build_ntp, build_ntp2, solve_ntp2_exact, solve_ntp_exact, write_lp, CapMode,
    SolveLimits, SolveResult,
};
use ntp_core::policy::{default_naw_grid, estimate_thresholds, tune_naw};
use ntp_core::reduce::{adversary, reduce, verify_block_properties, verify_reduction};
use ntp_core::sim::{sample_scenarios, simulate_full, ScenarioSet};
use ntp_core::{Instance, SubsetSumInstance};
use parse::{
    format_delay, instance_canon, parse_aggregator, parse_blocks, parse_delays, parse_policy,
    parse_prefs, scenario_source, schedule_csv,
};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "ntp",
    version,
    about = "Notification timing for on-demand personnel scheduling",
    after_help = "Report files are CSV with fixed column orders:\n  \
schedule.csv     employee,notify_time,response_time\n  \
simulation.csv   scenario,potential_bumps,realized_bumps,vacancies,cost,makespan\n  \
experiment.csv   policy,label,mean_bumps,mean_vacancies,mean_cost,vacancy_feasible\n  \
thresholds.csv   epoch,target (versioned threshold table)\n  \
*_plot.csv       epoch,cumulative_notifications\n\
Headers carry the seed, a config hash, and the artifact version, so every \
report is regenerable bit-exact from its command line."
)]
struct Cli {
    /// Worker threads for scenario batches (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArgs {
    /// Number of employees M.
    #[arg(long)]
    employees: usize,
    /// Number of shifts L (default: M).
    #[arg(long)]
    shifts: Option<usize>,
    /// Planning horizon H in epochs (1 epoch = 1 minute).
    #[arg(long)]
    horizon: u32,
    /// Bump cutoff D in epochs (default: H).
    #[arg(long)]
    cutoff: Option<u32>,
    /// Max notifications per epoch W (default: M).
    #[arg(long)]
    cap: Option<u32>,
    /// Cost of one vacant shift G.
    #[arg(long, default_value_t = 200)]
    penalty: u64,
}

impl InstanceArgs {
    fn build(&self) -> Result<Instance> {
        Ok(Instance::new(
            self.employees,
            self.shifts.unwrap_or(self.employees),
            self.horizon,
            self.cutoff.unwrap_or(self.horizon),
            self.cap.unwrap_or(self.employees as u32),
            self.penalty,
        )?)
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Delay CSV (one value per row, optional header) for empirical draws.
    #[arg(long)]
    delays_file: Option<PathBuf>,
    /// Unit of the delay file rows: seconds | minutes.
    #[arg(long, default_value = "minutes")]
    unit: String,
    /// Mean of the synthetic exponential delay shape, in minutes.
    #[arg(long)]
    synthetic_mean: Option<f64>,
    /// Probability that an employee never responds.
    #[arg(long, default_value_t = 0.0)]
    p_nr: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the offline problem exactly for one realized scenario.
    SolveOffline {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Comma-separated delays, e.g. 4,1,5,3,2,5 (`nr` marks a
        /// non-responder; ntp2 only).
        #[arg(long)]
        delays: String,
        /// Offline formulation: ntp (bumps only) or ntp2 (vacancy-priced).
        #[arg(long, default_value = "ntp")]
        formulation: String,
        /// Solve-time budget in seconds.
        #[arg(long, default_value_t = 240)]
        time_budget: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Export a formulation as LP-format text.
    BuildModel {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Delays for ntp/ntp2 (comma-separated; `nr` allowed for ntp2).
        #[arg(long)]
        delays: Option<String>,
        /// ntp | ntp2 | dntps
        #[arg(long, default_value = "ntp")]
        formulation: String,
        /// Scenario count for dntps (sampled from the delay source).
        #[arg(long, default_value_t = 2)]
        scenarios: usize,
        #[command(flatten)]
        source: SourceArgs,
        /// Concurrency-cap flavour for dntps: equality | inequality.
        #[arg(long, default_value = "inequality")]
        cap_mode: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Estimate ONP thresholds from exact offline solutions.
    TrainOnp {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        source: SourceArgs,
        /// Training scenario count.
        #[arg(long, default_value_t = 1000)]
        scenarios: usize,
        /// mean or a percentile like p95.
        #[arg(long, default_value = "p95")]
        aggregator: String,
        /// Per-solve time budget in seconds.
        #[arg(long, default_value_t = 240)]
        time_budget: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Grid-search notify-and-wait parameters on validation scenarios.
    TuneNaw {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 500)]
        scenarios: usize,
        /// Preference distribution: fixed, undesirable:5, grouped,
        /// perturbed, perturbed-undesirable:5, uniform.
        #[arg(long, default_value = "fixed")]
        prefs: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Simulate a policy over scenarios and report per-run outcomes.
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// na | naw:3,7 | onp:thresholds.csv | replay:schedule.csv
        #[arg(long)]
        policy: String,
        /// One explicit scenario (comma-separated delays, `nr` allowed).
        #[arg(long)]
        delays: Option<String>,
        /// Or draw this many scenarios from the delay source.
        #[arg(long, default_value_t = 1)]
        scenarios: usize,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "fixed")]
        prefs: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run the full train/validate/test pipeline from a config file.
    Experiment {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Materialize a subset-sum instance as a scheduling instance and
    /// verify the hardness certificate.
    Reduce {
        /// Comma-separated sizes, e.g. 1,4,7.
        #[arg(long)]
        sizes: String,
        /// Subset-sum target.
        #[arg(long)]
        target: u64,
        /// Also check the block-schedule properties for this choice of
        /// blocks (comma-separated 1-based indices, e.g. 1,2).
        #[arg(long)]
        blocks: Option<String>,
        #[arg(long, default_value_t = 240)]
        time_budget: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Play a policy against the adaptive worst case.
    Adversary {
        #[command(flatten)]
        instance: InstanceArgs,
        /// na | naw:1,2 | onp:thresholds.csv | replay:schedule.csv
        #[arg(long)]
        policy: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn limits(secs: u64) -> SolveLimits {
    SolveLimits {
        time_limit: Duration::from_secs(secs),
        ..SolveLimits::default()
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::SolveOffline {
            instance,
            delays,
            formulation,
            time_budget,
            out,
            seed,
        } => {
            let inst = instance.build()?;
            let scenario = parse_delays(&delays, inst.employees)?;
            let canon = format!(
                "solve-offline|{}|delays={delays}|formulation={formulation}|seed={seed}",
                instance_canon(&inst)
            );
            let result: SolveResult = match formulation.as_str() {
                "ntp" => solve_ntp_exact(&inst, &scenario, &limits(time_budget))?,
                "ntp2" => solve_ntp2_exact(&inst, &scenario, &limits(time_budget)),
                other => bail!("unknown formulation `{other}` (expected ntp or ntp2)"),
            };
            let mut body = report_header("schedule", &canon, seed);
            let _ = writeln!(body, "# formulation: {formulation}");
            let _ = writeln!(body, "# status: {:?}", result.status);
            let _ = writeln!(body, "# objective: {}", result.objective);
            let _ = writeln!(body, "# bumps: {}", result.bumps);
            let _ = writeln!(body, "# vacancies: {}", result.vacancies);
            let schedule = result
                .schedule
                .as_ref()
                .context("solver produced no schedule (infeasible instance)")?;
            body.push_str(&schedule_csv(schedule, &scenario));
            let path = write_out(&out, "schedule.csv", &body)?;
            println!(
                "{formulation}: status {:?}, objective {}, bumps {}, vacancies {}",
                result.status, result.objective, result.bumps, result.vacancies
            );
            println!("schedule -> {}", path.display());
            Ok(())
        }
        Command::BuildModel {
            instance,
            delays,
            formulation,
            scenarios,
            source,
            cap_mode,
            out,
            seed,
        } => {
            let inst = instance.build()?;
            let model = match formulation.as_str() {
                "ntp" | "ntp2" => {
                    let delays = delays.context("ntp/ntp2 model export needs --delays")?;
                    let scenario = parse_delays(&delays, inst.employees)?;
                    if formulation == "ntp" {
                        build_ntp(&inst, &scenario)?
                    } else {
                        build_ntp2(&inst, &scenario)?
                    }
                }
                "dntps" => {
                    let src = scenario_source(&source)?;
                    let set = sample_scenarios(&src, inst.employees, scenarios, seed);
                    let mode = match cap_mode.as_str() {
                        "equality" => CapMode::Equality,
                        "inequality" => CapMode::Inequality,
                        other => bail!("unknown cap mode `{other}`"),
                    };
                    build_dntps(&inst, &set, mode)?
                }
                other => bail!("unknown formulation `{other}`"),
            };
            let name = format!("{formulation}.lp");
            let path = write_out(&out, &name, &write_lp(&model))?;
            println!(
                "{} variables, {} rows -> {}",
                model.num_vars(),
                model.num_rows(),
                path.display()
            );
            Ok(())
        }
        Command::TrainOnp {
            instance,
            source,
            scenarios,
            aggregator,
            time_budget,
            out,
            seed,
        } => {
            let inst = instance.build()?;
            let agg = parse_aggregator(&aggregator)?;
            let src = scenario_source(&source)?;
            let set = sample_scenarios(&src, inst.employees, scenarios, seed);
            let table = estimate_thresholds(&inst, &set, agg, &limits(time_budget))?;
            let canon = format!(
                "train-onp|{}|scenarios={scenarios}|aggregator={aggregator}|seed={seed}",
                instance_canon(&inst)
            );
            let mut body = report_header("threshold-table", &canon, seed);
            body.push_str(&threshold_table_to_csv(&table));
            let path = write_out(&out, "thresholds.csv", &body)?;
            let plot = write_out(&out, "thresholds_plot.csv", &plot_data_csv(&table))?;
            println!(
                "trained on {} scenarios ({} dropped on time budget)",
                table.trained_on, table.dropped
            );
            println!("table -> {}", path.display());
            println!("plot data -> {}", plot.display());
            Ok(())
        }
        Command::TuneNaw {
            instance,
            source,
            scenarios,
            prefs,
            out,
            seed,
        } => {
            let inst = instance.build()?;
            let src = scenario_source(&source)?;
            let set = sample_scenarios(&src, inst.employees, scenarios, seed);
            let pref_spec = parse_prefs(&prefs, seed)?;
            let tuning = tune_naw(&inst, &set, &default_naw_grid(), &pref_spec)?;
            let canon = format!(
                "tune-naw|{}|scenarios={scenarios}|prefs={prefs}|seed={seed}",
                instance_canon(&inst)
            );
            let mut body = report_header("naw-tuning", &canon, seed);
            body.push_str(&serde_json::to_string_pretty(&tuning)?);
            body.push('\n');
            let path = write_out(&out, "naw.json", &body)?;
            println!(
                "best naw({}, {}): mean bumps {:.3}, mean vacancies {:.4}{}",
                tuning.batch,
                tuning.wait,
                tuning.mean_bumps,
                tuning.mean_vacancies,
                if tuning.feasible { "" } else { " [infeasible]" }
            );
            println!("tuning -> {}", path.display());
            Ok(())
        }
        Command::Simulate {
            instance,
            policy,
            delays,
            scenarios,
            source,
            prefs,
            out,
            seed,
        } => {
            let inst = instance.build()?;
            let policy_spec = parse_policy(&policy)?;
            let pref_spec = parse_prefs(&prefs, seed)?;
            let set: ScenarioSet = match &delays {
                Some(list) => ScenarioSet::new(vec![parse_delays(list, inst.employees)?], seed)?,
                None => {
                    let src = scenario_source(&source)?;
                    sample_scenarios(&src, inst.employees, scenarios, seed)
                }
            };
            let canon = format!(
                "simulate|{}|policy={policy}|prefs={prefs}|runs={}|seed={seed}",
                instance_canon(&inst),
                set.len()
            );
            let mut body = report_header("simulation", &canon, seed);
            let _ = writeln!(body, "# policy: {}", policy_spec.label());
            body.push_str("scenario,potential_bumps,realized_bumps,vacancies,cost,makespan\n");
            let mut total_cost = 0u64;
            for (draw, scenario) in set.scenarios.iter().enumerate() {
                let profile = ntp_core::prefs::generate(
                    &pref_spec,
                    inst.employees,
                    inst.shifts,
                    draw as u64,
                )?;
                let outcome = simulate_full(&inst, scenario, &profile, &policy_spec);
                let r = &outcome.report;
                total_cost += r.cost;
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{}",
                    draw,
                    r.potential_bumps,
                    r.realized_bumps.unwrap_or(0),
                    r.vacancies,
                    r.cost,
                    r.makespan
                );
            }
            let path = write_out(&out, "simulation.csv", &body)?;
            println!(
                "{} run(s), mean cost {:.3}",
                set.len(),
                total_cost as f64 / set.len() as f64
            );
            println!("report -> {}", path.display());
            Ok(())
        }
        Command::Experiment { config, out } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let base = config.parent().unwrap_or(Path::new("."));
            let plan = parse_experiment_config(&text, base)?;
            let report = run_experiment(&plan)?;
            let canon = format!("experiment|{text}");
            let mut body = report_header("experiment", &canon, plan.seed);
            let _ = writeln!(body, "# accounting: {:?}", report.accounting);
            body.push_str("policy,label,mean_bumps,mean_vacancies,mean_cost,vacancy_feasible\n");
            for row in &report.rows {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{}",
                    row.name,
                    row.label,
                    row.mean_bumps,
                    row.mean_vacancies,
                    row.mean_cost,
                    row.vacancy_feasible
                );
            }
            let path = write_out(&out, "experiment.csv", &body)?;
            let mut json = report_header("experiment-full", &canon, plan.seed);
            json.push_str(&serde_json::to_string_pretty(&report)?);
            json.push('\n');
            write_out(&out, "experiment.json", &json)?;
            for (label, table) in &report.onp_tables {
                let mut t = report_header("threshold-table", &canon, plan.seed);
                t.push_str(&threshold_table_to_csv(table));
                write_out(&out, &format!("thresholds_{label}.csv"), &t)?;
                write_out(
                    &out,
                    &format!("thresholds_{label}_plot.csv"),
                    &plot_data_csv(table),
                )?;
            }
            for err in &report.stage_errors {
                eprintln!("warning: {err}");
            }
            for row in &report.rows {
                println!(
                    "{:<12} bumps {:>10.3}  vacancies {:>8.4}  cost {:>10.3}  {}",
                    row.name,
                    row.mean_bumps,
                    row.mean_vacancies,
                    row.mean_cost,
                    if row.vacancy_feasible {
                        "ok"
                    } else {
                        "vacancy-infeasible"
                    }
                );
            }
            println!("experiment -> {}", path.display());
            Ok(())
        }
        Command::Reduce {
            sizes,
            target,
            blocks,
            time_budget,
            out,
            seed,
        } => {
            let sizes: Vec<u64> = sizes
                .split(',')
                .map(|t| t.trim().parse().context("sizes must be positive integers"))
                .collect::<Result<_>>()?;
            let source = SubsetSumInstance::new(sizes.clone(), target)?;
            let reduced = reduce(&source)?;
            let report = verify_reduction(&source, &limits(time_budget))?;
            let canon = format!("reduce|sizes={sizes:?}|target={target}|seed={seed}");
            let mut body = report_header("reduction", &canon, seed);
            let delays: Vec<String> = reduced.delays.iter().map(format_delay).collect();
            let _ = writeln!(body, "# employees: {}", reduced.employees());
            let _ = writeln!(body, "# horizon: {}", reduced.horizon);
            let _ = writeln!(body, "# delays: {}", delays.join(","));
            let _ = writeln!(
                body,
                "# critical (1-based): {:?}",
                reduced.critical.iter().map(|c| c + 1).collect::<Vec<_>>()
            );
            body.push_str(&serde_json::to_string_pretty(&report)?);
            body.push('\n');
            let path = write_out(&out, "reduction.json", &body)?;
            println!(
                "M={} H={} optimum={} target={} subset_exists={}",
                reduced.employees(),
                reduced.horizon,
                report.optimum,
                report.target,
                report.subset_exists
            );
            if let Some(list) = blocks {
                let chosen = parse_blocks(&list)?;
                let props = verify_block_properties(&reduced, &chosen);
                println!(
                    "block schedule A'={{{list}}}: B={} C={} properties {}",
                    props.bumps,
                    props.makespan.map_or("inf".to_string(), |c| c.to_string()),
                    if props.all_hold() { "HOLD" } else { "VIOLATED" }
                );
            }
            println!(
                "verification {}",
                if report.pass() { "PASS" } else { "FAIL" }
            );
            println!("certificate -> {}", path.display());
            if !report.pass() {
                std::process::exit(2);
            }
            Ok(())
        }
        Command::Adversary {
            instance,
            policy,
            out,
            seed,
        } => {
            let inst = instance.build()?;
            let policy_spec = parse_policy(&policy)?;
            let report = adversary(&policy_spec, &inst);
            let canon = format!(
                "adversary|{}|policy={policy}|seed={seed}",
                instance_canon(&inst)
            );
            let mut body = report_header("adversary", &canon, seed);
            let delays: Vec<String> = report.scenario.iter().map(format_delay).collect();
            let _ = writeln!(body, "# case: {:?}", report.case);
            let _ = writeln!(body, "# delays: {}", delays.join(","));
            let _ = writeln!(
                body,
                "# online: potential_bumps={} vacancies={}",
                report.online.potential_bumps, report.online.vacancies
            );
            let _ = writeln!(
                body,
                "# offline: potential_bumps={} vacancies={}",
                report.offline.potential_bumps, report.offline.vacancies
            );
            body.push_str(&schedule_csv(&report.offline_schedule, &report.scenario));
            let path = write_out(&out, "adversary.csv", &body)?;
            println!(
                "case {:?}: online bumps {} / vacancies {}; offline bumps {} / vacancies {}",
                report.case,
                report.online.potential_bumps,
                report.online.vacancies,
                report.offline.potential_bumps,
                report.offline.vacancies
            );
            println!("certificate -> {}", path.display());
            Ok(())
        }
    }
}
