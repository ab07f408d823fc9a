//! `collide-sic`: construct, check, simulate and verify protocol sequence
//! sets for the collision channel without feedback.
//!
//! Exit codes: 0 success or verdict true, 1 verdict false, 2 usage or
//! configuration error, 3 work budget refusal.

mod error;
mod views;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use collide_sic::channel::{
    basic_receive, default_periods, sic_receive, simulate_trace, simulate_trace_concrete,
    source_lengths_for_rates, users_for, ChannelError, ReceiverMode,
};
use collide_sic::construct::{
    build_si_set_with, enumerate_plans, plan_duty_factors, FillPolicy, PlanSidecar, RateVector,
};
use collide_sic::corr::{
    check_shift_sum_identity, check_mark_characterisation, find_si_violation, find_ti_violation, CheckOptions, Marks,
    SequenceFile, SequenceSet,
};
use collide_sic::verify::{
    achievability_check, baseline_throughput, min_period_search, region_boundary,
    sweep_all_shifts, PeriodSearchOptions, SweepOptions,
};
use collide_sic::{work_budget_from_env, Sampling};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use error::{CliError, EXIT_OK, EXIT_VERDICT_FALSE};
use views::{AmbiguousReport, CheckReport, MarkCharacterisation, SimulateReport, WitnessView};

#[derive(Debug, Parser)]
#[command(name = "collide-sic", version, about = "Protocol sequences and ideal SIC on the collision channel without feedback")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Work budget for exhaustive enumeration; overrides COLLIDE_SIC_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; csv is available for `region` and `baseline`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fill {
    Canonical,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Genie,
    Blind,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan duty factors for a boundary rate vector and build an SI set.
    Construct {
        /// Rates as comma-separated `p/q` values summing to 1.
        #[arg(long)]
        rates: String,
        /// Decode order as 1-based users, e.g. `3,1,2` (default: best plan).
        #[arg(long)]
        perm: Option<String>,
        #[arg(long, value_enum, default_value = "canonical")]
        fill: Fill,
        /// Seed for `--fill random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plan sidecar path when `--out` is set (default: `<out>.plan.json`).
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Report SI/TI status, duty factors and correlation self-tests.
    Check {
        sequence_file: PathBuf,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Run one channel simulation and the SIC receiver.
    Simulate {
        sequence_file: PathBuf,
        #[arg(long)]
        rates: String,
        /// Relative shifts, one per user, each in `[0, L)`.
        #[arg(long, conflicts_with = "random_shifts", required_unless_present = "random_shifts")]
        shifts: Option<String>,
        /// Draw shifts uniformly from `--seed`.
        #[arg(long)]
        random_shifts: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "genie")]
        mode: Mode,
        /// Horizon in periods (default `2M + 1`).
        #[arg(long)]
        periods: Option<usize>,
        /// Carry real payloads of this many bytes per packet.
        #[arg(long)]
        packet_size: Option<usize>,
        /// Write the slot trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Include per-slot contributors in the trace.
        #[arg(long, requires = "trace")]
        genie_dump: bool,
        /// Include every block decode in the report.
        #[arg(long)]
        events: bool,
    },
    /// Genie SIC over every relative shift vector.
    Sweep {
        /// Sequence set; omitted means plan and build from `--rates`.
        sequence_file: Option<PathBuf>,
        #[arg(long)]
        rates: String,
        #[arg(long)]
        periods: Option<usize>,
        /// Keep every per-shift outcome in the report.
        #[arg(long)]
        outcomes: bool,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Smallest period at which some sequence set achieves the rates.
    SearchMinPeriod {
        #[arg(long)]
        rates: String,
        #[arg(long)]
        lmax: usize,
        /// Enumerate every weight vector, not only planner duty factors.
        #[arg(long)]
        no_prune: bool,
        #[arg(long)]
        periods: Option<usize>,
    },
    /// Capacity region boundary points with and without SIC.
    Region {
        #[arg(long = "m")]
        users: usize,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
    /// Collision-as-erasure throughput over every shift vector.
    Baseline {
        sequence_file: PathBuf,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
}

#[derive(Debug, Args)]
struct SamplingArgs {
    /// Sample this many shift vectors when the budget is exceeded.
    #[arg(long)]
    sample: Option<u64>,
    /// Seed for `--sample`.
    #[arg(long = "sample-seed", default_value_t = 0)]
    sample_seed: u64,
}

impl SamplingArgs {
    fn sampling(&self) -> Option<Sampling> {
        self.sample.map(|draws| Sampling {
            draws,
            seed: self.sample_seed,
        })
    }
}

struct Context {
    budget: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl Context {
    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(text.as_bytes())
                    .and_then(|_| lock.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        self.emit(&to_json(value))
    }

    fn json_only(&self, command: &str) -> Result<(), CliError> {
        if self.format == Some(Format::Csv) {
            return Err(CliError::config(format!("{command} has no csv output")));
        }
        Ok(())
    }

    fn sweep_options(&self, sampling: Option<Sampling>, periods: Option<usize>) -> SweepOptions {
        SweepOptions {
            budget: self.budget,
            sampling,
            keep_outcomes: false,
            periods,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_set(path: &Path) -> Result<SequenceSet, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(SequenceFile::parse(&text)?)
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| CliError::config(format!("invalid {what} entry {x:?}")))
        })
        .collect()
}

fn parse_rates(s: &str) -> Result<RateVector, CliError> {
    Ok(RateVector::parse(s)?)
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VERDICT_FALSE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("thread pool is configured once");
    }
    let ctx = Context {
        budget: cli.budget.unwrap_or_else(work_budget_from_env),
        out: cli.out,
        format: cli.format,
    };
    let code = match run(&ctx, cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(ctx: &Context, command: Command) -> Result<i32, CliError> {
    match command {
        Command::Construct {
            rates,
            perm,
            fill,
            seed,
            plan,
        } => construct(ctx, &rates, perm.as_deref(), fill, seed, plan),
        Command::Check {
            sequence_file,
            sampling,
        } => check(ctx, &sequence_file, sampling.sampling()),
        Command::Simulate {
            sequence_file,
            rates,
            shifts,
            random_shifts,
            seed,
            mode,
            periods,
            packet_size,
            trace,
            genie_dump,
            events,
        } => {
            let set = read_set(&sequence_file)?;
            let shifts = match (shifts, random_shifts) {
                (Some(s), _) => parse_usize_list(&s, "shift")?,
                (None, _) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..set.len()).map(|_| rng.gen_range(0..set.period())).collect()
                }
            };
            let run = SimulateRun {
                rates: parse_rates(&rates)?,
                shifts,
                seed,
                mode,
                periods,
                packet_size,
                trace,
                genie_dump,
                events,
            };
            simulate(ctx, &set, &run)
        }
        Command::Sweep {
            sequence_file,
            rates,
            periods,
            outcomes,
            sampling,
        } => {
            ctx.json_only("sweep")?;
            let rates = parse_rates(&rates)?;
            let mut opts = ctx.sweep_options(sampling.sampling(), periods);
            opts.keep_outcomes = outcomes;
            let report = match sequence_file {
                Some(path) => sweep_all_shifts(&read_set(&path)?, rates.rates(), &opts)?,
                None => achievability_check(&rates, &opts)?,
            };
            ctx.emit(&format!("{}\n", report.to_json()))?;
            Ok(verdict(report.verdict))
        }
        Command::SearchMinPeriod {
            rates,
            lmax,
            no_prune,
            periods,
        } => {
            ctx.json_only("search-min-period")?;
            let opts = PeriodSearchOptions {
                max_period: lmax,
                prune: !no_prune,
                budget: ctx.budget,
                periods,
            };
            let result = min_period_search(&parse_rates(&rates)?, &opts)?;
            ctx.emit_json(&result)?;
            Ok(verdict(result.minimum_period.is_some()))
        }
        Command::Region { users, resolution } => {
            let region = region_boundary(users, resolution)?;
            match ctx.format.unwrap_or(Format::Csv) {
                Format::Csv => ctx.emit(&region.to_csv())?,
                Format::Json => ctx.emit_json(&region)?,
            }
            Ok(EXIT_OK)
        }
        Command::Baseline {
            sequence_file,
            sampling,
        } => {
            let set = read_set(&sequence_file)?;
            let report = baseline_throughput(&set, &ctx.sweep_options(sampling.sampling(), None))?;
            match ctx.format.unwrap_or(Format::Csv) {
                Format::Csv => ctx.emit(&report.to_csv())?,
                Format::Json => ctx.emit_json(&report)?,
            }
            Ok(EXIT_OK)
        }
    }
}

#[derive(Serialize)]
struct ConstructOutput<'a> {
    plan: &'a PlanSidecar,
    set: &'a SequenceFile,
}

fn construct(
    ctx: &Context,
    rates: &str,
    perm: Option<&str>,
    fill: Fill,
    seed: u64,
    plan_path: Option<PathBuf>,
) -> Result<i32, CliError> {
    ctx.json_only("construct")?;
    let rates = parse_rates(rates)?;
    rates.require_boundary()?;
    let plan = match perm {
        Some(p) => {
            let order = parse_usize_list(p, "permutation")?;
            if order.contains(&0) {
                return Err(CliError::config("permutation users are numbered from 1"));
            }
            let order: Vec<usize> = order.iter().map(|u| u - 1).collect();
            plan_duty_factors(&rates, &order)?
        }
        None => enumerate_plans(&rates, false)?
            .into_iter()
            .next()
            .expect("a boundary rate vector has at least one plan"),
    };
    let policy = match fill {
        Fill::Canonical => FillPolicy::CanonicalLeft,
        Fill::Random => FillPolicy::SeededRandom(seed),
    };
    let set = build_si_set_with(&plan.duty_factors, policy)?;
    let sidecar = PlanSidecar::from(&plan);
    let file = SequenceFile::from_set(&set);
    match &ctx.out {
        Some(out) => {
            write_file(out, &file.to_json())?;
            let plan_path = plan_path.unwrap_or_else(|| out.with_extension("plan.json"));
            let plan_json = to_json(&sidecar);
            write_file(&plan_path, &plan_json)?;
            print!("{plan_json}");
        }
        None => ctx.emit_json(&ConstructOutput {
            plan: &sidecar,
            set: &file,
        })?,
    }
    Ok(EXIT_OK)
}

fn check(ctx: &Context, path: &Path, sampling: Option<Sampling>) -> Result<i32, CliError> {
    ctx.json_only("check")?;
    let set = read_set(path)?;
    let (period, m) = (set.period(), set.len());
    let opts = CheckOptions {
        budget: ctx.budget,
        sampling,
    };
    let required = (period as u64).checked_pow(m as u32);
    let exhaustive = required.is_some_and(|r| r <= ctx.budget);
    let si = find_si_violation(&set, &opts)?;
    let ti = find_ti_violation(&set, &opts)?;
    let marks = check_mark_characterisation(&set, &opts)?;

    // every subset under every mark vector: at most 3^M L^M correlations
    let sum_work = required.and_then(|r| r.checked_mul(3u64.checked_pow(m as u32)?));
    let shift_sum_identity = match sum_work {
        Some(w) if w <= ctx.budget => {
            let mut holds = true;
            for mask in 1u64..(1 << m) {
                let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
                for b in Marks::enumerate(subset.len()) {
                    holds &= check_shift_sum_identity(&set, &subset, b)?;
                }
            }
            Some(holds)
        }
        _ => None,
    };

    let report = CheckReport {
        period,
        users: m,
        weights: set.weights(),
        duty_factors: set.duty_factors(),
        exhaustive,
        shift_invariant: si.is_none(),
        si_witness: si.as_ref().map(WitnessView::from),
        throughput_invariant: ti.is_none(),
        ti_witness: ti.as_ref().map(WitnessView::from),
        shift_sum_identity,
        mark_characterisation: MarkCharacterisation::new(&marks, m),
    };
    ctx.emit_json(&report)?;
    Ok(verdict(report.shift_invariant && report.throughput_invariant))
}

struct SimulateRun {
    rates: RateVector,
    shifts: Vec<usize>,
    seed: u64,
    mode: Mode,
    periods: Option<usize>,
    packet_size: Option<usize>,
    trace: Option<PathBuf>,
    genie_dump: bool,
    events: bool,
}

fn simulate(ctx: &Context, set: &SequenceSet, run: &SimulateRun) -> Result<i32, CliError> {
    ctx.json_only("simulate")?;
    if run.rates.len() != set.len() {
        return Err(CliError::config(format!(
            "{} rates for {} sequences",
            run.rates.len(),
            set.len()
        )));
    }
    let sources = source_lengths_for_rates(set.period(), run.rates.rates())?;
    let mut users = users_for(set, &sources, &run.shifts)?;
    if let Some(size) = run.packet_size {
        users = users
            .into_iter()
            .map(|u| u.with_packet_size(size))
            .collect::<Result<_, _>>()?;
    }
    let periods = run.periods.unwrap_or_else(|| default_periods(set.len()));
    let horizon = periods * set.period();
    let trace = match run.packet_size {
        Some(_) => simulate_trace_concrete(&users, horizon, run.seed)?,
        None => simulate_trace(&users, horizon)?,
    };
    if let Some(path) = &run.trace {
        let file = fs::File::create(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        trace
            .write_jsonl(BufWriter::new(file), run.genie_dump)
            .map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
    }
    let mode = match run.mode {
        Mode::Genie => ReceiverMode::Genie,
        Mode::Blind => ReceiverMode::Blind,
    };
    let report = match sic_receive(&trace, &users, mode) {
        Ok(r) => r,
        Err(ChannelError::Ambiguous(candidates)) => {
            ctx.emit_json(&AmbiguousReport {
                mode: "blind",
                success: false,
                ambiguous: true,
                true_shifts: run.shifts.clone(),
                candidates: candidates.into_iter().map(|c| c.0).collect(),
            })?;
            return Ok(EXIT_VERDICT_FALSE);
        }
        Err(e) => return Err(e.into()),
    };
    let basic = basic_receive(&trace, &users)?;
    let view = SimulateReport::new(&report, &basic, &users, periods, run.packet_size.is_some(), run.events);
    ctx.emit_json(&view)?;
    Ok(verdict(report.success))
}
