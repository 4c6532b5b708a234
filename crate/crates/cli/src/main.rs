use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ris_ofdm::analysis::{
    complexity_report, gain_to_rate, prop1_gain_bound, BoundVariant, Prop1Inputs,
};
use ris_ofdm::config::{derive_link_statistics, Purpose, SeedPolicy};
use ris_ofdm::harness::{
    best_q_for_coherence, emit_results, gnuplot_script, run_monte_carlo, Axis, Scenario, Scheme,
};
use ris_ofdm::{ConfigFile, Execution, LinkSimulator, SystemConfig};

#[derive(Debug, Parser)]
#[command(name = "ris-sim", version, about = "RIS-assisted OFDM link simulator")]
struct Cli {
    /// TOML config file; missing fields take the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 500)]
    trials: u64,
    /// Worker threads; 1 runs sequentially. Defaults to all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `num_elements` from the config.
    #[arg(long, global = true)]
    elements: Option<usize>,
    /// Overrides the uplink pilot power (dBm).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pilot_power_dbm: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write a CSV of per-axis-value results.
    Simulate(ScenarioArgs),
    /// Run several schemes over the same axis into one CSV.
    Sweep(ScenarioArgs),
    /// Closed-form scaling-law bounds or complexity counts, no Monte Carlo.
    Analyze(AnalyzeArgs),
    /// Recommend the number of training slots for a coherence time.
    RecommendQ(RecommendArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scheme name; `sweep` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',', required = true)]
    scheme: Vec<String>,
    /// One of Q, M, T, P_UL.
    #[arg(long)]
    axis: String,
    /// Strictly increasing axis values.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    values: Vec<f64>,
    /// Training slots when Q is not the swept axis.
    #[arg(long, default_value_t = 20)]
    q: usize,
    /// Coherence time (symbols) for effective rates when T is not swept.
    #[arg(long)]
    coherence: Option<f64>,
    /// Disable uplink estimation noise (perfect composite CSI).
    #[arg(long)]
    no_noise: bool,
    /// Scenario id written to the CSV.
    #[arg(long)]
    id: Option<String>,
    /// Also write a gnuplot script for the CSV.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
    /// Write the trial-0 channel realization to this file.
    #[arg(long)]
    dump_channel: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Table {
    Bounds,
    Complexity,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum, default_value_t = Table::Bounds)]
    table: Table,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100,200")]
    q_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "100,200,500,1000")]
    m_values: Vec<usize>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    /// Coherence time in symbols.
    #[arg(long)]
    coherence: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,15,20,30,50")]
    candidates: Vec<usize>,
}

fn load_config(cli: &Cli) -> Result<SystemConfig> {
    let mut file = match &cli.config {
        Some(p) => ConfigFile::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ConfigFile::default(),
    };
    if let Some(m) = cli.elements {
        file.num_elements = m;
    }
    if let Some(p) = cli.pilot_power_dbm {
        file.uplink_pilot_power_dbm = p;
    }
    Ok(file.into_system()?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn scenarios(cli: &Cli, args: &ScenarioArgs, single: bool) -> Result<Vec<Scenario>> {
    if single && args.scheme.len() != 1 {
        bail!("simulate takes exactly one scheme; use sweep for several");
    }
    let axis: Axis = args.axis.parse()?;
    args.scheme
        .iter()
        .map(|s| {
            let scheme: Scheme = s.parse()?;
            let mut sc = Scenario::new(scheme, axis, args.values.clone());
            if let Some(id) = &args.id {
                sc.id = if single {
                    id.clone()
                } else {
                    format!("{id}-{scheme}")
                };
            }
            sc.trials = cli.trials;
            sc.seed = cli.seed;
            sc.noise_enabled = !args.no_noise;
            sc.training_slots = args.q;
            sc.coherence = args.coherence;
            sc.validate()?;
            Ok(sc)
        })
        .collect()
}

fn run_scenarios(cli: &Cli, args: &ScenarioArgs, single: bool) -> Result<()> {
    let cfg = load_config(cli)?;
    let exec = Execution::from_workers(cli.workers);
    let scenarios = scenarios(cli, args, single)?;

    if let Some(path) = &args.dump_channel {
        let mut c = cfg.clone();
        if scenarios[0].axis == Axis::M {
            c.num_elements = scenarios[0].values[0] as usize;
        }
        let seeds = SeedPolicy::new(cli.seed);
        let sim = LinkSimulator::new(c, &seeds)?;
        let real = sim.sample_channel(&mut seeds.rng(0, Purpose::Channel))?;
        let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        real.write_dump(BufWriter::new(f))?;
    }

    let mut rows = Vec::new();
    for sc in &scenarios {
        let batch = run_monte_carlo(sc, &cfg, exec)?;
        for r in &batch {
            eprintln!(
                "{} {}={} rate={:.4} ± {:.4} ({:.2?})",
                r.scenario, r.axis, r.axis_value, r.mean_rate, r.stderr, r.wall_clock
            );
        }
        rows.extend(batch);
    }
    emit_results(&rows, output(cli.out.as_deref())?)?;

    if let Some(script) = &args.gnuplot {
        let csv = cli
            .out
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "results.csv".into());
        std::fs::write(script, gnuplot_script(&csv, scenarios[0].axis))
            .with_context(|| format!("cannot write {}", script.display()))?;
    }
    Ok(())
}

fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    if args.q_values.contains(&0) || args.m_values.contains(&0) {
        bail!("Q and M values must be positive");
    }
    let mut out = output(cli.out.as_deref())?;
    match args.table {
        Table::Bounds => {
            writeln!(
                out,
                "M,Q,gain_bound_harmonic,gain_bound_asymptotic,rate_bound_harmonic,rate_bound_asymptotic"
            )?;
            for &m in &args.m_values {
                let c = SystemConfig {
                    num_elements: m,
                    ..cfg.clone()
                };
                let stats = derive_link_statistics(&c)?;
                for &q in &args.q_values {
                    let i = Prop1Inputs::from_config(&c, &stats, q);
                    let gh = prop1_gain_bound(&i, BoundVariant::Harmonic);
                    let ga = prop1_gain_bound(&i, BoundVariant::Asymptotic);
                    writeln!(
                        out,
                        "{m},{q},{gh},{ga},{},{}",
                        gain_to_rate(&i, gh),
                        gain_to_rate(&i, ga)
                    )?;
                }
            }
        }
        Table::Complexity => {
            writeln!(
                out,
                "M,Q,conventional_estimation,proposed_estimation,ao_optimization,proposed_optimization"
            )?;
            for &m in &args.m_values {
                for &q in &args.q_values {
                    let r = complexity_report(
                        m as u64,
                        cfg.num_subcarriers as u64,
                        q as u64,
                        cfg.cascaded_taps() as u64,
                        cfg.ao_iterations as u64,
                    );
                    writeln!(
                        out,
                        "{m},{q},{},{},{},{}",
                        r.conventional_estimation,
                        r.proposed_estimation,
                        r.ao_optimization,
                        r.proposed_optimization
                    )?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn recommend(cli: &Cli, args: &RecommendArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    let rec = best_q_for_coherence(
        &cfg,
        args.coherence,
        &args.candidates,
        cli.trials,
        cli.seed,
        Execution::from_workers(cli.workers),
    )?;
    let mut out = output(cli.out.as_deref())?;
    writeln!(
        out,
        "scheme,training_symbols,mean_rate,stderr,effective_rate"
    )?;
    for c in &rec.table {
        writeln!(
            out,
            "{},{},{},{},{}",
            c.scheme, c.training_symbols, c.mean_rate, c.stderr, c.effective_rate
        )?;
    }
    out.flush()?;
    let best = &rec.table[rec.best];
    eprintln!(
        "T={}: recommended Q={}; best overall {} (tau={}, R_e={:.4})",
        rec.coherence, rec.recommended_q, best.scheme, best.training_symbols, best.effective_rate
    );
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(a) => run_scenarios(&cli, a, true),
        Command::Sweep(a) => run_scenarios(&cli, a, false),
        Command::Analyze(a) => analyze(&cli, a),
        Command::RecommendQ(a) => recommend(&cli, a),
    }
}
