//! Monte Carlo scenarios, sweeps, coherence-time recommendations and CSV output.
//!
//! Every scheme in a scenario sees the same channel draw for a given trial
//! index, and proposed-scheme sweeps over `Q` reuse one training set per trial
//! (a shorter set is a prefix of a longer one), so curves are paired.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::analysis::{complexity_report, prop1_rate_bound, BoundVariant, Prop1Inputs};
use crate::ao::{run_ao_scheme, AoCsi};
use crate::config::{dbm_to_watts, Purpose, SeedPolicy, SystemConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::link::LinkSimulator;
use crate::ofdm::effective_rate;
use crate::reflection::{
    argmax, generate_training_set, run_proposed_scheme, run_random_phase, SchemeOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Proposed,
    AoPerfectCsi,
    AoEstimatedCsi,
    RandomPhase,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::AoPerfectCsi,
        Scheme::AoEstimatedCsi,
        Scheme::RandomPhase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::AoPerfectCsi => "ao-perfect-csi",
            Self::AoEstimatedCsi => "ao-estimated-csi",
            Self::RandomPhase => "random-phase",
        }
    }

    /// Pilot symbols spent per coherence block.
    pub fn training_symbols(self, q: usize, num_elements: usize) -> usize {
        match self {
            Self::Proposed => q,
            Self::RandomPhase => 1,
            Self::AoPerfectCsi | Self::AoEstimatedCsi => num_elements + 1,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Training slots.
    Q,
    /// RIS elements.
    M,
    /// Coherence time in symbols.
    T,
    /// Uplink pilot power in dBm.
    PilotPower,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::Q, Axis::M, Axis::T, Axis::PilotPower];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Q => "Q",
            Self::M => "M",
            Self::T => "T",
            Self::PilotPower => "P_UL",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q" => Ok(Self::Q),
            "m" => Ok(Self::M),
            "t" => Ok(Self::T),
            "p_ul" | "p-ul" | "pul" => Ok(Self::PilotPower),
            _ => Err(Error::InvalidScenario(format!("unknown axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub scheme: Scheme,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Uplink estimation noise; off means perfect composite CSI.
    pub noise_enabled: bool,
    /// Training slots when `Q` is not the swept axis.
    pub training_slots: usize,
    /// Coherence time when `T` is not the swept axis.
    pub coherence: Option<f64>,
}

impl Scenario {
    pub fn new(scheme: Scheme, axis: Axis, values: Vec<f64>) -> Self {
        Self {
            id: format!("{scheme}-{axis}"),
            scheme,
            axis,
            values,
            trials: 500,
            seed: 0,
            noise_enabled: true,
            training_slots: 20,
            coherence: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.trials >= SeedPolicy::MAX_TRIALS {
            return bad("too many trials".into());
        }
        if self.values.is_empty() {
            return bad("axis values must not be empty".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("axis values must be finite".into());
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("axis values must be strictly increasing".into());
        }
        if self.axis == Axis::Q && self.scheme != Scheme::Proposed {
            return Err(Error::InvalidSweep {
                scheme: self.scheme.as_str(),
                axis: self.axis.as_str(),
            });
        }
        match self.axis {
            Axis::Q | Axis::M => {
                if self.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
                    return bad(format!("{} values must be positive integers", self.axis));
                }
            }
            Axis::T => {
                if self.values.iter().any(|v| *v <= 0.0) {
                    return bad("coherence times must be positive".into());
                }
            }
            Axis::PilotPower => {}
        }
        if self.training_slots == 0 {
            return bad("training_slots must be at least 1".into());
        }
        if matches!(self.coherence, Some(t) if !(t > 0.0)) {
            return bad("coherence time must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub axis: Axis,
    pub axis_value: f64,
    /// Mean realized rate, b/s/Hz.
    pub mean_rate: f64,
    pub stderr: f64,
    pub effective_rate: Option<f64>,
    /// Scaling-law rate bound (harmonic variant), proposed scheme only.
    pub bound: Option<f64>,
    /// Real multiplications for estimation plus optimization.
    pub complexity: u64,
    pub trials: u64,
    pub seed: u64,
    /// Not serialized.
    pub wall_clock: Duration,
}

/// Mean and standard error of the mean, accumulated in index order.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Realized rates of one trial, one per entry of `qs` for the proposed scheme
/// and a single value otherwise.
pub fn trial_rates(
    sim: &LinkSimulator,
    scheme: Scheme,
    qs: &[usize],
    seeds: &SeedPolicy,
    trial: u64,
    noise_enabled: bool,
) -> Result<Vec<f64>> {
    let real = sim.sample_channel(&mut seeds.rng(trial, Purpose::Channel))?;
    let m = real.num_elements();
    match scheme {
        Scheme::Proposed => {
            let q_max = *qs.iter().max().ok_or(Error::EmptyTrainingSet)?;
            let set = generate_training_set(q_max, m, &mut seeds.rng(trial, Purpose::TrainingSet));
            let out = run_proposed_scheme(
                sim,
                &real,
                &set,
                noise_enabled,
                &mut seeds.rng(trial, Purpose::UplinkNoise),
            )?;
            Ok(qs
                .iter()
                .map(|&q| {
                    SchemeOutcome::best_of_prefix(&out.slots, q)
                        .expect("q >= 1")
                        .realized_rate
                })
                .collect())
        }
        Scheme::RandomPhase => {
            let out = run_random_phase(
                sim,
                &real,
                &mut seeds.rng(trial, Purpose::TrainingSet),
                noise_enabled,
                &mut seeds.rng(trial, Purpose::UplinkNoise),
            )?;
            Ok(vec![out.realized_rate])
        }
        Scheme::AoPerfectCsi | Scheme::AoEstimatedCsi => {
            let csi = if scheme == Scheme::AoPerfectCsi {
                AoCsi::Perfect
            } else {
                AoCsi::Estimated
            };
            let out = run_ao_scheme(
                sim,
                &real,
                csi,
                noise_enabled,
                &mut seeds.rng(trial, Purpose::SeparateNoise),
            )?;
            Ok(vec![out.realized_rate])
        }
    }
}

/// Per-trial realized rates, `[trial][q index]`.
pub fn collect_rates(
    sim: &LinkSimulator,
    scheme: Scheme,
    qs: &[usize],
    seeds: &SeedPolicy,
    trials: u64,
    noise_enabled: bool,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    exec.map_trials(trials, |t| {
        trial_rates(sim, scheme, qs, seeds, t, noise_enabled)
    })
    .into_iter()
    .collect()
}

fn row_complexity(scheme: Scheme, cfg: &SystemConfig, q: usize) -> u64 {
    let r = complexity_report(
        cfg.num_elements as u64,
        cfg.num_subcarriers as u64,
        match scheme {
            Scheme::RandomPhase => 1,
            _ => q as u64,
        },
        cfg.cascaded_taps() as u64,
        cfg.ao_iterations as u64,
    );
    match scheme {
        Scheme::Proposed | Scheme::RandomPhase => r.proposed_total(),
        Scheme::AoPerfectCsi | Scheme::AoEstimatedCsi => r.conventional_total(),
    }
}

/// One simulator configuration and the rows it produces: training slots,
/// coherence time and axis value per row.
type Batch = (SystemConfig, Vec<usize>, Vec<Option<f64>>, Vec<f64>);

pub fn run_monte_carlo(
    scenario: &Scenario,
    cfg: &SystemConfig,
    exec: Execution,
) -> Result<Vec<ResultRow>> {
    scenario.validate()?;
    cfg.validate()?;
    let seeds = SeedPolicy::new(scenario.seed);

    let mut batches: Vec<Batch> = Vec::new();
    let fixed_q = scenario.training_slots;
    match scenario.axis {
        Axis::Q => {
            let qs: Vec<usize> = scenario.values.iter().map(|v| *v as usize).collect();
            let n = qs.len();
            batches.push((
                cfg.clone(),
                qs,
                vec![scenario.coherence; n],
                scenario.values.clone(),
            ));
        }
        Axis::T => {
            let n = scenario.values.len();
            let ts = scenario.values.iter().map(|t| Some(*t)).collect();
            batches.push((cfg.clone(), vec![fixed_q; n], ts, scenario.values.clone()));
        }
        Axis::M | Axis::PilotPower => {
            for &v in &scenario.values {
                let mut c = cfg.clone();
                if scenario.axis == Axis::M {
                    c.num_elements = v as usize;
                } else {
                    c.uplink_pilot_power = dbm_to_watts(v);
                }
                c.validate()?;
                batches.push((c, vec![fixed_q], vec![scenario.coherence], vec![v]));
            }
        }
    }

    let mut rows = Vec::new();
    for (c, qs, coherences, axis_values) in batches {
        let start = Instant::now();
        let sim = LinkSimulator::new(c.clone(), &seeds)?;
        let mut distinct = qs.clone();
        distinct.dedup();
        let per_trial = collect_rates(
            &sim,
            scenario.scheme,
            if scenario.scheme == Scheme::Proposed {
                &distinct
            } else {
                &distinct[..1]
            },
            &seeds,
            scenario.trials,
            scenario.noise_enabled,
            exec,
        )?;
        let elapsed = start.elapsed();
        for ((q, coherence), axis_value) in qs.iter().zip(coherences).zip(axis_values) {
            let col = if scenario.scheme == Scheme::Proposed {
                distinct.iter().position(|x| x == q).expect("present")
            } else {
                0
            };
            let rates: Vec<f64> = per_trial.iter().map(|r| r[col]).collect();
            let (mean_rate, stderr) = mean_and_stderr(&rates);
            let tau = scenario.scheme.training_symbols(*q, c.num_elements) as f64;
            let bound = (scenario.scheme == Scheme::Proposed).then(|| {
                prop1_rate_bound(
                    &Prop1Inputs::from_config(&c, sim.stats(), *q),
                    BoundVariant::Harmonic,
                )
            });
            rows.push(ResultRow {
                scenario: scenario.id.clone(),
                axis: scenario.axis,
                axis_value,
                mean_rate,
                stderr,
                effective_rate: coherence.map(|t| effective_rate(mean_rate, tau, t)),
                bound,
                complexity: row_complexity(scenario.scheme, &c, *q),
                trials: scenario.trials,
                seed: scenario.seed,
                wall_clock: elapsed,
            });
        }
    }
    Ok(rows)
}

/// Empirical `E[max_{q≤Q} ‖h_q‖²]` for each `Q` in `qs`, with noiseless
/// composite channels and one nested training set per trial.
pub fn best_gain_curve(
    sim: &LinkSimulator,
    qs: &[usize],
    seeds: &SeedPolicy,
    trials: u64,
    exec: Execution,
) -> Result<Vec<f64>> {
    let q_max = *qs.iter().max().ok_or(Error::EmptyTrainingSet)?;
    let m = sim.config().num_elements;
    let per_trial: Vec<Result<Vec<f64>>> = exec.map_trials(trials, |t| {
        let real = sim.sample_channel(&mut seeds.rng(t, Purpose::Channel))?;
        let set = generate_training_set(q_max, m, &mut seeds.rng(t, Purpose::TrainingSet));
        let mut h = vec![num_complex::Complex64::new(0.0, 0.0); real.num_subcarriers()];
        let mut best = 0.0f64;
        let mut running = Vec::with_capacity(q_max);
        for phi in &set.vectors {
            real.composite_into(phi.coeffs(), &mut h);
            best = best.max(h.iter().map(|x| x.norm_sqr()).sum());
            running.push(best);
        }
        Ok(qs.iter().map(|&q| running[q - 1]).collect())
    });
    let per_trial: Vec<Vec<f64>> = per_trial.into_iter().collect::<Result<_>>()?;
    Ok((0..qs.len())
        .map(|i| per_trial.iter().map(|r| r[i]).sum::<f64>() / trials as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCandidate {
    pub scheme: Scheme,
    pub training_symbols: usize,
    pub mean_rate: f64,
    pub stderr: f64,
    pub effective_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub coherence: f64,
    /// Training slots maximizing the proposed scheme's effective rate.
    pub recommended_q: usize,
    /// Proposed entries first (in candidate order), then random-phase and AO.
    pub table: Vec<CoherenceCandidate>,
    /// Index into `table` of the best entry overall.
    pub best: usize,
}

impl Recommendation {
    pub fn proposed(&self) -> impl Iterator<Item = &CoherenceCandidate> {
        self.table.iter().filter(|c| c.scheme == Scheme::Proposed)
    }

    pub fn baseline(&self, scheme: Scheme) -> Option<&CoherenceCandidate> {
        self.table.iter().find(|c| c.scheme == scheme)
    }
}

/// Picks the number of training slots maximizing `(1 - Q/T) R` and tabulates
/// the random-phase (`τ = 1`) and estimated-CSI AO (`τ = M + 1`) baselines.
pub fn best_q_for_coherence(
    cfg: &SystemConfig,
    coherence: f64,
    candidates: &[usize],
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<Recommendation> {
    if !(coherence > 0.0) {
        return Err(Error::InvalidScenario(
            "coherence time must be positive".into(),
        ));
    }
    if candidates.is_empty() || candidates.contains(&0) {
        return Err(Error::InvalidScenario(
            "candidate Q values must be positive".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidScenario("trials must be at least 1".into()));
    }
    let seeds = SeedPolicy::new(seed);
    let sim = LinkSimulator::new(cfg.clone(), &seeds)?;
    let m = cfg.num_elements;

    let mut table = Vec::new();
    let proposed = collect_rates(
        &sim,
        Scheme::Proposed,
        candidates,
        &seeds,
        trials,
        true,
        exec,
    )?;
    for (i, &q) in candidates.iter().enumerate() {
        let rates: Vec<f64> = proposed.iter().map(|r| r[i]).collect();
        table.push(candidate(Scheme::Proposed, q, &rates, coherence));
    }
    for scheme in [Scheme::RandomPhase, Scheme::AoEstimatedCsi] {
        let rates: Vec<f64> = collect_rates(&sim, scheme, &[1], &seeds, trials, true, exec)?
            .into_iter()
            .map(|r| r[0])
            .collect();
        table.push(candidate(
            scheme,
            scheme.training_symbols(1, m),
            &rates,
            coherence,
        ));
    }

    let best_proposed = argmax(table[..candidates.len()].iter().map(|c| c.effective_rate))
        .expect("nonempty candidates");
    let best = argmax(table.iter().map(|c| c.effective_rate)).expect("nonempty table");
    Ok(Recommendation {
        coherence,
        recommended_q: candidates[best_proposed],
        table,
        best,
    })
}

fn candidate(scheme: Scheme, tau: usize, rates: &[f64], coherence: f64) -> CoherenceCandidate {
    let (mean_rate, stderr) = mean_and_stderr(rates);
    CoherenceCandidate {
        scheme,
        training_symbols: tau,
        mean_rate,
        stderr,
        effective_rate: effective_rate(mean_rate, tau as f64, coherence),
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "scenario",
    "axis",
    "axis_value",
    "mean_rate",
    "stderr",
    "effective_rate",
    "bound",
    "complexity",
    "trials",
    "seed",
];

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes rows as CSV with a fixed header. Floats use shortest round-trip
/// decimal formatting, so parsing the file back recovers them exactly.
pub fn emit_results<W: Write>(rows: &[ResultRow], dest: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(dest);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.axis.to_string(),
            r.axis_value.to_string(),
            r.mean_rate.to_string(),
            r.stderr.to_string(),
            fmt_opt(r.effective_rate),
            fmt_opt(r.bound),
            r.complexity.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_file(rows: &[ResultRow], path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })?;
    emit_results(rows, std::io::BufWriter::new(file))
}

/// Parses a file written by [`emit_results`]; `wall_clock` reads back as zero.
pub fn read_results<R: Read>(src: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(src);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidScenario(format!(
            "unexpected header {header:?}"
        )));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::InvalidScenario(format!("bad number `{s}`")))
    };
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s).map(Some)
        }
    };
    let int = |s: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::InvalidScenario(format!("bad integer `{s}`")))
    };
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ResultRow {
                scenario: rec[0].to_owned(),
                axis: rec[1].parse()?,
                axis_value: num(&rec[2])?,
                mean_rate: num(&rec[3])?,
                stderr: num(&rec[4])?,
                effective_rate: opt(&rec[5])?,
                bound: opt(&rec[6])?,
                complexity: int(&rec[7])?,
                trials: int(&rec[8])?,
                seed: int(&rec[9])?,
                wall_clock: Duration::ZERO,
            })
        })
        .collect()
}

/// Gnuplot script plotting mean rate (and bound / effective rate when present)
/// against the axis column of `csv_path`.
pub fn gnuplot_script(csv_path: &str, axis: Axis) -> String {
    let logx = if axis == Axis::Q {
        "set logscale x\n"
    } else {
        ""
    };
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel '{axis}'\n\
         set ylabel 'rate (b/s/Hz)'\n\
         {logx}\
         plot '{csv_path}' using 3:4:5 with yerrorlines title 'mean rate', \\\n\
         \x20    '' using 3:7 with lines title 'bound', \\\n\
         \x20    '' using 3:6 with linespoints title 'effective rate'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SystemConfig {
        SystemConfig {
            num_elements: 8,
            num_subcarriers: 32,
            ..SystemConfig::default()
        }
    }

    fn row(v: f64) -> ResultRow {
        ResultRow {
            scenario: "s".into(),
            axis: Axis::Q,
            axis_value: v,
            mean_rate: 0.1 + v / 3.0,
            stderr: 1e-7 / 3.0,
            effective_rate: None,
            bound: Some(std::f64::consts::PI),
            complexity: 12345,
            trials: 10,
            seed: 99,
            wall_clock: Duration::ZERO,
        }
    }

    #[test]
    fn parse_names() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        for a in Axis::ALL {
            assert_eq!(a.as_str().parse::<Axis>().unwrap(), a);
        }
        assert!("bogus".parse::<Scheme>().is_err());
        assert_eq!("p-ul".parse::<Axis>().unwrap(), Axis::PilotPower);
    }

    #[test]
    fn scenario_validation() {
        let ok = Scenario::new(Scheme::Proposed, Axis::Q, vec![1.0, 2.0, 4.0]);
        assert!(ok.validate().is_ok());
        let q_for_ao = Scenario::new(Scheme::AoPerfectCsi, Axis::Q, vec![1.0]);
        assert!(matches!(
            q_for_ao.validate(),
            Err(Error::InvalidSweep { .. })
        ));
        let unsorted = Scenario::new(Scheme::Proposed, Axis::Q, vec![2.0, 1.0]);
        assert!(unsorted.validate().is_err());
        let dup = Scenario::new(Scheme::Proposed, Axis::Q, vec![2.0, 2.0]);
        assert!(dup.validate().is_err());
        let frac = Scenario::new(Scheme::Proposed, Axis::M, vec![2.5]);
        assert!(frac.validate().is_err());
        let zero_trials = Scenario {
            trials: 0,
            ..Scenario::new(Scheme::RandomPhase, Axis::T, vec![10.0])
        };
        assert!(zero_trials.validate().is_err());
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_and_stderr(&[2.0; 5]), (2.0, 0.0));
        assert_eq!(mean_and_stderr(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        emit_results(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "scenario,axis,axis_value,mean_rate,stderr,effective_rate,bound,complexity,trials,seed\n"
        );
    }

    #[test]
    fn one_row_two_lines_and_exact_round_trip() {
        let rows = vec![row(3.0)];
        let mut buf = Vec::new();
        emit_results(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 2);
        assert_eq!(read_results(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn unwritable_destination() {
        let err = write_results_file(&[], std::path::Path::new("/nonexistent-dir/x.csv"));
        assert!(matches!(err, Err(Error::Write { .. })));
    }

    #[test]
    fn q_sweep_prefix_matches_independent_runs() {
        let cfg = small_cfg();
        let mut sc = Scenario::new(Scheme::Proposed, Axis::Q, vec![1.0, 3.0, 6.0]);
        sc.trials = 12;
        let rows = run_monte_carlo(&sc, &cfg, Execution::Sequential).unwrap();
        for r in &rows {
            let mut single = sc.clone();
            single.values = vec![r.axis_value];
            let alone = run_monte_carlo(&single, &cfg, Execution::Sequential).unwrap();
            assert_eq!(alone[0].mean_rate, r.mean_rate);
        }
    }

    #[test]
    fn single_slot_sweep_equals_random_phase() {
        let cfg = small_cfg();
        let mut p = Scenario::new(Scheme::Proposed, Axis::Q, vec![1.0]);
        p.trials = 30;
        let mut r = Scenario::new(Scheme::RandomPhase, Axis::T, vec![100.0]);
        r.trials = 30;
        let a = run_monte_carlo(&p, &cfg, Execution::Sequential).unwrap();
        let b = run_monte_carlo(&r, &cfg, Execution::Sequential).unwrap();
        assert_eq!(a[0].mean_rate, b[0].mean_rate);
        assert_eq!(a[0].stderr, b[0].stderr);
    }

    #[test]
    fn execution_mode_does_not_change_results() {
        let cfg = small_cfg();
        let mut sc = Scenario::new(Scheme::AoEstimatedCsi, Axis::PilotPower, vec![-10.0, 0.0]);
        sc.trials = 8;
        sc.coherence = Some(50.0);
        let a = run_monte_carlo(&sc, &cfg, Execution::Sequential).unwrap();
        let b = run_monte_carlo(&sc, &cfg, Execution::Parallel { workers: Some(3) }).unwrap();
        let strip = |rows: Vec<ResultRow>| -> Vec<ResultRow> {
            rows.into_iter()
                .map(|r| ResultRow {
                    wall_clock: Duration::ZERO,
                    ..r
                })
                .collect()
        };
        assert_eq!(strip(a), strip(b));
    }

    #[test]
    fn coherence_axis_reuses_rates() {
        let cfg = small_cfg();
        let mut sc = Scenario::new(Scheme::AoPerfectCsi, Axis::T, vec![5.0, 9.0, 50.0]);
        sc.trials = 4;
        let rows = run_monte_carlo(&sc, &cfg, Execution::Sequential).unwrap();
        assert!(rows.windows(2).all(|w| w[0].mean_rate == w[1].mean_rate));
        // τ = M + 1 = 9
        assert_eq!(rows[0].effective_rate, Some(0.0));
        assert_eq!(rows[1].effective_rate, Some(0.0));
        assert!(rows[2].effective_rate.unwrap() > 0.0);
        assert!(rows[0].bound.is_none());
    }

    #[test]
    fn long_coherence_favors_largest_q() {
        let cfg = small_cfg();
        let rec =
            best_q_for_coherence(&cfg, 1e12, &[1, 4, 16], 20, 3, Execution::Sequential).unwrap();
        assert_eq!(rec.recommended_q, 16);
        let short = best_q_for_coherence(&cfg, 5.0, &[1, 2], 5, 3, Execution::Sequential).unwrap();
        assert_eq!(
            short
                .baseline(Scheme::AoEstimatedCsi)
                .unwrap()
                .effective_rate,
            0.0
        );
    }

    #[test]
    fn gnuplot_mentions_csv() {
        let s = gnuplot_script("out.csv", Axis::Q);
        assert!(s.contains("'out.csv'"));
        assert!(s.contains("logscale"));
    }
}
