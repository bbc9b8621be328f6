// SPDX-License-Identifier: Apache-2.0
//! `invsim`: run simulations, sweeps, bisections, the SR-latch procedure, the
//! adder sweep and the runtime benchmark from the command line.
//!
//! Exit status: 0 on success, 1 on bad input, 2 when the simulator detects an
//! internal inconsistency.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invsim::analysis::{
    check_causal_order, classify, degradation_profile, extract_pulse_train, find_critical_width,
    strictly_degrading, BisectError, ClassifyOptions,
};
use invsim::bench::{run_bench, write_bench_csv, BenchError, BenchSpec};
use invsim::engine::{run_sweep, simulate, SimConfig, SimError, SimResult, Stimulus};
use invsim::formats::{
    parse_delays, parse_netlist, parse_stimulus, write_profile_csv, write_sweep_csv,
    write_trace_csv, write_train_csv, write_verdict_csv, write_vcd, FormatError, Timescale,
};
use invsim::netlist::{AdderParams, Circuit, SrLatchParams};
use invsim::recipes::{
    adder_outputs, adder_pulse, builtin_circuit, builtin_stimulus, run, sr_latch_procedure,
    switched_outputs, LatchTuning, Observed, RecipeError, PULSE_START,
};
use invsim::{DelayModel, Level, TimeAs};

#[derive(Parser)]
#[command(name = "invsim", version, about = "Gate-level dynamic timing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a circuit under a stimulus and write waveforms.
    Sim(SimArgs),
    /// Apply single pulses of increasing width and record the output pulse.
    Sweep(SweepArgs),
    /// Find the critical input pulse width of a storage loop.
    Bisect(BisectArgs),
    /// Run the SR-latch set and set-plus-reset procedure.
    Srlatch(LatchArgs),
    /// Sweep the width of an adder input pulse and report which sums switch.
    Adder(AdderArgs),
    /// Compare the runtime of delay models on replicated built-in circuits.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CircuitArgs {
    /// Built-in circuit: orloop:N, srlatch, adder:N, buffer, clocktree, with
    /// an optional xM suffix for M copies.
    #[arg(long, required_unless_present = "netlist", conflicts_with = "netlist")]
    circuit: Option<String>,
    /// Netlist file.
    #[arg(long)]
    netlist: Option<PathBuf>,
    /// Delay file; required with --netlist, optional override otherwise.
    #[arg(long)]
    delays: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "idm", value_parser = parse_model)]
    model: DelayModel,
    #[arg(long, default_value = "1000ns", value_parser = parse_time)]
    t_end: TimeAs,
    #[arg(long, default_value_t = 10_000_000)]
    max_events: u64,
}

impl RunArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            model: self.model,
            t_end: self.t_end,
            max_events: self.max_events,
            ..SimConfig::default()
        }
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Built-in stimulus: pulse:SIG:width=W[:start=T][:base=0|1],
    /// adder-up:width=W, adder-down:width=W, random:count=N:min=T:max=T.
    #[arg(long, required_unless_present = "stim_file", conflicts_with = "stim_file")]
    stim: Option<String>,
    /// Stimulus file.
    #[arg(long)]
    stim_file: Option<PathBuf>,
    /// Seed of randomized stimuli.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    vcd: Option<PathBuf>,
    #[arg(long, default_value = "fs", value_parser = parse_timescale)]
    timescale: Timescale,
    /// Trace CSV (`signal,time_as,level`).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record primary inputs and outputs only.
    #[arg(long)]
    ports_only: bool,
    /// Signals whose first pulse widths and causal order are reported, in
    /// expected switching order.
    #[arg(long, value_delimiter = ',')]
    profile: Vec<String>,
    /// CSV for the pulse widths of --profile.
    #[arg(long, requires = "profile")]
    profile_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "I")]
    input: String,
    #[arg(long, default_value = "O")]
    output: String,
    #[arg(long, value_parser = parse_time)]
    from: TimeAs,
    #[arg(long, value_parser = parse_time)]
    to: TimeAs,
    #[arg(long, value_parser = parse_time)]
    step: TimeAs,
    #[arg(long, default_value = "10ps", value_parser = parse_time)]
    start: TimeAs,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BisectArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Input receiving the pulse.
    #[arg(long, default_value = "I")]
    input: String,
    /// Node that latches HI above the critical width.
    #[arg(long, default_value = "A")]
    observe: String,
    #[arg(long, default_value = "100ps", value_parser = parse_time)]
    lo: TimeAs,
    #[arg(long, default_value = "300ps", value_parser = parse_time)]
    hi: TimeAs,
    #[arg(long, default_value = "1as", value_parser = parse_time)]
    resolution: TimeAs,
    /// Directory for the bracket, pulse trains, verdicts and traces.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    SetOnly,
    SetReset,
    Both,
}

#[derive(Args)]
struct LatchArgs {
    #[arg(long, value_enum, default_value = "both")]
    variant: Variant,
    /// Reset edge arrival after the last rising edge of T.
    #[arg(long, default_value = "5ps", value_parser = parse_time)]
    reset_offset: TimeAs,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "fs", value_parser = parse_timescale)]
    timescale: Timescale,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Polarity {
    Up,
    Down,
}

#[derive(Args)]
struct AdderArgs {
    #[arg(long, default_value_t = 4)]
    bits: usize,
    #[arg(long, default_value = "idm", value_parser = parse_model)]
    model: DelayModel,
    #[arg(long, value_enum, default_value = "up")]
    polarity: Polarity,
    #[arg(long, value_parser = parse_time)]
    from: TimeAs,
    #[arg(long, value_parser = parse_time)]
    to: TimeAs,
    #[arg(long, value_parser = parse_time)]
    step: TimeAs,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in circuit without copy suffix.
    #[arg(long, default_value = "adder:4")]
    circuit: String,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,10,20,40")]
    multipliers: Vec<usize>,
    /// Input transitions per run, over all copies.
    #[arg(long, default_value_t = 200_000)]
    transitions: usize,
    #[arg(long, default_value_t = 30)]
    repetitions: usize,
    #[arg(long, value_delimiter = ',', default_value = "inertial,idm", value_parser = parse_model)]
    models: Vec<DelayModel>,
    /// Run repetitions concurrently; no overhead is reported.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_time(s: &str) -> Result<TimeAs, String> {
    s.parse()
}

fn parse_model(s: &str) -> Result<DelayModel, String> {
    s.parse()
}

fn parse_timescale(s: &str) -> Result<Timescale, String> {
    s.parse()
}

/// Failure classified by exit status.
enum Failure {
    Input(String),
    Internal(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "error: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<RecipeError> for Failure {
    fn from(e: RecipeError) -> Self {
        match e {
            RecipeError::Sim(s) => s.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Sim(s) => s.into(),
            BenchError::Recipe(r) => r.into(),
            BenchError::CountMismatch { .. } => Failure::Internal(e.to_string()),
            BenchError::Spec(_) => Failure::Input(e.to_string()),
        }
    }
}

fn in_file(path: &Path, e: FormatError) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_circuit(a: &CircuitArgs) -> Result<Circuit, Failure> {
    let mut circuit = match (&a.circuit, &a.netlist) {
        (Some(name), _) => builtin_circuit(name)?,
        (None, Some(path)) => parse_netlist(&read(path)?).map_err(|e| in_file(path, e))?,
        (None, None) => return Err(Failure::Input("no circuit given".into())),
    };
    match &a.delays {
        Some(path) => {
            let table = parse_delays(&read(path)?).map_err(|e| in_file(path, e))?;
            circuit
                .annotate(&table)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        }
        None if a.netlist.is_some() => {
            return Err(Failure::Input("--netlist needs --delays".into()));
        }
        None => {}
    }
    Ok(circuit)
}

fn summary(r: &SimResult) -> String {
    format!(
        "status={} committed={} cancelled={} scheduled={} pending={} truncated={}",
        r.status.name(),
        r.committed,
        r.cancelled,
        r.scheduled,
        r.pending_at_end,
        r.trace.truncated
    )
}

fn write_vcd_file(path: &Path, r: &SimResult, ts: Timescale) -> Result<(), Failure> {
    let v = write_vcd(&r.trace, ts);
    for w in &v.warnings {
        eprintln!("warning: {w}");
    }
    write(path, &v.text)
}

fn cmd_sim(a: &SimArgs) -> Result<(), Failure> {
    let circuit = load_circuit(&a.circuit)?;
    let stim = match (&a.stim, &a.stim_file) {
        (Some(spec), _) => builtin_stimulus(spec, &circuit, a.seed)?,
        (None, Some(path)) => parse_stimulus(&read(path)?, &circuit).map_err(|e| in_file(path, e))?,
        (None, None) => Stimulus::new(),
    };
    let mut cfg = a.run.config();
    cfg.record_internal = !a.ports_only;
    let r = simulate(&circuit, &stim, &cfg)?;
    if let Some(p) = &a.vcd {
        write_vcd_file(p, &r, a.timescale)?;
    }
    if let Some(p) = &a.csv {
        write(p, &write_trace_csv(&r.trace))?;
    }
    println!("{}", summary(&r));
    for (name, sig) in &r.trace.signals {
        println!("{name}: {} transitions, final {}", sig.transitions.len(), sig.final_level());
    }
    if !a.profile.is_empty() {
        let names: Vec<&str> = a.profile.iter().map(String::as_str).collect();
        let profile = degradation_profile(&r.trace, &names);
        match check_causal_order(&r.trace, &names) {
            Ok(()) => println!("causal order: ok"),
            Err(v) => println!("causal order: violated, {v}"),
        }
        println!("strictly degrading: {}", strictly_degrading(&profile));
        if let Some(p) = &a.profile_csv {
            write(p, &write_profile_csv(&profile))?;
        }
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    if a.step <= TimeAs::ZERO || a.from <= TimeAs::ZERO || a.to < a.from {
        return Err(Failure::Input("need 0 < from <= to and step > 0".into()));
    }
    let circuit = load_circuit(&a.circuit)?;
    let widths: Vec<TimeAs> = std::iter::successors(Some(a.from), |&w| Some(w + a.step))
        .take_while(|&w| w <= a.to)
        .collect();
    let pts = run_sweep(&circuit, &a.input, &a.output, &widths, a.start, &a.run.config())?;
    let text = write_sweep_csv(&pts);
    match &a.csv {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bisect(a: &BisectArgs) -> Result<(), Failure> {
    let circuit = load_circuit(&a.circuit)?;
    let cfg = a.run.config();
    let base = circuit
        .signal_id(&a.input)
        .filter(|&s| circuit.is_input(s))
        .map(|s| circuit.signals()[s].init.unwrap_or(Level::Lo))
        .ok_or_else(|| Failure::Input(format!("`{}` is not a primary input", a.input)))?;
    let driver = circuit
        .signal_id(&a.observe)
        .and_then(|s| circuit.signals()[s].driver)
        .ok_or_else(|| Failure::Input(format!("`{}` is not a gate output", a.observe)))?;
    let params = circuit.gates()[driver].params;
    let go = |w: TimeAs| simulate(&circuit, &Stimulus::pulse(&a.input, base, PULSE_START, w), &cfg);
    let latched = |w: TimeAs| -> Result<bool, SimError> {
        let r = go(w)?;
        Ok(!r.trace.truncated
            && r.trace.signal(&a.observe).is_some_and(|s| s.final_level() == Level::Hi))
    };
    let (lo, hi) = find_critical_width(latched, a.lo, a.hi, a.resolution).map_err(|e| match e {
        BisectError::Probe(s) => Failure::from(s),
        other => Failure::Input(other.to_string()),
    })?;
    println!("bracket {} {}", lo.as_attos(), hi.as_attos());
    let mut verdicts = Vec::new();
    for (tag, w) in [("below", lo), ("above", hi)] {
        let r = go(w)?;
        let train = extract_pulse_train(&r.trace, &a.observe)
            .ok_or_else(|| Failure::Input(format!("`{}` is not recorded", a.observe)))?;
        let v = classify(&train, &params, &ClassifyOptions::default());
        println!(
            "{tag}: width={} {} periods={} verdict={} metastability_suspect={}",
            w.as_attos(),
            summary(&r),
            train.entries.len(),
            v.kind,
            v.metastability_suspect
        );
        if let Some(dir) = &a.out_dir {
            fs::create_dir_all(dir).map_err(|e| Failure::Input(e.to_string()))?;
            write(&dir.join(format!("train_{tag}.csv")), &write_train_csv(&train))?;
            write(&dir.join(format!("trace_{tag}.csv")), &write_trace_csv(&r.trace))?;
        }
        verdicts.push((train, v));
    }
    if let Some(dir) = &a.out_dir {
        write(
            &dir.join("bracket.csv"),
            &format!("low_as,high_as\n{},{}\n", lo.as_attos(), hi.as_attos()),
        )?;
        write(&dir.join("verdicts.csv"), &write_verdict_csv(&verdicts))?;
    }
    Ok(())
}

fn report_latch(tag: &str, o: &Observed, dir: Option<&Path>, ts: Timescale) -> Result<(), Failure> {
    let mut line = format!("{tag}: {}", summary(&o.result));
    for node in ["U", "T"] {
        if let (Some(t), Some(v)) = (o.train(node), o.verdict(node)) {
            line.push_str(&format!(" {node}:periods={},verdict={}", t.entries.len(), v.kind));
        }
    }
    for node in ["Q", "QN"] {
        line.push_str(&format!(" {node}:transitions={}", o.transitions(node)));
    }
    println!("{line}");
    if let Some(dir) = dir {
        write(&dir.join(format!("{tag}.csv")), &write_trace_csv(&o.result.trace))?;
        write_vcd_file(&dir.join(format!("{tag}.vcd")), &o.result, ts)?;
        write(&dir.join(format!("{tag}_verdicts.csv")), &write_verdict_csv(&o.trains))?;
    }
    Ok(())
}

fn cmd_srlatch(a: &LatchArgs) -> Result<(), Failure> {
    let params = SrLatchParams::default();
    let circuit = builtin_circuit("srlatch")?;
    let tuning = LatchTuning {
        reset_offset: a.reset_offset,
        ..LatchTuning::default()
    };
    let rep = sr_latch_procedure(&circuit, &params, &tuning)?;
    println!("set_width_as={}", rep.set_only.set_width.as_attos());
    if let Some((t, w)) = rep.set_reset.reset {
        println!("reset_at_as={} reset_width_as={}", t.as_attos(), w.as_attos());
    }
    let dir = a.out_dir.as_deref();
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Failure::Input(e.to_string()))?;
    }
    if a.variant != Variant::SetReset {
        report_latch("idm_set_only", &rep.idm_set_only, dir, a.timescale)?;
        report_latch("inertial_set_only", &rep.inertial_set_only, dir, a.timescale)?;
    }
    if a.variant != Variant::SetOnly {
        report_latch("idm_set_reset", &rep.idm_set_reset, dir, a.timescale)?;
        report_latch("inertial_set_reset", &rep.inertial_set_reset, dir, a.timescale)?;
    }
    Ok(())
}

fn cmd_adder(a: &AdderArgs) -> Result<(), Failure> {
    if a.bits == 0 || a.step <= TimeAs::ZERO || a.from <= TimeAs::ZERO || a.to < a.from {
        return Err(Failure::Input("need bits >= 1, 0 < from <= to and step > 0".into()));
    }
    let circuit = invsim::netlist::build_adder(a.bits, &AdderParams::default())
        .map_err(|e| Failure::Input(e.to_string()))?;
    let outs = adder_outputs(a.bits);
    let names: Vec<&str> = outs.iter().map(String::as_str).collect();
    let mut text = String::from("width_as,switched");
    for o in &outs {
        text.push_str(&format!(",{o}_width_as"));
    }
    text.push('\n');
    let mut w = a.from;
    while w <= a.to {
        let stim = adder_pulse(a.bits, a.polarity == Polarity::Up, PULSE_START, w);
        let r = run(&circuit, &stim, a.model)?;
        let switched: Vec<String> = switched_outputs(&r, &outs).into_iter().collect();
        text.push_str(&format!("{},{}", w.as_attos(), switched.join(" ")));
        for (_, width) in degradation_profile(&r.trace, &names) {
            text.push_str(&width.map_or(",NONE".into(), |x| format!(",{}", x.as_attos())));
        }
        text.push('\n');
        w = w + a.step;
    }
    match &a.csv {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bench(a: &BenchArgs) -> Result<(), Failure> {
    let spec = BenchSpec {
        circuit: a.circuit.clone(),
        multipliers: a.multipliers.clone(),
        transitions: a.transitions,
        repetitions: a.repetitions,
        models: a.models.clone(),
        parallel: a.parallel,
    };
    let rows = run_bench(&spec, |done| {
        for r in done {
            eprintln!(
                "x{} {}: mean {:.4} s, stddev {:.4} s{}",
                r.multiplier,
                r.model,
                r.mean_s,
                r.stddev_s,
                r.overhead_pct.map_or(String::new(), |o| format!(", overhead {o:.1} %"))
            );
        }
    })?;
    let text = write_bench_csv(&rows);
    match &a.csv {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Sim(a) => cmd_sim(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Bisect(a) => cmd_bisect(a),
        Command::Srlatch(a) => cmd_srlatch(a),
        Command::Adder(a) => cmd_adder(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            match f {
                Failure::Input(_) => ExitCode::from(1),
                Failure::Internal(_) => ExitCode::from(2),
            }
        }
    }
}
