// SPDX-License-Identifier: Apache-2.0
//! Built-in circuits, stimuli and experiment procedures.
//!
//! Circuit names: `orloop:N`, `srlatch`, `adder:N`, `buffer`, `clocktree`,
//! each optionally followed by `xM` for `M` independent copies
//! (`adder:4x10`). Stimulus names: `pulse:SIG:width=W[:start=T][:base=0|1]`,
//! `adder-up:width=W`, `adder-down:width=W` and
//! `random:count=N:min=T:max=T` (input edges with uniformly drawn gaps,
//! reproducible from a seed). Times accept `as`, `fs`, `ps` and `ns`
//! suffixes.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{
    classify, extract_pulse_train, find_critical_width, BisectError, ClassifyOptions,
    OscillationVerdict, PulseTrain,
};
use crate::engine::{simulate, SimConfig, SimError, SimResult, Stimulus};
use crate::netlist::{
    build_adder, build_buffer, build_clock_tree, build_or_loop, build_sr_latch, replicate,
    AdderParams, Circuit, NetlistError, OrLoopParams, SrLatchParams,
};
use crate::types::{ChannelParams, DelayModel, Level, TimeAs};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecipeError {
    #[error("unknown built-in `{0}`")]
    UnknownBuiltin(String),
    #[error("malformed built-in `{spec}`: {reason}")]
    Malformed { spec: String, reason: String },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("bisection failed: {0}")]
    Bisect(String),
}

impl From<BisectError<SimError>> for RecipeError {
    fn from(e: BisectError<SimError>) -> Self {
        match e {
            BisectError::Probe(s) => RecipeError::Sim(s),
            other => RecipeError::Bisect(other.to_string()),
        }
    }
}

fn malformed(spec: &str, reason: impl Into<String>) -> RecipeError {
    RecipeError::Malformed {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

/// Static delay of the clock-tree inverters.
pub fn clock_tree_params() -> ChannelParams {
    ChannelParams::symmetric(TimeAs::ps(10))
}

/// Static delay of the `buffer` built-in.
pub fn buffer_params() -> ChannelParams {
    ChannelParams::symmetric(TimeAs::ps(4))
}

/// Build a named built-in circuit with default parameters.
pub fn builtin_circuit(spec: &str) -> Result<Circuit, RecipeError> {
    let (base, copies) = match spec.rsplit_once('x') {
        Some((b, m)) if !m.is_empty() && m.bytes().all(|c| c.is_ascii_digit()) => {
            let m: usize = m.parse().map_err(|_| malformed(spec, "bad copy count"))?;
            if m == 0 {
                return Err(malformed(spec, "copy count must be at least 1"));
            }
            (b, m)
        }
        _ => (spec, 1),
    };
    let (name, arg) = match base.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (base, None),
    };
    let size = |default: Option<usize>| -> Result<usize, RecipeError> {
        match (arg, default) {
            (Some(a), _) => a.parse().map_err(|_| malformed(spec, format!("bad size `{a}`"))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(malformed(spec, "size required")),
        }
    };
    let circuit = match name {
        "orloop" => build_or_loop(size(Some(30))?, &OrLoopParams::default())?,
        "srlatch" => build_sr_latch(&SrLatchParams::default())?,
        "adder" => {
            let n = size(Some(4))?;
            if n == 0 {
                return Err(malformed(spec, "adder needs at least one bit"));
            }
            build_adder(n, &AdderParams::default())?
        }
        "buffer" => build_buffer(buffer_params())?,
        "clocktree" => build_clock_tree(clock_tree_params())?,
        _ => return Err(RecipeError::UnknownBuiltin(spec.to_string())),
    };
    if arg.is_some() && !matches!(name, "orloop" | "adder") {
        return Err(malformed(spec, "takes no size"));
    }
    if copies == 1 {
        Ok(circuit)
    } else {
        Ok(replicate(&circuit, copies)?)
    }
}

/// Start time of built-in pulse stimuli unless given.
pub const PULSE_START: TimeAs = TimeAs::ps(10);

fn parse_time(spec: &str, v: &str) -> Result<TimeAs, RecipeError> {
    v.parse().map_err(|e: String| malformed(spec, e))
}

/// `count` edges spread over the primary inputs of `circuit`, each input
/// toggling from its netlist init, with gaps between consecutive edges of the
/// whole stimulus drawn uniformly from `[min_gap, max_gap]`.
pub fn random_stimulus(
    circuit: &Circuit,
    count: usize,
    min_gap: TimeAs,
    max_gap: TimeAs,
    seed: u64,
) -> Stimulus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = circuit.inputs();
    let mut levels: Vec<Level> = inputs
        .iter()
        .map(|&s| circuit.signals()[s].init.unwrap_or(Level::Lo))
        .collect();
    let mut stim = Stimulus::new();
    for (&s, &l) in inputs.iter().zip(&levels) {
        stim.set_initial(circuit.signal_name(s), l);
    }
    let mut t = TimeAs::ZERO;
    for _ in 0..count {
        t = t + TimeAs(rng.gen_range(min_gap.as_attos()..=max_gap.as_attos()));
        let i = rng.gen_range(0..inputs.len());
        levels[i] = !levels[i];
        stim.push(circuit.signal_name(inputs[i]), t, levels[i]);
    }
    stim
}

/// Build a named built-in stimulus for `circuit`; `seed` drives randomized
/// stimuli.
pub fn builtin_stimulus(spec: &str, circuit: &Circuit, seed: u64) -> Result<Stimulus, RecipeError> {
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or("");
    if kind == "random" {
        return random_from(spec, parts, circuit, seed);
    }
    let mut signal = None;
    if kind == "pulse" {
        signal = Some(parts.next().ok_or_else(|| malformed(spec, "signal required"))?);
    }
    let (mut width, mut start, mut base) = (None, PULSE_START, None);
    for p in parts {
        match p.split_once('=') {
            Some(("width", v)) => width = Some(parse_time(spec, v)?),
            Some(("start", v)) => start = parse_time(spec, v)?,
            Some(("base", "0")) => base = Some(Level::Lo),
            Some(("base", "1")) => base = Some(Level::Hi),
            _ => return Err(malformed(spec, format!("unknown option `{p}`"))),
        }
    }
    let width = width.ok_or_else(|| malformed(spec, "width required"))?;
    if width <= TimeAs::ZERO || start < TimeAs::ZERO {
        return Err(malformed(spec, "width must be positive and start non-negative"));
    }
    match kind {
        "pulse" => {
            let sig = signal.expect("parsed above");
            let base = match (base, circuit.signal_id(sig)) {
                (Some(b), _) => b,
                (None, Some(id)) => circuit.signals()[id].init.unwrap_or(Level::Lo),
                (None, None) => Level::Lo,
            };
            Ok(Stimulus::pulse(sig, base, start, width))
        }
        "adder-up" | "adder-down" => {
            let bits = (0..)
                .take_while(|i| circuit.signal_id(&format!("A{i}")).is_some())
                .count();
            if bits == 0 {
                return Err(malformed(spec, "circuit has no adder inputs"));
            }
            Ok(adder_pulse(bits, kind == "adder-up", start, width))
        }
        _ => Err(RecipeError::UnknownBuiltin(spec.to_string())),
    }
}

fn random_from<'a>(
    spec: &str,
    parts: impl Iterator<Item = &'a str>,
    circuit: &Circuit,
    seed: u64,
) -> Result<Stimulus, RecipeError> {
    let (mut count, mut min, mut max) = (None, None, None);
    for p in parts {
        match p.split_once('=') {
            Some(("count", v)) => {
                count = Some(v.parse::<usize>().map_err(|_| malformed(spec, "bad count"))?);
            }
            Some(("min", v)) => min = Some(parse_time(spec, v)?),
            Some(("max", v)) => max = Some(parse_time(spec, v)?),
            _ => return Err(malformed(spec, format!("unknown option `{p}`"))),
        }
    }
    let (Some(count), Some(min), Some(max)) = (count, min, max) else {
        return Err(malformed(spec, "count, min and max required"));
    };
    if min <= TimeAs::ZERO || max < min {
        return Err(malformed(spec, "need 0 < min <= max"));
    }
    if circuit.inputs().is_empty() {
        return Err(malformed(spec, "circuit has no inputs"));
    }
    Ok(random_stimulus(circuit, count, min, max, seed))
}

/// Simulate with `model` on every gate and otherwise default settings.
pub fn run(circuit: &Circuit, stim: &Stimulus, model: DelayModel) -> Result<SimResult, SimError> {
    simulate(circuit, stim, &SimConfig::with_model(model))
}

fn final_level(r: &SimResult, signal: &str) -> Level {
    r.trace
        .signal(signal)
        .map_or(Level::Lo, |s| s.final_level())
}

fn train(r: &SimResult, signal: &str) -> PulseTrain {
    extract_pulse_train(&r.trace, signal).unwrap_or(PulseTrain {
        node: signal.to_string(),
        entries: Vec::new(),
        truncated: r.trace.truncated,
        final_level: Level::Lo,
        transitions: 0,
        last_transition: None,
    })
}

/// One simulation with the pulse trains of the nodes of interest.
#[derive(Debug, Clone)]
pub struct Observed {
    pub width: TimeAs,
    pub result: SimResult,
    pub trains: Vec<(PulseTrain, OscillationVerdict)>,
}

impl Observed {
    pub fn train(&self, node: &str) -> Option<&PulseTrain> {
        self.trains.iter().map(|(t, _)| t).find(|t| t.node == node)
    }

    pub fn verdict(&self, node: &str) -> Option<&OscillationVerdict> {
        self.trains.iter().find(|(t, _)| t.node == node).map(|(_, v)| v)
    }

    pub fn transitions(&self, node: &str) -> usize {
        self.result
            .trace
            .signal(node)
            .map_or(0, |s| s.transitions.len())
    }
}

fn observe(
    result: SimResult,
    width: TimeAs,
    nodes: &[&str],
    params: &ChannelParams,
    opts: &ClassifyOptions,
) -> Observed {
    let trains = nodes
        .iter()
        .map(|n| {
            let t = train(&result, n);
            let v = classify(&t, params, opts);
            (t, v)
        })
        .collect();
    Observed {
        width,
        result,
        trains,
    }
}

/// Critical input pulse width of an OR loop and the runs at both ends of the
/// bracket.
#[derive(Debug, Clone)]
pub struct CriticalRuns {
    /// Widest pulse whose run does not come to rest HI.
    pub below: Observed,
    /// Narrowest pulse whose run settles HI.
    pub above: Observed,
}

impl CriticalRuns {
    pub fn bracket(&self) -> (TimeAs, TimeAs) {
        (self.below.width, self.above.width)
    }
}

/// OR-loop pulse run on input I starting at [`PULSE_START`].
pub fn or_loop_run(
    circuit: &Circuit,
    width: TimeAs,
    config: &SimConfig,
) -> Result<SimResult, SimError> {
    simulate(circuit, &Stimulus::pulse("I", Level::Lo, PULSE_START, width), config)
}

/// Bisect the input pulse width of an OR loop between `lo` and `hi` down to
/// `resolution`. A run counts as latched when it ends with A HI and no
/// pending activity.
pub fn or_loop_critical(
    circuit: &Circuit,
    or_gate: &ChannelParams,
    config: &SimConfig,
    lo: TimeAs,
    hi: TimeAs,
    resolution: TimeAs,
) -> Result<CriticalRuns, RecipeError> {
    let latched = |w: TimeAs| -> Result<bool, SimError> {
        let r = or_loop_run(circuit, w, config)?;
        Ok(!r.trace.truncated && final_level(&r, "A") == Level::Hi)
    };
    let (a, b) = find_critical_width(latched, lo, hi, resolution)?;
    let opts = ClassifyOptions::default();
    let nodes = ["A", "B"];
    Ok(CriticalRuns {
        below: observe(or_loop_run(circuit, a, config)?, a, &nodes, or_gate, &opts),
        above: observe(or_loop_run(circuit, b, config)?, b, &nodes, or_gate, &opts),
    })
}

/// Search range for the critical width of the built-in OR loops.
pub const OR_LOOP_BRACKET: (TimeAs, TimeAs) = (TimeAs::ps(100), TimeAs::ps(300));

/// Width of the set pulse on S and the optional reset pulse on R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatchStimulus {
    pub set_width: TimeAs,
    /// Rising time and width of the reset pulse.
    pub reset: Option<(TimeAs, TimeAs)>,
}

impl LatchStimulus {
    pub fn stimulus(&self) -> Stimulus {
        let mut s = Stimulus::pulse("S", Level::Lo, PULSE_START, self.set_width);
        s.set_initial("R", Level::Lo);
        if let Some((t, w)) = self.reset {
            s.push("R", t, Level::Hi).push("R", t + w, Level::Lo);
        }
        s
    }
}

/// SR-latch runs under both stimuli and both models.
#[derive(Debug, Clone)]
pub struct LatchReport {
    pub set_only: LatchStimulus,
    pub set_reset: LatchStimulus,
    pub idm_set_only: Observed,
    pub idm_set_reset: Observed,
    pub inertial_set_only: Observed,
    pub inertial_set_reset: Observed,
}

/// Tuning of the SR-latch procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatchTuning {
    /// Search range of the set pulse width.
    pub set_range: (TimeAs, TimeAs),
    /// Search range of the reset pulse width.
    pub reset_range: (TimeAs, TimeAs),
    /// Reset pulse arrives at `nor_t` this long after the last rising edge of
    /// T in the set-only run.
    pub reset_offset: TimeAs,
    pub resolution: TimeAs,
}

impl Default for LatchTuning {
    fn default() -> Self {
        LatchTuning {
            set_range: (TimeAs::ps(1), TimeAs::ps(100)),
            reset_range: (TimeAs::ps(1), TimeAs::ps(200)),
            reset_offset: TimeAs::ps(5),
            resolution: TimeAs(1),
        }
    }
}

/// Drive the latch close to metastability with a set pulse, then cut the
/// long HI phase that ends the oscillation on T with a reset pulse whose
/// width is tuned to put the latch back on the edge.
///
/// The set width is the narrowest one (to `resolution`) that still sets the
/// latch. The reset pulse rises so that it reaches `nor_t` `reset_offset`
/// after the last rising edge of T; its width is the narrowest one that
/// resets the latch again.
pub fn sr_latch_procedure(
    circuit: &Circuit,
    params: &SrLatchParams,
    tuning: &LatchTuning,
) -> Result<LatchReport, RecipeError> {
    let cfg = SimConfig::with_model(DelayModel::IdmExp);
    let ends = |stim: LatchStimulus, level: Level| -> Result<bool, SimError> {
        let r = simulate(circuit, &stim.stimulus(), &cfg)?;
        Ok(!r.trace.truncated && final_level(&r, "Q") == level)
    };
    let (_, set_width) = find_critical_width(
        |w| ends(LatchStimulus { set_width: w, reset: None }, Level::Hi),
        tuning.set_range.0,
        tuning.set_range.1,
        tuning.resolution,
    )?;
    let set_only = LatchStimulus {
        set_width,
        reset: None,
    };
    let base = simulate(circuit, &set_only.stimulus(), &cfg)?;
    let last_rise = base
        .trace
        .signal("T")
        .and_then(|s| s.transitions.iter().rev().find(|t| t.level == Level::Hi))
        .map(|t| t.time)
        .ok_or_else(|| RecipeError::Bisect("set pulse leaves T LO".into()))?;
    let lead = if params.shaping.enabled {
        params.shaping.input.delta_inf_up
    } else {
        TimeAs::ZERO
    };
    let reset_at = last_rise + tuning.reset_offset - lead;
    if reset_at <= PULSE_START + set_width {
        return Err(RecipeError::Bisect("reset would overlap the set pulse".into()));
    }
    let (_, reset_width) = find_critical_width(
        |w| {
            ends(
                LatchStimulus {
                    set_width,
                    reset: Some((reset_at, w)),
                },
                Level::Lo,
            )
        },
        tuning.reset_range.0,
        tuning.reset_range.1,
        tuning.resolution,
    )?;
    let set_reset = LatchStimulus {
        set_width,
        reset: Some((reset_at, reset_width)),
    };
    let opts = ClassifyOptions::default();
    let nodes = ["U", "T"];
    let go = |s: LatchStimulus, m: DelayModel| -> Result<Observed, RecipeError> {
        let r = run(circuit, &s.stimulus(), m)?;
        Ok(observe(r, s.set_width, &nodes, &params.nor, &opts))
    };
    Ok(LatchReport {
        set_only,
        set_reset,
        idm_set_only: go(set_only, DelayModel::IdmExp)?,
        idm_set_reset: go(set_reset, DelayModel::IdmExp)?,
        inertial_set_only: go(set_only, DelayModel::Inertial)?,
        inertial_set_reset: go(set_reset, DelayModel::Inertial)?,
    })
}

/// Sum outputs of an `bits`-bit adder, least significant first.
pub fn adder_outputs(bits: usize) -> Vec<String> {
    (0..=bits).map(|i| format!("S{i}")).collect()
}

/// Adder test vector with a pulse of `width` on A0 at `start`.
///
/// Up pulse: A = 0000 and B = 1111, A0 pulses HI, so the carry ripples
/// through all bits. Down pulse: A = 1000 (A0 HI) and B = 1111, A0 pulses
/// LO. CIN stays LO.
pub fn adder_pulse(bits: usize, up: bool, start: TimeAs, width: TimeAs) -> Stimulus {
    let mut s = Stimulus::new();
    for i in 0..bits {
        s.set_initial(&format!("A{i}"), Level::Lo);
        s.set_initial(&format!("B{i}"), Level::Hi);
    }
    let base = if up { Level::Lo } else { Level::Hi };
    s.set_initial("A0", base);
    s.push("A0", start, !base).push("A0", start + width, base);
    s
}

/// Outputs among `signals` that switched at least once.
pub fn switched_outputs(r: &SimResult, signals: &[String]) -> BTreeSet<String> {
    signals
        .iter()
        .filter(|s| r.trace.signal(s).is_some_and(|t| !t.transitions.is_empty()))
        .cloned()
        .collect()
}

/// One point of an adder width sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AdderPoint {
    pub width: TimeAs,
    pub switched: BTreeSet<String>,
    /// First pulse width on each output.
    pub profile: Vec<(String, Option<TimeAs>)>,
}

/// Up-pulse sweep of an adder under `model`.
pub fn adder_sweep(
    circuit: &Circuit,
    bits: usize,
    widths: &[TimeAs],
    model: DelayModel,
) -> Result<Vec<AdderPoint>, SimError> {
    let outs = adder_outputs(bits);
    let names: Vec<&str> = outs.iter().map(String::as_str).collect();
    widths
        .iter()
        .map(|&w| {
            let r = run(circuit, &adder_pulse(bits, true, PULSE_START, w), model)?;
            Ok(AdderPoint {
                width: w,
                switched: switched_outputs(&r, &outs),
                profile: crate::analysis::degradation_profile(&r.trace, &names),
            })
        })
        .collect()
}

/// Adjacent sweep points whose switched-output sets differ by at least
/// `min_diff` signals.
pub fn discontinuities(points: &[AdderPoint], min_diff: usize) -> Vec<(TimeAs, TimeAs)> {
    points
        .windows(2)
        .filter(|w| w[0].switched.symmetric_difference(&w[1].switched).count() >= min_diff)
        .map(|w| (w[0].width, w[1].width))
        .collect()
}
