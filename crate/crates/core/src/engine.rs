// SPDX-License-Identifier: Apache-2.0
//! Discrete-event kernel.
//!
//! Events are ordered by `(time, seq)`. All events of one timestamp are
//! applied first, then every gate with a changed input is evaluated once and
//! its channel is fed; events scheduled for the same timestamp start another
//! round. Revoked events stay queued and are skipped when popped.

use std::collections::{BTreeMap, HashMap, VecDeque};

use indexmap::IndexMap;
use thiserror::Error;

use crate::channel::{ChannelDecision, ChannelError, ChannelState};
use crate::netlist::{Circuit, GateId, GateKind, NetlistError, SignalId};
use crate::types::{DelayModel, Level, SignalTrace, TimeAs, Trace, Transition};

/// Transitions applied to primary inputs, with optional initial levels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stimulus {
    pub initial: IndexMap<String, Level>,
    pub edges: IndexMap<String, Vec<Transition>>,
}

impl Stimulus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_initial(&mut self, signal: &str, level: Level) -> &mut Self {
        self.initial.insert(signal.to_string(), level);
        self
    }

    /// Append a transition of `signal` to `level` at `time`.
    pub fn push(&mut self, signal: &str, time: TimeAs, level: Level) -> &mut Self {
        self.edges
            .entry(signal.to_string())
            .or_default()
            .push(Transition::new(time, level));
        self
    }

    /// A pulse away from `base` on `signal`, starting at `start`.
    pub fn pulse(signal: &str, base: Level, start: TimeAs, width: TimeAs) -> Self {
        let mut s = Stimulus::new();
        s.set_initial(signal, base)
            .push(signal, start, !base)
            .push(signal, start + width, base);
        s
    }

    pub fn transition_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StimulusError {
    #[error("`{0}` is not a primary input")]
    UnknownInput(String),
    #[error("stimulus for `{signal}` has negative time {time}")]
    NegativeTime { signal: String, time: TimeAs },
    #[error("stimulus for `{signal}` is not strictly increasing at {time}")]
    NonMonotonic { signal: String, time: TimeAs },
    #[error("stimulus for `{signal}` repeats level {level} at {time}")]
    NonAlternating {
        signal: String,
        time: TimeAs,
        level: Level,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("gate `{gate}`: {source}")]
    Channel { gate: String, source: ChannelError },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Delay model used by every gate, overriding the per-gate setting.
    pub model: DelayModel,
    pub t_end: TimeAs,
    /// Maximum number of committed gate events.
    pub max_events: u64,
    /// Record every signal; otherwise primary inputs and outputs only.
    pub record_internal: bool,
    /// When false no signal is recorded; counters are still reported.
    pub record: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: DelayModel::IdmExp,
            t_end: TimeAs::ns(1_000),
            max_events: 10_000_000,
            record_internal: true,
            record: true,
        }
    }
}

impl SimConfig {
    pub fn with_model(model: DelayModel) -> Self {
        SimConfig {
            model,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimStatus {
    Completed,
    EventCapReached,
}

impl SimStatus {
    pub fn name(self) -> &'static str {
        match self {
            SimStatus::Completed => "COMPLETED",
            SimStatus::EventCapReached => "EVENT_CAP_REACHED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trace: Trace,
    pub status: SimStatus,
    pub committed: u64,
    pub cancelled: u64,
    pub scheduled: u64,
    /// Scheduled events neither committed nor cancelled when the run stopped.
    pub pending_at_end: u64,
}

/// Check `stim` against the primary inputs of `circuit` and return the
/// initial level of every input.
pub fn check_stimulus(
    circuit: &Circuit,
    stim: &Stimulus,
) -> Result<HashMap<SignalId, Level>, StimulusError> {
    let input_id = |name: &str| {
        circuit
            .signal_id(name)
            .filter(|&s| circuit.inputs().contains(&s))
            .ok_or_else(|| StimulusError::UnknownInput(name.to_string()))
    };
    let mut levels = HashMap::new();
    for &s in circuit.inputs() {
        levels.insert(s, circuit.signals()[s].init.unwrap_or(Level::Lo));
    }
    for (name, &l) in &stim.initial {
        levels.insert(input_id(name)?, l);
    }
    for (name, edges) in &stim.edges {
        let id = input_id(name)?;
        let mut level = levels[&id];
        let mut prev: Option<TimeAs> = None;
        for e in edges {
            if e.time < TimeAs::ZERO {
                return Err(StimulusError::NegativeTime {
                    signal: name.clone(),
                    time: e.time,
                });
            }
            if prev.is_some_and(|p| e.time <= p) {
                return Err(StimulusError::NonMonotonic {
                    signal: name.clone(),
                    time: e.time,
                });
            }
            if e.level == level {
                return Err(StimulusError::NonAlternating {
                    signal: name.clone(),
                    time: e.time,
                    level: e.level,
                });
            }
            level = e.level;
            prev = Some(e.time);
        }
    }
    Ok(levels)
}

/// Scheduled, not yet committed events of one gate in time order. The first
/// two live inline; gates rarely have more.
#[derive(Default)]
struct Outstanding {
    head: [(u64, TimeAs); 2],
    len: usize,
    spill: VecDeque<(u64, TimeAs)>,
}

impl Outstanding {
    fn front(&self) -> Option<u64> {
        (self.len > 0).then_some(self.head[0].0)
    }

    fn back_time(&self) -> Option<TimeAs> {
        match self.len {
            0 => None,
            1 | 2 => Some(self.head[self.len - 1].1),
            _ => self.spill.back().map(|e| e.1),
        }
    }

    fn push_back(&mut self, e: (u64, TimeAs)) {
        if self.len < 2 {
            self.head[self.len] = e;
        } else {
            self.spill.push_back(e);
        }
        self.len += 1;
    }

    fn pop_front(&mut self) {
        self.head[0] = self.head[1];
        if let Some(e) = self.spill.pop_front() {
            self.head[1] = e;
        }
        self.len -= 1;
    }

    fn pop_back(&mut self) -> bool {
        if self.len == 0 {
            return false;
        }
        if self.len > 2 {
            self.spill.pop_back();
        }
        self.len -= 1;
        true
    }
}

struct GateState {
    channel: ChannelState,
    /// Last value of the boolean function fed into the channel.
    fed: Level,
    outstanding: Outstanding,
    /// Most recent commit, kept for retraction within the same timestamp.
    last_commit: Option<TimeAs>,
}

/// Flat copy of the circuit topology used in the inner loop.
struct Topology {
    kind: Vec<GateKind>,
    inputs: Vec<[u32; 2]>,
    output: Vec<u32>,
    /// Fan-out of signal `s` is `fanout[fanout_start[s]..fanout_start[s + 1]]`.
    fanout_start: Vec<u32>,
    fanout: Vec<u32>,
}

impl Topology {
    fn new(circuit: &Circuit) -> Self {
        let gates = circuit.gates();
        let mut fanout_start = Vec::with_capacity(circuit.signals().len() + 1);
        let mut fanout = Vec::new();
        for s in 0..circuit.signals().len() {
            fanout_start.push(fanout.len() as u32);
            fanout.extend(circuit.fanout(s).iter().map(|&g| g as u32));
        }
        fanout_start.push(fanout.len() as u32);
        Topology {
            kind: gates.iter().map(|g| g.kind).collect(),
            inputs: gates
                .iter()
                .map(|g| {
                    let first = g.inputs[0] as u32;
                    [first, g.inputs.get(1).map_or(first, |&s| s as u32)]
                })
                .collect(),
            output: gates.iter().map(|g| g.output as u32).collect(),
            fanout_start,
            fanout,
        }
    }
}

/// Scheduled gate event; `seq` is unique and increases with scheduling order.
#[derive(Debug, Clone, Copy)]
struct Event {
    seq: u64,
    gate: u32,
    level: Level,
}

/// Events bucketed by timestamp. Within a bucket events are appended in
/// `seq` order, so draining a bucket yields `(time, seq)` order.
#[derive(Default)]
struct EventQueue {
    buckets: BTreeMap<TimeAs, Vec<Event>>,
    pool: Vec<Vec<Event>>,
}

impl EventQueue {
    fn push(&mut self, time: TimeAs, e: Event) {
        let pool = &mut self.pool;
        self.buckets
            .entry(time)
            .or_insert_with(|| pool.pop().unwrap_or_default())
            .push(e);
    }

    fn next_time(&self) -> Option<TimeAs> {
        self.buckets.keys().next().copied()
    }

    /// Remove and return the bucket at `t`, if any.
    fn take(&mut self, t: TimeAs) -> Option<Vec<Event>> {
        match self.buckets.first_entry() {
            Some(entry) if *entry.key() == t => Some(entry.remove()),
            _ => None,
        }
    }

    fn recycle(&mut self, mut v: Vec<Event>) {
        v.clear();
        self.pool.push(v);
    }
}

struct Kernel<'c> {
    circuit: &'c Circuit,
    topo: Topology,
    gates: Vec<GateState>,
    levels: Vec<Level>,
    slots: Vec<Option<usize>>,
    recorded: Vec<SignalTrace>,
    queue: EventQueue,
    seq: u64,
    dirty: Vec<GateId>,
    is_dirty: Vec<bool>,
    committed: u64,
    cancelled: u64,
    scheduled: u64,
}

impl Kernel<'_> {
    fn mark_fanout(&mut self, s: SignalId) {
        let (a, b) = (self.topo.fanout_start[s], self.topo.fanout_start[s + 1]);
        for &g in &self.topo.fanout[a as usize..b as usize] {
            let g = g as usize;
            if !self.is_dirty[g] {
                self.is_dirty[g] = true;
                self.dirty.push(g);
            }
        }
    }

    fn set_level(&mut self, s: SignalId, t: TimeAs, level: Level) -> Result<(), SimError> {
        if self.levels[s] == level {
            return Err(SimError::Internal(format!(
                "signal `{}` set to {level} twice at {t}",
                self.circuit.signal_name(s)
            )));
        }
        self.levels[s] = level;
        if let Some(slot) = self.slots[s] {
            self.recorded[slot].transitions.push(Transition::new(t, level));
        }
        self.mark_fanout(s);
        Ok(())
    }

    fn commit(&mut self, t: TimeAs, seq: u64, g: GateId, level: Level) -> Result<bool, SimError> {
        let st = &mut self.gates[g];
        if st.outstanding.front() != Some(seq) {
            return Ok(false);
        }
        st.outstanding.pop_front();
        st.last_commit = Some(t);
        self.committed += 1;
        let out = self.topo.output[g] as usize;
        self.set_level(out, t, level)?;
        Ok(true)
    }

    /// Undo the commit of gate `g` at the current time `t`.
    fn retract(&mut self, t: TimeAs, g: GateId) -> Result<(), SimError> {
        if self.gates[g].last_commit != Some(t) {
            return Err(SimError::Internal(format!(
                "gate `{}` cancelled with nothing to revoke at {t}",
                self.circuit.gates()[g].name
            )));
        }
        self.gates[g].last_commit = None;
        let out = self.topo.output[g] as usize;
        self.levels[out] = !self.levels[out];
        if let Some(slot) = self.slots[out] {
            self.recorded[slot].transitions.pop();
        }
        self.committed -= 1;
        self.cancelled += 1;
        self.mark_fanout(out);
        Ok(())
    }

    fn evaluate(&mut self, t: TimeAs, g: GateId) -> Result<(), SimError> {
        let kind = self.topo.kind[g];
        let [a, b] = self.topo.inputs[g];
        let ins = [self.levels[a as usize], self.levels[b as usize]];
        let v = kind.eval(&ins[..kind.arity()]);
        let gate_name = || self.circuit.gates()[g].name.clone();
        let st = &mut self.gates[g];
        if v == st.fed {
            return Ok(());
        }
        st.fed = v;
        let decision = st
            .channel
            .on_input_edge(t, v)
            .map_err(|source| SimError::Channel {
                gate: gate_name(),
                source,
            })?;
        match decision {
            ChannelDecision::Schedule { time, level } => {
                if st.outstanding.back_time().is_some_and(|last| time <= last) || time < t {
                    return Err(SimError::Internal(format!(
                        "gate `{}` scheduled out of order at {time}",
                        gate_name()
                    )));
                }
                self.seq += 1;
                st.outstanding.push_back((self.seq, time));
                self.queue.push(
                    time,
                    Event {
                        seq: self.seq,
                        gate: g as u32,
                        level,
                    },
                );
                self.scheduled += 1;
            }
            ChannelDecision::CancelPending => {
                if st.outstanding.pop_back() {
                    self.cancelled += 1;
                } else {
                    self.retract(t, g)?;
                }
            }
            ChannelDecision::NoChange => {}
        }
        Ok(())
    }
}

/// Run `circuit` under `stim` until `config.t_end`, queue exhaustion or the
/// event cap.
pub fn simulate(
    circuit: &Circuit,
    stim: &Stimulus,
    config: &SimConfig,
) -> Result<SimResult, SimError> {
    if config.t_end <= TimeAs::ZERO {
        return Err(SimError::Config("t_end must be positive".into()));
    }
    if config.max_events == 0 {
        return Err(SimError::Config("max_events must be positive".into()));
    }
    if u32::try_from(circuit.gates().len()).is_err() {
        return Err(SimError::Config("too many gates".into()));
    }
    let input_levels = check_stimulus(circuit, stim)?;
    let levels = circuit.settle(&input_levels)?;

    let mut gates = Vec::with_capacity(circuit.gates().len());
    for g in circuit.gates() {
        let initial = levels[g.output];
        let channel = ChannelState::with_model(g.params, config.model, initial).map_err(
            |source| SimError::Channel {
                gate: g.name.clone(),
                source,
            },
        )?;
        gates.push(GateState {
            channel,
            fed: initial,
            outstanding: Outstanding::default(),
            last_commit: None,
        });
    }

    let mut slots = vec![None; circuit.signals().len()];
    let mut names = Vec::new();
    for (s, slot) in slots.iter_mut().enumerate() {
        let keep = config.record
            && (config.record_internal
                || circuit.inputs().contains(&s)
                || circuit.outputs().contains(&s));
        if keep {
            *slot = Some(names.len());
            names.push(s);
        }
    }
    let recorded = names.iter().map(|&s| SignalTrace::new(levels[s])).collect();

    // stimulus edges merged into one time-ordered stream, input order on ties
    let mut stream: Vec<(TimeAs, usize, SignalId, Level)> = Vec::with_capacity(stim.transition_count());
    for (name, edges) in &stim.edges {
        let id = circuit.signal_id(name).expect("checked above");
        let rank = circuit.inputs().iter().position(|&i| i == id).unwrap_or(0);
        stream.extend(edges.iter().map(|e| (e.time, rank, id, e.level)));
    }
    stream.sort_unstable_by_key(|&(t, rank, _, _)| (t, rank));

    let mut k = Kernel {
        circuit,
        topo: Topology::new(circuit),
        gates,
        levels,
        slots,
        recorded,
        queue: EventQueue::default(),
        seq: 0,
        dirty: Vec::new(),
        is_dirty: vec![false; circuit.gates().len()],
        committed: 0,
        cancelled: 0,
        scheduled: 0,
    };

    // gates whose function disagrees with their settled output start switching at 0
    for g in 0..circuit.gates().len() {
        k.is_dirty[g] = true;
        k.dirty.push(g);
    }

    let mut cursor = 0;
    let mut status = SimStatus::Completed;
    let mut batch: Vec<GateId> = Vec::new();
    'outer: loop {
        let next_event = k.queue.next_time();
        let next_stim = stream.get(cursor).map(|e| e.0);
        let t = match (next_event, next_stim, k.dirty.is_empty()) {
            (_, _, false) => TimeAs::ZERO,
            (Some(a), Some(b), _) => a.min(b),
            (Some(a), None, _) => a,
            (None, Some(b), _) => b,
            (None, None, _) => break,
        };
        if t > config.t_end {
            break;
        }
        loop {
            while let Some(&(st, _, s, level)) = stream.get(cursor) {
                if st != t {
                    break;
                }
                cursor += 1;
                k.set_level(s, t, level)?;
            }
            // commits never schedule, so one bucket per round suffices
            if let Some(bucket) = k.queue.take(t) {
                for e in &bucket {
                    k.commit(t, e.seq, e.gate as usize, e.level)?;
                }
                k.queue.recycle(bucket);
            }
            if k.committed >= config.max_events {
                status = SimStatus::EventCapReached;
                break 'outer;
            }
            if k.dirty.is_empty() {
                break;
            }
            std::mem::swap(&mut batch, &mut k.dirty);
            batch.sort_unstable();
            for &g in &batch {
                k.is_dirty[g] = false;
            }
            for &g in &batch {
                k.evaluate(t, g)?;
            }
            batch.clear();
        }
    }

    let pending_at_end: u64 = k.gates.iter().map(|g| g.outstanding.len as u64).sum();
    let mut trace = Trace::new();
    for (slot, sig) in k.recorded.into_iter().enumerate() {
        trace.insert(circuit.signal_name(names[slot]), sig);
    }
    trace.truncated = status == SimStatus::EventCapReached || pending_at_end > 0;
    Ok(SimResult {
        trace,
        status,
        committed: k.committed,
        cancelled: k.cancelled,
        scheduled: k.scheduled,
        pending_at_end,
    })
}

/// Output summary of one sweep point: the width of the first complete pulse
/// on the observed signal, or `None` when the pulse was cancelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepPoint {
    pub delta_i: TimeAs,
    pub delta_o: Option<TimeAs>,
}

/// Apply one pulse of each width to `input` (away from its initial level,
/// starting at `start`) and record the first pulse on `output`.
pub fn run_sweep(
    circuit: &Circuit,
    input: &str,
    output: &str,
    widths: &[TimeAs],
    start: TimeAs,
    config: &SimConfig,
) -> Result<Vec<SweepPoint>, SimError> {
    let id = circuit
        .signal_id(input)
        .ok_or_else(|| StimulusError::UnknownInput(input.to_string()))?;
    let base = circuit.signals()[id].init.unwrap_or(Level::Lo);
    let mut cfg = *config;
    cfg.record_internal = true;
    widths
        .iter()
        .map(|&w| {
            let r = simulate(circuit, &Stimulus::pulse(input, base, start, w), &cfg)?;
            let sig = r
                .trace
                .signal(output)
                .ok_or_else(|| NetlistError::UnknownSignal(output.to_string()))?;
            let delta_o = crate::types::pulses_of(&sig.transitions, sig.initial)
                .first()
                .map(|p| p.width);
            Ok(SweepPoint { delta_i: w, delta_o })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{build_buffer, CircuitBuilder, GateKind};
    use crate::types::ChannelParams;

    fn or_gate() -> ChannelParams {
        ChannelParams::new(TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8))
    }

    #[test]
    fn buffer_step_uses_static_delay() {
        let c = build_buffer(or_gate()).unwrap();
        let mut s = Stimulus::new();
        s.push("I", TimeAs::ZERO, Level::Hi);
        let r = simulate(&c, &s, &SimConfig::default()).unwrap();
        assert_eq!(
            r.trace.signal("O").unwrap().transitions,
            vec![Transition::new(TimeAs::ps_f64(4.6), Level::Hi)]
        );
        assert_eq!((r.committed, r.cancelled, r.scheduled), (1, 0, 1));
        assert_eq!(r.status, SimStatus::Completed);
        assert!(!r.trace.truncated);
    }

    #[test]
    fn cancelled_pulse_leaves_no_trace() {
        let p = ChannelParams::symmetric(TimeAs::ps(4)).with_pure(TimeAs::ZERO);
        let c = build_buffer(p).unwrap();
        let s = Stimulus::pulse("I", Level::Lo, TimeAs::ZERO, TimeAs::ps(4));
        let r = simulate(&c, &s, &SimConfig::default()).unwrap();
        assert!(r.trace.signal("O").unwrap().transitions.is_empty());
        assert_eq!((r.committed, r.cancelled, r.scheduled), (0, 1, 1));
    }

    #[test]
    fn sweep_on_pure_buffer_is_a_constant_shift() {
        let c = build_buffer(or_gate()).unwrap();
        let widths: Vec<TimeAs> = (1..20).map(TimeAs::ps).collect();
        let pts = run_sweep(&c, "I", "O", &widths, TimeAs::ps(1), &SimConfig::with_model(DelayModel::Pure)).unwrap();
        for p in pts {
            assert_eq!(p.delta_o, Some(p.delta_i + TimeAs::ps_f64(1.2)));
        }
    }

    #[test]
    fn simultaneous_inputs_evaluate_once() {
        // XOR of two inputs switching together never changes
        let mut b = CircuitBuilder::new();
        b.input("A").input("B").output("X");
        b.gate(GateKind::Xor2, "x", "X", &["A", "B"], or_gate());
        let c = b.build().unwrap();
        let mut s = Stimulus::new();
        s.push("A", TimeAs::ps(1), Level::Hi).push("B", TimeAs::ps(1), Level::Hi);
        let r = simulate(&c, &s, &SimConfig::default()).unwrap();
        assert_eq!(r.scheduled, 0);
    }

    #[test]
    fn zero_pure_delay_tie_is_retracted() {
        // feedback through a zero-pure-delay channel produces same-time cancellations
        let p = ChannelParams::symmetric(TimeAs::ps(4)).with_pure(TimeAs::ZERO);
        let mut b = CircuitBuilder::new();
        b.input("I").output("A");
        b.gate(GateKind::Or2, "or", "A", &["I", "A"], p);
        let c = b.build().unwrap();
        for w in [1, 3, 4, 5, 9] {
            let s = Stimulus::pulse("I", Level::Lo, TimeAs::ZERO, TimeAs::ps(w));
            let r = simulate(&c, &s, &SimConfig::default()).unwrap();
            crate::types::validate_trace(&r.trace).unwrap();
            assert_eq!(r.committed + r.cancelled + r.pending_at_end, r.scheduled);
        }
    }

    #[test]
    fn stimulus_errors() {
        let c = build_buffer(or_gate()).unwrap();
        let mut s = Stimulus::new();
        s.push("O", TimeAs::ps(1), Level::Hi);
        assert!(matches!(check_stimulus(&c, &s), Err(StimulusError::UnknownInput(_))));
        let mut s = Stimulus::new();
        s.push("I", TimeAs::ps(1), Level::Hi).push("I", TimeAs::ps(1), Level::Lo);
        assert!(matches!(check_stimulus(&c, &s), Err(StimulusError::NonMonotonic { .. })));
        let mut s = Stimulus::new();
        s.push("I", TimeAs::ps(1), Level::Lo);
        assert!(matches!(check_stimulus(&c, &s), Err(StimulusError::NonAlternating { .. })));
    }

    #[test]
    fn outstanding_behaves_like_a_deque() {
        let mut o = Outstanding::default();
        let mut d = VecDeque::new();
        // scripted mix of pushes, commits and cancellations
        for (k, op) in [0, 0, 0, 0, 1, 2, 0, 1, 1, 0, 2, 2, 0, 0, 0, 1, 2, 1, 1, 1]
            .into_iter()
            .enumerate()
        {
            let e = (k as u64, TimeAs(k as i64));
            match op {
                0 => {
                    o.push_back(e);
                    d.push_back(e);
                }
                1 => {
                    if d.pop_front().is_some() {
                        o.pop_front();
                    }
                }
                _ => assert_eq!(o.pop_back(), d.pop_back().is_some()),
            }
            assert_eq!(o.len, d.len());
            assert_eq!(o.front(), d.front().map(|e| e.0));
            assert_eq!(o.back_time(), d.back().map(|e| e.1));
        }
    }

    #[test]
    fn event_cap_truncates() {
        // XOR with its own output as second input rings while I is HI
        let mut b = CircuitBuilder::new();
        b.input("I").output("A");
        b.gate(GateKind::Xor2, "x", "A", &["I", "A"], or_gate());
        let c = b.build().unwrap();
        let mut s = Stimulus::new();
        s.push("I", TimeAs::ZERO, Level::Hi);
        let cfg = SimConfig {
            max_events: 50,
            ..SimConfig::default()
        };
        let r = simulate(&c, &s, &cfg).unwrap();
        assert_eq!(r.status, SimStatus::EventCapReached);
        assert!(r.trace.truncated);
        assert_eq!(r.committed, 50);
        assert_eq!(r.trace.signal("A").unwrap().transitions.len(), 50);
    }
}
