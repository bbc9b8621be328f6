// SPDX-License-Identifier: Apache-2.0
//! Text formats: netlists, delay annotations, stimuli, VCD and CSV.
//!
//! All three input grammars are line oriented. `#` starts a comment, fields
//! are separated by whitespace and times are integer attoseconds.
//!
//! ```text
//! # netlist
//! input I
//! output A
//! init A 0
//! gate or2 G1 A I A
//!
//! # delays: <instance> <up_as> <down_as> [vth=<float>] [dp=<as>]
//! default 4000000 4000000
//! G1 4600000 5800000 vth=0.5 dp=1000000
//!
//! # stimulus: <time_as> <signal> <0|1>, or init <signal> <0|1>
//! init I 0
//! 1000000 I 1
//! 3000000 I 0
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::analysis::{OscillationVerdict, PulseTrain};
use crate::engine::{SweepPoint, Stimulus, StimulusError};
use crate::netlist::{Circuit, CircuitBuilder, DelayTable, GateKind, NetlistError};
use crate::types::{
    ChannelParams, Level, ParamError, SignalTrace, TimeAs, Trace, Transition,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("invariant violation: {0}")]
    InvariantViolation(#[from] ParamError),
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
}

/// Parse failure, with the 1-based line it was found on when it is tied to
/// one line.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct FormatError {
    pub line: Option<usize>,
    pub kind: FormatErrorKind,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl FormatError {
    fn at(line: usize, kind: impl Into<FormatErrorKind>) -> Self {
        FormatError {
            line: Some(line),
            kind: kind.into(),
        }
    }

    fn syntax(line: usize, msg: impl Into<String>) -> Self {
        Self::at(line, FormatErrorKind::Syntax(msg.into()))
    }
}

/// Non-empty lines with comments removed, paired with their line number.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_level(line: usize, s: &str) -> Result<Level, FormatError> {
    match s {
        "0" => Ok(Level::Lo),
        "1" => Ok(Level::Hi),
        _ => Err(FormatError::syntax(line, format!("expected 0 or 1, found `{s}`"))),
    }
}

fn parse_attos(line: usize, s: &str) -> Result<TimeAs, FormatError> {
    s.parse::<i64>()
        .map(TimeAs)
        .map_err(|_| FormatError::syntax(line, format!("expected integer attoseconds, found `{s}`")))
}

/// Channel parameters given to gates of a parsed netlist until a delay table
/// is applied with [`Circuit::annotate`].
pub fn placeholder_params() -> ChannelParams {
    ChannelParams::symmetric(TimeAs::ps(10))
}

pub fn parse_netlist(text: &str) -> Result<Circuit, FormatError> {
    let mut b = CircuitBuilder::new();
    for (n, f) in lines(text) {
        match (f[0], f.len()) {
            ("input", 2) => {
                b.input(f[1]);
            }
            ("output", 2) => {
                b.output(f[1]);
            }
            ("init", 3) => {
                let l = parse_level(n, f[2])?;
                b.init(f[1], l);
            }
            ("gate", 5 | 6) => {
                let kind: GateKind = f[1].parse().map_err(|e: NetlistError| FormatError::at(n, e))?;
                b.try_gate(kind, f[2], f[3], &f[4..], placeholder_params())
                    .map_err(|e| FormatError::at(n, e))?;
            }
            ("gate", k) if k >= 4 => {
                // wrong input count for any gate kind
                let kind: GateKind = f[1].parse().map_err(|e: NetlistError| FormatError::at(n, e))?;
                return Err(FormatError::at(
                    n,
                    NetlistError::ArityMismatch {
                        gate: f[2].to_string(),
                        expected: kind.arity(),
                        found: k - 4,
                    },
                ));
            }
            ("input" | "output" | "init" | "gate", _) => {
                return Err(FormatError::syntax(n, format!("wrong field count for `{}`", f[0])));
            }
            (kw, _) => return Err(FormatError::syntax(n, format!("unknown directive `{kw}`"))),
        }
    }
    b.build().map_err(|e| FormatError { line: None, kind: e.into() })
}

pub fn parse_delays(text: &str) -> Result<DelayTable, FormatError> {
    let mut table = DelayTable::default();
    for (n, f) in lines(text) {
        if f.len() < 3 {
            return Err(FormatError::syntax(n, "expected `<instance> <up_as> <down_as>`"));
        }
        // pure delay and threshold start at their defaults
        let mut p = ChannelParams::new(parse_attos(n, f[1])?, parse_attos(n, f[2])?);
        for opt in &f[3..] {
            match opt.split_once('=') {
                Some(("vth", v)) => {
                    p.vth = v
                        .parse()
                        .map_err(|_| FormatError::syntax(n, format!("bad threshold `{v}`")))?;
                }
                Some(("dp", v)) => p.delta_pure = parse_attos(n, v)?,
                _ => return Err(FormatError::syntax(n, format!("unknown option `{opt}`"))),
            }
        }
        p.validate().map_err(|e| FormatError::at(n, e))?;
        if f[0] == "default" {
            if table.default.replace(p).is_some() {
                return Err(FormatError::syntax(n, "second `default` line"));
            }
        } else if table.entries.insert(f[0].to_string(), p).is_some() {
            return Err(FormatError::syntax(n, format!("instance `{}` listed twice", f[0])));
        }
    }
    Ok(table)
}

/// Parse a stimulus for the primary inputs of `circuit`. Edges must be
/// strictly increasing per signal and alternate, starting from the `init`
/// line of the signal, its netlist init or LO.
pub fn parse_stimulus(text: &str, circuit: &Circuit) -> Result<Stimulus, FormatError> {
    let mut stim = Stimulus::new();
    let mut state: HashMap<String, (Level, Option<TimeAs>)> = HashMap::new();
    let check_input = |n: usize, name: &str| match circuit.signal_id(name) {
        Some(id) if circuit.is_input(id) => Ok(circuit.signals()[id].init.unwrap_or(Level::Lo)),
        _ => Err(FormatError::at(n, StimulusError::UnknownInput(name.to_string()))),
    };
    for (n, f) in lines(text) {
        if f.len() != 3 {
            return Err(FormatError::syntax(n, "expected `<time_as> <signal> <0|1>`"));
        }
        let level = parse_level(n, f[2])?;
        let name = f[1];
        let base = check_input(n, name)?;
        if f[0] == "init" {
            if stim.initial.contains_key(name) || stim.edges.contains_key(name) {
                return Err(FormatError::syntax(n, format!("`init {name}` must precede its edges and appear once")));
            }
            stim.set_initial(name, level);
            state.insert(name.to_string(), (level, None));
            continue;
        }
        let time = parse_attos(n, f[0])?;
        let (cur, prev) = state.entry(name.to_string()).or_insert((base, None));
        if time < TimeAs::ZERO {
            return Err(FormatError::at(n, StimulusError::NegativeTime { signal: name.into(), time }));
        }
        if prev.is_some_and(|p| time <= p) {
            return Err(FormatError::at(n, StimulusError::NonMonotonic { signal: name.into(), time }));
        }
        if level == *cur {
            return Err(FormatError::at(
                n,
                StimulusError::NonAlternating {
                    signal: name.into(),
                    time,
                    level,
                },
            ));
        }
        *cur = level;
        *prev = Some(time);
        stim.push(name, time, level);
    }
    Ok(stim)
}

/// Stimulus in the text grammar accepted by [`parse_stimulus`].
pub fn write_stimulus(stim: &Stimulus) -> String {
    let mut out = String::new();
    for (name, l) in &stim.initial {
        out.push_str(&format!("init {name} {}\n", l.as_char()));
    }
    let mut rows: Vec<(TimeAs, usize, &str, Level)> = Vec::new();
    for (rank, (name, edges)) in stim.edges.iter().enumerate() {
        rows.extend(edges.iter().map(|e| (e.time, rank, name.as_str(), e.level)));
    }
    rows.sort_by_key(|r| (r.0, r.1));
    for (t, _, name, l) in rows {
        out.push_str(&format!("{} {name} {}\n", t.as_attos(), l.as_char()));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timescale {
    Fs,
    Ps,
}

impl Timescale {
    pub fn attos(self) -> i64 {
        match self {
            Timescale::Fs => 1_000,
            Timescale::Ps => 1_000_000,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Timescale::Fs => "1fs",
            Timescale::Ps => "1ps",
        }
    }
}

impl std::str::FromStr for Timescale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fs" | "1fs" => Ok(Timescale::Fs),
            "ps" | "1ps" => Ok(Timescale::Ps),
            _ => Err(format!("unsupported timescale `{s}` (use fs or ps)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcdOutput {
    pub text: String,
    /// One message per transition moved to a later tick.
    pub warnings: Vec<String>,
}

/// Short printable identifier for the `index`-th variable.
fn vcd_id(mut index: usize) -> String {
    let mut id = String::new();
    loop {
        id.push((b'!' + (index % 94) as u8) as char);
        index /= 94;
        if index == 0 {
            return id;
        }
        index -= 1;
    }
}

/// Two-state VCD of `trace`. Times are rounded to the timescale; a transition
/// that would land on or before the previous tick of the same signal is moved
/// to the next free tick.
pub fn write_vcd(trace: &Trace, timescale: Timescale) -> VcdOutput {
    let unit = timescale.attos();
    let mut text = String::new();
    let mut warnings = Vec::new();
    text.push_str("$version invsim $end\n");
    text.push_str(&format!("$timescale {} $end\n", timescale.unit()));
    text.push_str("$scope module top $end\n");
    let ids: Vec<String> = (0..trace.signals.len()).map(vcd_id).collect();
    for (id, name) in ids.iter().zip(trace.signals.keys()) {
        text.push_str(&format!("$var wire 1 {id} {name} $end\n"));
    }
    text.push_str("$upscope $end\n$enddefinitions $end\n#0\n$dumpvars\n");
    for (id, sig) in ids.iter().zip(trace.signals.values()) {
        text.push_str(&format!("{}{id}\n", sig.initial.as_char()));
    }
    text.push_str("$end\n");

    let mut changes: Vec<(i64, usize, usize, Level)> = Vec::new();
    for (si, (name, sig)) in trace.signals.iter().enumerate() {
        let mut last: Option<i64> = None;
        for (k, tr) in sig.transitions.iter().enumerate() {
            let mut tick = tr.time.round_to_ticks(unit);
            if let Some(prev) = last.filter(|&p| tick <= p) {
                tick = prev + 1;
                warnings.push(format!(
                    "{name}: transition at {} as moved to tick {tick} ({})",
                    tr.time.as_attos(),
                    timescale.unit()
                ));
            }
            last = Some(tick);
            changes.push((tick, si, k, tr.level));
        }
    }
    changes.sort_by_key(|c| (c.0, c.1, c.2));
    let mut current: Option<i64> = None;
    for (tick, si, _, level) in changes {
        if current != Some(tick) {
            text.push_str(&format!("#{tick}\n"));
            current = Some(tick);
        }
        text.push_str(&format!("{}{}\n", level.as_char(), ids[si]));
    }
    VcdOutput { text, warnings }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Trace as CSV with columns `signal,time_as,level`. The first row of every
/// signal has an empty time and carries its initial level.
pub fn write_trace_csv(trace: &Trace) -> String {
    let rows = trace.signals.iter().flat_map(|(name, sig)| {
        std::iter::once(vec![name.clone(), String::new(), sig.initial.as_char().to_string()]).chain(
            sig.transitions.iter().map(move |t| {
                vec![name.clone(), t.time.as_attos().to_string(), t.level.as_char().to_string()]
            }),
        )
    });
    csv_text(&["signal", "time_as", "level"], rows)
}

/// Inverse of [`write_trace_csv`]. Rows of different signals may be mixed;
/// rows of one signal must be time ordered. Line numbers count the header.
pub fn parse_trace_csv(text: &str) -> Result<Trace, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| FormatError::syntax(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["signal", "time_as", "level"] {
        return Err(FormatError::syntax(1, "expected header `signal,time_as,level`"));
    }
    let mut trace = Trace::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            FormatError::syntax(line, e.to_string())
        })?;
        let n = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(FormatError::syntax(n, "expected 3 fields"));
        }
        let level = parse_level(n, &rec[2])?;
        let name = &rec[0];
        if rec[1].is_empty() {
            if trace.signal(name).is_some() {
                return Err(FormatError::syntax(n, format!("second initial row for `{name}`")));
            }
            trace.insert(name, SignalTrace::new(level));
            continue;
        }
        let time = parse_attos(n, &rec[1])?;
        let sig = trace
            .signals
            .get_mut(name)
            .ok_or_else(|| FormatError::syntax(n, format!("`{name}` has no initial row")))?;
        if sig.transitions.last().is_some_and(|t| t.time >= time) {
            return Err(FormatError::syntax(n, format!("`{name}` is not time ordered")));
        }
        if sig.final_level() == level {
            return Err(FormatError::syntax(n, format!("`{name}` does not alternate")));
        }
        sig.transitions.push(Transition::new(time, level));
    }
    Ok(trace)
}

/// Columns `delta_i_as,delta_o_as`; a cancelled pulse reads `CANCELLED`.
pub fn write_sweep_csv(points: &[SweepPoint]) -> String {
    csv_text(
        &["delta_i_as", "delta_o_as"],
        points.iter().map(|p| {
            vec![
                p.delta_i.as_attos().to_string(),
                p.delta_o.map_or("CANCELLED".to_string(), |d| d.as_attos().to_string()),
            ]
        }),
    )
}

/// Columns `n,hi_as,lo_as`, `n` counting from 1; a missing LO time is empty.
pub fn write_train_csv(train: &PulseTrain) -> String {
    csv_text(
        &["n", "hi_as", "lo_as"],
        train.entries.iter().enumerate().map(|(i, e)| {
            vec![
                (i + 1).to_string(),
                e.hi.as_attos().to_string(),
                e.lo.map_or(String::new(), |l| l.as_attos().to_string()),
            ]
        }),
    )
}

/// Columns `node,verdict,metastability_suspect,resolution_time_as,periods,truncated`.
pub fn write_verdict_csv(rows: &[(PulseTrain, OscillationVerdict)]) -> String {
    csv_text(
        &["node", "verdict", "metastability_suspect", "resolution_time_as", "periods", "truncated"],
        rows.iter().map(|(t, v)| {
            vec![
                t.node.clone(),
                v.kind.name().to_string(),
                v.metastability_suspect.to_string(),
                v.resolution_time.map_or(String::new(), |r| r.as_attos().to_string()),
                t.entries.len().to_string(),
                t.truncated.to_string(),
            ]
        }),
    )
}

/// Columns `signal,width_as`; a signal without a complete pulse reads `NONE`.
pub fn write_profile_csv(profile: &[(String, Option<TimeAs>)]) -> String {
    csv_text(
        &["signal", "width_as"],
        profile.iter().map(|(s, w)| {
            vec![s.clone(), w.map_or("NONE".to_string(), |w| w.as_attos().to_string())]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const OR_LOOP: &str = "input I\noutput A\n# comment\ngate or2 G1 A I A  # trailing\n";

    #[test]
    fn netlist_grammar() {
        let c = parse_netlist(OR_LOOP).unwrap();
        let g = c.gate("G1").unwrap();
        assert_eq!(g.kind, GateKind::Or2);
        assert_eq!(c.signal_name(g.output), "A");
    }

    #[test]
    fn netlist_errors_carry_lines() {
        let e = parse_netlist("input I\ngate buf B1 X I\ngate buf B2 X I\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert_eq!(e.kind, FormatErrorKind::Netlist(NetlistError::MultipleDrivers("X".into())));
        let e = parse_netlist("input Y\ninput Z\ngate buf B1 X Y Z\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(matches!(e.kind, FormatErrorKind::Netlist(NetlistError::ArityMismatch { .. })));
        let e = parse_netlist("input I\ngate nand3 G X I I\n").unwrap_err();
        assert!(matches!(e.kind, FormatErrorKind::Netlist(NetlistError::UnknownGateKind(_))));
        let e = parse_netlist("wire X\n").unwrap_err();
        assert!(matches!(e.kind, FormatErrorKind::Syntax(_)));
        let e = parse_netlist("input I\ngate buf B X I Q R\n").unwrap_err();
        assert!(matches!(e.kind, FormatErrorKind::Netlist(NetlistError::ArityMismatch { found: 3, .. })));
    }

    #[test]
    fn delay_grammar() {
        let t = parse_delays("G1 4600000 5800000\ndefault 4000000 4000000 vth=0.5\n").unwrap();
        let p = t.entries["G1"];
        assert_eq!((p.delta_inf_up, p.delta_inf_down), (TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8)));
        assert_eq!(p.delta_pure, TimeAs::ps(1));
        assert_eq!(t.default.unwrap().delta_inf_up, TimeAs::ps(4));
        let e = parse_delays("G1 500000 500000\n").unwrap_err();
        assert!(matches!(e.kind, FormatErrorKind::InvariantViolation(_)));
        let t = parse_delays("G1 500000 500000 dp=0 vth=0.3\n").unwrap();
        assert_eq!(t.entries["G1"].vth, 0.3);
        assert!(parse_delays("G1 1 2 foo=3\n").is_err());
    }

    #[test]
    fn stimulus_grammar() {
        let c = parse_netlist(OR_LOOP).unwrap();
        let s = parse_stimulus("1000000 I 1\n3000000 I 0\n", &c).unwrap();
        assert_eq!(s.edges["I"].len(), 2);
        let e = parse_stimulus("1000000 I 1\n1000000 I 0\n", &c).unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(matches!(e.kind, FormatErrorKind::Stimulus(StimulusError::NonMonotonic { .. })));
        let e = parse_stimulus("1000000 A 1\n", &c).unwrap_err();
        assert!(matches!(e.kind, FormatErrorKind::Stimulus(StimulusError::UnknownInput(_))));
        let e = parse_stimulus("init I 1\n5 I 1\n", &c).unwrap_err();
        assert!(matches!(e.kind, FormatErrorKind::Stimulus(StimulusError::NonAlternating { .. })));
        let s = parse_stimulus(&write_stimulus(&s), &c).unwrap();
        assert_eq!(s.edges["I"][1].time, TimeAs(3_000_000));
    }

    #[test]
    fn vcd_layout() {
        let empty = write_vcd(&Trace::new(), Timescale::Fs);
        assert!(empty.text.ends_with("$dumpvars\n$end\n"));
        let mut t = Trace::new();
        let mut s = SignalTrace::new(Level::Lo);
        s.transitions.push(Transition::new(TimeAs::ps_f64(4.6), Level::Hi));
        t.insert("A", s);
        let v = write_vcd(&t, Timescale::Fs);
        assert!(v.text.contains("$timescale 1fs $end"));
        assert!(v.text.contains("$var wire 1 ! A $end"));
        assert!(v.text.ends_with("#4600\n1!\n"));
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn vcd_nudges_collapsed_edges() {
        let mut t = Trace::new();
        let mut s = SignalTrace::new(Level::Lo);
        s.transitions.push(Transition::new(TimeAs(1_000), Level::Hi));
        s.transitions.push(Transition::new(TimeAs(1_400), Level::Lo));
        t.insert("A", s);
        let v = write_vcd(&t, Timescale::Fs);
        assert!(v.text.ends_with("#1\n1!\n#2\n0!\n"));
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn vcd_ids_are_distinct() {
        let ids: std::collections::HashSet<String> = (0..20_000).map(vcd_id).collect();
        assert_eq!(ids.len(), 20_000);
    }

    #[test]
    fn csv_rows() {
        let pts = [
            SweepPoint { delta_i: TimeAs(5), delta_o: Some(TimeAs(7)) },
            SweepPoint { delta_i: TimeAs(1), delta_o: None },
        ];
        assert_eq!(write_sweep_csv(&pts), "delta_i_as,delta_o_as\n5,7\n1,CANCELLED\n");
        let mut t = Trace::new();
        let mut s = SignalTrace::new(Level::Hi);
        s.transitions.push(Transition::new(TimeAs(9), Level::Lo));
        t.insert("Q", s);
        assert_eq!(write_trace_csv(&t), "signal,time_as,level\nQ,,1\nQ,9,0\n");
        assert_eq!(parse_trace_csv(&write_trace_csv(&t)).unwrap(), t);
    }
}
