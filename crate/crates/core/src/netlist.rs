// SPDX-License-Identifier: Apache-2.0
//! Circuits: a gate library of two-valued boolean functions, the circuit
//! graph with one delay channel per gate output, and generators for the
//! OR loop, the SR latch, the ripple-carry adder and a few bench shapes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

use crate::types::{ChannelParams, Level, TimeAs};

pub type SignalId = usize;
pub type GateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Buf,
    Inv,
    And2,
    Or2,
    Nand2,
    Nor2,
    Xor2,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::Buf,
        GateKind::Inv,
        GateKind::And2,
        GateKind::Or2,
        GateKind::Nand2,
        GateKind::Nor2,
        GateKind::Xor2,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Buf | GateKind::Inv => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Buf => "buf",
            GateKind::Inv => "inv",
            GateKind::And2 => "and2",
            GateKind::Or2 => "or2",
            GateKind::Nand2 => "nand2",
            GateKind::Nor2 => "nor2",
            GateKind::Xor2 => "xor2",
        }
    }

    /// Output for the given input levels; the slice length must equal the arity.
    pub fn eval(self, inputs: &[Level]) -> Level {
        debug_assert_eq!(inputs.len(), self.arity());
        let a = inputs[0].is_hi();
        let b = || inputs[1].is_hi();
        Level::from_bool(match self {
            GateKind::Buf => a,
            GateKind::Inv => !a,
            GateKind::And2 => a && b(),
            GateKind::Or2 => a || b(),
            GateKind::Nand2 => !(a && b()),
            GateKind::Nor2 => !(a || b()),
            GateKind::Xor2 => a != b(),
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = NetlistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == lower || k.name().trim_end_matches('2') == lower)
            .ok_or_else(|| NetlistError::UnknownGateKind(s.to_string()))
    }
}

/// Boolean function of `kind` applied to `levels`, checking the arity.
pub fn evaluate_gate(kind: GateKind, levels: &[Level]) -> Result<Level, NetlistError> {
    if levels.len() != kind.arity() {
        return Err(NetlistError::ArityMismatch {
            gate: kind.name().to_string(),
            expected: kind.arity(),
            found: levels.len(),
        });
    }
    Ok(kind.eval(levels))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetlistError {
    #[error("unknown gate kind `{0}`")]
    UnknownGateKind(String),
    #[error("signal `{0}` has more than one driver")]
    MultipleDrivers(String),
    #[error("gate `{gate}` expects {expected} inputs, got {found}")]
    ArityMismatch {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("signal `{0}` has no driver and is not a primary input")]
    Undriven(String),
    #[error("primary input `{0}` is driven by a gate")]
    DrivenInput(String),
    #[error("duplicate gate name `{0}`")]
    DuplicateGate(String),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("no delay annotation for gate `{0}` and no default")]
    MissingDelay(String),
    #[error("delay annotation names unknown gate `{0}`")]
    UnknownInstance(String),
    #[error("circuit has no consistent initial state for the given input levels")]
    NoSteadyState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub name: String,
    /// Explicit initial level; otherwise derived by relaxation at start-up.
    pub init: Option<Level>,
    pub driver: Option<GateId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<SignalId>,
    pub output: SignalId,
    pub params: ChannelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    signals: Vec<Signal>,
    index: HashMap<String, SignalId>,
    gates: Vec<Gate>,
    inputs: Vec<SignalId>,
    outputs: Vec<SignalId>,
    fanout: Vec<Vec<GateId>>,
}

impl Circuit {
    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gates_mut(&mut self) -> &mut [Gate] {
        &mut self.gates
    }

    pub fn inputs(&self) -> &[SignalId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SignalId] {
        &self.outputs
    }

    /// Gates reading signal `s`, without duplicates.
    pub fn fanout(&self, s: SignalId) -> &[GateId] {
        &self.fanout[s]
    }

    pub fn signal_id(&self, name: &str) -> Option<SignalId> {
        self.index.get(name).copied()
    }

    pub fn signal_name(&self, s: SignalId) -> &str {
        &self.signals[s].name
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn is_input(&self, s: SignalId) -> bool {
        self.signals[s].driver.is_none()
    }

    /// Replace every gate's channel parameters from a delay table.
    pub fn annotate(&mut self, table: &DelayTable) -> Result<(), NetlistError> {
        for name in table.entries.keys() {
            if self.gate(name).is_none() {
                return Err(NetlistError::UnknownInstance(name.clone()));
            }
        }
        for g in &mut self.gates {
            g.params = match (table.entries.get(&g.name), table.default) {
                (Some(p), _) => *p,
                (None, Some(p)) => p,
                (None, None) => return Err(NetlistError::MissingDelay(g.name.clone())),
            };
        }
        Ok(())
    }

    /// Consistent initial level of every signal.
    ///
    /// Primary inputs take `input_levels` (falling back to their `init` or LO);
    /// other signals start from their `init` hint or LO and are relaxed in gate
    /// order until every gate output agrees with its function.
    pub fn settle(&self, input_levels: &HashMap<SignalId, Level>) -> Result<Vec<Level>, NetlistError> {
        let mut levels: Vec<Level> = self
            .signals
            .iter()
            .enumerate()
            .map(|(i, s)| {
                input_levels
                    .get(&i)
                    .copied()
                    .or(s.init)
                    .unwrap_or(Level::Lo)
            })
            .collect();
        let mut scratch = Vec::with_capacity(2);
        for _ in 0..=4 * self.gates.len() + 1 {
            let mut changed = false;
            for g in &self.gates {
                scratch.clear();
                scratch.extend(g.inputs.iter().map(|&s| levels[s]));
                let v = g.kind.eval(&scratch);
                if levels[g.output] != v {
                    levels[g.output] = v;
                    changed = true;
                }
            }
            if !changed {
                return Ok(levels);
            }
        }
        Err(NetlistError::NoSteadyState)
    }
}

/// Incremental circuit construction; signals are declared on first use.
#[derive(Debug, Clone, Default)]
pub struct CircuitBuilder {
    signals: Vec<Signal>,
    index: HashMap<String, SignalId>,
    gates: Vec<Gate>,
    gate_names: HashMap<String, GateId>,
    inputs: Vec<SignalId>,
    outputs: Vec<SignalId>,
    error: Option<NetlistError>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn signal(&mut self, name: &str) -> SignalId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.signals.len();
        self.signals.push(Signal {
            name: name.to_string(),
            init: None,
            driver: None,
        });
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn input(&mut self, name: &str) -> &mut Self {
        let id = self.signal(name);
        if !self.inputs.contains(&id) {
            self.inputs.push(id);
        }
        self
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        let id = self.signal(name);
        if !self.outputs.contains(&id) {
            self.outputs.push(id);
        }
        self
    }

    pub fn init(&mut self, name: &str, level: Level) -> &mut Self {
        let id = self.signal(name);
        self.signals[id].init = Some(level);
        self
    }

    /// Add a gate; errors are reported by [`CircuitBuilder::try_gate`] or at
    /// [`CircuitBuilder::build`].
    pub fn gate(
        &mut self,
        kind: GateKind,
        name: &str,
        output: &str,
        inputs: &[&str],
        params: ChannelParams,
    ) -> &mut Self {
        if let Err(e) = self.try_gate(kind, name, output, inputs, params) {
            self.error.get_or_insert(e);
        }
        self
    }

    pub fn try_gate(
        &mut self,
        kind: GateKind,
        name: &str,
        output: &str,
        inputs: &[&str],
        params: ChannelParams,
    ) -> Result<GateId, NetlistError> {
        if inputs.len() != kind.arity() {
            return Err(NetlistError::ArityMismatch {
                gate: name.to_string(),
                expected: kind.arity(),
                found: inputs.len(),
            });
        }
        if self.gate_names.contains_key(name) {
            return Err(NetlistError::DuplicateGate(name.to_string()));
        }
        let out = self.signal(output);
        if self.signals[out].driver.is_some() {
            return Err(NetlistError::MultipleDrivers(output.to_string()));
        }
        let ins = inputs.iter().map(|s| self.signal(s)).collect();
        let id = self.gates.len();
        self.signals[out].driver = Some(id);
        self.gates.push(Gate {
            name: name.to_string(),
            kind,
            inputs: ins,
            output: out,
            params,
        });
        self.gate_names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn build(self) -> Result<Circuit, NetlistError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        for &i in &self.inputs {
            if self.signals[i].driver.is_some() {
                return Err(NetlistError::DrivenInput(self.signals[i].name.clone()));
            }
        }
        for (i, s) in self.signals.iter().enumerate() {
            if s.driver.is_none() && !self.inputs.contains(&i) {
                return Err(NetlistError::Undriven(s.name.clone()));
            }
        }
        let mut fanout = vec![Vec::new(); self.signals.len()];
        for (gi, g) in self.gates.iter().enumerate() {
            for &s in &g.inputs {
                let list: &mut Vec<GateId> = &mut fanout[s];
                if !list.contains(&gi) {
                    list.push(gi);
                }
            }
        }
        Ok(Circuit {
            signals: self.signals,
            index: self.index,
            gates: self.gates,
            inputs: self.inputs,
            outputs: self.outputs,
            fanout,
        })
    }
}

/// Per-instance channel parameters with an optional fallback.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DelayTable {
    pub default: Option<ChannelParams>,
    pub entries: IndexMap<String, ChannelParams>,
}

/// Boundary buffers placed in front of every primary input and behind every
/// primary output, standing in for the surroundings of an on-chip block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shaping {
    pub enabled: bool,
    pub input: ChannelParams,
    pub output: ChannelParams,
}

impl Shaping {
    pub fn off() -> Self {
        Shaping {
            enabled: false,
            ..Shaping::with_delays(TimeAs::ps(10), TimeAs::ps(10))
        }
    }

    pub fn with_delays(input: TimeAs, output: TimeAs) -> Self {
        Shaping {
            enabled: true,
            input: ChannelParams::symmetric(input),
            output: ChannelParams::symmetric(output),
        }
    }
}

/// Name of the net behind the shaping buffer of primary input `name`.
pub fn shaped_input(name: &str) -> String {
    format!("{name}_sh")
}

/// Name of the primary output behind the shaping buffer of node `name`.
pub fn shaped_output(name: &str) -> String {
    format!("{name}_out")
}

/// Declares primary inputs and outputs, inserting shaping buffers when enabled.
struct Boundary<'a> {
    b: &'a mut CircuitBuilder,
    shaping: Shaping,
}

impl Boundary<'_> {
    /// Declare a primary input; returns the net the core logic should read.
    fn input(&mut self, name: &str) -> String {
        self.b.input(name);
        if !self.shaping.enabled {
            return name.to_string();
        }
        let inner = shaped_input(name);
        self.b.gate(
            GateKind::Buf,
            &format!("shape_{name}"),
            &inner,
            &[name],
            self.shaping.input,
        );
        inner
    }

    fn output(&mut self, name: &str) {
        if !self.shaping.enabled {
            self.b.output(name);
            return;
        }
        let outer = shaped_output(name);
        self.b.gate(
            GateKind::Buf,
            &format!("shape_{name}"),
            &outer,
            &[name],
            self.shaping.output,
        );
        self.b.output(&outer);
    }
}

/// Channel parameters of the OR loop by role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrLoopParams {
    pub or_gate: ChannelParams,
    /// Buffer from A to the heavily loaded node B.
    pub a_to_b: ChannelParams,
    pub output: ChannelParams,
    pub feedback: ChannelParams,
    pub shaping: Shaping,
}

impl Default for OrLoopParams {
    fn default() -> Self {
        OrLoopParams {
            or_gate: ChannelParams::new(TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8)),
            a_to_b: ChannelParams::new(TimeAs::ps(20), TimeAs::ps(24)),
            output: ChannelParams::symmetric(TimeAs::ps(3)),
            feedback: ChannelParams::symmetric(TimeAs::ps(3)),
            shaping: Shaping::with_delays(TimeAs::ps(150), TimeAs::ps(3)),
        }
    }
}

/// OR gate `or` driving A from input I and the end of a chain of `n`
/// feedback buffers FB0..FB{n-1} (A itself when `n == 0`); `ab` buffers A
/// onto B and `ob` buffers B onto the output O.
pub fn build_or_loop(n: usize, p: &OrLoopParams) -> Result<Circuit, NetlistError> {
    let mut b = CircuitBuilder::new();
    let mut io = Boundary {
        b: &mut b,
        shaping: p.shaping,
    };
    let i = io.input("I");
    let fb_end = if n == 0 {
        "A".to_string()
    } else {
        format!("FB{}", n - 1)
    };
    io.b.gate(GateKind::Or2, "or", "A", &[&i, &fb_end], p.or_gate);
    io.b.gate(GateKind::Buf, "ab", "B", &["A"], p.a_to_b);
    io.b.gate(GateKind::Buf, "ob", "O", &["B"], p.output);
    for k in 0..n {
        let src = if k == 0 {
            "A".to_string()
        } else {
            format!("FB{}", k - 1)
        };
        io.b.gate(
            GateKind::Buf,
            &format!("fb{k}"),
            &format!("FB{k}"),
            &[&src],
            p.feedback,
        );
    }
    io.output("O");
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrLatchParams {
    pub nor: ChannelParams,
    pub coupling: ChannelParams,
    pub output: ChannelParams,
    pub shaping: Shaping,
}

impl Default for SrLatchParams {
    fn default() -> Self {
        SrLatchParams {
            nor: ChannelParams::new(TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8)),
            coupling: ChannelParams::symmetric(TimeAs::ps(2)),
            output: ChannelParams::symmetric(TimeAs::ps(3)),
            shaping: Shaping::with_delays(TimeAs::ps(30), TimeAs::ps(3)),
        }
    }
}

/// Cross-coupled NOR latch: `nor_u` drives U from S and the coupled T,
/// `nor_t` drives T from R and the coupled U; Q follows T and QN follows U.
/// Starts in the reset state (U HI, T LO).
pub fn build_sr_latch(p: &SrLatchParams) -> Result<Circuit, NetlistError> {
    let mut b = CircuitBuilder::new();
    let mut io = Boundary {
        b: &mut b,
        shaping: p.shaping,
    };
    let s = io.input("S");
    let r = io.input("R");
    io.b.gate(GateKind::Nor2, "nor_u", "U", &[&s, "TC"], p.nor);
    io.b.gate(GateKind::Nor2, "nor_t", "T", &[&r, "UC"], p.nor);
    io.b.gate(GateKind::Buf, "cb_t", "TC", &["T"], p.coupling);
    io.b.gate(GateKind::Buf, "cb_u", "UC", &["U"], p.coupling);
    io.b.gate(GateKind::Buf, "ob_q", "Q", &["T"], p.output);
    io.b.gate(GateKind::Buf, "ob_qn", "QN", &["U"], p.output);
    io.output("Q");
    io.output("QN");
    for (net, l) in [("U", Level::Hi), ("UC", Level::Hi), ("QN", Level::Hi)] {
        b.init(net, l);
    }
    for net in ["T", "TC", "Q"] {
        b.init(net, Level::Lo);
    }
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdderParams {
    pub xor: ChannelParams,
    pub and: ChannelParams,
    pub or: ChannelParams,
    pub shaping: Shaping,
}

impl Default for AdderParams {
    fn default() -> Self {
        AdderParams {
            xor: ChannelParams::new(TimeAs::ps(30), TimeAs::ps(3)),
            and: ChannelParams::symmetric(TimeAs::ps(5)),
            or: ChannelParams::symmetric(TimeAs::ps(3)),
            shaping: Shaping::with_delays(TimeAs::ps(3), TimeAs::ps(3)),
        }
    }
}

/// `n`-bit ripple-carry adder over inputs A0.., B0.. and a carry-in CIN that
/// stays LO. Full adder `i` is made of `fa{i}_x1` (X = A ^ B), `fa{i}_s`
/// (S = X ^ C), `fa{i}_n1` (P = C & X), `fa{i}_n2` (G = A & B) and `fa{i}_c`
/// (carry = P | G). Carries are C1..; the final carry is the output S{n}.
pub fn build_adder(n: usize, p: &AdderParams) -> Result<Circuit, NetlistError> {
    assert!(n >= 1, "adder needs at least one bit");
    let mut b = CircuitBuilder::new();
    let mut io = Boundary {
        b: &mut b,
        shaping: p.shaping,
    };
    let a: Vec<String> = (0..n).map(|i| io.input(&format!("A{i}"))).collect();
    let bb: Vec<String> = (0..n).map(|i| io.input(&format!("B{i}"))).collect();
    io.b.input("CIN");
    io.b.init("CIN", Level::Lo);
    let mut carry = "CIN".to_string();
    for i in 0..n {
        let (x, pp, g, s) = (
            format!("X{i}"),
            format!("P{i}"),
            format!("G{i}"),
            format!("S{i}"),
        );
        let next = if i + 1 == n {
            format!("S{n}")
        } else {
            format!("C{}", i + 1)
        };
        io.b.gate(GateKind::Xor2, &format!("fa{i}_x1"), &x, &[&a[i], &bb[i]], p.xor);
        io.b.gate(GateKind::Xor2, &format!("fa{i}_s"), &s, &[&x, &carry], p.xor);
        io.b.gate(GateKind::And2, &format!("fa{i}_n1"), &pp, &[&carry, &x], p.and);
        io.b.gate(GateKind::And2, &format!("fa{i}_n2"), &g, &[&a[i], &bb[i]], p.and);
        io.b.gate(GateKind::Or2, &format!("fa{i}_c"), &next, &[&pp, &g], p.or);
        carry = next;
    }
    for i in 0..=n {
        io.output(&format!("S{i}"));
    }
    b.build()
}

/// A single buffer from input I to output O.
pub fn build_buffer(params: ChannelParams) -> Result<Circuit, NetlistError> {
    let mut b = CircuitBuilder::new();
    b.input("I")
        .output("O")
        .gate(GateKind::Buf, "buf", "O", &["I"], params);
    b.build()
}

/// Inverter counts of the generated clock tree.
pub const CLOCK_TREE_INVERTERS: usize = 227;
pub const CLOCK_TREE_SINKS: usize = 123;

/// Inverter tree from CK: internal inverters `ck_n{k}` drive nets N{k}
/// breadth-first with fan-out two, and leaf inverters `ck_l{j}` drive the
/// outputs CK_L{j}.
pub fn build_clock_tree(params: ChannelParams) -> Result<Circuit, NetlistError> {
    let internal = CLOCK_TREE_INVERTERS - CLOCK_TREE_SINKS;
    let mut b = CircuitBuilder::new();
    b.input("CK");
    for k in 0..internal {
        let src = if k == 0 {
            "CK".to_string()
        } else {
            format!("N{}", (k - 1) / 2)
        };
        b.gate(
            GateKind::Inv,
            &format!("ck_n{k}"),
            &format!("N{k}"),
            &[&src],
            params,
        );
    }
    // leaves hang off the nets that have no internal children, in order
    let mut parents = Vec::new();
    for k in 0..internal {
        let children = (2 * k + 1..=2 * k + 2).filter(|&c| c < internal).count();
        parents.extend(std::iter::repeat_n(k, 2 - children));
    }
    for j in 0..CLOCK_TREE_SINKS {
        let parent = parents[j % parents.len()];
        let out = format!("CK_L{j}");
        b.gate(
            GateKind::Inv,
            &format!("ck_l{j}"),
            &out,
            &[&format!("N{parent}")],
            params,
        );
        b.output(&out);
    }
    b.build()
}

/// `count` disjoint copies of `circuit`; copy `k` prefixes every signal and
/// gate name with `u{k}.`.
pub fn replicate(circuit: &Circuit, count: usize) -> Result<Circuit, NetlistError> {
    let mut b = CircuitBuilder::new();
    for k in 0..count {
        let name = |s: &str| format!("u{k}.{s}");
        for &i in circuit.inputs() {
            b.input(&name(circuit.signal_name(i)));
        }
        for s in circuit.signals() {
            if let Some(l) = s.init {
                b.init(&name(&s.name), l);
            }
        }
        for g in circuit.gates() {
            let ins: Vec<String> = g
                .inputs
                .iter()
                .map(|&s| name(circuit.signal_name(s)))
                .collect();
            let ins: Vec<&str> = ins.iter().map(String::as_str).collect();
            b.try_gate(
                g.kind,
                &name(&g.name),
                &name(circuit.signal_name(g.output)),
                &ins,
                g.params,
            )?;
        }
        for &o in circuit.outputs() {
            b.output(&name(circuit.signal_name(o)));
        }
    }
    b.build()
}
