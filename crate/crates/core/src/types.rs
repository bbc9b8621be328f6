// SPDX-License-Identifier: Apache-2.0
//! Primitive value types shared by every other module: the attosecond
//! timebase, two-valued logic levels, transitions, per-signal traces and the
//! per-gate channel parameters.

use std::fmt;
use std::ops::{Add, Mul, Neg, Not, Sub};
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

/// Simulation time as a signed count of attoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimeAs(pub i64);

impl TimeAs {
    pub const ZERO: TimeAs = TimeAs(0);
    pub const MAX: TimeAs = TimeAs(i64::MAX);

    pub const AS: i64 = 1;
    pub const FS: i64 = 1_000;
    pub const PS: i64 = 1_000_000;
    pub const NS: i64 = 1_000_000_000;

    pub const fn attos(v: i64) -> TimeAs {
        TimeAs(v)
    }

    pub const fn fs(v: i64) -> TimeAs {
        TimeAs(v * Self::FS)
    }

    pub const fn ps(v: i64) -> TimeAs {
        TimeAs(v * Self::PS)
    }

    pub const fn ns(v: i64) -> TimeAs {
        TimeAs(v * Self::NS)
    }

    /// Picoseconds given as a float, rounded to the nearest attosecond.
    pub fn ps_f64(v: f64) -> TimeAs {
        TimeAs((v * Self::PS as f64).round() as i64)
    }

    pub const fn as_attos(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-18
    }

    pub fn as_ps_f64(self) -> f64 {
        self.0 as f64 / Self::PS as f64
    }

    /// Round a duration in seconds to the nearest attosecond, ties away from zero.
    pub fn from_secs_f64(secs: f64) -> Result<TimeAs, TimeOverflow> {
        let attos = (secs * 1e18).round();
        if !attos.is_finite() || attos >= i64::MAX as f64 || attos <= i64::MIN as f64 {
            return Err(TimeOverflow);
        }
        Ok(TimeAs(attos as i64))
    }

    pub fn checked_add(self, rhs: TimeAs) -> Result<TimeAs, TimeOverflow> {
        self.0.checked_add(rhs.0).map(TimeAs).ok_or(TimeOverflow)
    }

    pub fn checked_sub(self, rhs: TimeAs) -> Result<TimeAs, TimeOverflow> {
        self.0.checked_sub(rhs.0).map(TimeAs).ok_or(TimeOverflow)
    }

    /// Round to a multiple of `unit` attoseconds (nearest, ties away from zero),
    /// returned as a tick count.
    pub fn round_to_ticks(self, unit: i64) -> i64 {
        let q = self.0 / unit;
        let r = self.0 % unit;
        if 2 * r.abs() >= unit {
            q + r.signum()
        } else {
            q
        }
    }
}

/// Event-time arithmetic left the representable range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("attosecond time arithmetic overflowed")]
pub struct TimeOverflow;

impl Add for TimeAs {
    type Output = TimeAs;

    fn add(self, rhs: TimeAs) -> TimeAs {
        self.checked_add(rhs).expect("attosecond time overflow")
    }
}

impl Sub for TimeAs {
    type Output = TimeAs;

    fn sub(self, rhs: TimeAs) -> TimeAs {
        self.checked_sub(rhs).expect("attosecond time overflow")
    }
}

impl Mul<i64> for TimeAs {
    type Output = TimeAs;

    fn mul(self, rhs: i64) -> TimeAs {
        TimeAs(self.0.checked_mul(rhs).expect("attosecond time overflow"))
    }
}

impl Neg for TimeAs {
    type Output = TimeAs;

    fn neg(self) -> TimeAs {
        TimeAs(self.0.checked_neg().expect("attosecond time overflow"))
    }
}

impl fmt::Display for TimeAs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}as", self.0)
    }
}

/// Parses `4600000`, `4600000as`, `4.6ps`, `1fs`, `2ns`.
impl FromStr for TimeAs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, scale) = if let Some(n) = s.strip_suffix("as") {
            (n, 1.0)
        } else if let Some(n) = s.strip_suffix("fs") {
            (n, 1e3)
        } else if let Some(n) = s.strip_suffix("ps") {
            (n, 1e6)
        } else if let Some(n) = s.strip_suffix("ns") {
            (n, 1e9)
        } else {
            (s, 1.0)
        };
        if scale == 1.0 {
            if let Ok(v) = num.parse::<i64>() {
                return Ok(TimeAs(v));
            }
        }
        let v: f64 = num.parse().map_err(|_| format!("invalid time literal `{s}`"))?;
        let attos = (v * scale).round();
        if !attos.is_finite() || attos.abs() >= i64::MAX as f64 {
            return Err(format!("time literal `{s}` out of range"));
        }
        Ok(TimeAs(attos as i64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Lo,
    Hi,
}

impl Level {
    pub fn from_bool(b: bool) -> Level {
        if b {
            Level::Hi
        } else {
            Level::Lo
        }
    }

    pub fn is_hi(self) -> bool {
        self == Level::Hi
    }

    pub fn as_char(self) -> char {
        match self {
            Level::Lo => '0',
            Level::Hi => '1',
        }
    }

    /// Analog value of a settled level as a fraction of the supply.
    pub fn as_fraction(self) -> f64 {
        match self {
            Level::Lo => 0.0,
            Level::Hi => 1.0,
        }
    }
}

impl Not for Level {
    type Output = Level;

    fn not(self) -> Level {
        match self {
            Level::Lo => Level::Hi,
            Level::Hi => Level::Lo,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Lo => "LO",
            Level::Hi => "HI",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" | "LO" | "lo" => Ok(Level::Lo),
            "1" | "HI" | "hi" => Ok(Level::Hi),
            _ => Err(format!("invalid logic level `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub time: TimeAs,
    pub level: Level,
}

impl Transition {
    pub fn new(time: TimeAs, level: Level) -> Self {
        Transition { time, level }
    }
}

/// Waveform of a single signal: its level before the first transition and
/// the transitions themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalTrace {
    pub initial: Level,
    pub transitions: Vec<Transition>,
}

impl SignalTrace {
    pub fn new(initial: Level) -> Self {
        SignalTrace {
            initial,
            transitions: Vec::new(),
        }
    }

    pub fn final_level(&self) -> Level {
        self.transitions.last().map_or(self.initial, |t| t.level)
    }

    pub fn level_at(&self, t: TimeAs) -> Level {
        let idx = self.transitions.partition_point(|tr| tr.time <= t);
        if idx == 0 {
            self.initial
        } else {
            self.transitions[idx - 1].level
        }
    }

    pub fn first_time(&self) -> Option<TimeAs> {
        self.transitions.first().map(|t| t.time)
    }
}

/// Digital waveforms of a set of named signals, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub signals: IndexMap<String, SignalTrace>,
    /// Set when the producing simulation hit its event cap or still had
    /// events pending at its horizon; the trace ends mid-activity.
    pub truncated: bool,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn signal(&self, name: &str) -> Option<&SignalTrace> {
        self.signals.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, signal: SignalTrace) {
        self.signals.insert(name.into(), signal);
    }

    pub fn transition_count(&self) -> usize {
        self.signals.values().map(|s| s.transitions.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceViolation {
    #[error("signal `{signal}`: non-increasing time at transition {index}")]
    NonIncreasingTime { signal: String, index: usize },
    #[error("signal `{signal}`: non-alternating level at transition {index}")]
    NonAlternating { signal: String, index: usize },
}

/// Check every signal for strictly increasing times and strictly alternating
/// levels; reports the first violation found in declaration order.
pub fn validate_trace(trace: &Trace) -> Result<(), TraceViolation> {
    for (name, sig) in &trace.signals {
        validate_signal(name, sig)?;
    }
    Ok(())
}

pub fn validate_signal(name: &str, sig: &SignalTrace) -> Result<(), TraceViolation> {
    let mut level = sig.initial;
    let mut last: Option<TimeAs> = None;
    for (index, tr) in sig.transitions.iter().enumerate() {
        if last.is_some_and(|l| tr.time <= l) {
            return Err(TraceViolation::NonIncreasingTime {
                signal: name.to_string(),
                index,
            });
        }
        if tr.level == level {
            return Err(TraceViolation::NonAlternating {
                signal: name.to_string(),
                index,
            });
        }
        level = tr.level;
        last = Some(tr.time);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DelayModel {
    Pure,
    Inertial,
    IdmExp,
}

impl DelayModel {
    pub const ALL: [DelayModel; 3] = [DelayModel::Pure, DelayModel::Inertial, DelayModel::IdmExp];

    pub fn name(self) -> &'static str {
        match self {
            DelayModel::Pure => "pure",
            DelayModel::Inertial => "inertial",
            DelayModel::IdmExp => "idm",
        }
    }
}

impl fmt::Display for DelayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DelayModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pure" => Ok(DelayModel::Pure),
            "inertial" | "ine" => Ok(DelayModel::Inertial),
            "idm" | "idm_exp" | "exp" => Ok(DelayModel::IdmExp),
            _ => Err(format!("unknown delay model `{s}` (expected pure, inertial or idm)")),
        }
    }
}

/// Static delays and switching threshold of one gate output channel.
///
/// `delta_inf_up`/`delta_inf_down` are the total rising/falling delays; the
/// pure-delay stage `delta_pure` is part of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub delta_inf_up: TimeAs,
    pub delta_inf_down: TimeAs,
    pub delta_pure: TimeAs,
    /// Threshold as a fraction of the supply voltage.
    pub vth: f64,
    pub model: DelayModel,
}

pub const DEFAULT_PURE_DELAY: TimeAs = TimeAs::ps(1);
pub const DEFAULT_VTH: f64 = 0.5;

impl ChannelParams {
    /// IDM channel with the default 1 ps pure delay and a mid-supply threshold.
    pub fn new(delta_inf_up: TimeAs, delta_inf_down: TimeAs) -> Self {
        ChannelParams {
            delta_inf_up,
            delta_inf_down,
            delta_pure: DEFAULT_PURE_DELAY,
            vth: DEFAULT_VTH,
            model: DelayModel::IdmExp,
        }
    }

    pub fn symmetric(delta_inf: TimeAs) -> Self {
        Self::new(delta_inf, delta_inf)
    }

    pub fn with_pure(mut self, delta_pure: TimeAs) -> Self {
        self.delta_pure = delta_pure;
        self
    }

    pub fn with_vth(mut self, vth: f64) -> Self {
        self.vth = vth;
        self
    }

    pub fn with_model(mut self, model: DelayModel) -> Self {
        self.model = model;
        self
    }

    pub fn delta_inf(&self, level: Level) -> TimeAs {
        match level {
            Level::Hi => self.delta_inf_up,
            Level::Lo => self.delta_inf_down,
        }
    }

    /// Channel part of the rising delay, after the pure-delay stage.
    pub fn channel_up(&self) -> TimeAs {
        self.delta_inf_up - self.delta_pure
    }

    pub fn channel_down(&self) -> TimeAs {
        self.delta_inf_down - self.delta_pure
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.delta_pure < TimeAs::ZERO {
            return Err(ParamError::NegativePureDelay(self.delta_pure));
        }
        if self.delta_inf_up <= self.delta_pure || self.delta_inf_down <= self.delta_pure {
            return Err(ParamError::DelayNotAbovePure {
                up: self.delta_inf_up,
                down: self.delta_inf_down,
                pure: self.delta_pure,
            });
        }
        if !(self.vth > 0.0 && self.vth < 1.0) {
            return Err(ParamError::Threshold(self.vth));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("pure delay {0} is negative")]
    NegativePureDelay(TimeAs),
    #[error("static delays (up {up}, down {down}) must exceed the pure delay {pure}")]
    DelayNotAbovePure { up: TimeAs, down: TimeAs, pure: TimeAs },
    #[error("threshold {0} is not inside (0, 1)")]
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// LO-HI-LO
    Up,
    /// HI-LO-HI
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pulse {
    pub start: TimeAs,
    pub width: TimeAs,
    pub polarity: Polarity,
}

/// Pair up consecutive transitions of one signal into pulses. A trailing
/// unmatched transition yields no pulse.
pub fn pulses_of(transitions: &[Transition], initial: Level) -> Vec<Pulse> {
    let _ = initial;
    transitions
        .chunks_exact(2)
        .map(|pair| Pulse {
            start: pair[0].time,
            width: pair[1].time - pair[0].time,
            polarity: if pair[0].level.is_hi() {
                Polarity::Up
            } else {
                Polarity::Down
            },
        })
        .collect()
}

/// Inverse of [`pulses_of`] for traces with an even number of transitions.
pub fn transitions_of(pulses: &[Pulse]) -> Vec<Transition> {
    pulses
        .iter()
        .flat_map(|p| {
            let (lead, trail) = match p.polarity {
                Polarity::Up => (Level::Hi, Level::Lo),
                Polarity::Down => (Level::Lo, Level::Hi),
            };
            [
                Transition::new(p.start, lead),
                Transition::new(p.start + p.width, trail),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(initial: Level, trs: &[(i64, Level)]) -> SignalTrace {
        SignalTrace {
            initial,
            transitions: trs
                .iter()
                .map(|&(t, l)| Transition::new(TimeAs::ps(t), l))
                .collect(),
        }
    }

    #[test]
    fn validate_accepts_alternating() {
        let mut tr = Trace::new();
        tr.insert("a", sig(Level::Lo, &[(1, Level::Hi), (2, Level::Lo)]));
        assert_eq!(validate_trace(&tr), Ok(()));
    }

    #[test]
    fn validate_rejects_equal_times() {
        let mut tr = Trace::new();
        tr.insert("a", sig(Level::Lo, &[(1, Level::Hi), (1, Level::Lo)]));
        assert!(matches!(
            validate_trace(&tr),
            Err(TraceViolation::NonIncreasingTime { index: 1, .. })
        ));
    }

    #[test]
    fn validate_rejects_repeated_level() {
        let mut tr = Trace::new();
        tr.insert("a", sig(Level::Lo, &[(1, Level::Hi), (2, Level::Hi)]));
        assert!(matches!(
            validate_trace(&tr),
            Err(TraceViolation::NonAlternating { index: 1, .. })
        ));
        // the first transition must also differ from the initial level
        let mut tr = Trace::new();
        tr.insert("b", sig(Level::Hi, &[(1, Level::Hi)]));
        assert!(matches!(
            validate_trace(&tr),
            Err(TraceViolation::NonAlternating { index: 0, .. })
        ));
    }

    #[test]
    fn pulses_up_down_and_unmatched() {
        let s = sig(Level::Lo, &[(1, Level::Hi), (3, Level::Lo)]);
        assert_eq!(
            pulses_of(&s.transitions, s.initial),
            vec![Pulse {
                start: TimeAs::ps(1),
                width: TimeAs::ps(2),
                polarity: Polarity::Up
            }]
        );
        let s = sig(Level::Hi, &[(1, Level::Lo), (6, Level::Hi)]);
        let p = pulses_of(&s.transitions, s.initial);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].polarity, Polarity::Down);
        assert_eq!(p[0].width, TimeAs::ps(5));
        let s = sig(Level::Lo, &[(1, Level::Hi)]);
        assert!(pulses_of(&s.transitions, s.initial).is_empty());
    }

    #[test]
    fn time_literals() {
        assert_eq!("4.6ps".parse::<TimeAs>().unwrap(), TimeAs(4_600_000));
        assert_eq!("1fs".parse::<TimeAs>().unwrap(), TimeAs(1000));
        assert_eq!("17".parse::<TimeAs>().unwrap(), TimeAs(17));
        assert_eq!("3as".parse::<TimeAs>().unwrap(), TimeAs(3));
        assert!("x".parse::<TimeAs>().is_err());
    }

    #[test]
    fn tick_rounding_ties_away_from_zero() {
        assert_eq!(TimeAs(1500).round_to_ticks(1000), 2);
        assert_eq!(TimeAs(1499).round_to_ticks(1000), 1);
        assert_eq!(TimeAs(-1500).round_to_ticks(1000), -2);
        assert_eq!(TimeAs(4_600_000).round_to_ticks(1000), 4600);
    }

    #[test]
    fn overflow_is_an_error() {
        assert_eq!(TimeAs::MAX.checked_add(TimeAs(1)), Err(TimeOverflow));
        assert!(TimeAs::from_secs_f64(1e3).is_err());
        assert_eq!(TimeAs::from_secs_f64(4.6e-12), Ok(TimeAs(4_600_000)));
    }

    #[test]
    fn param_validation() {
        assert!(ChannelParams::new(TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8))
            .validate()
            .is_ok());
        assert!(ChannelParams::symmetric(TimeAs::fs(500)).validate().is_err());
        assert!(ChannelParams::symmetric(TimeAs::ps(4))
            .with_vth(1.0)
            .validate()
            .is_err());
        assert!(ChannelParams::symmetric(TimeAs::ps(4))
            .with_pure(TimeAs(-1))
            .validate()
            .is_err());
    }

    #[test]
    fn level_negation_is_involution() {
        for l in [Level::Lo, Level::Hi] {
            assert_eq!(!!l, l);
            assert_ne!(!l, l);
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_signal() -> impl Strategy<Value = SignalTrace> {
        (any::<bool>(), prop::collection::vec(1i64..1_000_000, 0..40)).prop_map(|(hi, gaps)| {
            let mut level = Level::from_bool(hi);
            let initial = level;
            let mut t = 0i64;
            let transitions = gaps
                .into_iter()
                .map(|g| {
                    t += g;
                    level = !level;
                    Transition::new(TimeAs(t), level)
                })
                .collect();
            SignalTrace {
                initial,
                transitions,
            }
        })
    }

    proptest! {
        #[test]
        fn pulses_count_widths_and_round_trip(s in arb_signal()) {
            prop_assert!(validate_signal("s", &s).is_ok());
            let pulses = pulses_of(&s.transitions, s.initial);
            prop_assert_eq!(pulses.len(), s.transitions.len() / 2);
            prop_assert!(pulses.iter().all(|p| p.width > TimeAs::ZERO));
            let even = &s.transitions[..s.transitions.len() / 2 * 2];
            prop_assert_eq!(transitions_of(&pulses), even.to_vec());
        }
    }
}
