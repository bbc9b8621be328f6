// SPDX-License-Identifier: Apache-2.0
//! Trace analytics: pulse trains of oscillating nodes and their
//! classification, critical-width bisection, causal ordering and pulse-width
//! degradation along a chain of signals.

use std::fmt;

use thiserror::Error;

use crate::types::{pulses_of, ChannelParams, Level, TimeAs, Trace};

/// HI time and the following LO time of one oscillation period. The LO time
/// is absent for the last period when the node stays LO.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainEntry {
    pub hi: TimeAs,
    pub lo: Option<TimeAs>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PulseTrain {
    pub node: String,
    pub entries: Vec<TrainEntry>,
    /// The producing run stopped while activity was still ongoing.
    pub truncated: bool,
    pub final_level: Level,
    pub transitions: usize,
    pub last_transition: Option<TimeAs>,
}

impl PulseTrain {
    pub fn hi_times(&self) -> Vec<TimeAs> {
        self.entries.iter().map(|e| e.hi).collect()
    }

    pub fn lo_times(&self) -> Vec<TimeAs> {
        self.entries.iter().filter_map(|e| e.lo).collect()
    }
}

/// Periods of `signal` starting at its first rising transition, or `None` if
/// the trace does not contain the signal.
pub fn extract_pulse_train(trace: &Trace, signal: &str) -> Option<PulseTrain> {
    let sig = trace.signal(signal)?;
    let tr = &sig.transitions;
    let first_rise = tr.iter().position(|t| t.level == Level::Hi);
    let mut entries = Vec::new();
    if let Some(start) = first_rise {
        let mut k = start;
        while k + 1 < tr.len() {
            let hi = tr[k + 1].time - tr[k].time;
            let lo = tr.get(k + 2).map(|r| r.time - tr[k + 1].time);
            entries.push(TrainEntry { hi, lo });
            k += 2;
        }
    }
    Some(PulseTrain {
        node: signal.to_string(),
        entries,
        truncated: trace.truncated,
        final_level: sig.final_level(),
        transitions: tr.len(),
        last_transition: tr.last().map(|t| t.time),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Growing,
    Decaying,
    Sustained,
    SettledHi,
    SettledLo,
    None,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Growing => "GROWING",
            VerdictKind::Decaying => "DECAYING",
            VerdictKind::Sustained => "SUSTAINED",
            VerdictKind::SettledHi => "SETTLED_HI",
            VerdictKind::SettledLo => "SETTLED_LO",
            VerdictKind::None => "NONE",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Verdict on a pulse train.
///
/// A digital pulse train alone cannot tell a real oscillation from an
/// oscillation around an intermediate voltage; whether a train is reported at
/// all also depends on the threshold. `metastability_suspect` only applies the
/// damping rule of thumb against the static delays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OscillationVerdict {
    pub kind: VerdictKind,
    pub metastability_suspect: bool,
    /// Time of the last transition when the node came to rest.
    pub resolution_time: Option<TimeAs>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Entries inspected for a growing or decaying trend.
    pub trend: usize,
    /// Entries inspected for a sustained train and for the damping rule.
    pub window: usize,
    /// Relative spread below which a train counts as sustained.
    pub epsilon: f64,
    /// Periods at or below `factor * delta_inf` are suspected metastable.
    pub damping_factor: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            trend: 3,
            window: 16,
            epsilon: 1e-6,
            damping_factor: 1.0,
        }
    }
}

fn relative_spread(v: &[TimeAs]) -> f64 {
    let min = v.iter().min().map_or(0, |t| t.as_attos()) as f64;
    let max = v.iter().max().map_or(0, |t| t.as_attos()) as f64;
    let mean = v.iter().map(|t| t.as_attos() as f64).sum::<f64>() / v.len() as f64;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    (max - min) / mean
}

fn last<T>(v: &[T], n: usize) -> &[T] {
    &v[v.len().saturating_sub(n)..]
}

/// Classify `train` of a loop whose gate has channel parameters `params`.
pub fn classify(train: &PulseTrain, params: &ChannelParams, opts: &ClassifyOptions) -> OscillationVerdict {
    let his = train.hi_times();
    let los = train.lo_times();
    let scaled = |d: TimeAs| d.as_attos() as f64 * opts.damping_factor;
    let suspect = last(&train.entries, opts.window).iter().any(|e| {
        e.hi.as_attos() as f64 <= scaled(params.delta_inf_up)
            || e.lo.is_some_and(|lo| lo.as_attos() as f64 <= scaled(params.delta_inf_down))
    });

    let sustained = train.truncated
        && his.len() >= opts.window
        && relative_spread(last(&his, opts.window)) < opts.epsilon
        && relative_spread(last(&los, opts.window)) < opts.epsilon;
    let recent = last(&his, opts.trend);
    let kind = if sustained {
        VerdictKind::Sustained
    } else if his.len() >= opts.trend.max(2) && recent.windows(2).all(|w| w[1] > w[0]) {
        VerdictKind::Growing
    } else if his.len() >= opts.trend.max(2) && recent.windows(2).all(|w| w[1] < w[0]) {
        VerdictKind::Decaying
    } else if train.transitions == 0 {
        VerdictKind::None
    } else if train.final_level == Level::Hi {
        VerdictKind::SettledHi
    } else {
        VerdictKind::SettledLo
    };
    OscillationVerdict {
        kind,
        metastability_suspect: suspect,
        resolution_time: if train.truncated {
            None
        } else {
            train.last_transition
        },
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BisectError<E> {
    #[error("bracket invalid: predicate({lo}) = {lo_value}, predicate({hi}) = {hi_value}")]
    BracketInvalid {
        lo: TimeAs,
        hi: TimeAs,
        lo_value: bool,
        hi_value: bool,
    },
    #[error("predicate not monotone: re-probing {at} gave {value}")]
    NonMonotoneObserved { at: TimeAs, value: bool },
    #[error("probe failed: {0}")]
    Probe(E),
}

/// Smallest bracket `(low, high)` with `high - low <= resolution`,
/// `predicate(low) == false` and `predicate(high) == true`.
///
/// Requires `predicate(lo) == false` and `predicate(hi) == true`. The final
/// endpoints are probed again and any disagreement is reported.
pub fn find_critical_width<E, F>(
    mut predicate: F,
    lo: TimeAs,
    hi: TimeAs,
    resolution: TimeAs,
) -> Result<(TimeAs, TimeAs), BisectError<E>>
where
    F: FnMut(TimeAs) -> Result<bool, E>,
{
    assert!(resolution > TimeAs::ZERO, "resolution must be positive");
    let mut probe = |t: TimeAs| predicate(t).map_err(BisectError::Probe);
    let (lo_value, hi_value) = (probe(lo)?, probe(hi)?);
    if lo_value || !hi_value || lo >= hi {
        return Err(BisectError::BracketInvalid {
            lo,
            hi,
            lo_value,
            hi_value,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > resolution {
        let mid = a + TimeAs((b - a).as_attos() / 2);
        if probe(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    for (t, want) in [(a, false), (b, true)] {
        let value = probe(t)?;
        if value != want {
            return Err(BisectError::NonMonotoneObserved { at: t, value });
        }
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{later}` switches at {later_time}, not after `{earlier}` at {earlier_time}")]
pub struct CausalViolation {
    pub earlier: String,
    pub earlier_time: TimeAs,
    pub later: String,
    pub later_time: TimeAs,
}

/// First transitions of `signals` must be strictly increasing in list order.
/// Signals without transitions impose no constraint; a signal missing from
/// the trace is treated the same way.
pub fn check_causal_order(trace: &Trace, signals: &[&str]) -> Result<(), CausalViolation> {
    let mut prev: Option<(&str, TimeAs)> = None;
    for &name in signals {
        let Some(t) = trace.signal(name).and_then(|s| s.first_time()) else {
            continue;
        };
        if let Some((pname, pt)) = prev {
            if t <= pt {
                return Err(CausalViolation {
                    earlier: pname.to_string(),
                    earlier_time: pt,
                    later: name.to_string(),
                    later_time: t,
                });
            }
        }
        prev = Some((name, t));
    }
    Ok(())
}

/// Width of the first complete pulse of each signal, `None` where there is none.
pub fn degradation_profile(trace: &Trace, signals: &[&str]) -> Vec<(String, Option<TimeAs>)> {
    signals
        .iter()
        .map(|&name| {
            let width = trace.signal(name).and_then(|s| {
                pulses_of(&s.transitions, s.initial)
                    .first()
                    .map(|p| p.width)
            });
            (name.to_string(), width)
        })
        .collect()
}

/// True when the present widths strictly decrease along the list and, once a
/// width is missing, all later ones are missing too.
pub fn strictly_degrading(profile: &[(String, Option<TimeAs>)]) -> bool {
    let present: Vec<TimeAs> = profile.iter().map_while(|(_, w)| *w).collect();
    profile[present.len()..].iter().all(|(_, w)| w.is_none())
        && present.windows(2).all(|w| w[1] < w[0])
}
