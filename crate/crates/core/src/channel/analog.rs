// SPDX-License-Identifier: Apache-2.0
//! Analog reading of the exp-channel: the pure-delayed input selects one of two
//! exponential waveforms, the internal value follows it continuously, and a
//! comparator reports every crossing of the threshold.
//!
//! This is evaluated segment by segment in the value domain and never goes
//! through the delay functions in [`super::exp`], so it serves as an
//! independent reference for them.

use crate::types::{ChannelParams, Level, TimeAs, Transition};

/// An exact threshold crossing; `time_as` is in (fractional) attoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time_as: f64,
    pub level: Level,
}

struct Waveforms {
    tau_up_as: f64,
    tau_down_as: f64,
    vth: f64,
}

impl Waveforms {
    fn new(p: &ChannelParams) -> Self {
        // 1 - exp(-d/tau_up) = vth and exp(-d/tau_down) = vth at the channel delay d
        let up = (p.delta_inf_up - p.delta_pure).as_attos() as f64;
        let down = (p.delta_inf_down - p.delta_pure).as_attos() as f64;
        Waveforms {
            tau_up_as: -up / (1.0 - p.vth).ln(),
            tau_down_as: -down / p.vth.ln(),
            vth: p.vth,
        }
    }

    fn tau(&self, target: Level) -> f64 {
        match target {
            Level::Hi => self.tau_up_as,
            Level::Lo => self.tau_down_as,
        }
    }

    /// Value after following the waveform towards `target` for `dt` attoseconds.
    fn advance(&self, v: f64, target: Level, dt: f64) -> f64 {
        let g = target.as_fraction();
        g + (v - g) * (-dt / self.tau(target)).exp()
    }

    /// Offset from the segment start at which the waveform towards `target`,
    /// starting at `v`, reaches the threshold; `None` if it never does.
    fn crossing_offset(&self, v: f64, target: Level) -> Option<f64> {
        match target {
            Level::Hi if v < self.vth => {
                Some(self.tau_up_as * ((1.0 - v) / (1.0 - self.vth)).ln())
            }
            Level::Lo if v > self.vth => Some(self.tau_down_as * (v / self.vth).ln()),
            _ => None,
        }
    }
}

/// Exact comparator output for a channel settled at `initial` and driven by
/// alternating `inputs`.
pub fn analog_crossings(
    params: &ChannelParams,
    initial: Level,
    inputs: &[Transition],
) -> Vec<Crossing> {
    let w = Waveforms::new(params);
    let dp = params.delta_pure.as_attos();
    let mut out = Vec::new();
    let mut comparator = initial;
    let mut v = initial.as_fraction();
    for (k, edge) in inputs.iter().enumerate() {
        let start = edge.time.as_attos() + dp;
        let end = inputs.get(k + 1).map(|e| e.time.as_attos() + dp);
        let target = edge.level;
        if comparator != target {
            if let Some(off) = w.crossing_offset(v, target) {
                let inside = match end {
                    Some(e) => off < (e - start) as f64,
                    None => true,
                };
                if inside {
                    out.push(Crossing {
                        time_as: start as f64 + off,
                        level: target,
                    });
                    comparator = target;
                }
            }
        }
        if let Some(e) = end {
            v = w.advance(v, target, (e - start) as f64);
        }
    }
    out
}

/// [`analog_crossings`] rounded to the attosecond grid.
pub fn analog_oracle(
    params: &ChannelParams,
    initial: Level,
    inputs: &[Transition],
) -> Vec<Transition> {
    analog_crossings(params, initial, inputs)
        .into_iter()
        .map(|c| Transition::new(TimeAs(c.time_as.round() as i64), c.level))
        .collect()
}

/// Internal analog value (fraction of supply) at time `t` for a channel
/// settled at `initial` that received the given input transitions.
pub fn analog_value_at(
    params: &ChannelParams,
    initial: Level,
    inputs: &[Transition],
    t: TimeAs,
) -> f64 {
    let w = Waveforms::new(params);
    let dp = params.delta_pure.as_attos();
    let t = t.as_attos();
    let mut v = initial.as_fraction();
    let mut seg: Option<(i64, Level)> = None;
    for edge in inputs {
        let start = edge.time.as_attos() + dp;
        if start > t {
            break;
        }
        if let Some((s, target)) = seg {
            v = w.advance(v, target, (start - s) as f64);
        }
        seg = Some((start, edge.level));
    }
    match seg {
        Some((s, target)) => w.advance(v, target, (t - s) as f64),
        None => v,
    }
}
