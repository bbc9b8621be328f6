// SPDX-License-Identifier: Apache-2.0
//! Single-input/single-output delay channels.
//!
//! A [`ChannelState`] receives the transitions of its (zero-delay) gate
//! function and answers with a [`ChannelDecision`]: schedule an output
//! transition, revoke the most recently scheduled one, or do nothing. Three
//! models are supported: pure delay, HDL-style inertial delay and the
//! involution exp-channel.

pub mod analog;
pub mod exp;

pub use analog::{analog_crossings, analog_oracle, analog_value_at, Crossing};
pub use exp::{ExpChannel, FineTime};

use thiserror::Error;

use crate::types::{ChannelParams, DelayModel, Level, ParamError, TimeAs, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelDecision {
    Schedule { time: TimeAs, level: Level },
    /// Remove the most recently scheduled output transition; emit nothing.
    CancelPending,
    NoChange,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("input edge to {level} at {time} repeats the previous input level")]
    NonAlternating { time: TimeAs, level: Level },
    #[error("input edge at {time} precedes the previous edge at {previous}")]
    OutOfOrder { time: TimeAs, previous: TimeAs },
    #[error("scheduled time overflowed")]
    Overflow,
}

/// Most recent surviving output transition of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pending {
    pub time: TimeAs,
    pub level: Level,
}

/// Time of the last output threshold crossing, kept with its sub-attosecond
/// remainder so that rounding does not feed back into later delays.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Reference {
    time: TimeAs,
    /// Exact crossing minus `time`, in attoseconds, within [-0.5, 0.5].
    frac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Snapshot {
    reference: Option<Reference>,
    pending: Option<Pending>,
    tail_level: Level,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LastEdge {
    time: TimeAs,
    before: Snapshot,
    decision: ChannelDecision,
    /// Transition revoked by `decision` when it was a cancellation.
    revoked: Option<Pending>,
}

#[derive(Debug, Clone)]
pub struct ChannelState {
    params: ChannelParams,
    model: DelayModel,
    exp: ExpChannel,
    /// Output level once every surviving scheduled transition has happened.
    tail_level: Level,
    input_level: Level,
    reference: Option<Reference>,
    pending: Option<Pending>,
    last_edge: Option<LastEdge>,
}

impl ChannelState {
    /// Channel settled at `initial` (input and output agree, `T` infinite).
    pub fn new(params: ChannelParams, initial: Level) -> Result<Self, ChannelError> {
        Self::with_model(params, params.model, initial)
    }

    pub fn with_model(
        params: ChannelParams,
        model: DelayModel,
        initial: Level,
    ) -> Result<Self, ChannelError> {
        let exp = ExpChannel::derive(&params)?;
        Ok(ChannelState {
            params,
            model,
            exp,
            tail_level: initial,
            input_level: initial,
            reference: None,
            pending: None,
            last_edge: None,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn model(&self) -> DelayModel {
        self.model
    }

    pub fn derived(&self) -> &ExpChannel {
        &self.exp
    }

    pub fn tail_level(&self) -> Level {
        self.tail_level
    }

    pub fn pending(&self) -> Option<Pending> {
        self.pending
    }

    /// Reference time used for the next `T`, `None` when settled.
    pub fn ref_time(&self) -> Option<TimeAs> {
        self.reference.map(|r| r.time)
    }

    /// Rising delay in seconds for `T` in attoseconds, measured against this
    /// channel's parameters.
    pub fn delta_up(&self, t: TimeAs) -> f64 {
        self.exp.delta_up(t.as_secs_f64())
    }

    pub fn delta_down(&self, t: TimeAs) -> f64 {
        self.exp.delta_down(t.as_secs_f64())
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            reference: self.reference,
            pending: self.pending,
            tail_level: self.tail_level,
        }
    }

    fn restore(&mut self, s: Snapshot) {
        self.reference = s.reference;
        self.pending = s.pending;
        self.tail_level = s.tail_level;
    }

    /// Feed the channel a transition of its input to `level` at time `t`.
    ///
    /// Input edges must alternate and must not go back in time. An edge at the
    /// same instant as the previous one forms a zero-width input pulse and
    /// undoes the previous decision exactly.
    pub fn on_input_edge(
        &mut self,
        t: TimeAs,
        level: Level,
    ) -> Result<ChannelDecision, ChannelError> {
        if level == self.input_level {
            return Err(ChannelError::NonAlternating { time: t, level });
        }
        if let Some(last) = self.last_edge {
            if t < last.time {
                return Err(ChannelError::OutOfOrder {
                    time: t,
                    previous: last.time,
                });
            }
            if t == last.time {
                self.last_edge = None;
                self.input_level = level;
                self.restore(last.before);
                return Ok(match last.decision {
                    ChannelDecision::Schedule { .. } => ChannelDecision::CancelPending,
                    ChannelDecision::CancelPending => {
                        let p = last.revoked.expect("cancellation records its victim");
                        ChannelDecision::Schedule {
                            time: p.time,
                            level: p.level,
                        }
                    }
                    ChannelDecision::NoChange => ChannelDecision::NoChange,
                });
            }
        }
        self.input_level = level;

        let before = self.snapshot();
        let revoked = self.pending;
        let decision = match self.model {
            DelayModel::IdmExp => self.idm_edge(t, level)?,
            DelayModel::Inertial => self.inertial_edge(t, level)?,
            DelayModel::Pure => self.pure_edge(t, level)?,
        };
        self.last_edge = Some(LastEdge {
            time: t,
            before,
            decision,
            revoked: match decision {
                ChannelDecision::CancelPending => revoked,
                _ => None,
            },
        });
        Ok(decision)
    }

    fn schedule(&mut self, time: TimeAs) -> ChannelDecision {
        let level = !self.tail_level;
        self.tail_level = level;
        self.pending = Some(Pending { time, level });
        ChannelDecision::Schedule { time, level }
    }

    fn cancel(&mut self) -> ChannelDecision {
        match self.pending.take() {
            Some(p) => {
                self.tail_level = !p.level;
                ChannelDecision::CancelPending
            }
            None => ChannelDecision::NoChange,
        }
    }

    fn idm_edge(&mut self, t: TimeAs, level: Level) -> Result<ChannelDecision, ChannelError> {
        let tc = t
            .checked_add(self.params.delta_pure)
            .map_err(|_| ChannelError::Overflow)?;
        let big_t = match self.reference {
            None => None,
            Some(r) => {
                let diff = tc.checked_sub(r.time).map_err(|_| ChannelError::Overflow)?;
                Some(FineTime::new(diff, -r.frac))
            }
        };
        let Some(delay) = self.exp.delay_fine(level, big_t) else {
            // Exact-math limit: infinitely negative delay, always cancels and
            // leaves the channel as if settled.
            self.reference = None;
            return Ok(self.cancel());
        };
        let (offset, frac) = delay.rounded();
        let to = tc.checked_add(offset).map_err(|_| ChannelError::Overflow)?;
        self.reference = Some(Reference { time: to, frac });
        match self.pending {
            Some(p) if to <= p.time => Ok(self.cancel()),
            _ => Ok(self.schedule(to)),
        }
    }

    fn inertial_edge(&mut self, t: TimeAs, level: Level) -> Result<ChannelDecision, ChannelError> {
        let delay = self.params.delta_inf(level);
        let to = t.checked_add(delay).map_err(|_| ChannelError::Overflow)?;
        match self.pending {
            // Pending opposite transition inside the rejection window
            // (to - delay, to], or after `to` (out of order): reject the pulse.
            Some(p) if p.time > to - delay => Ok(self.cancel()),
            _ => Ok(self.schedule(to)),
        }
    }

    fn pure_edge(&mut self, t: TimeAs, level: Level) -> Result<ChannelDecision, ChannelError> {
        let to = t
            .checked_add(self.params.delta_inf(level))
            .map_err(|_| ChannelError::Overflow)?;
        match self.pending {
            Some(p) if to <= p.time => Ok(self.cancel()),
            _ => Ok(self.schedule(to)),
        }
    }
}

/// Drive a single channel, settled at `initial`, with an alternating input
/// waveform and return the surviving output transitions in time order.
///
/// Scheduled transitions are kept until revoked; since a channel only ever
/// revokes its most recent transition the survivors form the output.
pub fn drive_channel(
    params: ChannelParams,
    model: DelayModel,
    initial: Level,
    inputs: &[Transition],
) -> Result<Vec<Transition>, ChannelError> {
    let mut state = ChannelState::with_model(params, model, initial)?;
    let mut out: Vec<Transition> = Vec::new();
    for edge in inputs {
        match state.on_input_edge(edge.time, edge.level)? {
            ChannelDecision::Schedule { time, level } => out.push(Transition::new(time, level)),
            ChannelDecision::CancelPending => {
                out.pop();
            }
            ChannelDecision::NoChange => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(t: TimeAs, l: Level) -> Transition {
        Transition::new(t, l)
    }

    fn sym4() -> ChannelParams {
        ChannelParams::symmetric(TimeAs::ps(4)).with_pure(TimeAs::ZERO)
    }

    fn or_gate() -> ChannelParams {
        ChannelParams::new(TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8))
    }

    #[test]
    fn idm_settled_step_uses_static_delay() {
        let mut ch = ChannelState::new(or_gate(), Level::Lo).unwrap();
        assert_eq!(
            ch.on_input_edge(TimeAs::ZERO, Level::Hi).unwrap(),
            ChannelDecision::Schedule {
                time: TimeAs::ps_f64(4.6),
                level: Level::Hi
            }
        );
        assert_eq!(ch.ref_time(), Some(TimeAs::ps_f64(4.6)));
    }

    #[test]
    fn idm_equilibrium_pulse_cancels() {
        let mut ch = ChannelState::new(sym4(), Level::Lo).unwrap();
        ch.on_input_edge(TimeAs::ZERO, Level::Hi).unwrap();
        assert_eq!(
            ch.on_input_edge(TimeAs::ps(4), Level::Lo).unwrap(),
            ChannelDecision::CancelPending
        );
        assert_eq!(ch.tail_level(), Level::Lo);
        assert_eq!(ch.pending(), None);
        // reference keeps the newer (cancelled) crossing time
        assert_eq!(ch.ref_time(), Some(TimeAs::ps(4)));
    }

    #[test]
    fn idm_five_ps_pulse() {
        let out = drive_channel(
            sym4(),
            DelayModel::IdmExp,
            Level::Lo,
            &[tr(TimeAs::ZERO, Level::Hi), tr(TimeAs::ps(5), Level::Lo)],
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], tr(TimeAs::ps(4), Level::Hi));
        let width = (out[1].time - out[0].time).as_ps_f64();
        assert!((width - 1.852).abs() < 1e-3, "{width}");
    }

    #[test]
    fn inertial_accepts_and_rejects() {
        let p = ChannelParams::new(TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8));
        let out = drive_channel(
            p,
            DelayModel::Inertial,
            Level::Lo,
            &[tr(TimeAs::ZERO, Level::Hi), tr(TimeAs::ps(5), Level::Lo)],
        )
        .unwrap();
        assert_eq!(
            out,
            vec![
                tr(TimeAs::ps_f64(4.6), Level::Hi),
                tr(TimeAs::ps_f64(10.8), Level::Lo)
            ]
        );
        let out = drive_channel(
            p,
            DelayModel::Inertial,
            Level::Lo,
            &[tr(TimeAs::ZERO, Level::Hi), tr(TimeAs::ps_f64(4.5), Level::Lo)],
        )
        .unwrap();
        assert!(out.is_empty());
        // pulse exactly as wide as the leading delay passes
        let out = drive_channel(
            p,
            DelayModel::Inertial,
            Level::Lo,
            &[tr(TimeAs::ZERO, Level::Hi), tr(TimeAs::ps_f64(4.6), Level::Lo)],
        )
        .unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn inertial_out_of_order_down_pulse_is_rejected() {
        // falling delay much longer than rising: a down-pulse of 3 ps would
        // come out with negative width
        let p = ChannelParams::new(TimeAs::ps(2), TimeAs::ps(10));
        let out = drive_channel(
            p,
            DelayModel::Inertial,
            Level::Hi,
            &[tr(TimeAs::ZERO, Level::Lo), tr(TimeAs::ps(12), Level::Hi)],
        )
        .unwrap();
        assert_eq!(out, vec![tr(TimeAs::ps(10), Level::Lo), tr(TimeAs::ps(14), Level::Hi)]);
        let out = drive_channel(
            p,
            DelayModel::Inertial,
            Level::Hi,
            &[tr(TimeAs::ZERO, Level::Lo), tr(TimeAs::ps(3), Level::Hi)],
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn pure_shifts_and_cancels_out_of_order() {
        let p = ChannelParams::new(TimeAs::ps(2), TimeAs::ps(5));
        let out = drive_channel(
            p,
            DelayModel::Pure,
            Level::Lo,
            &[tr(TimeAs::ZERO, Level::Hi), tr(TimeAs::ps(1), Level::Lo)],
        )
        .unwrap();
        assert_eq!(out, vec![tr(TimeAs::ps(2), Level::Hi), tr(TimeAs::ps(6), Level::Lo)]);
        let out = drive_channel(
            p,
            DelayModel::Pure,
            Level::Hi,
            &[tr(TimeAs::ZERO, Level::Lo), tr(TimeAs::ps(1), Level::Hi)],
        )
        .unwrap();
        // fall at 5 ps, rise at 3 ps: out of order, both removed
        assert!(out.is_empty());
    }

    #[test]
    fn zero_width_input_pulse_is_a_no_op() {
        for model in DelayModel::ALL {
            let mut ch = ChannelState::with_model(or_gate(), model, Level::Lo).unwrap();
            ch.on_input_edge(TimeAs::ZERO, Level::Hi).unwrap();
            ch.on_input_edge(TimeAs::ps(3), Level::Lo).unwrap();
            let before = (ch.tail_level(), ch.pending(), ch.ref_time());
            let d1 = ch.on_input_edge(TimeAs::ps(20), Level::Hi).unwrap();
            let d2 = ch.on_input_edge(TimeAs::ps(20), Level::Lo).unwrap();
            assert!(matches!(d1, ChannelDecision::Schedule { .. }), "{model}");
            assert_eq!(d2, ChannelDecision::CancelPending, "{model}");
            assert_eq!((ch.tail_level(), ch.pending(), ch.ref_time()), before, "{model}");
        }
    }

    #[test]
    fn zero_width_pulse_after_cancel_restores_victim() {
        let mut ch = ChannelState::new(sym4(), Level::Lo).unwrap();
        let first = ch.on_input_edge(TimeAs::ZERO, Level::Hi).unwrap();
        assert_eq!(
            ch.on_input_edge(TimeAs::ps(1), Level::Lo).unwrap(),
            ChannelDecision::CancelPending
        );
        assert_eq!(ch.on_input_edge(TimeAs::ps(1), Level::Hi).unwrap(), first);
        assert_eq!(ch.tail_level(), Level::Hi);
    }

    #[test]
    fn non_alternating_edges_are_errors() {
        let mut ch = ChannelState::new(sym4(), Level::Lo).unwrap();
        assert!(matches!(
            ch.on_input_edge(TimeAs::ZERO, Level::Lo),
            Err(ChannelError::NonAlternating { .. })
        ));
        ch.on_input_edge(TimeAs::ps(1), Level::Hi).unwrap();
        assert!(matches!(
            ch.on_input_edge(TimeAs::ps(2), Level::Hi),
            Err(ChannelError::NonAlternating { .. })
        ));
        assert!(matches!(
            ch.on_input_edge(TimeAs::ZERO, Level::Lo),
            Err(ChannelError::OutOfOrder { .. })
        ));
    }

    #[test]
    fn reference_sensitivity_newer_vs_older() {
        // After a cancellation the next T is measured from the newer (cancelled
        // edge's) crossing. Measuring from the revoked pending crossing instead
        // would give a visibly different delay for the following edge.
        let p = sym4();
        let ex = ExpChannel::derive(&p).unwrap();
        let mut ch = ChannelState::new(p, Level::Lo).unwrap();
        ch.on_input_edge(TimeAs::ZERO, Level::Hi).unwrap(); // pending HI at 4 ps
        ch.on_input_edge(TimeAs::ps(2), Level::Lo).unwrap(); // cancels
        let newer = ch.ref_time().unwrap();
        assert!(newer < TimeAs::ps(4));
        let d = ch.on_input_edge(TimeAs::ps(6), Level::Hi).unwrap();
        let ChannelDecision::Schedule { time, .. } = d else {
            panic!("expected schedule, got {d:?}")
        };
        let with_older = TimeAs::ps(6).as_secs_f64() + ex.delta_up(2e-12);
        assert!((time.as_secs_f64() - with_older).abs() > 1e-14);
    }
}
