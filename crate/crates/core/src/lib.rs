// SPDX-License-Identifier: Apache-2.0
//! Gate-level dynamic digital timing simulation with three delay models:
//! pure delay, inertial delay and the involution delay model's exp-channel.

pub mod analysis;
pub mod bench;
pub mod channel;
pub mod engine;
pub mod formats;
pub mod netlist;
pub mod recipes;
pub mod types;

pub use channel::{ChannelDecision, ChannelError, ChannelState, ExpChannel};
pub use types::{
    pulses_of, validate_trace, ChannelParams, DelayModel, Level, Polarity, Pulse, SignalTrace,
    TimeAs, Trace, TraceViolation, Transition,
};
