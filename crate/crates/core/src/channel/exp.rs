// SPDX-License-Identifier: Apache-2.0
//! Closed-form delay functions of the exponential involution channel.
//!
//! The channel is a pure delay followed by two saturating waveforms,
//! `f_up(t) = 1 - exp(-t/tau_up)` and `f_down(t) = exp(-t/tau_down)`, which are
//! switched value-continuously on every input transition, and a comparator at
//! `vth`. The time constants follow from requiring a step from a settled level
//! to cross `vth` exactly one channel delay (`delta_inf - delta_pure`) later.
//!
//! `T` is the time from the previous (possibly cancelled) output crossing to
//! the current pure-delayed input transition. With `v = vth * exp(-T/tau_down)`
//! the value the falling waveform has reached at that moment, the rising delay
//! is `tau_up * ln((1 - v) / (1 - vth))`; the falling delay is symmetric.

use std::ops::{Add, Neg, Sub};

use crate::types::{ChannelParams, Level, ParamError, TimeAs};

/// A time as whole attoseconds plus a fractional attosecond remainder
/// `frac * 2^scale`.
///
/// Delays close to their limits (or to the edge of their domain) are carried
/// as the limit plus a small correction so that composing delay functions does
/// not lose the distance to the limit to floating-point rounding. Corrections
/// below the normal `f64` range keep their precision through `scale`.
#[derive(Debug, Clone, Copy)]
pub struct FineTime {
    pub whole: TimeAs,
    pub frac: f64,
    scale: i32,
}

/// Smallest correction carried with `scale == 0`.
const SCALED_BELOW: f64 = 1e-280;

/// `f * 2^e` without the intermediate power overflowing.
fn ldexp(f: f64, e: i32) -> f64 {
    let half = e / 2;
    f * 2f64.powi(half) * 2f64.powi(e - half)
}

impl FineTime {
    pub const ZERO: FineTime = FineTime {
        whole: TimeAs::ZERO,
        frac: 0.0,
        scale: 0,
    };

    pub fn new(whole: TimeAs, frac: f64) -> Self {
        FineTime {
            whole,
            frac,
            scale: 0,
        }
    }

    /// `whole` plus `sign * exp(ln_frac)` attoseconds, exact for any `ln_frac`.
    fn with_log_frac(whole: TimeAs, sign: f64, ln_frac: f64) -> Self {
        if ln_frac.exp() >= SCALED_BELOW {
            return FineTime::new(whole, sign * ln_frac.exp());
        }
        let scale = (ln_frac / std::f64::consts::LN_2).floor();
        FineTime {
            whole,
            frac: sign * (ln_frac - scale * std::f64::consts::LN_2).exp(),
            scale: scale as i32,
        }
    }

    pub fn from_attos_f64(v: f64) -> Self {
        let whole = v.round();
        FineTime::new(TimeAs(whole as i64), v - whole)
    }

    pub fn from_secs_f64(v: f64) -> Self {
        Self::from_attos_f64(v * 1e18)
    }

    fn frac_value(self) -> f64 {
        if self.scale == 0 {
            self.frac
        } else {
            ldexp(self.frac, self.scale)
        }
    }

    /// Natural logarithm of the remainder, which must be positive.
    fn ln_frac(self) -> f64 {
        self.frac.ln() + f64::from(self.scale) * std::f64::consts::LN_2
    }

    pub fn as_attos_f64(self) -> f64 {
        self.whole.as_attos() as f64 + self.frac_value()
    }

    pub fn as_secs_f64(self) -> f64 {
        self.as_attos_f64() * 1e-18
    }

    /// Nearest attosecond (ties away from zero) and the remainder.
    pub fn rounded(self) -> (TimeAs, f64) {
        let f = self.frac_value();
        let r = f.round();
        (self.whole + TimeAs(r as i64), f - r)
    }

    fn combine(self, rhs: FineTime, sign: f64) -> FineTime {
        let whole = if sign > 0.0 {
            self.whole + rhs.whole
        } else {
            self.whole - rhs.whole
        };
        let b = sign * rhs.frac;
        if rhs.frac == 0.0 {
            return FineTime { whole, ..self };
        }
        if self.frac == 0.0 {
            return FineTime {
                whole,
                frac: b,
                scale: rhs.scale,
            };
        }
        let scale = self.scale.max(rhs.scale);
        let at = |f: f64, s: i32| if s == scale { f } else { ldexp(f, s - scale) };
        FineTime {
            whole,
            frac: at(self.frac, self.scale) + at(b, rhs.scale),
            scale,
        }
    }
}

impl From<TimeAs> for FineTime {
    fn from(t: TimeAs) -> Self {
        FineTime::new(t, 0.0)
    }
}

impl Add for FineTime {
    type Output = FineTime;

    fn add(self, rhs: FineTime) -> FineTime {
        self.combine(rhs, 1.0)
    }
}

impl Sub for FineTime {
    type Output = FineTime;

    fn sub(self, rhs: FineTime) -> FineTime {
        self.combine(rhs, -1.0)
    }
}

impl PartialOrd for FineTime {
    fn partial_cmp(&self, other: &FineTime) -> Option<std::cmp::Ordering> {
        let d = *self - *other;
        // the remainder stays below one attosecond in magnitude only when
        // `whole` is zero, so the sign of the sum decides
        let v = if d.whole == TimeAs::ZERO {
            d.frac
        } else {
            d.as_attos_f64()
        };
        v.partial_cmp(&0.0)
    }
}

impl PartialEq for FineTime {
    fn eq(&self, other: &FineTime) -> bool {
        self.partial_cmp(other) == Some(std::cmp::Ordering::Equal)
    }
}

impl Neg for FineTime {
    type Output = FineTime;

    fn neg(self) -> FineTime {
        FineTime {
            whole: -self.whole,
            frac: -self.frac,
            scale: self.scale,
        }
    }
}

/// Time constants and channel delays derived from [`ChannelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpChannel {
    /// Seconds.
    pub tau_up: f64,
    /// Seconds.
    pub tau_down: f64,
    pub delta_c_up: TimeAs,
    pub delta_c_down: TimeAs,
    pub vth: f64,
}

/// One direction of the channel: the waveform being switched to and the one
/// being left.
struct Direction {
    /// Time constant of the waveform switched to, attoseconds.
    tau_to: f64,
    /// Time constant of the waveform being left, attoseconds.
    tau_from: f64,
    /// Threshold distance seen from the waveform being left (`vth` for a
    /// falling waveform, `1 - vth` for a rising one).
    from_level: f64,
    /// Same for the waveform switched to.
    to_level: f64,
    limit: TimeAs,
    /// Channel delay of the opposite direction; the domain is `T > -edge`.
    edge: TimeAs,
}

impl Direction {
    fn delay(&self, t: FineTime) -> Option<FineTime> {
        let x = t.as_attos_f64();
        let edge = self.edge.as_attos() as f64;
        if x > self.tau_from {
            // close to the static delay: limit minus a small deficit
            let ln_u = self.from_level.ln() - x / self.tau_from;
            let u = ln_u.exp();
            if u >= SCALED_BELOW {
                let deficit = -self.tau_to * (-u).ln_1p();
                return Some(FineTime::new(self.limit, -deficit));
            }
            // -ln(1 - u) = u to within u^2
            return Some(FineTime::with_log_frac(self.limit, -1.0, self.tau_to.ln() + ln_u));
        }
        if x >= -0.5 * edge {
            let y = -self.from_level * (-x / self.tau_from).exp_m1() / self.to_level;
            return Some(FineTime::from_attos_f64(self.tau_to * y.ln_1p()));
        }
        // close to the domain edge: work with the distance to it
        let dist = t + FineTime::from(self.edge);
        if dist <= FineTime::ZERO {
            return None;
        }
        let s = dist.as_attos_f64();
        let ln_gap = if s >= SCALED_BELOW {
            let gap = -(-s / self.tau_from).exp_m1();
            if gap <= 0.0 {
                return None;
            }
            gap.ln()
        } else if dist.whole == TimeAs::ZERO {
            // 1 - exp(-s/tau) = s/tau to within (s/tau)^2
            dist.ln_frac() - self.tau_from.ln()
        } else if s > 0.0 {
            s.ln() - self.tau_from.ln()
        } else {
            return None;
        };
        Some(FineTime::from_attos_f64(self.tau_to * (ln_gap - self.to_level.ln())))
    }
}

impl ExpChannel {
    pub fn derive(params: &ChannelParams) -> Result<ExpChannel, ParamError> {
        params.validate()?;
        let delta_c_up = params.channel_up();
        let delta_c_down = params.channel_down();
        let vth = params.vth;
        let tau_up = delta_c_up.as_secs_f64() / (1.0 / (1.0 - vth)).ln();
        let tau_down = delta_c_down.as_secs_f64() / (1.0 / vth).ln();
        Ok(ExpChannel {
            tau_up,
            tau_down,
            delta_c_up,
            delta_c_down,
            vth,
        })
    }

    fn direction(&self, level: Level) -> Direction {
        match level {
            Level::Hi => Direction {
                tau_to: self.tau_up * 1e18,
                tau_from: self.tau_down * 1e18,
                from_level: self.vth,
                to_level: 1.0 - self.vth,
                limit: self.delta_c_up,
                edge: self.delta_c_down,
            },
            Level::Lo => Direction {
                tau_to: self.tau_down * 1e18,
                tau_from: self.tau_up * 1e18,
                from_level: 1.0 - self.vth,
                to_level: self.vth,
                limit: self.delta_c_down,
                edge: self.delta_c_up,
            },
        }
    }

    /// Channel delay for an output transition towards `level`, for a given
    /// `T`; `None` (T = infinity) yields the static channel delay.
    ///
    /// Returns `None` when `T` lies at or beyond the edge of the domain, where
    /// the delay is minus infinity and the transition always cancels.
    pub fn delay_fine(&self, level: Level, t: Option<FineTime>) -> Option<FineTime> {
        let dir = self.direction(level);
        match t {
            None => Some(FineTime::from(dir.limit)),
            Some(t) => dir.delay(t),
        }
    }

    /// Rising channel delay in seconds for `T` in seconds; `-inf` outside the
    /// domain `T > -delta_c_down`.
    pub fn delta_up(&self, t: f64) -> f64 {
        self.delta(Level::Hi, t)
    }

    /// Falling channel delay in seconds; domain `T > -delta_c_up`.
    pub fn delta_down(&self, t: f64) -> f64 {
        self.delta(Level::Lo, t)
    }

    pub fn delta(&self, level: Level, t: f64) -> f64 {
        let t = (t != f64::INFINITY).then(|| FineTime::from_secs_f64(t));
        self.delay_fine(level, t)
            .map_or(f64::NEG_INFINITY, FineTime::as_secs_f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn or_gate_channel() -> ExpChannel {
        ExpChannel::derive(
            &ChannelParams::new(TimeAs::ps_f64(4.6), TimeAs::ps_f64(5.8)).with_pure(TimeAs::ZERO),
        )
        .unwrap()
    }

    fn symmetric4() -> ExpChannel {
        ExpChannel::derive(&ChannelParams::symmetric(TimeAs::ps(4)).with_pure(TimeAs::ZERO))
            .unwrap()
    }

    #[test]
    fn time_constants() {
        let ch = or_gate_channel();
        // 4.6 ps / ln 2, 5.8 ps / ln 2
        assert!((ch.tau_up * 1e12 - 6.636_397_2).abs() < 1e-6, "{}", ch.tau_up);
        assert!((ch.tau_down * 1e12 - 8.367_631_2).abs() < 1e-6, "{}", ch.tau_down);
        let s = symmetric4();
        assert!((s.tau_up * 1e12 - 5.770_780_2).abs() < 1e-6);
        assert_eq!(s.tau_up, s.tau_down);
    }

    #[test]
    fn zero_and_limits() {
        let ch = or_gate_channel();
        assert_eq!(ch.delta_up(0.0), 0.0);
        assert_eq!(ch.delta_down(0.0), 0.0);
        assert!((ch.delta_up(f64::INFINITY) - 4.6e-12).abs() < 1e-24);
        assert!((ch.delta_down(f64::INFINITY) - 5.8e-12).abs() < 1e-24);
        assert!((ch.delta_up(1e-9) - 4.6e-12).abs() < 1e-18);
    }

    #[test]
    fn reference_points() {
        let ch = or_gate_channel();
        // 6.6364 ps * ln((1 - 0.5 e^-1) / 0.5)
        let d = ch.delta_up(ch.tau_down);
        assert!((d * 1e12 - 3.2514).abs() < 1e-3, "{}", d * 1e12);
        let s = symmetric4();
        let d = s.delta_down(1e-12);
        assert!((d * 1e12 - 0.852).abs() < 1e-3, "{}", d * 1e12);
    }

    #[test]
    fn domain_edge_is_minus_infinity() {
        let ch = symmetric4();
        assert_eq!(ch.delta_up(-4e-12), f64::NEG_INFINITY);
        assert_eq!(ch.delta_up(-5e-12), f64::NEG_INFINITY);
        assert!(ch.delta_up(-3.9e-12).is_finite());
    }

    #[test]
    fn deficits_below_the_normal_range_keep_precision() {
        // fast rise, slow fall: far along T the rising-delay deficit is
        // around e^-730 attoseconds
        let ch = ExpChannel::derive(
            &ChannelParams::new(TimeAs(8_208_429), TimeAs(18_331_810))
                .with_pure(TimeAs(7_679_112))
                .with_vth(0.733_630_275_155_484_2),
        )
        .unwrap();
        let t = FineTime::from_attos_f64(292_763_034.0);
        let d = ch.delay_fine(Level::Lo, Some(t)).unwrap();
        assert!(d < FineTime::from(ch.delta_c_down));
        let back = -ch.delay_fine(Level::Hi, Some(-d)).unwrap();
        assert!((back - t).as_attos_f64().abs() < 1e-3, "{back:?}");
        let later = ch
            .delay_fine(Level::Lo, Some(t + FineTime::from(TimeAs(40))))
            .unwrap();
        assert!(later > d);
    }

    #[test]
    fn fine_time_ordering() {
        let a = FineTime::new(TimeAs(5), -0.25);
        let b = FineTime::new(TimeAs(4), 0.5);
        assert!(a > b && b < a);
        assert_eq!(a - a, FineTime::ZERO);
        assert_eq!(-a + a, FineTime::ZERO);
        assert_eq!(FineTime::new(TimeAs(3), 0.4).rounded(), (TimeAs(3), 0.4));
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ExpChannel::derive(&ChannelParams::symmetric(TimeAs::ps(1))).is_err());
    }
}
