// SPDX-License-Identifier: Apache-2.0
//! The delay-function channel against the waveform-switching oracle, and the
//! algebraic properties of the delay functions.

use invsim::channel::{analog_crossings, drive_channel, ExpChannel, FineTime};
use invsim::{ChannelParams, DelayModel, Level, TimeAs, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng) -> ChannelParams {
    let up: f64 = rng.gen_range(2.0..20.0);
    let down: f64 = rng.gen_range(2.0..20.0);
    let pure = rng.gen_range(0.0..(up.min(down) - 0.5));
    ChannelParams::new(TimeAs::ps_f64(up), TimeAs::ps_f64(down))
        .with_pure(TimeAs::ps_f64(pure))
        .with_vth(rng.gen_range(0.2..0.8))
}

fn random_inputs(rng: &mut ChaCha8Rng, p: &ChannelParams, n: usize) -> (Level, Vec<Transition>) {
    let scale = p.delta_inf_up.max(p.delta_inf_down).as_attos() as f64;
    let initial = if rng.gen_bool(0.5) { Level::Hi } else { Level::Lo };
    let mut level = initial;
    let mut t = 0i64;
    let inputs = (0..n)
        .map(|_| {
            t += (rng.gen_range(0.1..10.0) * scale) as i64;
            level = !level;
            Transition::new(TimeAs(t), level)
        })
        .collect();
    (initial, inputs)
}

#[test]
fn idm_channel_matches_analog_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut transitions = 0usize;
    for _ in 0..10 {
        let p = random_params(&mut rng);
        for _ in 0..1000 {
            let (initial, inputs) = random_inputs(&mut rng, &p, 16);
            let digital = drive_channel(p, DelayModel::IdmExp, initial, &inputs).unwrap();
            let analog = analog_crossings(&p, initial, &inputs);
            assert_eq!(
                digital.len(),
                analog.len(),
                "params {p:?} inputs {inputs:?}\n digital {digital:?}\n analog {analog:?}"
            );
            for (d, a) in digital.iter().zip(&analog) {
                assert_eq!(d.level, a.level);
                assert!(
                    (d.time.as_attos() as f64 - a.time_as).abs() <= 1.0,
                    "{d:?} vs {a:?} params {p:?} inputs {inputs:?}"
                );
            }
            transitions += digital.len();
        }
    }
    assert!(transitions > 10_000);
}

fn grid(lo: f64, hi: f64, i: usize, n: usize) -> FineTime {
    FineTime::from_attos_f64(lo + (hi - lo) * i as f64 / n as f64)
}

#[test]
fn involution_identity_on_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let ch = ExpChannel::derive(&p).unwrap();
        let hi = 10.0 * ch.tau_up.max(ch.tau_down) * 1e18;
        for (first, second, edge) in [
            (Level::Hi, Level::Lo, ch.delta_c_down),
            (Level::Lo, Level::Hi, ch.delta_c_up),
        ] {
            let lo = -(edge.as_attos() as f64);
            for i in 1..n {
                let t = grid(lo, hi, i, n);
                let d = ch.delay_fine(first, Some(t)).expect("inside domain");
                let back = -ch
                    .delay_fine(second, Some(-d))
                    .expect("image inside domain");
                let err = (back - t).as_attos_f64().abs();
                assert!(err <= 1.0, "{p:?} {first:?} T={t:?} back={back:?}");
            }
        }
    }
}

#[test]
fn delays_are_increasing_and_reach_their_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let ch = ExpChannel::derive(&p).unwrap();
        let tau = ch.tau_up.max(ch.tau_down) * 1e18;
        for (level, edge, limit) in [
            (Level::Hi, ch.delta_c_down, ch.delta_c_up),
            (Level::Lo, ch.delta_c_up, ch.delta_c_down),
        ] {
            let lo = -(edge.as_attos() as f64);
            let mut prev = f64::NEG_INFINITY;
            for i in 1..2_000 {
                let t = grid(lo, 20.0 * tau, i, 2_000);
                let d = ch.delay_fine(level, Some(t)).unwrap().as_attos_f64();
                assert!(d >= prev, "{p:?} {level:?} T={t:?}");
                assert!(d <= limit.as_attos() as f64 + 1e-9);
                prev = d;
            }
            let far = FineTime::from_attos_f64(40.0 * tau);
            let d = ch.delay_fine(level, Some(far)).unwrap();
            assert!((d - FineTime::from(limit)).as_attos_f64().abs() <= 1.0);
            assert_eq!(ch.delay_fine(level, Some(FineTime::from(-edge))), None);
        }
    }
}
