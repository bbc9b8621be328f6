// SPDX-License-Identifier: Apache-2.0
//! Runtime comparison of delay models on replicated built-in circuits.
//!
//! Every run applies the same total number of input transitions, split evenly
//! over the copies of the circuit. Each copy toggles its primary inputs in
//! round-robin order with edges [`EDGE_SPACING`] apart, long enough for every
//! built-in to settle in between, so that no model cancels anything and all
//! models commit the same number of transitions. Only the kernel call is
//! timed; traces are not recorded.

use std::time::Instant;

use thiserror::Error;

use crate::engine::{simulate, SimConfig, SimError, Stimulus};
use crate::netlist::Circuit;
use crate::recipes::{builtin_circuit, RecipeError};
use crate::types::{DelayModel, Level, TimeAs};

/// Spacing of consecutive input edges of one copy.
pub const EDGE_SPACING: TimeAs = TimeAs::ns(1);

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    /// Built-in circuit name without a copy suffix, e.g. `adder:4`.
    pub circuit: String,
    pub multipliers: Vec<usize>,
    /// Input transitions per run over all copies.
    pub transitions: usize,
    pub repetitions: usize,
    pub models: Vec<DelayModel>,
    /// Run the repetitions of one configuration concurrently. Timings of
    /// such runs are reported but no overhead is derived from them.
    pub parallel: bool,
}

impl BenchSpec {
    pub fn new(circuit: &str) -> Self {
        BenchSpec {
            circuit: circuit.to_string(),
            multipliers: vec![1, 2, 4, 10, 20, 40],
            transitions: 200_000,
            repetitions: 30,
            models: vec![DelayModel::Inertial, DelayModel::IdmExp],
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.multipliers.is_empty() || self.multipliers.contains(&0) {
            return Err(BenchError::Spec("multipliers must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Spec("repetitions must be at least 1".into()));
        }
        if self.models.is_empty() {
            return Err(BenchError::Spec("no models given".into()));
        }
        if self.transitions == 0 {
            return Err(BenchError::Spec("transitions must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("invalid bench specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("x{multiplier}: committed transitions differ between runs ({counts:?})")]
    CountMismatch {
        multiplier: usize,
        counts: Vec<(DelayModel, u64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub circuit: String,
    pub multiplier: usize,
    pub model: DelayModel,
    pub transitions: usize,
    pub repetitions: usize,
    pub committed: u64,
    pub mean_s: f64,
    pub stddev_s: f64,
    /// Relative to the inertial row of the same multiplier, for IDM rows of
    /// sequential runs.
    pub overhead_pct: Option<f64>,
}

/// Round-robin toggles on the inputs of every copy of `circuit`, which has
/// `copies` copies with identical input lists in order.
pub fn bench_stimulus(circuit: &Circuit, copies: usize, transitions: usize) -> Stimulus {
    let inputs: Vec<&str> = circuit
        .inputs()
        .iter()
        .map(|&s| circuit.signal_name(s))
        .collect();
    let per_copy = inputs.len() / copies;
    let mut stim = Stimulus::new();
    for (k, copy) in inputs.chunks(per_copy.max(1)).enumerate() {
        let count = transitions / copies + usize::from(k < transitions % copies);
        let mut levels: Vec<Level> = copy
            .iter()
            .map(|&name| {
                let id = circuit.signal_id(name).expect("listed input");
                circuit.signals()[id].init.unwrap_or(Level::Lo)
            })
            .collect();
        for (name, &l) in copy.iter().zip(&levels) {
            stim.set_initial(name, l);
        }
        for j in 0..count {
            let i = j % copy.len();
            levels[i] = !levels[i];
            stim.push(copy[i], EDGE_SPACING * (j as i64 + 1), levels[i]);
        }
    }
    stim
}

fn mean_stddev(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One timed simulation: seconds and committed transitions.
fn timed(circuit: &Circuit, stim: &Stimulus, cfg: &SimConfig) -> Result<(f64, u64), SimError> {
    let t0 = Instant::now();
    let r = simulate(circuit, stim, cfg)?;
    Ok((t0.elapsed().as_secs_f64(), r.committed))
}

/// Run the benchmark; `progress` is called after every multiplier.
pub fn run_bench(
    spec: &BenchSpec,
    mut progress: impl FnMut(&[BenchRow]),
) -> Result<Vec<BenchRow>, BenchError> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &m in &spec.multipliers {
        let name = if m == 1 {
            spec.circuit.clone()
        } else {
            format!("{}x{m}", spec.circuit)
        };
        let circuit = builtin_circuit(&name)?;
        let stim = bench_stimulus(&circuit, m, spec.transitions);
        let t_end = EDGE_SPACING * (spec.transitions.div_ceil(m) as i64 + 2);
        let configs: Vec<SimConfig> = spec
            .models
            .iter()
            .map(|&model| SimConfig {
                model,
                t_end,
                max_events: u64::MAX,
                record_internal: false,
                record: false,
            })
            .collect();
        let mut times = vec![Vec::with_capacity(spec.repetitions); configs.len()];
        let mut counts: Vec<(DelayModel, u64)> = Vec::new();
        if spec.parallel {
            for (mi, cfg) in configs.iter().enumerate() {
                let results: Vec<Result<(f64, u64), SimError>> = std::thread::scope(|s| {
                    let handles: Vec<_> = (0..spec.repetitions)
                        .map(|_| s.spawn(|| timed(&circuit, &stim, cfg)))
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("simulation thread panicked"))
                        .collect()
                });
                for r in results {
                    let (secs, committed) = r?;
                    times[mi].push(secs);
                    counts.push((cfg.model, committed));
                }
            }
        } else {
            // models interleaved so that slow drifts of the machine hit all alike
            for _ in 0..spec.repetitions {
                for (mi, cfg) in configs.iter().enumerate() {
                    let (secs, committed) = timed(&circuit, &stim, cfg)?;
                    times[mi].push(secs);
                    counts.push((cfg.model, committed));
                }
            }
        }
        counts.dedup();
        if counts.windows(2).any(|w| w[0].1 != w[1].1) {
            return Err(BenchError::CountMismatch {
                multiplier: m,
                counts,
            });
        }
        let committed = counts[0].1;
        let start = rows.len();
        for (mi, &model) in spec.models.iter().enumerate() {
            let (mean_s, stddev_s) = mean_stddev(&times[mi]);
            rows.push(BenchRow {
                circuit: spec.circuit.clone(),
                multiplier: m,
                model,
                transitions: spec.transitions,
                repetitions: spec.repetitions,
                committed,
                mean_s,
                stddev_s,
                overhead_pct: None,
            });
        }
        let base = rows[start..]
            .iter()
            .find(|r| r.model == DelayModel::Inertial)
            .map(|r| r.mean_s);
        if let (Some(x), false) = (base, spec.parallel) {
            for r in &mut rows[start..] {
                if r.model == DelayModel::IdmExp {
                    r.overhead_pct = Some(100.0 * (r.mean_s - x) / x);
                }
            }
        }
        progress(&rows[start..]);
    }
    Ok(rows)
}

/// Columns `circuit,multiplier,model,transitions,repetitions,committed,mean_s,stddev_s,overhead_pct`.
pub fn write_bench_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "circuit",
        "multiplier",
        "model",
        "transitions",
        "repetitions",
        "committed",
        "mean_s",
        "stddev_s",
        "overhead_pct",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.circuit.clone(),
            r.multiplier.to_string(),
            r.model.name().to_string(),
            r.transitions.to_string(),
            r.repetitions.to_string(),
            r.committed.to_string(),
            format!("{:.6}", r.mean_s),
            format!("{:.6}", r.stddev_s),
            r.overhead_pct.map_or(String::new(), |o| format!("{o:.2}")),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stimulus_splits_transitions_over_copies() {
        let c = builtin_circuit("adder:2x3").unwrap();
        let s = bench_stimulus(&c, 3, 100);
        assert_eq!(s.transition_count(), 100);
        let per_copy: Vec<usize> = (0..3)
            .map(|k| {
                s.edges
                    .iter()
                    .filter(|(n, _)| n.starts_with(&format!("u{k}.")))
                    .map(|(_, e)| e.len())
                    .sum()
            })
            .collect();
        assert_eq!(per_copy, vec![34, 33, 33]);
        crate::engine::check_stimulus(&c, &s).unwrap();
    }

    #[test]
    fn small_bench_reports_rows() {
        let spec = BenchSpec {
            multipliers: vec![1, 2],
            transitions: 200,
            repetitions: 2,
            ..BenchSpec::new("clocktree")
        };
        let rows = run_bench(&spec, |_| {}).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].committed, 200 * 227);
        assert!(rows[1].overhead_pct.is_some() && rows[0].overhead_pct.is_none());
        let csv = write_bench_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        let par = run_bench(&BenchSpec { parallel: true, ..spec }, |_| {}).unwrap();
        assert!(par.iter().all(|r| r.overhead_pct.is_none()));
    }

    #[test]
    fn spec_validation() {
        let mut s = BenchSpec::new("adder:4");
        s.multipliers = vec![0];
        assert!(s.validate().is_err());
        let mut s = BenchSpec::new("adder:4");
        s.repetitions = 0;
        assert!(s.validate().is_err());
    }
}
