// SPDX-License-Identifier: Apache-2.0
//! Python module `pyinvsim`. Times cross the boundary as integer
//! attoseconds and levels as 0/1.

use invsim::analysis::find_critical_width;
use invsim::engine::{run_sweep, simulate, SimConfig, SimError, SimResult};
use invsim::formats::{
    parse_delays, parse_netlist, parse_stimulus, write_trace_csv, write_vcd, FormatError,
};
use invsim::netlist::Circuit;
use invsim::recipes::{builtin_circuit, builtin_stimulus, RecipeError};
use invsim::{ChannelParams, DelayModel, ExpChannel, Level, TimeAs, Trace};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn sim_err(e: SimError) -> PyErr {
    match e {
        SimError::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn recipe_err(e: RecipeError) -> PyErr {
    match e {
        RecipeError::Sim(s) => sim_err(s),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn format_err(what: &str, e: FormatError) -> PyErr {
    PyValueError::new_err(format!("{what}: {e}"))
}

fn model(name: &str) -> PyResult<DelayModel> {
    name.parse().map_err(PyValueError::new_err)
}

fn config(model_name: &str, t_end_as: i64, max_events: u64) -> PyResult<SimConfig> {
    Ok(SimConfig {
        model: model(model_name)?,
        t_end: TimeAs(t_end_as),
        max_events,
        ..SimConfig::default()
    })
}

/// Result of one simulation.
#[pyclass(frozen)]
struct SimRun {
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    committed: u64,
    #[pyo3(get)]
    cancelled: u64,
    #[pyo3(get)]
    scheduled: u64,
    #[pyo3(get)]
    pending: u64,
    #[pyo3(get)]
    truncated: bool,
    trace: Trace,
}

impl From<SimResult> for SimRun {
    fn from(r: SimResult) -> Self {
        SimRun {
            status: r.status.name().to_string(),
            committed: r.committed,
            cancelled: r.cancelled,
            scheduled: r.scheduled,
            pending: r.pending_at_end,
            truncated: r.trace.truncated,
            trace: r.trace,
        }
    }
}

#[pymethods]
impl SimRun {
    /// Names of the recorded signals.
    fn signals(&self) -> Vec<String> {
        self.trace.signals.keys().cloned().collect()
    }

    fn initial(&self, signal: &str) -> PyResult<u8> {
        self.signal(signal).map(|s| s.initial.is_hi() as u8)
    }

    /// `(time_as, level)` pairs of `signal`.
    fn transitions(&self, signal: &str) -> PyResult<Vec<(i64, u8)>> {
        Ok(self
            .signal(signal)?
            .transitions
            .iter()
            .map(|t| (t.time.as_attos(), t.level.is_hi() as u8))
            .collect())
    }

    fn csv(&self) -> String {
        write_trace_csv(&self.trace)
    }

    #[pyo3(signature = (timescale = "fs"))]
    fn vcd(&self, timescale: &str) -> PyResult<String> {
        let ts = timescale.parse().map_err(PyValueError::new_err)?;
        Ok(write_vcd(&self.trace, ts).text)
    }

    fn __repr__(&self) -> String {
        format!(
            "SimRun(status={}, committed={}, cancelled={}, truncated={})",
            self.status, self.committed, self.cancelled, self.truncated
        )
    }
}

impl SimRun {
    fn signal(&self, name: &str) -> PyResult<&invsim::SignalTrace> {
        self.trace
            .signal(name)
            .ok_or_else(|| PyValueError::new_err(format!("signal `{name}` not recorded")))
    }
}

/// Simulate a built-in circuit under a built-in stimulus.
#[pyfunction]
#[pyo3(signature = (circuit, stimulus, model = "idm", t_end_as = 1_000_000_000_000_000, max_events = 10_000_000, seed = 0))]
fn simulate_builtin(
    circuit: &str,
    stimulus: &str,
    model: &str,
    t_end_as: i64,
    max_events: u64,
    seed: u64,
) -> PyResult<SimRun> {
    let c = builtin_circuit(circuit).map_err(recipe_err)?;
    let s = builtin_stimulus(stimulus, &c, seed).map_err(recipe_err)?;
    let r = simulate(&c, &s, &config(model, t_end_as, max_events)?).map_err(sim_err)?;
    Ok(r.into())
}

fn text_circuit(netlist: &str, delays: &str) -> PyResult<Circuit> {
    let mut c = parse_netlist(netlist).map_err(|e| format_err("netlist", e))?;
    let table = parse_delays(delays).map_err(|e| format_err("delays", e))?;
    c.annotate(&table)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(c)
}

/// Simulate a netlist, delay table and stimulus given as text.
#[pyfunction]
#[pyo3(signature = (netlist, delays, stimulus, model = "idm", t_end_as = 1_000_000_000_000_000, max_events = 10_000_000))]
fn simulate_text(
    netlist: &str,
    delays: &str,
    stimulus: &str,
    model: &str,
    t_end_as: i64,
    max_events: u64,
) -> PyResult<SimRun> {
    let c = text_circuit(netlist, delays)?;
    let s = parse_stimulus(stimulus, &c).map_err(|e| format_err("stimulus", e))?;
    let r = simulate(&c, &s, &config(model, t_end_as, max_events)?).map_err(sim_err)?;
    Ok(r.into())
}

/// Gate delay in attoseconds (exp channel plus the pure part) of an output
/// transition, `rising` or falling, for `T` in attoseconds; `None` stands for
/// `T` infinite. Returns `-inf` outside the domain.
#[pyfunction]
#[pyo3(signature = (delta_up_as, delta_down_as, rising, t_as, pure_as = 1_000_000, vth = 0.5))]
fn exp_delay(
    delta_up_as: i64,
    delta_down_as: i64,
    rising: bool,
    t_as: Option<f64>,
    pure_as: i64,
    vth: f64,
) -> PyResult<f64> {
    let p = ChannelParams::new(TimeAs(delta_up_as), TimeAs(delta_down_as))
        .with_pure(TimeAs(pure_as))
        .with_vth(vth);
    let ch = ExpChannel::derive(&p).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let level = if rising { Level::Hi } else { Level::Lo };
    let secs = ch.delta(level, t_as.map_or(f64::INFINITY, |t| t * 1e-18));
    Ok(secs * 1e18 + pure_as as f64)
}

/// First output pulse width for each input pulse width; `None` where the
/// pulse was cancelled.
#[pyfunction]
#[pyo3(signature = (circuit, input, output, widths_as, model = "idm", start_as = 10_000_000))]
fn sweep(
    circuit: &str,
    input: &str,
    output: &str,
    widths_as: Vec<i64>,
    model: &str,
    start_as: i64,
) -> PyResult<Vec<Option<i64>>> {
    let c = builtin_circuit(circuit).map_err(recipe_err)?;
    let widths: Vec<TimeAs> = widths_as.into_iter().map(TimeAs).collect();
    let cfg = config(model, 1_000_000_000_000_000, 10_000_000)?;
    let pts = run_sweep(&c, input, output, &widths, TimeAs(start_as), &cfg).map_err(sim_err)?;
    Ok(pts.iter().map(|p| p.delta_o.map(|d| d.as_attos())).collect())
}

/// Bracket `(low_as, high_as)` of the input pulse width on I above which the
/// built-in OR loop latches A HI.
#[pyfunction]
#[pyo3(signature = (circuit = "orloop:30", lo_as = 100_000_000, hi_as = 300_000_000, resolution_as = 1, model = "idm"))]
fn critical_width(
    circuit: &str,
    lo_as: i64,
    hi_as: i64,
    resolution_as: i64,
    model: &str,
) -> PyResult<(i64, i64)> {
    if resolution_as <= 0 {
        return Err(PyValueError::new_err("resolution must be positive"));
    }
    let c = builtin_circuit(circuit).map_err(recipe_err)?;
    let cfg = config(model, 1_000_000_000_000_000, 10_000_000)?;
    let latched = |w: TimeAs| -> Result<bool, SimError> {
        let r = invsim::recipes::or_loop_run(&c, w, &cfg)?;
        Ok(!r.trace.truncated
            && r.trace.signal("A").is_some_and(|s| s.final_level() == Level::Hi))
    };
    let (a, b) = find_critical_width(latched, TimeAs(lo_as), TimeAs(hi_as), TimeAs(resolution_as))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((a.as_attos(), b.as_attos()))
}

#[pymodule]
fn pyinvsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SimRun>()?;
    m.add_function(wrap_pyfunction!(simulate_builtin, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_text, m)?)?;
    m.add_function(wrap_pyfunction!(exp_delay, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(critical_width, m)?)?;
    Ok(())
}
