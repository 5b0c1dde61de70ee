//! Python bindings: device generation, synthesis, circuit export and
//! memory-experiment simulation.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use surfweave::allocate::AllocationMode;
use surfweave::arch::{Architecture, DeviceGraph};
use surfweave::circuit::circuit_for;
use surfweave::driver::{self, SweepConfig};
use surfweave::sim::{NoiseModel, SimResult, DEFAULT_P_IDLE};
use surfweave::Error;

create_exception!(surfweave, InfeasibleError, PyException, "No layout or bridge tree exists for the request.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Infeasible(_) => InfeasibleError::new_err(e.to_string()),
        Error::InvalidArgument(_) | Error::InvalidDimension(_) | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn arch(name: &str) -> PyResult<Architecture> {
    name.parse().map_err(to_py)
}

fn mode(name: &str) -> PyResult<AllocationMode> {
    name.parse().map_err(to_py)
}

/// A device coupling graph on the doubled integer grid.
#[pyclass(name = "Device", frozen)]
struct PyDevice(DeviceGraph);

#[pymethods]
impl PyDevice {
    /// Rectangular patch of `rows` x `cols` cells of an architecture.
    #[staticmethod]
    fn generate(architecture: &str, rows: usize, cols: usize) -> PyResult<Self> {
        Ok(PyDevice(arch(architecture)?.generate(rows, cols).map_err(to_py)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDevice(DeviceGraph::from_json(text).map_err(to_py)?))
    }

    #[getter]
    fn name(&self) -> &str {
        self.0.name()
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.num_qubits()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().iter().copied().collect()
    }

    fn coord(&self, q: usize) -> PyResult<(i32, i32)> {
        if q >= self.0.num_qubits() {
            return Err(PyValueError::new_err(format!("no qubit {q}")));
        }
        Ok(self.0.coord(q))
    }

    fn degree(&self, q: usize) -> PyResult<usize> {
        self.coord(q)?;
        Ok(self.0.degree(q))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Device({:?}, qubits={}, edges={})", self.0.name(), self.0.num_qubits(), self.0.edges().len())
    }
}

/// Logical error count of a simulation with its 95% Wilson interval.
#[pyclass(name = "SimResult", frozen, get_all)]
struct PySimResult {
    shots: u64,
    logical_errors: u64,
    rate: f64,
    ci_low: f64,
    ci_high: f64,
}

impl From<SimResult> for PySimResult {
    fn from(r: SimResult) -> Self {
        PySimResult { shots: r.shots, logical_errors: r.logical_errors, rate: r.rate, ci_low: r.ci_low, ci_high: r.ci_high }
    }
}

#[pymethods]
impl PySimResult {
    fn __repr__(&self) -> String {
        format!(
            "SimResult(shots={}, logical_errors={}, rate={:.3e}, ci=[{:.3e}, {:.3e}])",
            self.shots, self.logical_errors, self.rate, self.ci_low, self.ci_high
        )
    }
}

/// Output of the synthesis pipeline for one code.
#[pyclass(name = "Synthesis", frozen)]
struct PySynthesis(driver::Synthesis);

#[pymethods]
impl PySynthesis {
    #[getter]
    fn device(&self) -> PyDevice {
        PyDevice(self.0.graph.clone())
    }

    #[getter]
    fn distance(&self) -> usize {
        self.0.report.distance
    }

    #[getter]
    fn data_qubits(&self) -> Vec<usize> {
        self.0.layout.data_qubits()
    }

    #[getter]
    fn num_stabilizers(&self) -> usize {
        self.0.layout.syndrome_rects.len()
    }

    #[getter]
    fn total_cycle_time(&self) -> usize {
        self.0.report.total_cycle_time
    }

    #[getter]
    fn total_qubits(&self) -> usize {
        self.0.report.utilization.total
    }

    /// Stabilizer ids per partition, in execution order.
    #[getter]
    fn partitions(&self) -> Vec<Vec<usize>> {
        self.0.report.partitions.clone()
    }

    /// X-stabilizer averages `(bridge qubits, CNOTs, depth)`.
    #[getter]
    fn x_averages(&self) -> (f64, f64, f64) {
        let a = &self.0.report.x_averages;
        (a.bridge_qubits, a.cnot_count, a.depth)
    }

    fn checks_passed(&self) -> bool {
        self.0.report.checks.passed()
    }

    fn report_json(&self) -> String {
        self.0.report.to_json()
    }

    fn layout_json(&self) -> String {
        self.0.layout.to_json()
    }

    /// Layered gate text of one full cycle.
    fn export_cycle(&self) -> PyResult<String> {
        self.0.export_cycle().map_err(to_py)
    }

    /// Layered gate text of one stabilizer's measurement circuit.
    fn stabilizer_circuit(&self, id: usize) -> PyResult<String> {
        let rect = self
            .0
            .layout
            .syndrome_rects
            .get(id)
            .ok_or_else(|| PyValueError::new_err(format!("no stabilizer {id}")))?;
        let choice = self.0.schedule.partitions.iter().flatten().find(|e| self.0.tasks[e.task].id == id).map_or(0, |e| e.choice);
        Ok(circuit_for(rect, choice).map_err(to_py)?.to_text())
    }

    /// Memory experiment over `rounds` cycles (default: the distance).
    #[pyo3(signature = (p_gate, shots, seed=0, p_idle=DEFAULT_P_IDLE, rounds=None))]
    fn simulate(&self, py: Python<'_>, p_gate: f64, shots: u64, seed: u64, p_idle: f64, rounds: Option<usize>) -> PyResult<PySimResult> {
        let noise = NoiseModel::new(p_gate, p_idle).map_err(to_py)?;
        let r = py.detach(|| driver::simulate(&self.0, noise, rounds, shots, seed)).map_err(to_py)?;
        Ok(r.into())
    }

    fn __repr__(&self) -> String {
        let r = &self.0.report;
        format!("Synthesis({} {} d={}, qubits={}, cycle={})", r.arch, r.mode, r.distance, r.utilization.total, r.total_cycle_time)
    }
}

/// Runs allocation, bridge-tree search, circuit synthesis and scheduling.
#[pyfunction]
#[pyo3(signature = (architecture, distance, mode="pair3"))]
fn synth(py: Python<'_>, architecture: &str, distance: usize, mode: &str) -> PyResult<PySynthesis> {
    let (a, m) = (arch(architecture)?, self::mode(mode)?);
    Ok(PySynthesis(py.detach(|| driver::synth(a, distance, m)).map_err(to_py)?))
}

/// Logical error rates over a `p_gate` grid. Returns
/// `(rows, threshold)` where rows are `(distance, p_gate, SimResult)` and
/// threshold is the estimated crossing or `None`.
#[pyfunction]
#[pyo3(signature = (architecture, p_gate, shots, seed=0, distances=vec![3, 5], mode="pair3", p_idle=DEFAULT_P_IDLE))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn sweep(
    py: Python<'_>,
    architecture: &str,
    p_gate: Vec<f64>,
    shots: u64,
    seed: u64,
    distances: Vec<usize>,
    mode: &str,
    p_idle: f64,
) -> PyResult<(Vec<(usize, f64, PySimResult)>, Option<f64>)> {
    if shots == 0 {
        return Err(PyValueError::new_err("shots must be at least 1"));
    }
    let (a, m) = (arch(architecture)?, self::mode(mode)?);
    let cfg = SweepConfig { p_gate, shots, seed, distances, p_idle };
    let rows = py.detach(|| driver::sweep(a, m, &cfg));
    let threshold = driver::threshold_from_rows(&rows).ok().and_then(|t| t.value());
    let out = rows
        .into_iter()
        .map(|r| match r.result {
            Ok(s) => Ok((r.distance, r.p_gate, s.into())),
            Err(e) => Err(PyRuntimeError::new_err(format!("d={} p={}: {e}", r.distance, r.p_gate))),
        })
        .collect::<PyResult<_>>()?;
    Ok((out, threshold))
}

#[pymodule]
#[pyo3(name = "surfweave")]
pub fn surfweave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDevice>()?;
    m.add_class::<PySynthesis>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    Ok(())
}
