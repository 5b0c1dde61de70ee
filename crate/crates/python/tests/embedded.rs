use pyo3::ffi::c_str;
use pyo3::prelude::*;
use surfweave_py::surfweave_py;

#[test]
fn module_runs_in_an_embedded_interpreter() {
    pyo3::append_to_inittab!(surfweave_py);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import surfweave
s = surfweave.synth("square", 3, mode="center4")
assert s.total_cycle_time == 8 and s.x_averages == (1.0, 4.0, 8.0)
assert s.simulate(0.0, shots=64).logical_errors == 0
try:
    surfweave.synth("hexagon", 3, mode="center4")
except surfweave.InfeasibleError:
    pass
else:
    raise AssertionError("expected InfeasibleError")
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
