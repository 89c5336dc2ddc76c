use pyo3::ffi::c_str;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

#[test]
fn module_round_trip() {
    Python::attach(|py| {
        let m = wrap_pymodule!(qkt_oe_py::qkt_oe_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("qkt_oe", m).unwrap();
        py.run(
            c_str!(
                r#"
import math
top = qkt_oe.KickedTop(16, 3.0)
oe = top.oe_series(0.5, 0.5, qkt_oe.CoarseGraining.half_half(16), 4)
assert len(oe) == 5 and all(0.0 <= v <= math.log(16) + 1e-12 for v in oe)
assert qkt_oe.SpinSpace.from_j(2.0).dim == 5
try:
    qkt_oe.KickedTop(0, 1.0)
    raise AssertionError("no error")
except ValueError:
    pass
"#
            ),
            Some(&globals),
            None,
        )
        .unwrap();
    });
}
