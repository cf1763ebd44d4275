from __future__ import annotations

import numpy as np
import pytest

from src.characteristics import (
    CharTrace,
    count_crossings,
    family_speeds,
    max_pair_crossings,
    trace_characteristic,
    trace_many,
)
from src.eos import GasParams
from src.errors import InvalidInputError
from src.profiles import InitialData, cell_centers
from src.solver import solve

PARAMS = GasParams(gamma=2.0, B=0.2)


def _data(cells: int, rho, u, S=0.0, x_min: float = 0.0, x_max: float = 2.0 * np.pi, periodic: bool = True) -> InitialData:
    x = cell_centers(x_min, x_max, cells)
    fields = [np.broadcast_to(np.asarray(v(x) if callable(v) else v, dtype=float), x.shape).copy() for v in (rho, u, S)]
    return InitialData(x, *fields, periodic=periodic)


def test_constant_state_paths_are_straight() -> None:
    hist = solve(_data(64, 0.1, 0.3), PARAMS, "isentropic", 2.0, output_cadence=0.25)
    speeds = family_speeds(hist.snapshots[0], "isentropic", PARAMS)
    for family in (1, 2):
        trace = trace_characteristic(hist, family, 1.0)
        assert not trace.truncated
        np.testing.assert_allclose(trace.x, 1.0 + speeds[family][0] * trace.t, rtol=1e-12)
        assert trace.drift("w") == pytest.approx(0.0, abs=1e-12)
        assert trace.drift("z") == pytest.approx(0.0, abs=1e-12)
    assert speeds[1][0] < 0.3 < speeds[2][0]


def test_full_model_family_numbering() -> None:
    hist = solve(_data(32, 0.1, 0.2, 0.05), PARAMS, "full", 0.1)
    speeds = family_speeds(hist.final, "full", PARAMS)
    np.testing.assert_array_equal(speeds[1], hist.final.u)
    assert np.all(speeds[3] < speeds[1]) and np.all(speeds[1] < speeds[2])


def test_riemann_invariant_is_carried_by_its_family() -> None:
    hist = solve(_data(256, 0.1, lambda x: 0.02 * np.sin(x)), PARAMS, "isentropic", 2.0,
                 output_cadence=2.0 * 2.0 * np.pi / 256)
    fast = trace_characteristic(hist, 2, 1.0)
    slow = trace_characteristic(hist, 1, 1.0)
    assert fast.drift("z") < 0.1 * fast.drift("w")
    assert slow.drift("w") < 0.1 * slow.drift("z")
    assert np.all(np.isfinite(fast.quantities["xi"]))
    assert fast.quantities["cumulative_integral"][0] == 0.0
    assert np.all(np.diff(fast.quantities["cumulative_integral"]) > 0.0)


def test_outflow_traces_truncate() -> None:
    hist = solve(_data(64, 0.1, 0.5, x_min=0.0, x_max=1.0, periodic=False), PARAMS, "isentropic", 4.0,
                 output_cadence=0.1)
    trace = trace_characteristic(hist, 2, 0.5)
    assert trace.truncated
    assert trace.t.size < hist.times.size
    assert trace.x[-1] <= 1.0


def test_trace_validation() -> None:
    hist = solve(_data(32, 0.1, 0.0), PARAMS, "isentropic", 0.5, output_cadence=0.25)
    with pytest.raises(InvalidInputError):
        trace_characteristic(hist, 3, 1.0)
    one = solve(_data(32, 0.1, 0.0), PARAMS, "isentropic", 0.5)
    one.snapshots = one.snapshots[:1]
    with pytest.raises(InvalidInputError):
        trace_characteristic(one, 1, 1.0)
    outflow = solve(_data(32, 0.1, 0.0, periodic=False), PARAMS, "isentropic", 0.5, output_cadence=0.25)
    with pytest.raises(InvalidInputError):
        trace_characteristic(outflow, 1, 10.0)


def test_full_model_trace_quantities() -> None:
    data = _data(128, 0.1, lambda x: 0.01 * np.sin(x), lambda x: 0.05 * np.cos(x))
    hist = solve(data, PARAMS, "full", 0.5, output_cadence=0.1)
    traces = trace_many(hist, [1.0, 4.0])
    assert [t.family for t in traces] == [1, 1, 2, 2, 3, 3]
    for trace in traces:
        for name in ("r", "q", "theta1", "theta2", "coefficient"):
            assert np.all(np.isfinite(trace.quantities[name]))
        frame = trace.as_frame()
        assert {"t", "x", "rho", "u", "w", "z", "S", "r", "q", "theta1", "theta2", "cumulative_integral"} <= set(frame)
    particle = traces[0]
    np.testing.assert_allclose(particle.quantities["coefficient"], 0.0)
    assert particle.drift("theta1") < 0.05 * np.max(np.abs(particle.quantities["theta1"]))


def test_gradients_without_a_gap_floor_are_undefined_and_independent() -> None:
    data = _data(32, 0.1, 0.1, lambda x: 0.05 * np.cos(x))
    hist = solve(data, PARAMS, "full", 0.2, output_cadence=0.1)
    trace = trace_characteristic(hist, 3, 1.0, eps=0.0)
    r, q = trace.quantities["r"], trace.quantities["q"]
    assert r is not q
    assert np.all(np.isnan(r)) and np.all(np.isnan(q))
    r[0] = 1.0
    assert np.isnan(q[0])


def _trace(x: list[float]) -> CharTrace:
    t = np.arange(len(x), dtype=float)
    return CharTrace(family=1, model="isentropic", t=t, x=np.array(x), w=np.zeros(len(x)), z=np.zeros(len(x)))


def test_count_crossings() -> None:
    a = _trace([0.0, 1.0, 2.0, 3.0])
    b = _trace([1.0, 0.5, 2.5, 2.0])
    assert count_crossings(a, b) == 3
    assert count_crossings(a, _trace([5.0, 5.0, 5.0])) == 0
    assert count_crossings(a, _trace([1.0, 1.0, 3.0, 3.0])) == 0
    assert max_pair_crossings([a], [b, _trace([5.0, 5.0])]) == 3
    assert max_pair_crossings([], [b]) == 0
