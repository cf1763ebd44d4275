from __future__ import annotations

import numpy as np
import pytest

from src.criteria import (
    FINITE_TIME,
    GLOBAL,
    GUARANTEED,
    INCONCLUSIVE,
    OUTSIDE,
    calibrate_compression_scale,
    classify,
    compression_margin,
    rc_labels,
)
from src.eos import GasParams
from src.errors import InvalidInputError, NumericalError, SingularWeightError
from src.profiles import InitialData, cell_centers

ISO = GasParams(gamma=2.0)
NO_ENTROPY = GasParams(gamma=2.0, B=0.0)
FAST = {"entropy_samples": 33, "grid_points": 5}


def _line(cells: int, rho, u, S=0.0, x_min: float = -5.0, x_max: float = 5.0) -> InitialData:
    x = cell_centers(x_min, x_max, cells)
    fields = [np.broadcast_to(np.asarray(v(x) if callable(v) else v, dtype=float), x.shape).copy() for v in (rho, u, S)]
    return InitialData(x, *fields, periodic=False)


def test_rc_labels() -> None:
    labels = rc_labels(np.array([1.0, -1.0, 0.0, 1e-20]))
    assert labels.tolist() == ["R", "C", "N", "N"]
    assert rc_labels(np.zeros(3)).tolist() == ["N", "N", "N"]


def test_isentropic_rarefaction_is_global() -> None:
    report = classify(_line(128, 0.1, lambda x: 0.1 * np.tanh(x)), ISO, "isentropic")
    assert report.verdict == GLOBAL
    assert report.informal_compression is False
    assert report.witness is None and report.predicted_window is None
    counts = report.label_counts()
    assert counts["forward"]["C"] == 0 and counts["backward"]["C"] == 0


def test_isentropic_compression_is_finite_time() -> None:
    report = classify(_line(128, 0.1, lambda x: -0.1 * np.tanh(x)), ISO, "isentropic")
    assert report.verdict == FINITE_TIME
    assert report.informal_compression is True
    assert report.witness["value"] < 0.0
    assert abs(report.witness["x"]) < 1.0
    window = report.predicted_window
    assert window["points"] > 0
    assert 0.0 < window["lower"] <= window["upper"]
    summary = report.as_dict()
    assert summary["verdict"] == FINITE_TIME
    assert summary["characters"]["forward"]["C"] > 0
    frame = report.labels_frame()
    assert {"x", "forward", "backward", "xi0", "zeta0"} <= set(frame.columns)


def test_isentropic_sonic_data_are_outside_theory() -> None:
    report = classify(_line(32, 0.6, 0.0), ISO, "isentropic")
    assert report.verdict == OUTSIDE
    assert report.outside_theory
    assert not report.assumptions["sonic_bound"]["holds"]


def test_full_model_compression_is_guaranteed_without_entropy() -> None:
    report = classify(_line(64, 0.1, lambda x: -0.05 * np.tanh(x)), NO_ENTROPY, "full", **FAST)
    assert report.verdict == GUARANTEED
    assert report.thresholds["N1"] == 0.0 and report.thresholds["N2"] == 0.0
    assert report.witness["margin"] < 0.0
    assert report.constants["assumption_holds"]
    assert all(check["holds"] for check in report.assumptions.values())


def test_full_model_rarefaction_is_inconclusive() -> None:
    report = classify(_line(64, 0.1, lambda x: 0.05 * np.tanh(x)), NO_ENTROPY, "full", **FAST)
    assert report.verdict == INCONCLUSIVE
    assert report.informal_compression is False
    assert report.witness["margin"] > 0.0


def test_full_model_outside_when_box_is_not_subluminal() -> None:
    report = classify(_line(16, 0.1, 0.99), NO_ENTROPY, "full", **FAST)
    assert report.verdict == OUTSIDE
    assert not report.assumptions["subluminal_box"]["holds"]
    assert report.thresholds is None


def test_full_model_rejects_vacuum() -> None:
    data = _line(16, lambda x: np.clip(x, 0.0, None), 0.0)
    with pytest.raises(SingularWeightError):
        classify(data, NO_ENTROPY, "full", **FAST)
    with pytest.raises(InvalidInputError):
        classify(data, NO_ENTROPY, "plasma")


def _compression_family(s: float) -> InitialData:
    return _line(64, 0.1, lambda x: (0.05 - s) * np.tanh(x))


def test_compression_margin_sign() -> None:
    assert compression_margin(_compression_family(0.0), NO_ENTROPY, **FAST) > 0.0
    assert compression_margin(_compression_family(0.1), NO_ENTROPY, **FAST) < 0.0
    with pytest.raises(NumericalError):
        compression_margin(_line(16, 0.1, 0.99), NO_ENTROPY, **FAST)


def test_calibration_finds_the_sign_flip() -> None:
    # without entropy both thresholds vanish and the flip sits where the velocity ramp reverses
    result = calibrate_compression_scale(_compression_family, NO_ENTROPY, s_max=0.1, **FAST)
    assert result.flip == pytest.approx(0.05, rel=2e-3)
    assert result.scale == pytest.approx(1.25 * result.flip)
    assert not result.capped
    assert result.iterations > 0
    assert result.as_dict()["samples"][0] == [0.0, result.samples[0][1]]

    capped = calibrate_compression_scale(_compression_family, NO_ENTROPY, s_max=0.1, margin=3.0, **FAST)
    assert capped.capped and capped.scale == 0.1


def test_calibration_needs_a_bracket() -> None:
    with pytest.raises(NumericalError):
        calibrate_compression_scale(_compression_family, NO_ENTROPY, s_max=0.04, **FAST)


def test_isentropic_constant_state_is_neutral_and_global() -> None:
    report = classify(_line(32, 0.1, 0.2), ISO, "isentropic")
    assert report.verdict == GLOBAL
    assert set(report.forward.tolist()) == {"N"} and set(report.backward.tolist()) == {"N"}
