import math

import numpy as np
import pytest

from ringmes import ModelParams, available_backends, run_protocol
from ringmes import _backend
from ringmes.dynamics import RampGenerator, ground_state, propagate

C8U = ModelParams(3, 2, C=1.0, U=0.125, V=0.125)


def test_python_backend_always_available():
    assert "python" in available_backends()
    assert _backend.default_backend() in available_backends()
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_env_forces_python(monkeypatch):
    monkeypatch.setenv("RINGMES_PURE_PYTHON", "1")
    assert _backend.default_backend() == "python"


@pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")
def test_backends_agree():
    a = run_protocol(C8U, 0.05, sample_count=11, backend="compiled")
    b = run_protocol(C8U, 0.05, sample_count=11, backend="python")
    assert np.abs(a.final_state - b.final_state).max() < 1e-12
    assert a.trajectory.stats["accepted"] == b.trajectory.stats["accepted"]
    assert a.trajectory.stats["rejected"] == b.trajectory.stats["rejected"]


@pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")
def test_backends_agree_sparse_path():
    # joint dimension above the dense threshold of the numpy kernel
    p = ModelParams(5, 3, C=1.0, U=0.3, V=0.3)
    psi0, _, _ = ground_state(p, 0.0)
    gen = RampGenerator.from_params(p)
    ts = [0.0, 1.0, 2.0]
    a, _ = propagate(gen, psi0, ts, alpha=0.2, backend="compiled")
    b, _ = propagate(gen, psi0, ts, alpha=0.2, backend="python")
    assert np.abs(a - b).max() < 1e-12
