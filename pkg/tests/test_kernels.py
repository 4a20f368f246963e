import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvcluster import _kernels_py
from cvcluster._backend import BACKEND, available_backends
from cvcluster.graphs import catalog_graph
from cvcluster.routing import Partition, RoutingProblem

BACKENDS = available_backends()


def grid_problem():
    return RoutingProblem.from_graph(catalog_graph("grid", rows=2, cols=3), Partition((0, 1, 2), (3, 4, 5)), (0, 3))


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert BACKEND in BACKENDS


def test_env_var_forces_python(monkeypatch):
    import importlib

    import cvcluster._backend as b

    monkeypatch.setenv("CVCLUSTER_PURE_PYTHON", "1")
    try:
        assert importlib.reload(b).BACKEND == "python"
    finally:
        monkeypatch.delenv("CVCLUSTER_PURE_PYTHON")
        importlib.reload(b)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_expi_is_unitary(backend, d, rng):
    u = backend.expi_hermitian(rng.uniform(-np.pi, np.pi, (5, d * d)), d)
    for m in u:
        assert np.abs(m.conj().T @ m - np.eye(d)).max() < 1e-10


def test_expi_zero_is_identity(backend):
    assert np.allclose(backend.expi_hermitian(np.zeros((1, 9)), 3)[0], np.eye(3))


def test_hermitian_layout(backend):
    h = backend.hermitian_from_params(np.array([[1, 2, 3, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6]]), 3)[0]
    assert np.allclose(h, h.conj().T)
    assert np.allclose(np.diag(h).real, [1, 2, 3])
    assert h[0, 1] == pytest.approx(0.1 + 0.4j) and h[0, 2] == pytest.approx(0.2 + 0.5j)
    assert h[1, 2] == pytest.approx(0.3 + 0.6j)


@given(st.integers(0, 2**31), st.floats(0.01, 20))
def test_backends_agree_on_expi(seed, scale):
    theta = np.random.default_rng(seed).standard_normal((3, 9)) * scale
    ref = _kernels_py.expi_hermitian(theta, 3)
    for k in BACKENDS.values():
        assert np.abs(k.expi_hermitian(theta, 3) - ref).max() < 1e-10


@given(st.integers(0, 2**31))
def test_backends_agree_on_residuals(seed):
    prob = grid_problem()
    thetas = np.random.default_rng(seed).uniform(-np.pi, np.pi, (8, prob.dim))
    ref = prob.fitness_batch(thetas, backend=_kernels_py)
    for k in BACKENDS.values():
        assert np.allclose(prob.fitness_batch(thetas, backend=k), ref, rtol=1e-10, atol=1e-12)


def test_residuals_match_direct_computation(backend, rng):
    prob = grid_problem()
    theta = rng.uniform(-np.pi, np.pi, prob.dim)
    u_a, u_b = prob.unitaries(theta)
    sigma2 = prob.transformed(u_a, u_b)
    want = np.linalg.norm(sigma2[prob.rows] - prob.target_rows)
    assert prob.fitness_batch(theta[None], backend=backend)[0] == pytest.approx(want, rel=1e-10)


def test_shape_errors(backend):
    prob = grid_problem()
    with pytest.raises(ValueError):
        backend.routing_residuals(np.zeros((1, 5)), prob.sigma1, prob.rows, prob.target_rows, 3, 3)
    with pytest.raises(ValueError):
        backend.expi_hermitian(np.zeros((1, 5)), 2)
