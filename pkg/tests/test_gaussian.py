import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvcluster.errors import ContractViolation, FormatError, NumericDomainError, ParameterError
from cvcluster.gaussian import (
    VAC,
    NullifierReport,
    SqueezingSpectrum,
    apply_symplectic,
    check_physical,
    cluster_covariance,
    cluster_unitary,
    input_covariance,
    inv_sqrt_spd,
    is_symplectic,
    nullifier_variances,
    nullifier_variances_closed_form,
    random_orthogonal,
    symplectic_form,
    symplectic_from_unitary,
)
from cvcluster.graphs import Graph, catalog_graph, gen_erdos_renyi

import oracles

EDGE = Graph(np.array([[0, 1], [1, 0]]))


@st.composite
def instances(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    g = Graph(oracles.random_adjacency(rng, n, draw(st.floats(0, 1))))
    return g, random_orthogonal(n, rng), SqueezingSpectrum(rng.uniform(-14, 3, n))


# -- matrix functions ------------------------------------------------------------


def test_inv_sqrt_examples():
    assert np.allclose(inv_sqrt_spd(np.eye(3)), np.eye(3))
    assert np.allclose(inv_sqrt_spd(4 * np.eye(2)), 0.5 * np.eye(2))
    a = EDGE.as_float()
    assert np.allclose(inv_sqrt_spd(a @ a + np.eye(2)), np.eye(2) / math.sqrt(2))


def test_inv_sqrt_rejects_bad_input():
    with pytest.raises(NumericDomainError):
        inv_sqrt_spd(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NumericDomainError):
        inv_sqrt_spd(np.diag([1.0, -1.0]))


@given(instances())
def test_inv_sqrt_identity(inst):
    g, _, _ = inst
    a = g.as_float()
    m = a @ a + np.eye(g.n)
    r = inv_sqrt_spd(m)
    assert np.allclose(r, r.T)
    assert np.abs(r @ r @ m - np.eye(g.n)).max() < 1e-9


# -- cluster unitary and symplectic ----------------------------------------------------


def test_cluster_unitary_examples():
    assert np.allclose(cluster_unitary(Graph.empty(3)), np.eye(3))
    u = cluster_unitary(EDGE)
    assert np.allclose(u.real, np.eye(2) / math.sqrt(2))
    assert np.allclose(u.imag, np.array([[0, 1], [1, 0]]) / math.sqrt(2))


def test_cluster_unitary_unitary_for_random_o(rng):
    g = catalog_graph("grid", rows=2, cols=3)
    u = cluster_unitary(g, random_orthogonal(6, rng))
    assert np.abs(u.conj().T @ u - np.eye(6)).max() < 1e-10


def test_symplectic_from_unitary_examples():
    assert np.allclose(symplectic_from_unitary(np.eye(3)), np.eye(6))
    s = symplectic_from_unitary(1j * np.eye(2))
    assert np.allclose(s, np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]]))
    s = symplectic_from_unitary(cluster_unitary(EDGE))
    assert np.allclose(s.T @ s, np.eye(4)) and is_symplectic(s)
    with pytest.raises(ContractViolation):
        symplectic_from_unitary(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(instances(max_n=8))
def test_symplectic_invariants(inst):
    g, o, _ = inst
    s = symplectic_from_unitary(cluster_unitary(g, o))
    om = symplectic_form(g.n)
    assert np.abs(s @ om @ s.T - om).max() < 1e-9
    assert np.abs(s @ s.T - np.eye(2 * g.n)).max() < 1e-9


# -- spectrum and input state --------------------------------------------------------


def test_input_covariance_examples():
    assert np.allclose(input_covariance(SqueezingSpectrum.equal(3, 0.0)), VAC * np.eye(6))
    sig = input_covariance(SqueezingSpectrum([-3.01]))
    assert sig[1, 1] == pytest.approx(0.25, rel=1e-3)
    assert sig[0, 0] == pytest.approx(1.0, rel=1e-3)


def test_uniform_spectrum_bounds():
    s = SqueezingSpectrum.uniform(1000, -14, -3, seed=0)
    assert s.p_variances.min() >= 0.5 * 10**-1.4 and s.p_variances.max() <= 0.5 * 10**-0.3
    assert SqueezingSpectrum.uniform(10, seed=4) == SqueezingSpectrum.uniform(10, seed=4)
    with pytest.raises(ParameterError):
        SqueezingSpectrum.uniform(5, -3, -14)


def test_standin_spectrum():
    s = SqueezingSpectrum.standin(48)
    assert s.best_db == -6.51
    assert s.db_values.mean() == pytest.approx(-3.48)
    assert np.all(np.diff(s.db_values[::2]) > 0)
    assert np.array_equal(s.db_values[::2], s.db_values[1::2])
    assert SqueezingSpectrum.standin(5).n == 5


def test_spectrum_file_roundtrip(tmp_path):
    s = SqueezingSpectrum.uniform(7, seed=1)
    path = tmp_path / "spec.txt"
    s.to_file(path)
    assert SqueezingSpectrum.from_file(path) == s
    path.write_text("# comment\n-3.0\n\n-4.5  # trailing\n")
    assert SqueezingSpectrum.from_file(path).db_values.tolist() == [-3.0, -4.5]
    path.write_text("-3\nabc\n")
    with pytest.raises(FormatError, match=":2:"):
        SqueezingSpectrum.from_file(path)
    path.write_text("# only comments\n")
    with pytest.raises(FormatError):
        SqueezingSpectrum.from_file(path)
    with pytest.raises(ParameterError):
        SqueezingSpectrum([np.nan])


# -- symplectic action ---------------------------------------------------------------


def test_apply_symplectic_examples():
    sig = input_covariance(SqueezingSpectrum([-6.0]))
    assert np.allclose(apply_symplectic(np.eye(2), sig), sig)
    fourier = symplectic_from_unitary(np.array([[1j]]))
    out = apply_symplectic(fourier, sig)
    assert out[0, 0] == pytest.approx(sig[1, 1]) and out[1, 1] == pytest.approx(sig[0, 0])
    with pytest.raises(ContractViolation):
        apply_symplectic(np.diag([2.0, 1.0]), sig)


@pytest.mark.parametrize("db", [-3.0, -5.0, -7.0])
def test_two_node_cluster_correlations(db):
    sig = cluster_covariance(EDGE, SqueezingSpectrum.equal(2, db))
    r = -db * math.log(10) / 20
    assert sig[0, 0] == pytest.approx(math.cosh(2 * r) / 2)
    assert sig[0, 3] == pytest.approx(math.sinh(2 * r) / 2)
    assert np.allclose(sig, oracles.cluster_cov(EDGE.adjacency, [db, db]))


# -- nullifiers --------------------------------------------------------------------------


def test_nullifier_examples():
    rep = nullifier_variances(VAC * np.eye(6), Graph.empty(3))
    assert np.allclose(rep.normalized, 1.0) and np.allclose(rep.db, 0.0)
    s = SqueezingSpectrum.equal(2, -4.2)
    rep = nullifier_variances(cluster_covariance(EDGE, s), EDGE)
    assert np.allclose(rep.db, -4.2)
    cf = nullifier_variances_closed_form(EDGE, np.eye(2), s)
    assert np.allclose(cf.raw_variances, 2 * s.p_variances)
    empty = nullifier_variances_closed_form(Graph.empty(3), np.eye(3), SqueezingSpectrum([-1.0, -2.0, -3.0]))
    assert np.allclose(empty.raw_variances, SqueezingSpectrum([-1.0, -2.0, -3.0]).p_variances)


def test_nullifier_dimension_mismatch():
    with pytest.raises(ContractViolation):
        nullifier_variances(np.eye(4), Graph.empty(3))
    with pytest.raises(ContractViolation):
        nullifier_variances_closed_form(Graph.empty(3), np.eye(2), SqueezingSpectrum.equal(3, -1))


def test_nullifier_report_domain():
    with pytest.raises(NumericDomainError):
        NullifierReport.from_raw([0.0, 1.0], [1, 1])
    rep = NullifierReport.from_raw([0.5, 0.1, 1.0], [0, 0, 0])
    assert rep.excluded_mean([1]) == pytest.approx(np.mean(rep.db[[0, 2]]))


def test_unoptimized_mean_tracks_input():
    # equal inputs: every nullifier db equals the input value for O = I
    g = gen_erdos_renyi(20, 0.3, 2)
    rep = nullifier_variances_closed_form(g, np.eye(20), SqueezingSpectrum.equal(20, -3.48))
    assert rep.mu == pytest.approx(-3.48)


@given(instances())
def test_two_path_consistency(inst):
    g, o, s = inst
    cov = nullifier_variances(cluster_covariance(g, s, o), g)
    cf = nullifier_variances_closed_form(g, o, s)
    assert np.abs(cov.raw_variances - cf.raw_variances).max() <= 1e-9 * max(1.0, cf.raw_variances.max())
    assert np.allclose(cf.db, oracles.nullifier_db(oracles.cluster_cov(g.adjacency, s.db_values, o), g.adjacency))


@given(instances(max_n=8), st.integers(0, 2**31))
def test_anti_squeezing_independence(inst, seed):
    g, o, s = inst
    sig_in = input_covariance(s)
    n = g.n
    sig_in[:n, :n] = np.diag(np.random.default_rng(seed).uniform(0.1, 50, n))
    sym = symplectic_from_unitary(cluster_unitary(g, o))
    a = nullifier_variances(apply_symplectic(sym, sig_in), g)
    b = nullifier_variances(cluster_covariance(g, s, o), g)
    assert np.abs(a.raw_variances - b.raw_variances).max() < 1e-10 * max(1.0, b.raw_variances.max())


@given(instances())
def test_floor_bound(inst):
    g, o, s = inst
    rep = nullifier_variances_closed_form(g, o, s)
    assert rep.normalized.min() >= s.linear.min() - 1e-9


@given(st.lists(st.floats(1e-6, 1e6), min_size=2, max_size=10, unique=True))
def test_db_monotone(values):
    rep = NullifierReport.from_raw(values, np.zeros(len(values)))
    order = np.argsort(values)
    assert np.all(np.diff(rep.db[order]) > 0)


@given(instances(max_n=10))
def test_cluster_state_physical_and_pure(inst):
    g, o, s = inst
    rep = check_physical(cluster_covariance(g, s, o))
    assert rep.ok and rep.is_pure()


def test_check_physical_detects_violation():
    rep = check_physical(np.diag([0.1, 0.1]))
    assert rep.symmetric and rep.positive_definite and not rep.uncertainty
    assert not check_physical(np.array([[1.0, 0.2], [0.0, 1.0]])).symmetric
    assert not check_physical(np.eye(2)).is_pure()


def test_random_orthogonal(rng):
    o = random_orthogonal(7, rng)
    assert np.allclose(o.T @ o, np.eye(7))
    assert np.allclose(random_orthogonal(4, 3), random_orthogonal(4, 3))
