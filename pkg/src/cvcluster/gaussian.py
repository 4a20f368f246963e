"""Covariance-matrix description of Gaussian cluster states.

Quadratures are ordered ``(q_1..q_N, p_1..p_N)`` throughout and the vacuum
variance is ``VAC = 1/2`` (``[q, p] = i``). A cluster with adjacency ``V`` is
built from p-squeezed vacua by the passive unitary

    U = (I + iV) (V^2 + I)^(-1/2) O,

whose real and imaginary parts form the orthogonal symplectic
``[[Re U, -Im U], [Im U, Re U]]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation, FormatError, NumericDomainError, ParameterError
from .graphs import Graph

__all__ = [
    "VAC",
    "SqueezingSpectrum",
    "NullifierReport",
    "PhysicalityReport",
    "symplectic_form",
    "inv_sqrt_spd",
    "sqrt_spd",
    "cluster_unitary",
    "symplectic_from_unitary",
    "is_symplectic",
    "input_covariance",
    "apply_symplectic",
    "cluster_covariance",
    "nullifier_matrix",
    "nullifier_variances",
    "nullifier_variances_closed_form",
    "check_physical",
    "random_orthogonal",
]

VAC = 0.5


@dataclass(frozen=True, eq=False)
class SqueezingSpectrum:
    """Per-mode input squeezing in dB; negative values are below vacuum noise.

    Mode ``k`` has p-variance ``VAC * 10**(db_k/10)`` and q-variance
    ``VAC / 10**(db_k/10)`` (a pure squeezed vacuum).
    """

    db_values: np.ndarray

    def __post_init__(self):
        db = np.array(self.db_values, dtype=float).reshape(-1)
        if db.size < 1:
            raise ParameterError("a spectrum needs at least one mode")
        if not np.all(np.isfinite(db)):
            raise ParameterError("squeezing values must be finite")
        db.setflags(write=False)
        object.__setattr__(self, "db_values", db)

    def __len__(self):
        return self.db_values.size

    def __eq__(self, other):
        if not isinstance(other, SqueezingSpectrum):
            return NotImplemented
        return np.array_equal(self.db_values, other.db_values)

    @property
    def n(self) -> int:
        return self.db_values.size

    @property
    def linear(self) -> np.ndarray:
        """Vacuum-normalised p-variances ``10**(db/10)``."""
        return 10.0 ** (self.db_values / 10.0)

    @property
    def p_variances(self) -> np.ndarray:
        return VAC * self.linear

    @property
    def q_variances(self) -> np.ndarray:
        return VAC / self.linear

    @property
    def best_db(self) -> float:
        return float(self.db_values.min())

    def permuted(self, perm) -> SqueezingSpectrum:
        return SqueezingSpectrum(self.db_values[np.asarray(perm)])

    @classmethod
    def uniform(cls, n: int, lo_db: float = -14.0, hi_db: float = -3.0, seed=None) -> SqueezingSpectrum:
        """``n`` values drawn uniformly from ``[lo_db, hi_db]``."""
        if lo_db > hi_db:
            raise ParameterError(f"empty dB range [{lo_db}, {hi_db}]")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return cls(rng.uniform(lo_db, hi_db, size=n))

    @classmethod
    def equal(cls, n: int, db: float) -> SqueezingSpectrum:
        return cls(np.full(n, float(db)))

    @classmethod
    def standin(cls, n: int = 48, best_db: float = -6.51, mean_db: float = -3.48) -> SqueezingSpectrum:
        """Deterministic stand-in for a measured frequency-comb supermode list.

        Values come in degenerate pairs (as supermode spectra of a
        synchronously pumped OPO typically do), descend linearly in dB from
        ``best_db`` and average to ``mean_db``. With odd ``n`` the last value
        is unpaired.
        """
        pairs = (n + 1) // 2
        worst = 2.0 * mean_db - best_db
        levels = np.linspace(best_db, worst, pairs) if pairs > 1 else np.array([best_db])
        return cls(np.repeat(levels, 2)[:n])

    @classmethod
    def from_file(cls, path) -> SqueezingSpectrum:
        """One dB value per line; blank lines and ``#`` comments ignored."""
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise FormatError(f"cannot read spectrum file {path}: {exc}") from exc
        values = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: not a number: {raw!r}") from None
        if not values:
            raise FormatError(f"{path}: no squeezing values found")
        return cls(np.array(values))

    def to_file(self, path) -> None:
        Path(path).write_text("".join(f"{v!r}\n" for v in self.db_values.tolist()))


@dataclass(frozen=True)
class NullifierReport:
    """Per-node nullifier variances and their dB average.

    ``normalized`` divides each raw variance by ``(1 + deg_i) * VAC``, the
    value the same nullifier takes on vacuum input.
    """

    raw_variances: np.ndarray
    normalized: np.ndarray
    db: np.ndarray
    mu: float

    @classmethod
    def from_raw(cls, raw, degrees) -> NullifierReport:
        raw = np.asarray(raw, dtype=float)
        norm = raw / ((1.0 + np.asarray(degrees, dtype=float)) * VAC)
        if np.any(norm <= 0):
            raise NumericDomainError("nullifier variance must be positive")
        db = 10.0 * np.log10(norm)
        return cls(raw_variances=raw, normalized=norm, db=db, mu=float(db.mean()))

    def excluded_mean(self, nodes) -> float:
        """Mean dB over every node not listed in ``nodes``."""
        mask = np.ones(self.db.size, dtype=bool)
        mask[list(nodes)] = False
        if not mask.any():
            raise ParameterError("no nodes left after exclusion")
        return float(self.db[mask].mean())


@dataclass(frozen=True)
class PhysicalityReport:
    symmetric: bool
    positive_definite: bool
    uncertainty: bool
    det_2sigma: float
    min_uncertainty_eigenvalue: float

    @property
    def ok(self) -> bool:
        return self.symmetric and self.positive_definite and self.uncertainty

    def is_pure(self, tol: float = 1e-6) -> bool:
        return abs(self.det_2sigma - 1.0) <= tol


def symplectic_form(n: int) -> np.ndarray:
    """``Omega = [[0, I], [-I, 0]]`` for ``n`` modes in (q, p) ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _check_symmetric(m, what, tol=1e-10):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NumericDomainError(f"{what} must be square, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > tol * scale:
        raise NumericDomainError(f"{what} is not symmetric")
    return 0.5 * (m + m.T)


def _spd_power(m, power, tol):
    m = _check_symmetric(m, "matrix")
    w, q = np.linalg.eigh(m)
    floor = tol * max(1.0, float(np.abs(w).max()))
    if w.min() <= floor:
        raise NumericDomainError(f"matrix is not positive definite (min eigenvalue {w.min():.3e})")
    out = (q * w**power) @ q.T
    return 0.5 * (out + out.T)


def inv_sqrt_spd(m, tol: float = 1e-12) -> np.ndarray:
    """Symmetric inverse square root of a symmetric positive-definite matrix."""
    return _spd_power(m, -0.5, tol)


def sqrt_spd(m, tol: float = 1e-12) -> np.ndarray:
    return _spd_power(m, 0.5, tol)


def _adjacency(v) -> np.ndarray:
    return v.as_float() if isinstance(v, Graph) else np.asarray(v, dtype=float)


def cluster_unitary(v, o=None) -> np.ndarray:
    """Passive unitary turning p-squeezed vacua into the cluster of ``v``.

    ``v`` is a :class:`Graph` or an adjacency matrix; ``o`` defaults to the
    identity.
    """
    a = _adjacency(v)
    n = a.shape[0]
    o = np.eye(n) if o is None else np.asarray(o, dtype=float)
    if o.shape != (n, n):
        raise ContractViolation(f"orthogonal matrix has shape {o.shape}, expected {(n, n)}")
    r = inv_sqrt_spd(a @ a + np.eye(n)) @ o
    return r + 1j * (a @ r)


def _check_unitary(u, tol):
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ContractViolation(f"unitary must be square, got shape {u.shape}")
    err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if err > tol:
        raise ContractViolation(f"matrix is not unitary (|U^H U - I| = {err:.2e})")
    return u


def symplectic_from_unitary(u, tol: float = 1e-8) -> np.ndarray:
    """Orthogonal symplectic ``[[Re U, -Im U], [Im U, Re U]]`` of a passive unitary."""
    u = _check_unitary(u, tol)
    return np.block([[u.real, -u.imag], [u.imag, u.real]])


def is_symplectic(s, tol: float = 1e-8) -> bool:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
        return False
    om = symplectic_form(s.shape[0] // 2)
    return bool(np.abs(s @ om @ s.T - om).max() <= tol)


def input_covariance(spectrum: SqueezingSpectrum) -> np.ndarray:
    """Diagonal covariance of independent squeezed vacua."""
    return np.diag(np.concatenate([spectrum.q_variances, spectrum.p_variances]))


def apply_symplectic(s, sigma, tol: float = 1e-8) -> np.ndarray:
    """Return ``S sigma S^T``; ``s`` must be symplectic within ``tol``."""
    s = np.asarray(s, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if s.shape != sigma.shape:
        raise ContractViolation(f"shape mismatch: S {s.shape} vs sigma {sigma.shape}")
    if not is_symplectic(s, tol):
        raise ContractViolation("transformation is not symplectic")
    out = s @ sigma @ s.T
    return 0.5 * (out + out.T)


def cluster_covariance(v, spectrum: SqueezingSpectrum, o=None) -> np.ndarray:
    """Covariance of the cluster of ``v`` built from ``spectrum`` with freedom ``o``."""
    a = _adjacency(v)
    if a.shape[0] != spectrum.n:
        raise ContractViolation(f"graph has {a.shape[0]} nodes but spectrum has {spectrum.n} modes")
    s = symplectic_from_unitary(cluster_unitary(a, o))
    return apply_symplectic(s, input_covariance(spectrum))


def nullifier_matrix(v) -> np.ndarray:
    """Rows are the coefficient vectors of ``p_i - sum_{j in N(i)} q_j``."""
    a = _adjacency(v)
    return np.hstack([-a, np.eye(a.shape[0])])


def nullifier_variances(sigma, v) -> NullifierReport:
    """Nullifier variances read off a covariance matrix."""
    a = _adjacency(v)
    sigma = np.asarray(sigma, dtype=float)
    n = a.shape[0]
    if sigma.shape != (2 * n, 2 * n):
        raise ContractViolation(f"covariance shape {sigma.shape} does not match a {n}-node graph")
    d = nullifier_matrix(a)
    raw = np.einsum("ij,jk,ik->i", d, sigma, d)
    return NullifierReport.from_raw(raw, a.sum(axis=1))


def nullifier_variances_closed_form(v, o, spectrum: SqueezingSpectrum) -> NullifierReport:
    """Same report computed without the covariance matrix.

    The nullifier vector equals ``M^(1/2) O p_in`` with ``M = V^2 + I``, so the
    variances are the diagonal of ``M^(1/2) O D_p O^T M^(1/2)``.
    """
    a = _adjacency(v)
    n = a.shape[0]
    o = np.asarray(o, dtype=float)
    if o.shape != (n, n) or spectrum.n != n:
        raise ContractViolation("graph, orthogonal matrix and spectrum sizes differ")
    t = sqrt_spd(a @ a + np.eye(n)) @ o
    raw = (t * t) @ spectrum.p_variances
    return NullifierReport.from_raw(raw, a.sum(axis=1))


def check_physical(sigma, sym_tol: float = 1e-10, unc_tol: float = 1e-8) -> PhysicalityReport:
    """Symmetry, positivity and uncertainty checks plus ``det(2 sigma)``.

    A pure Gaussian state has ``det(2 sigma) = 1`` with ``VAC = 1/2``.
    """
    sigma = np.asarray(sigma, dtype=float)
    scale = max(1.0, float(np.abs(sigma).max()))
    symmetric = bool(np.abs(sigma - sigma.T).max() <= sym_tol * scale)
    sym = 0.5 * (sigma + sigma.T)
    positive = bool(np.linalg.eigvalsh(sym).min() > 0)
    n = sigma.shape[0] // 2
    unc = np.linalg.eigvalsh(sym + 0.5j * symplectic_form(n))
    sign, logdet = np.linalg.slogdet(2.0 * sym)
    det_2sigma = float(sign * np.exp(logdet))
    return PhysicalityReport(
        symmetric=symmetric,
        positive_definite=positive,
        uncertainty=bool(unc.min() >= -unc_tol),
        det_2sigma=det_2sigma,
        min_uncertainty_eigenvalue=float(unc.min()),
    )


def random_orthogonal(n: int, seed=None) -> np.ndarray:
    """Haar-random orthogonal matrix from the sign-fixed QR of a Gaussian matrix."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))
