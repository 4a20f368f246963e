"""Pure numpy implementation of the routing hot loop.

Mirrors the API of the compiled ``_kernels`` extension. Each call evaluates
a whole batch of parameter vectors (one ES generation) with stacked
``eigh``/``matmul`` calls.
"""
import numpy as np

NAME = "python"


def hermitian_from_params(theta, d):
    """Stack of Hermitian ``d x d`` matrices from rows of ``d**2`` reals.

    Layout per row: ``d`` diagonal entries, then the ``d(d-1)/2`` real parts
    and the ``d(d-1)/2`` imaginary parts of the strict upper triangle in
    row-major order.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    L = theta.shape[0]
    m = d * (d - 1) // 2
    iu, ju = np.triu_indices(d, 1)
    h = np.zeros((L, d, d), dtype=complex)
    h[:, np.arange(d), np.arange(d)] = theta[:, :d]
    upper = theta[:, d : d + m] + 1j * theta[:, d + m : d + 2 * m]
    h[:, iu, ju] = upper
    h[:, ju, iu] = upper.conj()
    return h


def expi_hermitian(theta, d):
    """``exp(i H)`` for every row of ``theta`` (see :func:`hermitian_from_params`)."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if theta.shape[1] != d * d:
        raise ValueError(f"expected {d * d} parameters per row, got {theta.shape[1]}")
    w, q = np.linalg.eigh(hermitian_from_params(theta, d))
    return (q * np.exp(1j * w)[:, None, :]) @ q.conj().transpose(0, 2, 1)


def block_symplectic_batch(u_a, u_b):
    L, n, _ = u_a.shape
    p = u_b.shape[1]
    N = n + p
    u = np.zeros((L, N, N), dtype=complex)
    u[:, :n, :n] = u_a
    u[:, n:, n:] = u_b
    s = np.empty((L, 2 * N, 2 * N))
    s[:, :N, :N] = u.real
    s[:, :N, N:] = -u.imag
    s[:, N:, :N] = u.imag
    s[:, N:, N:] = u.real
    return s


def routing_residuals(theta, sigma1, rows, target, n, p):
    """Frobenius distance between ``target`` and the selected rows of ``S sigma1 S^T``.

    ``theta`` has shape ``(L, n**2 + p**2)``; the first ``n**2`` columns
    parametrise Alice's unitary, the rest Bob's.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    rows = np.asarray(rows, dtype=np.intp)
    if theta.shape[1] != n * n + p * p:
        raise ValueError(f"expected {n * n + p * p} parameters per row, got {theta.shape[1]}")
    if np.shape(sigma1) != (2 * (n + p),) * 2:
        raise ValueError("sigma1 does not match n + p modes")
    if np.shape(target) != (rows.size, 2 * (n + p)):
        raise ValueError("target shape does not match rows")
    s = block_symplectic_batch(expi_hermitian(theta[:, : n * n], n), expi_hermitian(theta[:, n * n :], p))
    red = s[:, rows, :] @ sigma1 @ s.transpose(0, 2, 1)
    diff = red - target
    return np.sqrt(np.einsum("lij,lij->l", diff, diff))
