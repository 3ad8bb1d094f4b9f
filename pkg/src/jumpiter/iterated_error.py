"""The iterated-integral error functional and its jump-level pieces.

For a coarse grid ``{i / n}`` the error process is the running sum over
cells of ``int int (Y_{r-} - Y_{(i-1)/n}) dY_r dY_s`` taken over
``(i-1)/n < r < s <= i/n``, i.e. the third-level iterated integral of
each cell.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .kernels import cell_signature
from .levy_path import IntegratedPath

# (integrand letter, inner integrator, outer integrator); 0 = Z^c, 1 = A^eps
CROSS_WORDS = ((0, 1, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1), (1, 1, 0), (0, 1, 1))


@dataclass(frozen=True, eq=False)
class ErrorCurve:
    n: int
    grid_times: np.ndarray
    values: np.ndarray
    functional: str
    epsilon: float | None = None

    @property
    def endpoint(self) -> float:
        return float(self.values[-1])

    def scaled(self, factor: float) -> "ErrorCurve":
        return ErrorCurve(self.n, self.grid_times, factor * self.values, self.functional, self.epsilon)

    def rows(self):
        eps = "" if self.epsilon is None else repr(self.epsilon)
        for t, v in zip(self.grid_times, self.values):
            yield (repr(float(t)), repr(float(v)), self.functional, self.n, eps)


def write_curves_csv(curves, filename) -> None:
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value", "functional", "n", "epsilon"])
        for curve in curves:
            writer.writerows(curve.rows())


@dataclass(frozen=True)
class JumpTermRecord:
    ordinal: int
    time: float
    delta_z: float
    xi_n: float
    alpha: float
    beta: float
    gamma: float
    collision: bool = False


def cell_bounds(path: IntegratedPath, n: int) -> np.ndarray:
    """Mesh-step indices delimiting the cells ``((i-1)/n, i/n]``."""
    if n < 1:
        raise ConfigError("must be >= 1", field="n")
    mesh_n = path.mesh_n
    if mesh_n % n != 0 or mesh_n // n < 2:
        raise ConfigError(f"mesh resolution {mesh_n} is not a refinement (m >= 2) of n={n}", field="n")
    return path.skeleton.grid_index[:: mesh_n // n]


def _curve(n, path, cell_values, functional, epsilon=None):
    grid = path.skeleton.grid_times[:: path.mesh_n // n]
    values = np.concatenate(([0.0], np.cumsum(cell_values)))
    return ErrorCurve(n, grid, values, functional, epsilon)


def iterated_error_cells(path: IntegratedPath, n: int, method: str = "ito", backend=None) -> np.ndarray:
    bounds = cell_bounds(path, n)
    if method not in ("ito", "riemann"):
        raise ConfigError(f"unknown method {method!r}", field="method")
    dc, qv, jv = path.steps()
    _, _, s3 = cell_signature(dc, qv, jv, bounds, ito=(method == "ito"), backend=backend)
    return s3[:, 0, 0, 0]


def iterated_error_process(path: IntegratedPath, n: int, method: str = "ito", backend=None) -> ErrorCurve:
    """``X^n`` at the coarse grid times.

    ``method="ito"`` composes exact per-step iterated Ito integrals (the
    continuous bracket of ``Y`` is known); ``method="riemann"`` is the plain
    left-point double sum over the mesh.  Jump terms use ``Y_{T-}`` in both.
    """
    return _curve(n, path, iterated_error_cells(path, n, method, backend), "X")


def bm_cell_closed_form(delta_w, delta_t, c):
    """Iterated integral of one driftless Brownian cell: ``(w**3 - 3 c dt w) / 6``."""
    delta_w = np.asarray(delta_w, dtype=np.float64)
    if np.any(np.asarray(delta_t) <= 0) or np.any(np.asarray(c) < 0):
        raise ConfigError("need delta_t > 0 and c >= 0")
    out = delta_w * (delta_w * delta_w - 3.0 * c * delta_t) / 6.0
    return float(out) if out.ndim == 0 else out


def _cell_of_jumps(path: IntegratedPath, n: int):
    """For each jump: its cell number i (1-based) so T lies in ((i-1)/n, i/n]."""
    grid_idx = path.skeleton.grid_index[:: path.mesh_n // n]
    return np.searchsorted(grid_idx, path.skeleton.jump_index)


def jump_terms(path: IntegratedPath, n: int, epsilon: float = 0.0) -> list:
    """Per-jump statistics alpha, beta, gamma and the in-cell position xi.

    Only jumps with ``|dZ| > epsilon`` are reported.  The squared Brownian
    increments are compensated by ``c`` times the elapsed time, which is the
    Ito value of the corresponding cross integral for any ``c``.
    """
    sk = path.skeleton
    if sk.mesh_n % n != 0:
        raise ConfigError(f"mesh resolution {sk.mesh_n} is not a multiple of n={n}", field="n")
    c = sk.triplet.c
    grid_idx = sk.grid_index[:: sk.mesh_n // n]
    cells = _cell_of_jumps(path, n)
    big = np.array([abs(j.size) > epsilon for j in sk.jumps], dtype=bool)
    counts = np.bincount(cells[big], minlength=n + 1) if big.any() else np.zeros(n + 1, int)
    records = []
    for jump, idx, cell, keep in zip(sk.jumps, sk.jump_index, cells, big):
        if not keep:
            continue
        lo, hi = grid_idx[cell - 1], grid_idx[cell]
        t_minus, t_plus = sk.times[lo], sk.times[hi]
        a = sk.zc[idx] - sk.zc[lo]
        b_ = sk.zc[hi] - sk.zc[idx]
        dz = jump.size
        records.append(JumpTermRecord(
            ordinal=jump.ordinal,
            time=jump.time,
            delta_z=dz,
            xi_n=n * (jump.time - t_minus),
            alpha=n * dz * a * b_,
            beta=n * dz * 0.5 * (a * a - c * (jump.time - t_minus)),
            gamma=n * dz * 0.5 * (b_ * b_ - c * (t_plus - jump.time)),
            collision=bool(counts[cell] > 1),
        ))
    return records


def _require_unit_sigma(path):
    m = path.sigma_model
    if not (m.is_constant and m.sigma0 == 1.0):
        raise ConfigError("the decomposition is defined for sigma == 1", field="sigma")


def cross_term_cells(path: IntegratedPath, n: int, epsilon: float, backend=None) -> np.ndarray:
    """Per-cell values of the six cross integrals between ``Z^c`` and ``A^eps``.

    Returns an array of shape ``(6, n)`` in the order of ``CROSS_WORDS``.
    """
    if not epsilon > 0:
        raise ConfigError("must be > 0", field="epsilon")
    sk = path.skeleton
    bounds = cell_bounds(path, n)
    dt = np.diff(sk.times)
    jumps = sk.jump_sizes[1:]
    big = np.where(np.abs(jumps) > epsilon, jumps, 0.0)
    jv = np.zeros((dt.shape[0], 2))
    jv[:, 1] = big
    _, _, s3 = cell_signature(np.diff(sk.zc), sk.triplet.c * dt, jv, bounds, backend=backend)
    return np.stack([s3[:, a, b, c] for a, b, c in CROSS_WORDS])


def decompose_error(path: IntegratedPath, n: int, epsilon: float, backend=None):
    """Split ``S^n`` (the error functional of ``Z``) into ``M + F + K``.

    ``M`` is the functional of ``W = Z^c + b_eps t``, ``F`` the six
    ``Z^c``/``A^eps`` cross terms, and ``K`` the remainder.  Returns the
    three curves ``(M, F, K)``.
    """
    if not epsilon > 0:
        raise ConfigError("must be > 0", field="epsilon")
    _require_unit_sigma(path)
    sk = path.skeleton
    s_cells = iterated_error_cells(path, n, backend=backend)
    dt = np.diff(sk.times)
    b_eps = sk.triplet.b_epsilon(epsilon)
    _, _, w3 = cell_signature(np.diff(sk.zc) + b_eps * dt, sk.triplet.c * dt,
                              np.zeros((dt.shape[0], 1)), cell_bounds(path, n), backend=backend)
    m_cells = w3[:, 0, 0, 0]
    f_cells = cross_term_cells(path, n, epsilon, backend=backend).sum(axis=0)
    k_cells = s_cells - m_cells - f_cells
    curves = tuple(_curve(n, path, v, name, epsilon) for v, name in
                   ((m_cells, "M"), (f_cells, "F"), (k_cells, "K")))
    return curves


def s_curve(path: IntegratedPath, n: int, backend=None) -> ErrorCurve:
    _require_unit_sigma(path)
    return _curve(n, path, iterated_error_cells(path, n, backend=backend), "S")


def divergent_term(path: IntegratedPath, n: int) -> float:
    """``sum_j n dZ_j**2 (Z^c_{T+(n,j)} - Z^c_{T_j})`` over all jumps up to time 1."""
    sk = path.skeleton
    if sk.mesh_n % n != 0:
        raise ConfigError(f"mesh resolution {sk.mesh_n} is not a multiple of n={n}", field="n")
    if not sk.jumps:
        return 0.0
    grid_idx = sk.grid_index[:: sk.mesh_n // n]
    cells = _cell_of_jumps(path, n)
    sizes = np.array([j.size for j in sk.jumps])
    incr = sk.zc[grid_idx[cells]] - sk.zc[sk.jump_index]
    return float(np.sum(n * sizes * sizes * incr))
