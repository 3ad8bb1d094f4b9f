"""Stochastic exponential of Y and its Milstein-type discretisation."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .iterated_error import cell_bounds
from .kernels import cell_signature
from .levy_path import IntegratedPath


@dataclass(frozen=True, eq=False)
class ExponentialPath:
    times: np.ndarray
    x: np.ndarray
    x_left: np.ndarray
    bracket: np.ndarray

    def step_factors(self, path: IntegratedPath):
        """Exact multiplicative growth over the continuous part of each mesh step."""
        dc, qv, _ = path.steps()
        return np.exp(dc - 0.5 * qv)


def doleans_exact(path: IntegratedPath) -> ExponentialPath:
    """``exp(Y - Y_0 - <Y^c>/2) * prod (1 + dY) exp(-dY)`` on the mesh.

    Evaluated as the continuous exponential of ``Y`` with its jumps
    removed, times the running product of ``1 + dY``; a jump of exactly
    ``-1`` therefore pins the path at zero from then on.
    """
    jumps = path.y - path.y_left
    cont = path.y - np.cumsum(jumps)
    bracket = path.bracket()
    smooth = np.exp(cont - cont[0] - 0.5 * bracket)
    factors = np.cumprod(1.0 + jumps)
    x = smooth * factors
    x_left = smooth * np.concatenate(([1.0], factors[:-1]))
    return ExponentialPath(path.times, x, x_left, bracket)


@dataclass(frozen=True, eq=False)
class SchemeCurve:
    n: int
    grid_times: np.ndarray
    x_scheme: np.ndarray
    x_exact: np.ndarray

    @property
    def u(self) -> np.ndarray:
        return self.x_scheme - self.x_exact

    def write_csv(self, filename) -> None:
        with open(filename, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x_exact", "x_scheme", "u_n", "n"])
            for t, xe, xs, u in zip(self.grid_times, self.x_exact, self.x_scheme, self.u):
                writer.writerow([repr(float(t)), repr(float(xe)), repr(float(xs)), repr(float(u)), self.n])


def milstein_factors(path: IntegratedPath, n: int, backend=None) -> np.ndarray:
    """``1 + D_i Y + I_i`` for every cell, with ``I_i`` the in-cell iterated integral."""
    dc, qv, jv = path.steps()
    s1, s2, _ = cell_signature(dc, qv, jv, cell_bounds(path, n), backend=backend)
    return 1.0 + s1[:, 0] + s2[:, 0, 0]


def milstein_scheme(path: IntegratedPath, n: int, exact: ExponentialPath | None = None,
                    backend=None) -> SchemeCurve:
    """Run the Milstein-type recursion on ``{i / n}`` and compare with the exact exponential."""
    factors = milstein_factors(path, n, backend=backend)
    x_scheme = np.concatenate(([1.0], np.cumprod(factors)))
    if exact is None:
        exact = doleans_exact(path)
    grid_idx = path.skeleton.grid_index[:: path.mesh_n // n]
    return SchemeCurve(n, path.times[grid_idx], x_scheme, exact.x[grid_idx])
