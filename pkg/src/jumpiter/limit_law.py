"""Samplers for the limits of ``n X^n`` and ``n U^n``.

Three jump laws are available (``LimitForm``):

``theorem_stated``
    ``-c [sqrt(xi) K' + sqrt(c xi (1-xi)) N' N'' + sqrt(1-xi) K''] sigma^3 dZ``
``lemma_derived``
    ``[sqrt(c xi (1-xi)) N' N'' + sqrt(c xi) K' / 2 + sqrt(c (1-xi)) K'' / 2] sigma^3 dZ``
``corrected``
    ``c [sqrt(xi (1-xi)) N' N'' + xi (N'^2 - 1) / 2 + (1-xi) (N''^2 - 1) / 2] sigma^3 dZ``,
    i.e. ``c (G^2 - 1) / 2 sigma^3 dZ`` with ``G = sqrt(xi) N' + sqrt(1-xi) N''``.
    This is what a cell holding a single jump actually contributes: the
    jump multiplies the second-level Ito integral of ``Z^c`` over the cell.

All forms share the Gaussian part ``sqrt(c^3 / 6) int sigma^3 dM``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dolean_milstein import ExponentialPath
from .errors import ConfigError
from .iterated_error import ErrorCurve
from .kernels import affine_scan
from .levy_path import IntegratedPath
from .randomness import DistSpec, sample, stream


class LimitForm(str, enum.Enum):
    THEOREM_STATED = "theorem_stated"
    LEMMA_DERIVED = "lemma_derived"
    CORRECTED = "corrected"


U_WEIGHTS = ("squared", "mixed", "linear")
_DEFAULT_WEIGHTS = {LimitForm.THEOREM_STATED: "squared",
                    LimitForm.LEMMA_DERIVED: "linear",
                    LimitForm.CORRECTED: "linear"}

_ROLES = ("xi", "N1", "N2", "K1", "K2", "M")


@dataclass(frozen=True, eq=False)
class LimitIngredients:
    """Auxiliary randomness, independent of the driving path.

    One entry per jump of the path for ``xi, n1, n2, k1, k2``; ``dm`` holds
    the increments of the Brownian motion ``M`` over every mesh step.
    """

    xi: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    dm: np.ndarray


def draw_ingredients(path: IntegratedPath, master_seed: int, replicate_id: int,
                     prefix: str = "limit") -> LimitIngredients:
    count = len(path.skeleton.jumps)
    streams = {role: stream(master_seed, replicate_id, f"{prefix}-{role}") for role in _ROLES}
    normal = DistSpec("normal", (0.0, 1.0))
    chi = DistSpec("shifted_chi1")
    dt = np.diff(path.times)
    return LimitIngredients(
        xi=sample(DistSpec("uniform01"), streams["xi"], count),
        n1=sample(normal, streams["N1"], count),
        n2=sample(normal, streams["N2"], count),
        k1=sample(chi, streams["K1"], count),
        k2=sample(chi, streams["K2"], count),
        dm=np.sqrt(dt) * streams["M"].standard_normal(dt.shape[0]),
    )


def _as_form(form) -> LimitForm:
    try:
        return LimitForm(form)
    except ValueError:
        raise ConfigError(f"unknown limit form {form!r}", field="limit_form") from None


def jump_coefficients(form, c: float, ing: LimitIngredients):
    """Split the per-jump coefficient into its ``K'`` part and the rest.

    Both still need the factor ``sigma_{T-}^3 dZ_T``.
    """
    form = _as_form(form)
    xi = ing.xi
    if form is LimitForm.THEOREM_STATED:
        k_part = -c * np.sqrt(xi) * ing.k1
        rest = -c * (np.sqrt(c * xi * (1 - xi)) * ing.n1 * ing.n2 + np.sqrt(1 - xi) * ing.k2)
    elif form is LimitForm.LEMMA_DERIVED:
        k_part = 0.5 * np.sqrt(c * xi) * ing.k1
        rest = np.sqrt(c * xi * (1 - xi)) * ing.n1 * ing.n2 + 0.5 * np.sqrt(c * (1 - xi)) * ing.k2
    else:
        k_part = 0.5 * c * xi * (ing.n1 ** 2 - 1)
        rest = c * (np.sqrt(xi * (1 - xi)) * ing.n1 * ing.n2 + 0.5 * (1 - xi) * (ing.n2 ** 2 - 1))
    return k_part, rest


def _jump_factors(path: IntegratedPath):
    sk = path.skeleton
    sizes = np.array([j.size for j in sk.jumps], dtype=np.float64)
    return path.sigma[sk.jump_index] ** 3 * sizes


def sample_limit_X(path: IntegratedPath, ingredients: LimitIngredients, form, grid_n: int,
                   jump_sign: float = 1.0) -> ErrorCurve:
    """One draw of the limit process on ``{k / grid_n}``.

    The Gaussian part is summed over the path mesh with left-point
    ``sigma^3``; ``jump_sign`` flips the jump part.
    """
    form = _as_form(form)
    sk = path.skeleton
    if sk.mesh_n % grid_n != 0:
        raise ConfigError(f"grid_n={grid_n} must divide the mesh resolution {sk.mesh_n}", field="grid_n")
    c = sk.triplet.c
    grid_idx = sk.grid_index[:: sk.mesh_n // grid_n]
    values = np.zeros(grid_n + 1)
    if c > 0:
        gauss = math.sqrt(c ** 3 / 6.0) * np.concatenate(([0.0], np.cumsum(path.sigma[:-1] ** 3 * ingredients.dm)))
        values = gauss[grid_idx].copy()
        if sk.jumps:
            k_part, rest = jump_coefficients(form, c, ingredients)
            per_jump = jump_sign * (k_part + rest) * _jump_factors(path)
            # jumps at or before each grid time
            upto = np.searchsorted(sk.jump_index, grid_idx, side="right")
            values += np.concatenate(([0.0], np.cumsum(per_jump)))[upto]
    return ErrorCurve(grid_n, sk.times[grid_idx], values, f"limit_X[{form.value}]")


def sample_limit_U(path: IntegratedPath, x_exact: ExponentialPath, ingredients: LimitIngredients,
                   form, solver_mesh: int | None = None, weights: str | None = None,
                   scheme: str = "exponential", jump_sign: float = 1.0, backend=None) -> ErrorCurve:
    """Solve the linear equation for the limit of ``n U^n`` with ``U_0 = 0``.

    The solver steps through the uniform grid ``{k / solver_mesh}`` plus the
    jump times.  ``scheme="exponential"`` moves ``U`` with the exact growth
    factor of the stochastic exponential over each step and adds the
    Gaussian source at the left point; ``scheme="euler"`` is plain
    left-point Euler.  Jumps update ``U <- U (1 + dY) + source``.

    ``weights`` selects how ``X_{T-}`` enters the jump source:
    ``"squared"`` squares it in all terms, ``"mixed"`` squares it except on
    the ``K'`` term, ``"linear"`` uses ``-X_{T-}`` times the jump part of
    the chosen limit form.
    """
    form = _as_form(form)
    weights = _DEFAULT_WEIGHTS[form] if weights is None else weights
    if weights not in U_WEIGHTS:
        raise ConfigError(f"unknown weights {weights!r}", field="u_weights")
    if scheme not in ("exponential", "euler"):
        raise ConfigError(f"unknown scheme {scheme!r}", field="scheme")
    sk = path.skeleton
    solver_mesh = sk.mesh_n if solver_mesh is None else solver_mesh
    if solver_mesh > sk.mesh_n or sk.mesh_n % solver_mesh != 0:
        raise ConfigError(f"solver_mesh={solver_mesh} must divide the path mesh {sk.mesh_n}",
                          field="solver_mesh")
    c = sk.triplet.c
    grid_idx = sk.grid_index[:: sk.mesh_n // solver_mesh]
    times = sk.times[grid_idx]
    if c == 0:
        return ErrorCurve(solver_mesh, times, np.zeros(solver_mesh + 1), f"limit_U[{form.value}]")

    keep = np.union1d(grid_idx, sk.jump_index)
    dc, qv, jv = path.steps()

    def step_sum(v):
        return np.diff(np.concatenate(([0.0], np.cumsum(v)))[keep])

    dyc, dq, dm = step_sum(dc), step_sum(qv), step_sum(ingredients.dm)
    left = keep[:-1]
    jump_y = jv[keep[1:] - 1]
    kappa = math.sqrt(c ** 3 / 6.0)
    gauss_src = -kappa * path.sigma[left] ** 3 * x_exact.x[left] * dm

    jump_src = np.zeros(keep.shape[0] - 1)
    if sk.jumps:
        k_part, rest = jump_coefficients(form, c, ingredients)
        k_part = jump_sign * k_part * _jump_factors(path)
        rest = jump_sign * rest * _jump_factors(path)
        xl = x_exact.x_left[sk.jump_index]
        if weights == "squared":
            src = xl ** 2 * (k_part + rest)
        elif weights == "mixed":
            src = xl * k_part + xl ** 2 * rest
        else:
            src = -xl * (k_part + rest)
        jump_src[np.searchsorted(keep, sk.jump_index) - 1] = src

    if scheme == "exponential":
        grow = np.exp(dyc - 0.5 * dq)
        a = grow * (1.0 + jump_y)
        b = gauss_src * a + jump_src
    else:
        a = (1.0 + dyc) * (1.0 + jump_y)
        b = gauss_src * (1.0 + jump_y) + jump_src
    u = affine_scan(a, b, 0.0, backend=backend)
    return ErrorCurve(solver_mesh, times, u[np.searchsorted(keep, grid_idx)], f"limit_U[{form.value}]")
