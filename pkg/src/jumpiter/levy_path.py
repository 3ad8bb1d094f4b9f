"""Finite-activity Levy drivers, their mesh skeletons and the integral Y.

The driver is ``Z_t = b t + Z^c_t + sum_{T_j <= t} dZ_j`` where ``Z^c`` is
a Brownian motion with variance rate ``c`` and the jumps form a compound
Poisson process with intensity ``jump_intensity`` and size law
``jump_size``.  Note that ``b`` is the drift with respect to the raw jump
sum (no truncation compensator).

A skeleton records ``Z^c`` on a mesh made of the uniform grid
``{k / mesh_n}`` plus every jump time.  Grid points are always addressed
by index (``grid_index``) rather than by comparing floats.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError
from .randomness import DistSpec, RandomStream, sample


def _frozen(arr, dtype=np.float64):
    arr = np.array(arr, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LevyTriplet:
    b: float
    c: float
    jump_intensity: float
    jump_size: DistSpec = field(default_factory=lambda: DistSpec("two_point", (-1.0, 0.5, 1.0)))

    def __post_init__(self):
        for name in ("b", "c", "jump_intensity"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError("must be finite", field=name)
        if self.c < 0:
            raise ConfigError("diffusion coefficient must be >= 0", field="c")
        if self.jump_intensity < 0:
            raise ConfigError("intensity must be >= 0", field="jump_intensity")
        if self.jump_size.kind not in ("normal", "two_point"):
            raise ConfigError("jump sizes must be normal or two_point", field="jump_size")

    def small_jump_mean(self, epsilon: float) -> float:
        """``int_{|x| <= epsilon} x F(dx)`` for ``F = intensity * law(jump_size)``."""
        lam, dist = self.jump_intensity, self.jump_size
        if epsilon <= 0 or lam == 0:
            return 0.0
        if dist.kind == "two_point":
            a, p, b = dist.params
            return lam * (p * a * (abs(a) <= epsilon) + (1 - p) * b * (abs(b) <= epsilon))
        mu, sd = dist.params
        lo, hi = (-epsilon - mu) / sd, (epsilon - mu) / sd
        pdf = lambda u: math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
        mass = float(ndtr(hi) - ndtr(lo))
        return lam * (mu * mass + sd * (pdf(lo) - pdf(hi)))

    def b_epsilon(self, epsilon: float) -> float:
        """Drift of ``W = Z^c + b_eps t`` once jumps of size ``<= epsilon`` are compensated."""
        return self.b + self.small_jump_mean(epsilon)


@dataclass(frozen=True)
class SigmaModel:
    """Integrand model: ``constant`` (sigma0) or ``ito`` (sigma0 + b t + sqrt(c) B')."""

    kind: str = "constant"
    sigma0: float = 1.0
    b_sigma: float = 0.0
    c_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "ito"):
            raise ConfigError(f"unknown sigma kind {self.kind!r}", field="sigma")
        if self.c_sigma < 0:
            raise ConfigError("c_sigma must be >= 0", field="sigma")
        if self.kind == "constant" and (self.b_sigma != 0 or self.c_sigma != 0):
            raise ConfigError("constant sigma takes a single parameter", field="sigma")

    @property
    def is_constant(self):
        return self.kind == "constant"

    def __str__(self):
        if self.kind == "constant":
            return f"constant({self.sigma0!r})"
        return f"ito({self.sigma0!r},{self.b_sigma!r},{self.c_sigma!r})"


@dataclass(frozen=True)
class JumpMark:
    time: float
    size: float
    ordinal: int


@dataclass(frozen=True, eq=False)
class PathSkeleton:
    times: np.ndarray
    zc: np.ndarray
    jumps: tuple
    triplet: LevyTriplet
    mesh_n: int
    grid_index: np.ndarray
    jump_index: np.ndarray

    @property
    def jump_sizes(self) -> np.ndarray:
        """Jump of ``Z`` at every mesh point (zero off the jump set)."""
        out = np.zeros(self.times.shape[0])
        out[self.jump_index] = [j.size for j in self.jumps]
        return out

    @property
    def z(self) -> np.ndarray:
        tr = self.triplet
        return tr.b * self.times + self.zc + np.cumsum(self.jump_sizes)

    @property
    def z_left(self) -> np.ndarray:
        return self.z - self.jump_sizes

    @property
    def grid_times(self) -> np.ndarray:
        return self.times[self.grid_index]


def simulate_jumps(triplet: LevyTriplet, stream: RandomStream) -> list:
    """Compound Poisson jumps on (0, 1], sorted by time."""
    if triplet.jump_intensity == 0:
        return []
    count = int(stream.poisson(triplet.jump_intensity))
    times = np.sort(1.0 - stream.random(count))
    sizes = sample(triplet.jump_size, stream, count)
    return [JumpMark(float(t), float(s), j + 1) for j, (t, s) in enumerate(zip(times, sizes))]


def _merge_mesh(grid, jump_times):
    """Insert jump times into a sorted grid; returns (times, grid_index, jump_index, nudged)."""
    jump_times = np.asarray(jump_times, dtype=np.float64)
    nudged = jump_times.copy()
    # a jump on a grid point is pushed one ulp to the right
    for _ in range(4):
        hit = np.isin(nudged, grid)
        if not hit.any():
            break
        nudged[hit] = np.nextafter(nudged[hit], np.inf)
    times = np.concatenate((grid, nudged))
    order = np.argsort(times, kind="stable")
    times = times[order]
    if np.any(np.diff(times) <= 0):
        raise ConfigError("jump times must be distinct and inside (0, 1]")
    position = np.empty_like(order)
    position[order] = np.arange(order.shape[0])
    return times, position[: grid.shape[0]], position[grid.shape[0]:], nudged


def _uniform_grid(mesh_n):
    return np.arange(mesh_n + 1, dtype=np.float64) / mesh_n


def build_skeleton(triplet: LevyTriplet, jumps: list, mesh_n: int, stream: RandomStream) -> PathSkeleton:
    """Brownian part of ``Z`` on ``{k / mesh_n}`` plus the jump times."""
    if mesh_n < 1:
        raise ConfigError("must be >= 1", field="mesh_n")
    times, grid_index, jump_index, nudged = _merge_mesh(_uniform_grid(mesh_n), [j.time for j in jumps])
    jumps = tuple(JumpMark(float(t), j.size, j.ordinal) for t, j in zip(nudged, jumps))
    dt = np.diff(times)
    zc = np.zeros(times.shape[0])
    if triplet.c > 0:
        zc[1:] = np.cumsum(math.sqrt(triplet.c) * np.sqrt(dt) * stream.standard_normal(dt.shape[0]))
    return PathSkeleton(_frozen(times), _frozen(zc), jumps, triplet, int(mesh_n),
                        _frozen(grid_index, np.int64), _frozen(jump_index, np.int64))


def refine_skeleton(skeleton: PathSkeleton, factor: int, stream: RandomStream) -> PathSkeleton:
    """Add the grid ``{k / (mesh_n * factor)}`` by Brownian-bridge interpolation.

    Existing ``(time, zc)`` pairs are kept bit for bit.  New points inside a
    mesh gap are drawn left to right, each conditioned on its left
    neighbour and the gap's right end point.
    """
    if factor < 2:
        raise ConfigError("must be >= 2", field="factor")
    fine_n = skeleton.mesh_n * factor
    k = np.arange(fine_n + 1)
    new_times = k[k % factor != 0].astype(np.float64) / fine_n
    new_times = new_times[~np.isin(new_times, skeleton.times)]

    old_t, old_z = skeleton.times, skeleton.zc
    times = np.concatenate((old_t, new_times))
    order = np.argsort(times, kind="stable")
    times = times[order]
    is_old = order < old_t.shape[0]
    zc = np.empty(times.shape[0])
    zc[is_old] = old_z

    # gap_end[i]: index (in the merged mesh) of the next old point at or after i
    old_pos = np.flatnonzero(is_old)
    gap_end = old_pos[np.searchsorted(old_pos, np.arange(times.shape[0]))]
    new_pos = np.flatnonzero(~is_old)
    c = skeleton.triplet.c
    if new_pos.size:
        # rank of each new point inside its gap; draw rank by rank
        left_old = old_pos[np.searchsorted(old_pos, new_pos) - 1]
        rank = new_pos - left_old
        noise = stream.standard_normal(new_pos.shape[0])
        for r in range(1, int(rank.max()) + 1):
            sel = rank == r
            i = new_pos[sel]
            prev, end = i - 1, gap_end[i]
            t0, t1, te = times[prev], times[i], times[end]
            w = (t1 - t0) / (te - t0)
            mean = zc[prev] + w * (zc[end] - zc[prev])
            var = c * (t1 - t0) * (te - t1) / (te - t0)
            zc[i] = mean + np.sqrt(var) * noise[sel]

    position = np.empty_like(order)
    position[order] = np.arange(order.shape[0])
    grid_index = np.searchsorted(times, _uniform_grid(fine_n))
    jump_index = position[skeleton.jump_index]
    return PathSkeleton(_frozen(times), _frozen(zc), skeleton.jumps, skeleton.triplet, fine_n,
                        _frozen(grid_index, np.int64), _frozen(jump_index, np.int64))


@dataclass(frozen=True, eq=False)
class IntegratedPath:
    """``Y = int sigma_{s-} dZ_s`` on the skeleton mesh.

    ``y`` holds values after any jump at a mesh point and ``y_left`` the
    left limits, so ``y - y_left`` is the jump of ``Y``.  ``bracket_inc[k]``
    is ``c * sigma_k**2 * dt_k``, the growth of the continuous bracket over
    mesh step ``k``.
    """

    skeleton: PathSkeleton
    sigma_model: SigmaModel
    sigma: np.ndarray
    y: np.ndarray
    y_left: np.ndarray
    bracket_inc: np.ndarray

    @property
    def times(self):
        return self.skeleton.times

    @property
    def mesh_n(self):
        return self.skeleton.mesh_n

    def steps(self):
        """Kernel input ``(dc, qv, jv)`` for the single letter ``Y``."""
        dc = self.y_left[1:] - self.y[:-1]
        jv = (self.y - self.y_left)[1:]
        return dc, self.bracket_inc, jv

    def bracket(self):
        """``<Y^c>`` at every mesh time (left-point accumulation)."""
        return np.concatenate(([0.0], np.cumsum(self.bracket_inc)))


def integrate_sigma(model: SigmaModel, skeleton: PathSkeleton, stream: RandomStream) -> IntegratedPath:
    """Build ``Y`` by left-point sums of the continuous part and exact jump terms.

    ``stream`` is only consumed for the ``ito`` kind (one normal per mesh gap).
    """
    times = skeleton.times
    dt = np.diff(times)
    tr = skeleton.triplet
    if model.is_constant:
        sigma = np.full(times.shape[0], model.sigma0)
        z = skeleton.z
        y = model.sigma0 * (z - z[0])
        y_left = model.sigma0 * (skeleton.z_left - z[0])
    else:
        bprime = np.zeros(times.shape[0])
        if model.c_sigma > 0:
            bprime[1:] = np.cumsum(np.sqrt(dt) * stream.standard_normal(dt.shape[0]))
        sigma = model.sigma0 + model.b_sigma * times + math.sqrt(model.c_sigma) * bprime
        dcont = sigma[:-1] * (tr.b * dt + np.diff(skeleton.zc))
        djump = sigma * skeleton.jump_sizes
        y = np.concatenate(([0.0], np.cumsum(dcont + djump[1:])))
        y_left = y - djump
    bracket_inc = tr.c * sigma[:-1] ** 2 * dt
    return IntegratedPath(skeleton, model, _frozen(sigma), _frozen(y), _frozen(y_left), _frozen(bracket_inc))


def dump_path_csv(path: IntegratedPath, filename) -> None:
    """Write one row per mesh time: time, zc, z, sigma, y, is_jump, jump_size."""
    sk = path.skeleton
    z, dz = sk.z, sk.jump_sizes
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "zc", "z", "sigma", "y", "is_jump", "jump_size"])
        for row in zip(sk.times, sk.zc, z, path.sigma, path.y, dz != 0, dz):
            writer.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])),
                             repr(float(row[3])), repr(float(row[4])), int(row[5]), repr(float(row[6]))])
