"""Hot loops: per-cell iterated integrals and the affine scan.

A path is handed to the kernels as a sequence of mesh steps.  Step ``k``
is a continuous piece on letter 0 (increment ``dc[k]``, quadratic
variation ``qv[k]``) followed by a simultaneous jump of every letter
(``jv[k, :]``) at the right end of the step.  Cells are runs of steps,
``bounds[i] <= k < bounds[i + 1]``.

Within a cell the level-1..3 iterated Ito integrals are assembled with
Chen's rule.  A continuous piece contributes ``(x**2 - q) / 2`` at level
two and ``(x**3 - 3 q x) / 6`` at level three, which are exact for a
continuous semimartingale whose bracket grows by ``q`` over the step.
A jump contributes at level one only.  With ``ito=False`` the continuous
pieces contribute at level one only too, which reproduces the plain
left-point Riemann double sum.
"""
import numpy as np

from ._accel import njit, resolve
from .errors import UsageError


@njit
def _cell_signature_loop(dc, qv, jv, bounds, ito):
    ncell = bounds.shape[0] - 1
    d = jv.shape[1]
    s1 = np.zeros((ncell, d))
    s2 = np.zeros((ncell, d, d))
    s3 = np.zeros((ncell, d, d, d))
    a1 = np.zeros(d)
    a2 = np.zeros((d, d))
    a3 = np.zeros((d, d, d))
    for i in range(ncell):
        a1[:] = 0.0
        a2[:, :] = 0.0
        a3[:, :, :] = 0.0
        for k in range(bounds[i], bounds[i + 1]):
            x = dc[k]
            if ito:
                q = qv[k]
                b2 = 0.5 * (x * x - q)
                b3 = x * (x * x - 3.0 * q) / 6.0
            else:
                b2 = 0.0
                b3 = 0.0
            for a in range(d):
                a3[a, 0, 0] += a1[a] * b2
                for b in range(d):
                    a3[a, b, 0] += a2[a, b] * x
            a3[0, 0, 0] += b3
            for a in range(d):
                a2[a, 0] += a1[a] * x
            a2[0, 0] += b2
            a1[0] += x
            for c in range(d):
                j = jv[k, c]
                if j != 0.0:
                    for a in range(d):
                        for b in range(d):
                            a3[a, b, c] += a2[a, b] * j
            for b in range(d):
                j = jv[k, b]
                if j != 0.0:
                    for a in range(d):
                        a2[a, b] += a1[a] * j
            for c in range(d):
                a1[c] += jv[k, c]
        s1[i] = a1
        s2[i] = a2
        s3[i] = a3
    return s1, s2, s3


def _segment_exclusive_cumsum(x, seg_start_of):
    total = np.cumsum(x, axis=0)
    excl = total - x
    return excl - excl[seg_start_of]


def _cell_signature_numpy(dc, qv, jv, bounds, ito):
    nsteps, d = jv.shape
    ncell = bounds.shape[0] - 1
    npiece = 2 * nsteps
    b1 = np.zeros((npiece, d))
    b1[0::2, 0] = dc
    b1[1::2] = jv
    b2 = np.zeros(npiece)
    b3 = np.zeros(npiece)
    if ito:
        b2[0::2] = 0.5 * (dc * dc - qv)
        b3[0::2] = dc * (dc * dc - 3.0 * qv) / 6.0
    cell_of_step = np.repeat(np.arange(ncell), np.diff(bounds))
    starts = 2 * bounds[:-1]
    seg_start_of = starts[np.repeat(cell_of_step, 2)]

    p1 = _segment_exclusive_cumsum(b1, seg_start_of)
    inc2 = p1[:, :, None] * b1[:, None, :]
    inc2[:, 0, 0] += b2
    p2 = _segment_exclusive_cumsum(inc2, seg_start_of)
    inc3 = p2[:, :, :, None] * b1[:, None, None, :]
    inc3[:, :, 0, 0] += p1 * b2[:, None]
    inc3[:, 0, 0, 0] += b3

    s1 = np.add.reduceat(b1, starts, axis=0)
    s2 = np.add.reduceat(inc2, starts, axis=0)
    s3 = np.add.reduceat(inc3, starts, axis=0)
    return s1, s2, s3


def cell_signature(dc, qv, jv, bounds, ito=True, backend=None):
    """Level 1-3 iterated integrals of every cell.

    Returns ``(s1, s2, s3)`` with shapes ``(ncell, d)``, ``(ncell, d, d)``
    and ``(ncell, d, d, d)``.  Word ``(a, b, c)`` of ``s3`` is
    ``int int int dX^a dX^b dX^c`` over ``u < r < s`` inside the cell.
    """
    dc = np.ascontiguousarray(dc, dtype=np.float64)
    qv = np.ascontiguousarray(qv, dtype=np.float64)
    jv = np.ascontiguousarray(jv, dtype=np.float64)
    if jv.ndim == 1:
        jv = jv[:, None]
    bounds = np.ascontiguousarray(bounds, dtype=np.int64)
    if not (dc.shape[0] == qv.shape[0] == jv.shape[0]):
        raise UsageError("dc, qv and jv must have one entry per mesh step")
    if bounds[0] != 0 or bounds[-1] != dc.shape[0] or np.any(np.diff(bounds) <= 0):
        raise UsageError("bounds must partition the steps into non-empty cells")
    if resolve(backend) == "numba":
        return _cell_signature_loop(dc, qv, jv, bounds, bool(ito))
    return _cell_signature_numpy(dc, qv, jv, bounds, bool(ito))


@njit
def _affine_scan_loop(a, b, u0):
    out = np.empty(a.shape[0] + 1)
    u = u0
    out[0] = u
    for k in range(a.shape[0]):
        u = a[k] * u + b[k]
        out[k + 1] = u
    return out


def _affine_scan_numpy(a, b, u0):
    # inclusive prefix scan of the maps u -> a u + b, doubling the reach each pass
    A, B = a.copy(), b.copy()
    shift = 1
    while shift < A.shape[0]:
        B[shift:] = A[shift:] * B[:-shift] + B[shift:]
        A[shift:] = A[shift:] * A[:-shift]
        shift *= 2
    u = B if u0 == 0.0 else A * u0 + B
    return np.concatenate(([u0], u))


def affine_scan(a, b, u0=0.0, backend=None):
    """Solve ``u[k + 1] = a[k] * u[k] + b[k]``; returns ``u[0..K]``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise UsageError("a and b must have the same shape")
    if resolve(backend) == "numba":
        return _affine_scan_loop(a, b, float(u0))
    return _affine_scan_numpy(a, b, float(u0))
