import math

import numpy as np
import pytest
from scipy import integrate, stats

from jumpiter.errors import ConfigError
from jumpiter.levy_path import (JumpMark, LevyTriplet, SigmaModel, build_skeleton, dump_path_csv,
                                integrate_sigma, refine_skeleton, simulate_jumps)
from jumpiter.randomness import DistSpec, stream

from conftest import make_path, path_with_jumps


def test_no_jumps_when_intensity_zero():
    assert simulate_jumps(LevyTriplet(0, 1, 0), stream(1, 0, "jumps")) == []


def test_poisson_count_mean():
    tr = LevyTriplet(0, 1, 5.0)
    counts = np.array([len(simulate_jumps(tr, stream(2, r, "jumps"))) for r in range(10**5)])
    oracle = sum(k * stats.poisson.pmf(k, 5.0) for k in range(200))
    assert abs(counts.mean() / oracle - 1) < 0.01


def test_jump_times_sorted_in_unit_interval():
    for r in range(200):
        jumps = simulate_jumps(LevyTriplet(0, 1, 10.0), stream(3, r, "jumps"))
        t = np.array([j.time for j in jumps])
        assert np.all(np.diff(t) > 0) and np.all((t > 0) & (t <= 1))
        assert [j.ordinal for j in jumps] == list(range(1, len(jumps) + 1))


def test_zero_diffusion_gives_flat_zc():
    sk = build_skeleton(LevyTriplet(0, 0, 1), [JumpMark(0.3, 1.0, 1)], 64, stream(1, 0, "b"))
    assert not sk.zc.any()
    assert not refine_skeleton(sk, 2, stream(1, 0, "r")).zc.any()


def test_mesh_contains_grid_and_jump_times():
    sk = build_skeleton(LevyTriplet(0, 1, 1), [JumpMark(0.3141592653589793, 1.0, 1)], 64, stream(1, 0, "b"))
    assert 0.3141592653589793 in sk.times
    assert sk.times[0] == 0.0 and sk.times[-1] == 1.0 and np.all(np.diff(sk.times) > 0)
    assert np.array_equal(sk.grid_times, np.arange(65) / 64)


def test_jump_on_grid_point_is_nudged():
    sk = build_skeleton(LevyTriplet(0, 1, 1), [JumpMark(0.5, 1.0, 1)], 4, stream(1, 0, "b"))
    assert sk.jumps[0].time == np.nextafter(0.5, 1.0)
    assert sk.times[sk.grid_index[2]] == 0.5


def test_realized_quadratic_variation():
    tr = LevyTriplet(0, 1, 0)
    qv = np.array([np.sum(np.diff(build_skeleton(tr, [], 1024, stream(4, r, "b")).zc) ** 2)
                   for r in range(10**4)])
    assert abs(qv.mean() - 1) < 0.01


def test_diffusion_scaling():
    for k in (2.0, 3.0):
        base = np.array([build_skeleton(LevyTriplet(0, 1, 0), [], 8, stream(5, r, "b")).zc[-1] for r in range(10**4)])
        scaled = np.array([build_skeleton(LevyTriplet(0, k * k, 0), [], 8, stream(6, r, "b")).zc[-1]
                           for r in range(10**4)])
        assert abs(scaled.var() / (k * k * base.var()) - 1) < 0.05


def test_refinement_preserves_old_points():
    sk = make_path(lam=3.0, mesh_n=32).skeleton
    fine = refine_skeleton(sk, 2, stream(9, 0, "refine"))
    assert fine.mesh_n == 64
    pos = np.searchsorted(fine.times, sk.times)
    assert np.array_equal(fine.times[pos], sk.times)
    assert np.array_equal(fine.zc[pos], sk.zc)
    assert fine.jumps == sk.jumps
    assert np.array_equal(fine.times[fine.jump_index], sk.times[sk.jump_index])
    with pytest.raises(ConfigError):
        refine_skeleton(sk, 1, stream(9, 0, "refine"))


def test_bridge_midpoint_variance():
    h = 0.25
    sk = build_skeleton(LevyTriplet(0, 1, 0), [], 4, stream(1, 0, "b"))
    gap_pinned = sk.zc[1]
    mids = np.empty(10**5)
    for r in range(mids.size):
        fine = refine_skeleton(sk, 2, stream(10, r, "bridge"))
        mids[r] = fine.zc[1] - 0.5 * gap_pinned  # centre of the bridge on [0, h]
    assert abs(mids.var() / (h / 4) - 1) < 0.03


def test_reconstruction_identity():
    path = make_path(b=0.7, lam=4.0, mesh_n=512)
    sk = path.skeleton
    cum = np.cumsum(sk.jump_sizes)
    assert np.max(np.abs(sk.z - (0.7 * sk.times + sk.zc + cum))) <= 1e-12
    assert np.max(np.abs(sk.z - sk.z_left - sk.jump_sizes)) <= 1e-12


def test_unit_sigma_gives_z_exactly():
    path = make_path(b=0.3, lam=2.0)
    assert np.array_equal(path.y, path.skeleton.z - path.skeleton.z[0])


def test_jump_of_y_is_sigma_times_jump():
    path = path_with_jumps([JumpMark(0.4, 0.5, 1)], sigma=SigmaModel("constant", 2.0))
    idx = path.skeleton.jump_index[0]
    assert path.y[idx] - path.y_left[idx] == 1.0


def test_ito_sigma_left_sums():
    tr = LevyTriplet(1.0, 0.0, 0.0)
    sk = build_skeleton(tr, [], 1024, stream(1, 0, "b"))
    path = integrate_sigma(SigmaModel("ito", 0.5, 1.0, 0.0), sk, stream(1, 0, "sigma"))
    assert abs(path.y[-1] - (0.5 + 0.5)) < 1e-3


def test_ito_sigma_uses_independent_stream():
    tr = LevyTriplet(0.0, 1.0, 0.0)
    sk = build_skeleton(tr, [], 64, stream(1, 0, "b"))
    p1 = integrate_sigma(SigmaModel("ito", 1.0, 0.0, 1.0), sk, stream(1, 0, "sigma"))
    p2 = integrate_sigma(SigmaModel("ito", 1.0, 0.0, 1.0), sk, stream(1, 1, "sigma"))
    assert not np.array_equal(p1.sigma, p2.sigma)
    assert np.array_equal(p1.skeleton.zc, p2.skeleton.zc)


def test_small_jump_mean_against_quadrature():
    tr = LevyTriplet(0.2, 1.0, 2.0, DistSpec("normal", (0.3, 0.5)))
    for eps in (0.1, 0.5, 1.0):
        oracle = 2.0 * integrate.quad(lambda x: x * stats.norm.pdf(x, 0.3, 0.5), -eps, eps, epsabs=1e-12)[0]
        assert tr.small_jump_mean(eps) == pytest.approx(oracle, abs=1e-10)
        assert tr.b_epsilon(eps) == pytest.approx(0.2 + oracle, abs=1e-10)
    tp = LevyTriplet(0.0, 1.0, 1.0, DistSpec("two_point", (-1.0, 0.25, 2.0)))
    assert tp.small_jump_mean(0.5) == 0.0
    assert tp.small_jump_mean(1.0) == pytest.approx(-0.25)
    assert tp.small_jump_mean(2.0) == pytest.approx(-0.25 + 1.5)


@pytest.mark.parametrize("kw", [dict(c=-1.0), dict(jump_intensity=-1.0), dict(b=math.inf),
                                dict(jump_size=DistSpec("uniform01"))])
def test_triplet_validation(kw):
    args = dict(b=0.0, c=1.0, jump_intensity=1.0)
    args.update(kw)
    with pytest.raises(ConfigError):
        LevyTriplet(**args)


def test_dump_path_csv(tmp_path):
    path = path_with_jumps([JumpMark(0.25 + 1e-3, -1.0, 1)], mesh_n=8)
    out = tmp_path / "p.csv"
    dump_path_csv(path, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "time,zc,z,sigma,y,is_jump,jump_size"
    assert len(lines) == 1 + 10
    assert sum(line.split(",")[5] == "1" for line in lines[1:]) == 1
