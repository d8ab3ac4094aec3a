import numpy as np
import pytest

from ccenum import acsystem as ac
from ccenum import geometry as g
from ccenum.classify import canonicalize, same_class
from ccenum.geometry import PotentialParams
from ccenum.solver import (
    SolverSettings,
    Status,
    TrackLostError,
    canonical_orderings,
    continue_family,
    enumerate_classes,
    multistart,
    random_start,
    refine,
    solve_collinear,
    sweep,
)

from conftest import equilateral, two_body


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(tol_residual=0)
    with pytest.raises(ValueError):
        SolverSettings(starts=0)
    with pytest.raises(ValueError):
        SolverSettings(annulus=(2.0, 1.0))


def test_random_start_contract():
    a = random_start(5, 42, 17)
    b = random_start(5, 42, 17)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, random_start(5, 42, 18))
    assert np.abs(a.mean(axis=0)).max() < 1e-14
    masses = [1.0, 2.0, 3.0, 0.5, 1.0]
    q = random_start(5, 1, 0, masses=masses)
    assert np.abs(np.asarray(masses) @ q).max() < 1e-14
    raw = random_start(6, 9, 3, annulus=(0.3, 3.0), recenter=False)
    rad = np.hypot(raw[:, 0], raw[:, 1])
    assert np.all((rad >= 0.3) & (rad <= 3.0))


@pytest.mark.parametrize("alpha", [0, 1, 2.5])
def test_refine_equilateral_basin(alpha):
    p = PotentialParams(alpha, [1, 1, 1])
    side = 3 ** (1 / (alpha + 2))
    out = refine(p, equilateral(1.1 * side))
    assert out.ok
    assert np.abs(ac.distances_of(out.points) - side).max() < 1e-10
    assert np.abs(g.cc_residual(p, out.points)).max() < 1e-12


def test_refine_exact_start():
    p = PotentialParams(1, [1, 1, 1])
    out = refine(p, equilateral(3 ** (1 / 3)))
    assert out.ok and out.iterations == 0


def test_refine_two_body():
    p = PotentialParams(1, [1, 1])
    out = refine(p, [(-0.75, 0), (0.75, 0)])
    assert out.ok
    assert ac.distances_of(out.points)[0] == pytest.approx(2 ** (1 / 3), abs=1e-10)


def test_refine_failure_codes():
    p = PotentialParams(1, [1, 1])
    start = [(-1.5, 0), (1.5, 0)]
    assert refine(p, start, SolverSettings(max_iters=1)).status is Status.ITERATION_LIMIT
    out = refine(p, start, SolverSettings(min_separation=2.0))
    assert out.status is Status.COLLISION and out.points is None
    out = refine(p, [(-0.1, 0), (0.1, 0)], SolverSettings(max_radius=0.3))
    assert out.status is Status.DIVERGED
    with pytest.raises(g.CollisionError):
        refine(p, [(0, 0), (1e-9, 0)])


@pytest.mark.parametrize("masses", [(1, 1), (1, 3), (0.5, 0.25)])
@pytest.mark.parametrize("alpha", [0, 1, 2.5])
def test_enumerate_two_body(masses, alpha):
    p = PotentialParams(alpha, masses)
    classes = enumerate_classes(p, SolverSettings(starts=60, seed=1))
    assert len(classes) == 1
    assert classes[0].fingerprint.distances[0] == pytest.approx(
        sum(masses) ** (1 / (alpha + 2)), abs=1e-10
    )


def test_enumerate_vortex_saturation():
    p = PotentialParams(0, [1, 1, 1])
    lists = []
    for seed in (1, 2, 3):
        classes = enumerate_classes(p, SolverSettings(starts=2000, seed=seed))
        assert len(classes) == 5
        assert sum(c.collinear for c in classes) == 3
        lists.append(classes)
    for other in lists[1:]:
        for a in lists[0]:
            assert sum(same_class(a.fingerprint, b.fingerprint) for b in other) == 1
    for c in lists[0]:
        assert c.residual_inf < 1e-12 and c.ac_residual_inf < 1e-8
        assert c.matrix_residual_fro < 1e-8 and abs(c.lam - 1) < 1e-8


def test_enumerate_ordering_and_ids():
    p = PotentialParams(1, [1, 1, 1])
    res = multistart(p, SolverSettings(starts=500, seed=11))
    keys = [c.fingerprint.sort_key() for c in res.classes]
    assert keys == sorted(keys)
    assert [c.id for c in res.classes] == list(range(1, len(res.classes) + 1))
    assert res.converged + sum(res.failures.values()) == 500


def test_worker_count_invariance():
    p = PotentialParams(1, [1, 1, 1, 1])
    s = SolverSettings(starts=700, seed=4)
    a = enumerate_classes(p, s, workers=1)
    b = enumerate_classes(p, s, workers=3)
    assert [c.fingerprint for c in a] == [c.fingerprint for c in b]
    assert [c.hits for c in a] == [c.hits for c in b]
    assert all(np.array_equal(x.points, y.points) for x, y in zip(a, b))


def test_canonical_orderings():
    assert canonical_orderings(2) == [(0, 1)]
    assert len(canonical_orderings(3)) == 3
    assert len(canonical_orderings(5)) == 60


def test_collinear_symmetric_three_body():
    p = PotentialParams(1, [1, 1, 1])
    out = solve_collinear(p, (0, 1, 2))
    assert out.ok
    x = np.sort(out.points[:, 0])
    d = (5 / 4) ** (1 / 3)
    assert x == pytest.approx([-d, 0, d], abs=1e-10)
    assert np.all(out.points[:, 1] == 0)


@pytest.mark.parametrize("alpha", [0, 1, 2.5])
def test_collinear_two_body(alpha):
    p = PotentialParams(alpha, [2, 3])
    out = solve_collinear(p, (1, 0))
    assert abs(out.points[0, 0] - out.points[1, 0]) == pytest.approx(5 ** (1 / (alpha + 2)), abs=1e-10)
    assert out.points[1, 0] < out.points[0, 0]


def test_collinear_rejects_bad_ordering():
    with pytest.raises(ValueError):
        solve_collinear(PotentialParams(1, [1, 1, 1]), (0, 0, 1))


def test_collinear_uniqueness_from_perturbed_starts():
    rng = np.random.default_rng(8)
    for _ in range(5):
        masses = rng.uniform(0.2, 3, 4)
        alpha = float(rng.uniform(0, 3))
        p = PotentialParams(alpha, masses)
        order = tuple(rng.permutation(4))
        ref = solve_collinear(p, order).points
        for _ in range(5):
            start = np.sort(rng.uniform(-4, 4, 4))
            out = solve_collinear(p, order, start=start)
            assert out.ok
            assert np.abs(out.points - ref).max() < 1e-9


def test_collinear_n4_distinct():
    p = PotentialParams(1, [1, 1, 1, 1])
    from ccenum.classify import make_class

    classes = [make_class(p, solve_collinear(p, o).points) for o in canonical_orderings(4)]
    fps = [c.fingerprint for c in classes]
    for i in range(len(fps)):
        for j in range(i + 1, len(fps)):
            gap = np.abs(np.subtract(fps[i].distances, fps[j].distances)).max()
            assert gap > 1e-4


@pytest.mark.parametrize("n, starts", [(3, 1000), (4, 6000)])
def test_collinear_count_matches_enumeration(n, starts):
    p = PotentialParams(1, [1.0] * n)
    found = enumerate_classes(p, SolverSettings(starts=starts, seed=2))
    assert sum(c.collinear for c in found) == len(canonical_orderings(n))


def test_continue_equilateral():
    p = PotentialParams(0, [1, 1, 1])
    res = continue_family(p, equilateral(3 ** 0.5), 0.0, 3.0, 30)
    track = res.tracks[0]
    assert len(track.alphas) == 31 and track.alphas == sorted(set(track.alphas))
    for a, fp in zip(track.alphas, track.fingerprints):
        assert np.abs(np.array(fp.distances) - 3 ** (1 / (a + 2))).max() < 1e-8
    assert res.events == []


def test_continue_two_body():
    p = PotentialParams(0, [1, 2])
    res = continue_family(p, two_body(1, 2, 0), 0.0, 2.0, 10)
    for a, fp in zip(res.alphas, res.tracks[0].fingerprints):
        assert fp.distances[0] == pytest.approx(3 ** (1 / (a + 2)), abs=1e-10)


def test_continue_constant_alpha():
    p = PotentialParams(1, [1, 1, 1])
    q = equilateral(3 ** (1 / 3))
    res = continue_family(p, q, 1.0, 1.0, 5)
    assert res.alphas == [1.0]
    assert np.abs(res.tracks[0].points[0] - canonicalize(p, refine(p, q).points)).max() < 1e-12


def test_continue_lost_track():
    # dilation alone carries symmetric shapes across alpha; an asymmetric one needs iterations
    p = PotentialParams(1, [1, 2, 3])
    q = solve_collinear(p, (0, 1, 2)).points
    with pytest.raises(TrackLostError):
        continue_family(p, q, 1.0, 2.0, 2, SolverSettings(max_iters=1))


def test_sweep_counts_three_body():
    p = PotentialParams(0, [1, 1, 1])
    classes = enumerate_classes(p, SolverSettings(starts=300, seed=1))
    res = sweep(p, classes, 0.0, 2.0, 8)
    assert res.counts == [5] * 9
    assert all(t.lost_at is None for t in res.tracks)
