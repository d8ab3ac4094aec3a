import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccenum import geometry as g
from ccenum.classify import (
    InconsistentSpectrumError,
    PreconditionError,
    canonicalize,
    classify_degeneracy,
    fingerprint,
    make_class,
    same_class,
)
from ccenum.geometry import PotentialParams
from ccenum.solver import SolverSettings, enumerate_classes, refine, solve_collinear

from conftest import equilateral, two_body


def chart_function(x, y, alpha):
    """U * I^(alpha/2) for unit masses at (0,0), (1,0), (x,y): scale free, so its
    critical points are exactly the three-body central configurations."""
    q = np.array([(0.0, 0.0), (1.0, 0.0), (x, y)])
    u = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            u += np.linalg.norm(q[i] - q[j]) ** -alpha
    c = q.mean(axis=0)
    inert = np.sum((q - c) ** 2)
    return u * inert ** (alpha / 2)


def chart_index(points, alpha, h=1e-4):
    z = points[:, 0] + 1j * points[:, 1]
    w = (z[2] - z[0]) / (z[1] - z[0])
    x, y = w.real, w.imag
    f = lambda a, b: chart_function(a, b, alpha)
    fxx = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / h**2
    fyy = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / h**2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
    grad = np.array([(f(x + h, y) - f(x - h, y)), (f(x, y + h) - f(x, y - h))]) / (2 * h)
    assert np.abs(grad).max() < 1e-6  # really a critical point of the chart function
    return int(np.sum(np.linalg.eigvalsh([[fxx, fxy], [fxy, fyy]]) < 0))


@pytest.fixture(scope="module")
def three_body_classes():
    p = PotentialParams(1, [1, 1, 1])
    return enumerate_classes(p, SolverSettings(starts=400, seed=7))


def test_fingerprint_isometry_and_reflection():
    p = PotentialParams(1, [1, 1, 1])
    q = equilateral(3 ** (1 / 3))
    c, s = np.cos(1.234), np.sin(1.234)
    f1 = fingerprint(p, q)
    f2 = fingerprint(p, q @ np.array([[c, -s], [s, c]]).T)
    assert np.abs(np.subtract(f1.distances, f2.distances)).max() < 1e-12
    assert f1.orientation == f2.orientation == 1
    mirror = fingerprint(p, q * [1, -1])
    assert mirror.orientation == -1
    assert np.allclose(mirror.distances, f1.distances)
    assert not same_class(f1, mirror)
    line = fingerprint(p, [(-1, 0), (0, 0), (1, 0)])
    assert line.orientation == 0


@settings(max_examples=50, deadline=None)
@given(
    theta=st.floats(0, 6.3),
    shift=st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    seed=st.integers(0, 10_000),
)
def test_fingerprint_invariance(theta, shift, seed):
    p = PotentialParams(1, [1, 2, 3, 4])
    q = np.random.default_rng(seed).uniform(-1, 1, (4, 2))
    c, s = np.cos(theta), np.sin(theta)
    q2 = q @ np.array([[c, -s], [s, c]]).T + np.array(shift)
    f1, f2 = fingerprint(p, q), fingerprint(p, q2)
    assert np.abs(np.subtract(f1.distances, f2.distances)).max() < 1e-12
    assert f1.orientation == f2.orientation


def test_distinct_collinear_orderings():
    p = PotentialParams(1, [1, 1, 1])
    a = make_class(p, solve_collinear(p, (0, 1, 2)).points)
    b = make_class(p, solve_collinear(p, (1, 0, 2)).points)
    assert not same_class(a.fingerprint, b.fingerprint)


def test_same_class_after_rerefinement(three_body_classes):
    p = PotentialParams(1, [1, 1, 1])
    rng = np.random.default_rng(3)
    for c in three_body_classes:
        start = c.points + rng.normal(scale=1e-3, size=c.points.shape)
        again = make_class(p, refine(p, start).points)
        assert same_class(c.fingerprint, again.fingerprint)


def test_canonical_form(three_body_classes):
    p = PotentialParams(1, [1, 1, 1])
    for c in three_body_classes:
        q = c.points
        rad = np.hypot(q[:, 0], q[:, 1])
        k = int(np.argmax(rad >= rad.max() * (1 - 1e-9)))
        assert q[k, 1] == 0 and q[k, 0] > 0
        assert abs(g.lambda_of(p, q) - 1) < 1e-12
        assert np.abs(g.center_of_mass(p, q)).max() < 1e-13
        # idempotent, bit for bit, also after an arbitrary similarity
        assert np.array_equal(canonicalize(p, q), q)
        cs, sn = np.cos(0.4), np.sin(0.4)
        moved = 1.7 * q @ np.array([[cs, -sn], [sn, cs]]).T + [2.0, 1.0]
        once = canonicalize(p, moved)
        assert np.array_equal(canonicalize(p, once), once)
        assert np.abs(once - q).max() < 1e-10


def test_two_body_spectrum():
    p = PotentialParams(1, [1, 1])
    h = classify_degeneracy(p, two_body(1, 1, 1))
    # blocks D = diag(2, 1/2), O = diag(-1, 1/2): eigenvalues of D +/- O
    assert np.allclose(h.eigenvalues, [0, 1, 1, 3], atol=1e-12)
    assert h.kernel_dim == 1 and h.nondegenerate and h.full_index == 0


def test_three_body_indices_match_chart_oracle(three_body_classes):
    assert len(three_body_classes) == 5
    for c in three_body_classes:
        assert c.nondegenerate
        assert c.reduced_index == chart_index(c.points, 1.0)
        assert c.reduced_index == (1 if c.collinear else 0)


def test_full_index_equals_reduced_for_positive_masses(three_body_classes):
    # translation and dilation directions are positive for the action
    for c in three_body_classes:
        assert c.full_index == c.reduced_index
    p = PotentialParams(1, [1, 1, 1, 1])
    for c in enumerate_classes(p, SolverSettings(starts=512, seed=5)):
        assert c.full_index == c.reduced_index


def test_precondition_violation():
    p = PotentialParams(1, [1, 1, 1])
    q = equilateral(3 ** (1 / 3))
    with pytest.raises(PreconditionError):
        classify_degeneracy(p, 1.3 * q)


def test_reduced_index_only_for_positive_masses():
    p = PotentialParams(1, [1, 1, -0.4])
    classes = enumerate_classes(p, SolverSettings(starts=300, seed=1))
    assert classes
    for c in classes:
        assert c.reduced_index is None
        assert c.residual_inf < 1e-12 and c.ac_residual_inf < 1e-8


def test_inconsistent_spectrum_error(monkeypatch):
    p = PotentialParams(1, [1, 1])
    monkeypatch.setattr(g, "cc_hessian", lambda params, q: np.diag([1.0, 2.0, 3.0, 4.0]))
    with pytest.raises(InconsistentSpectrumError):
        classify_degeneracy(p, two_body(1, 1, 1))
