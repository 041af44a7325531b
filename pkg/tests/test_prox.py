import numpy as np
import pytest

from logic.grid import GridFunction, VectorField
from logic.prox import (
    ball_array,
    clip_array,
    l1_ball_array,
    max_norm_prox_array,
    node_magnitude,
    project_ball_field,
    project_box,
    prox_linear,
    shrink_array,
    shrink_field,
)


def test_clip_examples():
    np.testing.assert_array_equal(clip_array(np.array([2.0, -3.0, 0.5]), 1.0), [1.0, -1.0, 0.5])


def test_clip_infinite_bound_is_identity():
    f = np.array([1e6, -1e6])
    np.testing.assert_array_equal(clip_array(f, np.inf), f)


def test_ball_projection_example():
    p = np.array([[3.0], [4.0]])
    np.testing.assert_allclose(ball_array(p, 1.0)[:, 0], [0.6, 0.8])


def test_ball_keeps_inner_vectors():
    p = np.array([[0.3], [0.4]])
    np.testing.assert_array_equal(ball_array(p, 1.0), p)


def test_shrink_examples():
    np.testing.assert_allclose(shrink_array(np.array([[3.0], [4.0]]), 5.0)[:, 0], [0.0, 0.0])
    np.testing.assert_allclose(shrink_array(np.array([[6.0], [8.0]]), 5.0)[:, 0], [3.0, 4.0])


def test_shrink_zero_threshold_is_identity(rng):
    p = rng.standard_normal((2, 6, 6))
    np.testing.assert_allclose(shrink_array(p, 0.0), p)


def test_shrink_infinite_threshold_gives_zero(rng):
    assert np.all(shrink_array(rng.standard_normal((1, 9)), np.inf) == 0)


@pytest.mark.parametrize("radius", [0.1, 1.0, 3.0])
def test_moreau_identity_ball_and_shrink(rng, radius):
    p = rng.standard_normal((2, 7, 5)) * 3
    np.testing.assert_allclose(ball_array(p, radius) + shrink_array(p, radius), p, atol=1e-12)


def test_projections_are_idempotent(rng):
    p = rng.standard_normal((2, 8, 8)) * 4
    once = ball_array(p, 1.5)
    np.testing.assert_allclose(ball_array(once, 1.5), once)
    box = clip_array(p[0], 0.7)
    np.testing.assert_array_equal(clip_array(box, 0.7), box)
    l1 = l1_ball_array(p, 2.0)
    np.testing.assert_allclose(l1_ball_array(l1, 2.0), l1, atol=1e-12)


def test_ball_projection_is_firmly_nonexpansive(rng):
    for _ in range(50):
        a = rng.standard_normal((2, 4, 4)) * 2
        b = rng.standard_normal((2, 4, 4)) * 2
        pa, pb = ball_array(a, 1.0), ball_array(b, 1.0)
        assert np.sum((pa - pb) ** 2) <= np.vdot(pa - pb, a - b) + 1e-12


def test_shrink_is_nonexpansive(rng):
    for _ in range(50):
        a = rng.standard_normal((1, 10)) * 2
        b = rng.standard_normal((1, 10)) * 2
        assert np.linalg.norm(shrink_array(a, 0.5) - shrink_array(b, 0.5)) <= np.linalg.norm(a - b) + 1e-12


def test_l1_ball_projection_lands_on_the_ball(rng):
    p = rng.standard_normal((2, 6, 6))
    proj = l1_ball_array(p, 1.0)
    assert node_magnitude(proj).sum() == pytest.approx(1.0)
    # directions are preserved node by node
    mag = node_magnitude(proj)
    keep = mag > 0
    np.testing.assert_allclose((proj / np.where(keep, mag, 1.0))[:, keep],
                               (p / node_magnitude(p))[:, keep], atol=1e-12)


def test_l1_ball_projection_is_optimal_against_samples(rng):
    p = rng.standard_normal((1, 8))
    proj = l1_ball_array(p, 1.0)
    best = np.sum((proj - p) ** 2)
    for _ in range(500):
        cand = rng.standard_normal((1, 8))
        cand /= max(1.0, np.abs(cand).sum())
        assert np.sum((cand - p) ** 2) >= best - 1e-12


def test_max_norm_prox_moreau_decomposition(rng):
    p = rng.standard_normal((2, 5, 5))
    t = 0.8
    np.testing.assert_allclose(max_norm_prox_array(p, t) + t * l1_ball_array(p / t, 1.0), p, atol=1e-12)


def test_max_norm_prox_caps_the_largest_magnitudes():
    p = np.array([[3.0, 1.0, 0.0]])
    # threshold 1 removes one unit from the top: cap at 2
    np.testing.assert_allclose(max_norm_prox_array(p, 1.0), [[2.0, 1.0, 0.0]])


def test_max_norm_prox_edge_thresholds(rng):
    p = rng.standard_normal((1, 6))
    np.testing.assert_array_equal(max_norm_prox_array(p, 0.0), p)
    assert np.all(max_norm_prox_array(p, np.inf) == 0)


def test_prox_linear_matches_enumeration():
    # argmin_x 1/2 (x - v)^2 + s * x * u0 subject to |x| <= b
    v, s, u0, b = 0.3, 0.5, -1.2, 0.8
    xs = np.linspace(-b, b, 20001)
    brute = xs[np.argmin(0.5 * (xs - v) ** 2 + s * xs * u0)]
    step = prox_linear(GridFunction([v]), GridFunction([u0]), s)
    closed = project_box(step, b).values[0]
    assert closed == pytest.approx(brute, abs=1e-3)


def test_typed_wrappers_validate_parameters():
    f = GridFunction([1.0, 2.0])
    v = VectorField([[1.0, 2.0]])
    with pytest.raises(ValueError):
        project_box(f, 0.0)
    with pytest.raises(ValueError):
        project_ball_field(v, -1.0)
    with pytest.raises(ValueError):
        shrink_field(v, -0.1)


def test_prox_linear_requires_matching_grids():
    with pytest.raises(ValueError):
        prox_linear(GridFunction([1.0, 2.0]), GridFunction([1.0]), 0.5)
