import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wageurn.errors import (
    AllWeightsZero,
    BoundaryPoint,
    DegenerateLaborShareOne,
    DimensionMismatch,
    ExponentNotSublinear,
    GammaNotSimplex,
    IndexOutOfRange,
    LaborShareOutOfRange,
    NonPositiveAlpha,
    ZeroBaseNonPositiveExponent,
)
from wageurn.model import (
    FeedbackSpec,
    ModelParams,
    choice_probabilities,
    feedback_weights,
    field_G,
    field_G0,
    increment_vector,
    line_g,
    lyapunov,
    lyapunov_gradient,
    make_params,
    sublinear_limit,
)


def simplex_points(A_min=2, A_max=8):
    return st.integers(A_min, A_max).flatmap(
        lambda A: arrays(float, A, elements=st.floats(0.01, 1.0)).map(lambda v: v / v.sum())
    )


def test_validate_accepts_and_rejects():
    p = make_params(0.3, [0.5, 0.5], 1.1, [1, 1])
    assert p.A == 2 and p.beta == 1.1
    with pytest.raises(GammaNotSimplex):
        make_params(0.3, [0.6, 0.6], 1.1)
    with pytest.raises(NonPositiveAlpha):
        make_params(0.3, [0.5, 0.5], 1.1, [1, 0])
    with pytest.raises(LaborShareOutOfRange):
        make_params(1.2, [0.5, 0.5], 1.1)
    with pytest.raises(DimensionMismatch):
        make_params(0.3, [0.5, 0.5], 1.1, [1, 1, 1])


def test_params_are_immutable_and_hashable():
    p = make_params(0.3, [0.25, 0.75], 2.0)
    with pytest.raises(ValueError):
        p.gamma[0] = 1.0
    assert p.digest() == ModelParams.from_dict(p.to_dict()).digest()
    assert p.replace(r=0.4).digest() != p.digest()


def test_feedback_weights_examples():
    assert np.allclose(feedback_weights([1, 1], FeedbackSpec(3.7, [1, 1])), [1, 1])
    assert np.allclose(feedback_weights([0.75, 0.25], FeedbackSpec(2, [1, 1])), [0.5625, 0.0625])
    assert np.array_equal(feedback_weights([0, 1], FeedbackSpec(2, [1, 1])), [0, 1])
    with pytest.raises(ZeroBaseNonPositiveExponent):
        feedback_weights([0, 1], FeedbackSpec(-1, [1, 1]))


def test_choice_probability_examples():
    assert np.allclose(choice_probabilities([3, 1], FeedbackSpec(1, [1, 1])), [0.75, 0.25])
    assert np.allclose(choice_probabilities([0.75, 0.25], FeedbackSpec(2, [1, 1])), [0.9, 0.1])
    assert np.allclose(choice_probabilities(np.full(5, 0.2), FeedbackSpec.uniform(5, 2.5)), 0.2)
    with pytest.raises(AllWeightsZero):
        choice_probabilities([0, 0], FeedbackSpec(2, [1, 1]))


def test_choice_probabilities_survive_huge_wealth():
    # raw x**beta would overflow; the max-rescaling keeps it finite
    p = choice_probabilities([1e200, 5e199], FeedbackSpec(3, [1, 1]))
    assert np.allclose(p, [8 / 9, 1 / 9])


@given(simplex_points(), st.floats(0.0, 3.0), st.sampled_from([10.0, 1e6]))
def test_probabilities_scale_invariant(x, beta, c):
    fb = FeedbackSpec.uniform(len(x), beta)
    p = choice_probabilities(x, fb)
    assert abs(p.sum() - 1) < 1e-12
    assert np.allclose(choice_probabilities(c * x, fb), p, atol=1e-12, rtol=0)


def test_increment_vector():
    g = np.array([0.5, 0.5])
    assert np.allclose(increment_vector(0, 0.0, g), [1, 0])
    assert np.allclose(increment_vector(1, 1.0, g), g)
    assert np.allclose(increment_vector(0, 0.3, g), [0.85, 0.15])
    with pytest.raises(IndexOutOfRange):
        increment_vector(2, 0.3, g)


@given(st.integers(2, 10), st.floats(0, 1), st.data())
def test_increment_sums_to_one(A, r, data):
    g = np.full(A, 1 / A)
    i = data.draw(st.integers(0, A - 1))
    v = increment_vector(i, r, g)
    assert abs(v.sum() - 1) < 1e-12 and v[i] >= 1 - r - 1e-15


@given(simplex_points(2, 12), st.floats(0, 1), st.floats(0.1, 3))
def test_field_sums_to_zero(x, r, beta):
    A = len(x)
    p = make_params(r, np.full(A, 1 / A), beta)
    assert abs(field_G(x, p).sum()) < 1e-12


def test_field_examples():
    A = 4
    p = make_params(0.3, np.full(A, 0.25), 1.7)
    assert np.allclose(field_G(np.full(A, 0.25), p), 0)
    p2 = make_params(0.2, [0.5, 0.5], 2.0)
    x1 = 0.5 - math.sqrt(0.6) / 2
    assert np.linalg.norm(field_G([x1, 1 - x1], p2)) <= 1e-10
    p0 = make_params(0.0, [0.2, 0.3, 0.5], 1.5)
    assert np.array_equal(field_G([0, 1, 0], p0), [0, 0, 0])


def test_field_G0_examples():
    fb = FeedbackSpec.uniform(2, 2.0)
    assert np.allclose(field_G0([0.5, 0.5], fb), 0)
    assert field_G0([0.75, 0.25], fb)[0] == pytest.approx(0.15)
    assert np.allclose(field_G0([1.0, 0.0], fb), 0)


def test_line_g():
    assert line_g(0.4, 0.3, 0.4) == 0
    assert line_g(0.7, 0.5, 0.5) == pytest.approx(0.2)
    assert np.all(line_g(np.linspace(0, 1, 5), 0.0, 0.3) == 0)
    with pytest.raises(DegenerateLaborShareOne):
        line_g(0.5, 1.0, 0.5)


def test_lyapunov_value():
    p = make_params(0.3, [0.5, 0.5], 2.0)
    # -(1-r)/beta log(sum x^2) - r sum gamma log x + 1 at the centre
    assert lyapunov([0.5, 0.5], p) == pytest.approx(-0.65 * math.log(0.5) + 1, abs=1e-12)
    # at beta = 1 the capital term is -(1-r) log(sum x) = 0 on the simplex
    p1 = make_params(0.3, [0.5, 0.5], 1.0)
    assert lyapunov([0.5, 0.5], p1) == pytest.approx(-0.3 * math.log(0.5) + 1, abs=1e-12)
    with pytest.raises(BoundaryPoint):
        lyapunov([0.0, 1.0], p)


@given(simplex_points(2, 6), st.floats(0, 1), st.floats(0.0, 3.0))
def test_lyapunov_gradient_identity(x, r, beta):
    A = len(x)
    g = np.arange(1, A + 1, dtype=float)
    p = make_params(r, g / g.sum(), beta, np.linspace(0.5, 2, A))
    assert np.allclose(lyapunov_gradient(x, p), -field_G(x, p) / x, atol=1e-10, rtol=0)


def test_lyapunov_gradient_matches_finite_differences(rng):
    worst = 0.0
    for _ in range(100):
        A = int(rng.integers(2, 6))
        p = make_params(rng.uniform(0, 1), rng.dirichlet(np.ones(A)), rng.uniform(0.2, 3), rng.uniform(0.5, 2, A))
        x = 0.9 * rng.dirichlet(np.ones(A)) + 0.1 / A
        h = 1e-6
        fd = np.array([(lyapunov(x + h * e, p) - lyapunov(x - h * e, p)) / (2 * h) for e in np.eye(A)])
        worst = max(worst, np.abs(fd - lyapunov_gradient(x, p)).max())
    assert worst <= 1e-5


@given(simplex_points(2, 6), st.floats(0, 1), st.floats(0.1, 3.0))
def test_lyapunov_descends_along_field(x, r, beta):
    A = len(x)
    p = make_params(r, np.full(A, 1 / A), beta)
    G = field_G(x, p)
    # <grad L, G> = -sum G_i^2 / x_i
    assert lyapunov_gradient(x, p) @ G <= 1e-15


def test_lyapunov_gradient_zero_at_fixed_point():
    p = make_params(0.2, [0.5, 0.5], 2.0)
    x1 = 0.5 - math.sqrt(1 - 2 * 0.2) / 2
    assert np.allclose(lyapunov_gradient([x1, 1 - x1], p), 0, atol=1e-12)


def test_sublinear_limit():
    assert np.allclose(sublinear_limit(FeedbackSpec(0.5, [1, 1, 1])), 1 / 3)
    assert np.allclose(sublinear_limit(FeedbackSpec(0.5, [1, 4])), [1 / 17, 16 / 17])
    assert np.allclose(sublinear_limit(FeedbackSpec(0.0, [1, 2, 3])), [1 / 6, 2 / 6, 3 / 6])
    # near beta = 1 the exponent is huge; the log-domain path stays finite
    x = sublinear_limit(FeedbackSpec(0.999, [1.0, 1.01]))
    assert np.all(np.isfinite(x)) and x[1] > 0.99
    with pytest.raises(ExponentNotSublinear):
        sublinear_limit(FeedbackSpec(1.0, [1, 1]))
