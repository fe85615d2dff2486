import math

import numpy as np
import pytest

from rydgraph.noise import p_even, trajectory_fidelity
from rydgraph.stats import convergence_curve, fit_epsilon, jackknife_se


def test_jackknife_binary_reference_value():
    values = np.zeros(1000)
    values[:752] = 1.0
    mean, se = jackknife_se(values)
    assert mean == pytest.approx(0.752)
    assert se == pytest.approx(0.0136631871, abs=1e-9)


def test_jackknife_matches_the_textbook_form():
    rng = np.random.default_rng(2)
    x = rng.normal(size=400)
    mean, se = jackknife_se(x)
    direct = math.sqrt(np.sum((x - x.mean()) ** 2) / (x.size * (x.size - 1)))
    assert mean == pytest.approx(float(x.mean()))
    assert se == pytest.approx(direct, rel=1e-12)


def test_jackknife_degenerate_cases():
    mean, se = jackknife_se([0.3])
    assert mean == 0.3 and se == 0.0
    with pytest.raises(ValueError):
        jackknife_se([])
    with pytest.raises(ValueError):
        jackknife_se(np.zeros((2, 2)))


def test_convergence_curve_checkpoints():
    values = np.random.default_rng(0).random(1000)
    curve = convergence_curve(values)
    assert [c for c, _, _ in curve] == [100, 200, 400, 800, 1000]
    # more shots means a tighter error on an iid sample
    assert curve[-1][2] < curve[0][2]
    with pytest.raises(ValueError):
        convergence_curve(values, checkpoints=[0])
    with pytest.raises(ValueError):
        convergence_curve(values, checkpoints=[2000])


def test_fit_recovers_an_exact_curve():
    xs = np.arange(2, 13)
    for model, fn in (("p_even", p_even), ("trajectory", trajectory_fidelity)):
        eps = 0.12 if model == "p_even" else 0.01
        ys = fn(xs, eps)
        fit = fit_epsilon(xs, ys, model=model)
        assert fit.model == model
        assert fit.eps == pytest.approx(eps, abs=1e-7)
        assert fit.sse < 1e-12
        assert fit.n_points == xs.size


def test_fit_weighted_and_uniform_agree_on_clean_data():
    xs = np.arange(2, 10)
    ys = p_even(xs, 0.08)
    ses = np.full(xs.size, 0.005)
    weighted = fit_epsilon(xs, ys, ses)
    uniform = fit_epsilon(xs, ys)
    assert weighted.eps == pytest.approx(uniform.eps, abs=1e-6)
    assert weighted.std_error > 0.0


def test_fit_interval_covers_the_truth_on_sampled_data():
    rng = np.random.default_rng(6)
    xs = np.arange(2, 13)
    eps = 0.1
    shots = 10000
    hits = 0
    reps = 20
    for _ in range(reps):
        p = p_even(xs, eps)
        ys = rng.binomial(shots, p) / shots
        ses = np.sqrt(np.maximum(ys * (1 - ys), 1e-9) / shots)
        fit = fit_epsilon(xs, ys, ses)
        if abs(fit.eps - eps) < 4.0 * fit.std_error:
            hits += 1
    assert hits >= reps - 2


def test_fit_validation():
    xs = np.arange(2, 8)
    ys = p_even(xs, 0.1)
    with pytest.raises(ValueError):
        fit_epsilon(xs, ys, model="exact")
    with pytest.raises(ValueError):
        fit_epsilon(xs, ys[:-1])
    with pytest.raises(ValueError):
        fit_epsilon(xs[:1], ys[:1])
    with pytest.raises(ValueError):
        fit_epsilon(xs, ys, ses=np.ones(3))
