import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rvbggm.errors import DegenerateFit, InputError, InsufficientSamples
from rvbggm.scaling import (
    LatticeFamily,
    ScalingSample,
    curve_points,
    extrapolate,
    fit_scaling,
    model,
    read_samples_csv,
    write_samples_csv,
)

SIZES = (8, 16, 24, 36, 48)
TRUTH = (0.358, 1.77, 1.82)


def synthetic(g_c, k, x, sign=1, sizes=SIZES, noise=0.0, rng=None):
    g = model(np.array(sizes, float), g_c, k, x, sign)
    if noise:
        g = g + rng.normal(0.0, noise, g.size)
    return [ScalingSample(n, float(v)) for n, v in zip(sizes, g)]


def test_recovers_reference_parameters():
    fit = fit_scaling(synthetic(*TRUTH))
    for got, want in zip((fit.g_c, fit.k, fit.x), TRUTH):
        assert abs(got - want) / want < 1e-6
    assert fit.sign == 1 and fit.gradient_norm < 1e-12 and fit.residual_rms < 1e-10


def test_approach_from_below():
    fit = fit_scaling(synthetic(0.4, 0.8, 1.1, sign=-1))
    assert fit.sign == -1 and abs(fit.g_c - 0.4) < 1e-8


def test_constant_data_is_degenerate():
    with pytest.raises(DegenerateFit) as err:
        fit_scaling([ScalingSample(n, 0.3) for n in SIZES])
    assert err.value.partial["g_c"] == 0.3 and err.value.partial["k"] == 0.0


def test_growing_correction_is_degenerate():
    samples = [ScalingSample(n, 0.1 + 0.001 * n) for n in SIZES]
    with pytest.raises(DegenerateFit):
        fit_scaling(samples)


def test_too_few_samples():
    with pytest.raises(InsufficientSamples):
        fit_scaling(synthetic(*TRUTH, sizes=(8, 16)))
    with pytest.raises(InsufficientSamples):
        fit_scaling(synthetic(*TRUTH, sizes=(8, 16, 24)) + synthetic(*TRUTH, sizes=(8,)))


def test_family_filter():
    samples = synthetic(*TRUTH)
    odd = [ScalingSample(n, s.g, LatticeFamily.IMPERFECT) for n, s in zip((10, 20, 30), samples)]
    fit = fit_scaling(samples + odd, family="perfect")
    assert abs(fit.g_c - TRUTH[0]) < 1e-8
    with pytest.raises(InsufficientSamples):
        fit_scaling(samples + odd, family="imperfect")


def test_extrapolate():
    fit = fit_scaling(synthetic(*TRUTH))
    assert extrapolate(fit, math.inf) == fit.g_c
    for s in synthetic(*TRUTH):
        assert abs(extrapolate(fit, s.n_total) - s.g) < 1e-9
    grid = np.geomspace(2, 1e6, 200)
    values = [extrapolate(fit, n) for n in grid]
    assert all(b < a for a, b in zip(values, values[1:]))
    pts = curve_points(fit, 8, 200, 10)
    assert len(pts) == 10 and pts[0][0] == 8 and abs(pts[-1][0] - 200) < 1e-9


def test_sample_validation():
    with pytest.raises(InputError):
        ScalingSample(9, 0.3)
    with pytest.raises(InputError):
        ScalingSample(8, 1.2)
    with pytest.raises(InputError):
        ScalingSample(8, 0.3, "triangular")


def _in_range(g_c, k, x):
    g = model(np.array(SIZES, float), g_c, k, x, 1)
    return bool(np.all((g >= 0) & (g < 1)))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.75, exclude_max=True),
       st.floats(0.1, 5.0), st.floats(0.5, 3.0))
def test_round_trip_property(g_c, k, x):
    if not _in_range(g_c, k, x):
        return  # samples would leave the GGM range
    fit = fit_scaling(synthetic(g_c, k, x))
    for got, want in zip((fit.g_c, fit.k, fit.x), (g_c, k, x)):
        assert abs(got - want) <= 1e-6 * abs(want)


def test_noise_robustness():
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(1000):
        fit = fit_scaling(synthetic(*TRUTH, noise=1e-4, rng=rng))
        hits += abs(fit.g_c - TRUTH[0]) <= 5 * fit.stderr[0]
    assert hits >= 950


def test_csv_round_trip_and_errors():
    samples = synthetic(*TRUTH)
    text = "# note\n" + write_samples_csv(samples)
    back = read_samples_csv(text)
    assert [(s.n_total, s.g) for s in back] == [(s.n_total, s.g) for s in samples]
    sweep = "n_total,family,G,lambda_sq,partition_family,wall_time\n12,imperfect,0.18,0.82,x,NA\n16,perfect,NA,NA,NA,NA\n"
    assert [s.n_total for s in read_samples_csv(sweep)] == [12]
    with pytest.raises(InputError):
        read_samples_csv("a,b\n1,2\n")
    with pytest.raises(InputError):
        read_samples_csv("n_total,g,family\nx,0.1,perfect\n")
