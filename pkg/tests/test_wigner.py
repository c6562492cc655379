import warnings

import numpy as np
import pytest

from sqcat import FockVector, LayoutError, ModeLayout, TruncationWarning, coherent_cat, coherent_state, squeezed_cat, squeezed_vacuum, vacuum
from sqcat.wigner import (
    TWO_OVER_PI,
    axis_points,
    characteristic_function,
    coherent_cat_wigner_closed_form,
    squeezed_vacuum_wigner_closed_form,
    wigner_grid,
    wigner_value,
    wigner_values,
    wigner_via_characteristic,
)

pytestmark = pytest.mark.filterwarnings("ignore::sqcat.TruncationWarning")

PTS = np.array([0, 0.3, -0.7j, 0.5 + 0.5j, -1.2 + 0.4j, 2.0, 1.5j])


@pytest.fixture(scope="module")
def cat_grid():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        state = squeezed_cat(0.8, -1, 40)
    return wigner_grid(state, (-4, 4, 0.05), (-4, 4, 0.05), "minus r=0.8")


def test_vacuum_wigner():
    v = vacuum(ModeLayout.of(("a", 10)))
    expected = TWO_OVER_PI * np.exp(-2 * np.abs(PTS) ** 2)
    assert np.max(np.abs(wigner_values(v, PTS) - expected)) < 1e-12


def test_coherent_wigner_peak():
    beta = 1.0 - 0.5j
    st = coherent_state(beta, 40)
    assert wigner_value(st, beta) == pytest.approx(TWO_OVER_PI, abs=1e-10)
    expected = TWO_OVER_PI * np.exp(-2 * np.abs(PTS - beta) ** 2)
    assert np.max(np.abs(wigner_values(st, PTS) - expected)) < 1e-10


@pytest.mark.parametrize("a", [0.8, 1.5])
@pytest.mark.parametrize("sign", [1, -1])
def test_coherent_cat_closed_form(a, sign):
    st = coherent_cat(a, sign, 40)
    assert np.max(np.abs(wigner_values(st, PTS) - coherent_cat_wigner_closed_form(a, PTS, sign))) < 1e-10


def test_odd_cat_origin_is_minus_two_over_pi():
    assert wigner_value(coherent_cat(1.0, -1, 40), 0) == pytest.approx(-TWO_OVER_PI, abs=1e-12)


@pytest.mark.parametrize("r", [0.5, 1.0])
def test_squeezed_vacuum_closed_form(r):
    st = squeezed_vacuum(r, 0.0, 160)
    assert np.max(np.abs(wigner_values(st, PTS) - squeezed_vacuum_wigner_closed_form(r, PTS))) < 1e-8


def test_even_parity_states_reach_two_over_pi_at_origin():
    for sign in (1, -1):
        assert wigner_value(squeezed_cat(0.6, sign, 60), 0) == pytest.approx(TWO_OVER_PI, abs=1e-12)


def test_characteristic_function_route_agrees():
    st = squeezed_cat(0.5, -1, 30)
    alphas = np.array([0.0, 0.4 + 0.2j, -0.6j])
    direct = wigner_values(st, alphas)
    # chi decays as exp(-|xi|^2 e^{-2r} / 2) along the anti-squeezed axis
    fourier = wigner_via_characteristic(st, alphas, extent=10, points=401)
    assert np.max(np.abs(direct - fourier)) < 1e-6


def test_characteristic_function_at_origin_is_norm():
    st = squeezed_cat(0.5, 1, 30)
    assert characteristic_function(st, np.array([0.0]))[0] == pytest.approx(1.0)


def test_grid_normalization(cat_grid):
    assert cat_grid.integral() == pytest.approx(1.0, abs=1e-3)


def test_grid_bounded(cat_grid):
    assert np.max(np.abs(cat_grid.values)) <= TWO_OVER_PI + 1e-6


def test_grid_symmetries(cat_grid):
    # real amplitudes: W(conj a) = W(a); even parity: W(-a) = W(a)
    w = cat_grid.values
    assert np.max(np.abs(w - w[::-1, :])) < 1e-10
    assert np.max(np.abs(w - w[::-1, ::-1])) < 1e-10


def test_grid_layout(cat_grid):
    assert cat_grid.values.shape == (161, 161)
    assert cat_grid.cutoff == 40
    assert cat_grid.value_near(0j) == pytest.approx(wigner_value(squeezed_cat(0.8, -1, 40), 0))
    assert cat_grid.state_descriptor == "minus r=0.8"


def test_minus_cat_has_negative_regions_along_the_unsqueezed_axis():
    st = squeezed_cat(0.6, -1, 60)
    w = wigner_values(st, 1j * np.linspace(0, 2, 81))
    assert w.min() < -0.05


def test_grid_independent_of_workers():
    st = squeezed_cat(0.4, 1, 20)
    a = wigner_grid(st, (-1, 1, 0.25), (-1, 1, 0.25), workers=1)
    b = wigner_grid(st, (-1, 1, 0.25), (-1, 1, 0.25), workers=4)
    assert np.array_equal(a.values, b.values)


def test_axis_points_inclusive():
    assert axis_points(-1, 1, 0.5).tolist() == [-1, -0.5, 0, 0.5, 1]
    with pytest.raises(ValueError):
        axis_points(0, 1, 0)
    with pytest.raises(ValueError):
        axis_points(1, 0, 0.1)


def test_multimode_rejected():
    with pytest.raises(LayoutError):
        wigner_value(vacuum(ModeLayout.of(("a", 2), ("b", 2))), 0)


def test_unnormalized_input_is_normalized():
    v = FockVector(ModeLayout.of(("a", 2)), np.array([2.0, 0, 0]))
    assert wigner_value(v, 0) == pytest.approx(TWO_OVER_PI)


def test_cat_closed_form_positive_at_the_component_centre():
    assert coherent_cat_wigner_closed_form(1.3, 1.3) > 0
    assert coherent_cat_wigner_closed_form(0.7, 0) == pytest.approx(-TWO_OVER_PI)


def test_coherent_grid_peak():
    g = wigner_grid(coherent_state(1.0, 40), (-1, 2, 0.05), (-1, 1, 0.05))
    i, j = np.unravel_index(np.argmax(g.values), g.values.shape)
    assert (g.re_axis[j], g.im_axis[i]) == pytest.approx((1.0, 0.0), abs=1e-12)
    assert g.values[i, j] == pytest.approx(TWO_OVER_PI, abs=1e-10)


def test_squeezed_vacuum_grid_symmetry():
    g = wigner_grid(squeezed_vacuum(0.7, 0.0, 60), (-2, 2, 0.1), (-2, 2, 0.1))
    w = g.values
    assert np.max(np.abs(w - w[:, ::-1])) < 1e-10
    assert np.max(np.abs(w - w[::-1, :])) < 1e-10


def _nearest_negative_distance(state, threshold=-1e-3):
    g = wigner_grid(state, (-3, 3, 0.05), (-3, 3, 0.05))
    x, y = np.meshgrid(g.re_axis, g.im_axis)
    return float(np.hypot(x, y)[g.values < threshold].min())


def test_fringes_move_inward_with_squeezing():
    d = [_nearest_negative_distance(squeezed_cat(r, -1, 40)) for r in (0.5, 1.0, 1.5)]
    assert d[0] > d[1] > d[2]
