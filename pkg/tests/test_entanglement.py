import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqcat import (
    FockVector,
    LayoutError,
    ModeLayout,
    TruncationError,
    TruncationWarning,
    apply_beam_splitter,
    fock_state,
    overlap,
    squeezed_cat,
    two_mode_squeezed_vacuum,
    vacuum,
)
from sqcat.entanglement import (
    BALANCED,
    bs_output_state_from_squeezers,
    cutoff_for_leakage,
    entanglement_entropy,
    entropy_crossover,
    entropy_curves,
    make_bs_output_state,
    schmidt_coefficients,
    tmsv_entropy,
)


@pytest.fixture(autouse=True)
def _quiet_truncation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


def test_product_state_has_zero_entropy():
    lay = ModeLayout.of(("a", 4), ("b", 4))
    assert entanglement_entropy(fock_state(lay, (2, 3))) == 0.0


def test_bell_like_state_has_one_bit():
    lay = ModeLayout.of(("a", 1), ("b", 1))
    st_ = FockVector(lay, np.array([0, 1, 1, 0]) / math.sqrt(2))
    assert entanglement_entropy(st_) == pytest.approx(1.0)


@pytest.mark.parametrize("q", [0.1, 0.3, 0.5, 0.7])
def test_tmsv_numerical_entropy_matches_closed_form(q):
    st_ = two_mode_squeezed_vacuum(q, 30)
    assert entanglement_entropy(st_) == pytest.approx(tmsv_entropy(q), abs=1e-8)


def test_tmsv_partial_sum_converges_to_closed_form():
    assert tmsv_entropy(0.3, terms=30) == pytest.approx(tmsv_entropy(0.3), abs=1e-9)
    assert tmsv_entropy(0.0) == 0.0
    with pytest.raises(ValueError):
        tmsv_entropy(1.0)


def test_split_two_photons_carry_one_and_a_half_bits():
    # |2,0> -> (|2,0> - sqrt2 |1,1> + |0,2>) / 2: Schmidt weights 1/4, 1/2, 1/4
    lay = ModeLayout.of(("a", 2), ("b", 2))
    out = apply_beam_splitter(BALANCED, fock_state(lay, (2, 0)), ("a", "b"))
    assert entanglement_entropy(out) == pytest.approx(1.5, abs=1e-10)


def test_small_r_minus_state_tends_to_split_two_photons():
    assert entanglement_entropy(make_bs_output_state(1e-3, -1, 12)) == pytest.approx(1.5, abs=1e-5)
    assert entanglement_entropy(make_bs_output_state(1e-3, 1, 12)) < 1e-4


@pytest.mark.parametrize("r", [0.3, 0.8, 1.2])
@pytest.mark.parametrize("sign", [1, -1])
def test_splitter_output_equals_squeezer_decomposition(r, sign):
    a = make_bs_output_state(r, sign, 24)
    b = bs_output_state_from_squeezers(r, sign, 24)
    assert abs(overlap(a, b)) ** 2 >= 1 - 1e-6


def test_output_is_normalized_and_bounded():
    out = make_bs_output_state(0.7, -1, 24)
    assert out.norm_sq == pytest.approx(1.0, abs=1e-10)
    na, nb = np.meshgrid(np.arange(25), np.arange(25), indexing="ij")
    assert np.all(out.tensor()[na + nb > 24] == 0)


@given(st.floats(0, 2 * math.pi))
@settings(max_examples=10, deadline=None)
def test_entropy_invariant_under_local_phases(phi):
    out = make_bs_output_state(0.6, -1, 16)
    t = out.tensor() * np.exp(1j * phi * np.arange(17))[:, None]
    rotated = FockVector(out.layout, t)
    assert entanglement_entropy(rotated) == pytest.approx(entanglement_entropy(out), abs=1e-10)


def test_schmidt_rejects_bad_inputs():
    with pytest.raises(LayoutError):
        schmidt_coefficients(vacuum(ModeLayout.of(("a", 2))))
    lay = ModeLayout.of(("a", 1), ("b", 1))
    with pytest.raises(ValueError):
        schmidt_coefficients(FockVector(lay, np.array([1.0, 1.0, 0, 0])))
    with pytest.raises(ValueError):
        make_bs_output_state(0.5, 0)


def test_entropy_curves_shape_and_limits():
    grid = np.linspace(0, 0.6, 7)
    c = entropy_curves(grid, cutoff=24)
    assert c.s_minus[0] == 1.5
    assert c.s_plus[0] == pytest.approx(0.0, abs=1e-12)
    assert c.s_tmsv[0] == 0.0
    assert c.mapping_note == "q = tanh(r)"
    assert np.all(np.diff(c.s_tmsv) > 0)
    assert np.all(np.diff(c.s_plus) > 0)


def test_entropy_curves_independent_of_workers():
    grid = np.linspace(0.1, 0.5, 5)
    a = entropy_curves(grid, cutoff=20, workers=1)
    b = entropy_curves(grid, cutoff=20, workers=3)
    assert np.array_equal(a.s_minus, b.s_minus)
    assert np.array_equal(a.s_plus, b.s_plus)


def test_entropy_curves_refuse_leaky_cutoff():
    with pytest.raises(TruncationError):
        entropy_curves([0.5, 1.5], cutoff=24)
    c = entropy_curves([1.5], cutoff=24, max_leakage=None)
    assert c.leakage[0] > 1e-6
    with pytest.raises(ValueError):
        entropy_curves([0.5, 1.6])
    with pytest.raises(ValueError):
        entropy_curves([])


def test_cutoff_for_leakage():
    c = cutoff_for_leakage(1.0, 1e-6)
    assert c % 4 == 0 and c >= 24
    assert max(squeezed_cat(1.0, s, c).leakage for s in (1, -1)) <= 1e-6
    assert max(squeezed_cat(1.0, s, c - 4).leakage for s in (1, -1)) > 1e-6
    with pytest.raises(TruncationError):
        cutoff_for_leakage(1.5, 1e-8, limit=100)


def test_minus_state_beats_tmsv_below_crossover_only():
    r0 = entropy_crossover(cutoff=60)
    assert 0.75 < r0 < 0.85
    c = entropy_curves([0.3, 0.6, 0.95, 1.2], cutoff=cutoff_for_leakage(1.2, 1e-6))
    assert np.all(c.s_minus[:2] > c.s_tmsv[:2])
    assert np.all(c.s_minus[2:] < c.s_tmsv[2:])


def test_zero_squeezing_outputs():
    out = make_bs_output_state(0.0, 1, 6)
    assert abs(out.tensor()[0, 0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        make_bs_output_state(0.0, -1, 6)
