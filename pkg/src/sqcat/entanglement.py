"""Beam-splitter entanglement of squeezed cats, compared with the two-mode squeezed vacuum."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .fock import (
    FockVector,
    LayoutError,
    ModeLayout,
    TruncationError,
    TruncationWarning,
    apply,
    apply_beam_splitter,
    cat_normalization,
    squeezed_cat,
    single_mode_squeezer,
    tensor_product,
    two_mode_squeezer,
    vacuum,
)

# a^dag -> (a^dag - b^dag)/sqrt(2), b^dag -> (a^dag + b^dag)/sqrt(2)
BALANCED = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0)
SCHMIDT_FLOOR = 1e-12
NORM_TOL = 1e-6
TMSV_MAPPING = "q = tanh(r)"


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be plus or minus, got {sign!r}")


def make_bs_output_state(r: float, sign, cutoff: int = 24) -> FockVector:
    """``|r;+/->`` in mode ``a`` and vacuum in ``b`` through a 50:50 beam splitter.

    The input lives on ``n_a <= cutoff``, so the output stays inside the sectors
    ``n_a + n_b <= cutoff`` where the truncated splitter is exact.  The input
    leakage is carried over.
    """
    s = _sign(sign)
    if r < 0 or not math.isfinite(r):
        raise ValueError(f"r must be finite and >= 0, got {r}")
    cat = squeezed_cat(r, s, cutoff, mode_id="a")
    state = tensor_product(cat, vacuum(ModeLayout.of(("b", cutoff))))
    return apply_beam_splitter(BALANCED, state, ("a", "b"))


def bs_output_state_from_squeezers(r: float, sign, cutoff: int = 24, working_cutoff: int | None = None) -> FockVector:
    """The same output written as ``S_a(r/2) S_b(r/2) S_ab(-r/2)|00> +/- (r -> -r)``.

    Built on a larger working space, then restricted to ``n_a + n_b <= cutoff``
    (the support of :func:`make_bs_output_state`) and renormalized.
    """
    s = _sign(sign)
    w = working_cutoff if working_cutoff is not None else cutoff + 16
    vac = vacuum(ModeLayout.of(("a", w), ("b", w)))
    branches = []
    for half in (r / 2, -r / 2):
        st = apply(two_mode_squeezer(-half, (w, w)), vac)
        st = apply(single_mode_squeezer(half, w, target="a"), st)
        st = apply(single_mode_squeezer(half, w, target="b"), st)
        branches.append(st.tensor())
    t = (branches[0] + s * branches[1]) / math.sqrt(cat_normalization(r, s))
    na, nb = np.meshgrid(np.arange(cutoff + 1), np.arange(cutoff + 1), indexing="ij")
    t = np.where(na + nb <= cutoff, t[: cutoff + 1, : cutoff + 1], 0.0)
    kept = float(np.sum(np.abs(t) ** 2))
    return FockVector(ModeLayout.of(("a", cutoff), ("b", cutoff)), t / math.sqrt(kept), max(0.0, 1.0 - kept))


def schmidt_coefficients(state: FockVector) -> np.ndarray:
    if len(state.layout) != 2:
        raise LayoutError("a bipartite (two-mode) state is required")
    if abs(state.norm_sq - 1.0) > NORM_TOL:
        raise ValueError(f"state norm^2 {state.norm_sq:.9f} deviates from 1 by more than {NORM_TOL}")
    sv = np.linalg.svd(state.tensor(), compute_uv=False)
    return sv[sv > SCHMIDT_FLOOR]


def entanglement_entropy(state: FockVector) -> float:
    """Entropy of entanglement in bits."""
    p = schmidt_coefficients(state) ** 2
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def tmsv_entropy(q: float, terms: int | None = None) -> float:
    """``-sum_n (1-q^2) q^{2n} log2[(1-q^2) q^{2n}]``.

    ``terms=None`` uses the closed form
    ``-log2(1-q^2) - q^2 log2(q^2) / (1-q^2)``; otherwise the first ``terms``
    summands.
    """
    x = float(q) ** 2
    if not 0.0 <= x < 1.0:
        raise ValueError(f"|q| must be < 1, got {q}")
    if x == 0.0:
        return 0.0
    if terms is None:
        return -math.log2(1.0 - x) - x * math.log2(x) / (1.0 - x)
    n = np.arange(terms)
    p = (1.0 - x) * x**n
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True)
class EntropyCurve:
    r_values: np.ndarray
    s_minus: np.ndarray
    s_plus: np.ndarray
    s_tmsv: np.ndarray
    leakage: np.ndarray
    cutoff: int
    mapping_note: str = TMSV_MAPPING


def _entropy_point(r: float, cutoff: int) -> tuple[float, float, float, float]:
    leak = 0.0
    out = []
    for s in (-1, 1):
        if s == -1 and r == 0.0:
            out.append(1.5)  # |r;-> -> |2> as r -> 0; split |2> carries 1.5 bits
            continue
        st = make_bs_output_state(r, s, cutoff)
        leak = max(leak, st.leakage)
        out.append(entanglement_entropy(st))
    return out[0], out[1], tmsv_entropy(math.tanh(r)), leak


def entropy_curves(r_grid, cutoff: int = 24, max_leakage: float = 1e-6, workers: int | None = None) -> EntropyCurve:
    """``S_BS^(-)``, ``S_BS^(+)`` and ``S_TMSV`` (with ``q = tanh r``) on ``r_grid``.

    Raises :class:`TruncationError` when the input leakage at the largest ``r``
    exceeds ``max_leakage``; pass ``max_leakage=None`` to skip the check and
    read the ``leakage`` column instead.
    """
    r = np.sort(np.asarray(r_grid, dtype=float))
    if r.size == 0:
        raise ValueError("empty r grid")
    if r[0] < 0 or r[-1] > 1.5:
        raise ValueError("r grid must lie within [0, 1.5]")
    if workers == 1:
        rows = [_entropy_point(x, cutoff) for x in r]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda x: _entropy_point(x, cutoff), r))
    arr = np.array(rows)
    if max_leakage is not None and arr[-1, 3] > max_leakage:
        raise TruncationError(
            f"leakage {arr[-1, 3]:.2e} at r={r[-1]} exceeds {max_leakage:.0e}; raise the cutoff"
        )
    return EntropyCurve(r, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], cutoff)


def cutoff_for_leakage(r: float, max_leakage: float, start: int = 24, step: int = 4, limit: int = 400) -> int:
    """Smallest cutoff ``start + k*step`` at which both ``|r;+/->`` leak at most ``max_leakage``."""
    cutoff = start
    while cutoff <= limit:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            leak = max(squeezed_cat(r, s, cutoff).leakage for s in ((1, -1) if r > 0 else (1,)))
        if leak <= max_leakage:
            return cutoff
        cutoff += step
    raise TruncationError(f"no cutoff up to {limit} keeps leakage at r={r} below {max_leakage:.0e}")


def entropy_gap(r: float, cutoff: int = 24) -> float:
    """``S_BS^(-)(r) - S_TMSV(tanh r)``."""
    return entanglement_entropy(make_bs_output_state(r, -1, cutoff)) - tmsv_entropy(math.tanh(r))


def entropy_crossover(cutoff: int = 24, bracket: tuple[float, float] = (0.5, 1.0), xtol: float = 1e-10) -> float:
    """Root of :func:`entropy_gap` inside ``bracket``."""
    return float(brentq(entropy_gap, *bracket, args=(cutoff,), xtol=xtol))
