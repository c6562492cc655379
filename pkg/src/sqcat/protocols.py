"""State-preparation procedures for superpositions of opposite squeezed states.

Three routes are modelled:

* ideal cross-Kerr evolution of a mode-1 state with a coherent probe, followed
  by an idealized discrimination of the probe between ``|alpha>`` and
  ``|-alpha>``;
* the four-detector linear-optical scheme: a two-mode squeezed vacuum on
  modes 4 and A, beam splitters B14, B24, B34, small displacements on modes
  1-4 and single-photon detection on all four, leaving an approximate
  ``|r;+>`` in mode A;
* conversion of a ``c0|0> + c4|4>`` state towards ``|r;->`` by mixing with a
  two-photon ancilla and post-selecting vacuum on the ancilla.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal

import numpy as np
from scipy.stats import poisson

from .fock import (
    DisplacementMethod,
    FockVector,
    HeraldResult,
    LayoutError,
    ModeLayout,
    OperatorMatrix,
    TruncationError,
    apply,
    beam_splitter_matrix,
    coherent_state,
    displacement_matrix,
    fock_state,
    overlap,
    project_fock,
    tensor_product,
    two_mode_squeezed_vacuum,
    vacuum,
)

__all__ = [
    "HeraldResult",
    "SchemeParams",
    "B14",
    "B24",
    "B34",
    "cross_kerr_evolve",
    "cross_kerr_herald",
    "solve_displacements",
    "run_plus_scheme",
    "fidelity",
    "perturbative_plus_state",
    "convert_to_minus",
    "minus_conversion_closed_form",
    "analytic_transmittance",
    "scan_transmittance",
]

SQ3 = math.sqrt(3.0)

B14 = np.array([[SQ3 / 2, -0.5], [0.5, SQ3 / 2]])
B24 = np.array([[math.sqrt(2 / 3), -1 / SQ3], [1 / SQ3, math.sqrt(2 / 3)]])
B34 = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0)

PROBE_LEAKAGE_MAX = 1e-8

# |4>_A amplitude per unit q^4 when four source photons are split one per detector:
# sqrt(4!) / 2^4.  The published perturbative expression carries 1 / (4 sqrt 6).
FOUR_PHOTON_EXACT = math.sqrt(6.0) / 8.0
FOUR_PHOTON_PUBLISHED = 1.0 / (4.0 * math.sqrt(6.0))

Calibration = Literal["published", "exact"]

# |4>_a|2>_b -> |6>_a amplitude per unit T^2 (1-T): sqrt(6!/(4! 2!)) = sqrt(15).
# The published conversion formula carries sqrt(30).
SIX_PHOTON = {"exact": math.sqrt(15.0), "published": math.sqrt(30.0)}


def _sign(sign) -> int:
    if sign in (1, "plus", "+"):
        return 1
    if sign in (-1, "minus", "-"):
        return -1
    raise ValueError(f"sign must be plus/minus (or +1/-1), got {sign!r}")


# ---------------------------------------------------------------------------
# cross-Kerr route
# ---------------------------------------------------------------------------


def _probe_cutoff(alpha_abs: float) -> int:
    """Smallest cutoff (>= 10) whose coherent-state tail is well below the allowed leakage."""
    c = 10
    while poisson.sf(c, alpha_abs**2) > PROBE_LEAKAGE_MAX * 1e-2:
        c += 1
    return c


def cross_kerr_evolve(
    state1: FockVector,
    alpha: complex,
    kappa_tau: float,
    probe_cutoff: int | None = None,
    probe_id: str = "2",
) -> FockVector:
    """``sum_n c_n |n>_1 |alpha e^{-i kappa tau n}>_2`` for a single-mode input."""
    if len(state1.layout) != 1:
        raise LayoutError("cross_kerr_evolve takes a single-mode input state")
    alpha = complex(alpha)
    if probe_cutoff is None:
        probe_cutoff = _probe_cutoff(abs(alpha))
    probe_leak = coherent_state(abs(alpha), probe_cutoff).leakage
    if probe_leak >= PROBE_LEAKAGE_MAX:
        raise TruncationError(
            f"probe cutoff {probe_cutoff} leaks {probe_leak:.2e} of |alpha|={abs(alpha)}"
        )
    c = state1.amplitudes
    rows = [
        c[n] * coherent_state(alpha * np.exp(-1j * kappa_tau * n), probe_cutoff).amplitudes
        for n in range(c.size)
    ]
    layout = state1.layout + ModeLayout(((probe_id, probe_cutoff),))
    return FockVector(layout, np.stack(rows), 1.0 - (1.0 - state1.leakage) * (1.0 - probe_leak))


def cross_kerr_herald(state12: FockVector, alpha: float, sign, probe_id: str | None = None) -> HeraldResult:
    """Project the probe mode on ``|+alpha>`` (plus) or ``|-alpha>`` (minus).

    The two probe states overlap by ``exp(-2 alpha^2)``; this is reported in
    the diagnostics rather than corrected for.
    """
    s = _sign(sign)
    if isinstance(alpha, complex) and alpha.imag != 0:
        raise ValueError("alpha must be real")
    alpha = float(np.real(alpha))
    if not alpha > 0:
        raise ValueError("alpha must be > 0; alpha = 0 gives indistinguishable branches")
    if len(state12.layout) != 2:
        raise LayoutError("cross_kerr_herald takes a two-mode state")
    probe_id = probe_id or state12.layout.ids[1]
    pos = state12.layout.position(probe_id)
    probe = coherent_state(s * alpha, state12.layout.cutoff(probe_id)).amplitudes
    t = np.moveaxis(state12.tensor(), pos, -1)
    component = t @ probe.conj()
    prob = float(np.vdot(component, component).real)
    rest = state12.layout.without([probe_id])
    diagnostics = {
        "non_orthogonality": math.exp(-2 * alpha**2),
        "input_leakage": state12.leakage,
        "branch": "plus" if s == 1 else "minus",
    }
    if prob == 0.0:
        raise ValueError("zero-probability herald outcome")
    return HeraldResult(prob, FockVector(rest, component / math.sqrt(prob), state12.leakage), diagnostics)


# ---------------------------------------------------------------------------
# four-detector scheme
# ---------------------------------------------------------------------------


def _elementary_symmetric(values) -> list[complex]:
    """[e_0, e_1, ..., e_n] of the given numbers."""
    n = len(values)
    return [
        complex(sum(np.prod(c) for c in combinations(values, k))) if k else 1.0 + 0j
        for k in range(n + 1)
    ]


def analytic_transmittance(
    r: float | None = None, ratio: float | None = None, coefficient: Calibration = "exact"
) -> float:
    """Transmittance that turns ``c0|0> + c4|4>`` into the ``|2>,|6>`` ratio of ``|r;->``.

    The converted state has ``|6>/|2> = k T^2 c4/c0`` (``k`` from
    :data:`SIX_PHOTON`) and ``|r;->`` has ``(sqrt(10)/4) tanh^2 r``.  With
    ``c4/c0`` taken from ``|r;+>`` the ``tanh^2 r`` cancels and ``T`` does not
    depend on ``r``: ``1/sqrt(3)`` for the exact ``k``, ``(sqrt(2)/6)^{1/2}`` for
    the published one.
    """
    k = SIX_PHOTON[coefficient]
    if ratio is None:
        t2 = 1.0
        ratio = SQ3 / (2 * math.sqrt(2))
    else:
        if r is None:
            raise ValueError("an explicit ratio needs r")
        t2 = math.tanh(r) ** 2
    if ratio <= 0:
        raise ValueError("c4/c0 must be positive")
    T = math.sqrt(math.sqrt(10) / 4 * t2 / (k * ratio))
    if not 0 < T < 1:
        raise ValueError(f"no transmittance in (0, 1) matches ratio {ratio}")
    return T


@dataclass(frozen=True)
class SchemeParams:
    """Parameters of the four-detector scheme.

    ``alphas`` are the displacements on modes 1-4, the fourth roots of
    ``-product`` so that their first three elementary symmetric functions
    vanish.  ``T`` is the transmittance used for the minus conversion.
    """

    r: float
    q: float
    c: float
    alphas: tuple[complex, complex, complex, complex]
    T: float
    calibration: str = "published"
    product: complex = field(init=False)

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if not 0 < self.T < 1:
            raise ValueError(f"T must lie in (0, 1), got {self.T}")
        e = _elementary_symmetric(self.alphas)
        for k in (1, 2, 3):
            if abs(e[k]) > 1e-12:
                raise ValueError(f"displacements violate e_{k} = 0 (|e_{k}| = {abs(e[k]):.2e})")
        target = self.q**4 / (_product_denominator(self.calibration) * math.tanh(self.r) ** 2)
        if abs(e[4] - target) > 1e-12 * max(1.0, target):
            raise ValueError("displacement product does not match the calibration")
        object.__setattr__(self, "product", e[4])

    def symmetric_functions(self) -> list[complex]:
        return _elementary_symmetric(self.alphas)


def _product_denominator(calibration: str) -> float:
    # product of alphas = q^4 / (k tanh^2 r): k = 6 as published, k = 2 when the
    # |4>_A term uses the exact sqrt(4!)/2^4 splitting amplitude
    if calibration == "published":
        return 6.0
    if calibration == "exact":
        return 2.0
    raise ValueError(f"unknown calibration {calibration!r}")


def solve_displacements(r: float, q: float, calibration: Calibration = "published", T: float | None = None) -> SchemeParams:
    """Displacements ``alpha_j = c q e^{i theta_j}``, ``theta_j = pi/4, 3pi/4, 5pi/4, 7pi/4``.

    ``published`` uses ``c = 6^{-1/4} tanh^{-1/2} r``.  ``exact`` uses
    ``c = 2^{-1/4} tanh^{-1/2} r``, which makes the leading-order ``|4>/|0>``
    ratio of the heralded state equal that of ``|r;+>``.
    """
    if not r > 0:
        raise ValueError("r must be > 0: the displacement scale c ~ tanh(r)^{-1/2} diverges at r = 0")
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    k = _product_denominator(calibration)
    c = k ** -0.25 / math.sqrt(math.tanh(r))
    alphas = tuple(c * abs(q) * np.exp(1j * math.pi * m / 4) for m in (1, 3, 5, 7))
    if T is None:
        T = analytic_transmittance(coefficient=calibration)
    return SchemeParams(r, q, c, alphas, T, calibration)


def run_plus_scheme(
    params: SchemeParams,
    cutoff: int = 5,
    displacement_method: DisplacementMethod = "series6",
    source_terms: int = 6,
    displacement_margin: int = 30,
) -> HeraldResult:
    """Simulate the four-detector scheme and herald ``|1,1,1,1>`` on modes 1-4.

    The source is the truncated, unnormalized sum
    ``sqrt(1-q^2) sum_{n<source_terms} q^n |n>_4 |n>_A``.  ``cutoff`` applies
    to modes 1-4 and must hold every source photon; mode A keeps
    ``source_terms - 1``.  In ``exact`` mode the displacements are
    exponentiated on ``cutoff + displacement_margin`` levels and cropped.
    """
    n_src = source_terms - 1
    if cutoff < n_src:
        raise ValueError(f"cutoff {cutoff} cannot hold {n_src} source photons")
    source = two_mode_squeezed_vacuum(params.q, n_src, modes=("4", "A"), normalize=False)
    if cutoff > n_src:
        source = source.with_cutoffs(cutoff, n_src)
    ancillas = vacuum(ModeLayout((("1", cutoff), ("2", cutoff), ("3", cutoff))))
    psi = tensor_product(ancillas, source)

    for m, other in ((B14, "1"), (B24, "2"), (B34, "3")):
        psi = apply(beam_splitter_matrix(m, (cutoff, cutoff), (other, "4")), psi)
    for mode_id, alpha in zip(("1", "2", "3", "4"), params.alphas):
        psi = apply(_displacement(alpha, cutoff, displacement_method, displacement_margin, mode_id), psi)

    result = project_fock(psi, [(m, 1) for m in ("1", "2", "3", "4")])
    result.diagnostics.update(
        source_leakage=params.q ** (2 * source_terms),
        source_terms=source_terms,
        cutoff=cutoff,
        displacement_method=displacement_method,
        calibration=params.calibration,
    )
    return result


def _displacement(alpha, cutoff, method, margin, mode_id) -> OperatorMatrix:
    if method == "series6":
        return displacement_matrix(alpha, cutoff, "series6", mode_id)
    big = displacement_matrix(alpha, cutoff + margin, method, mode_id)
    crop = big.matrix[: cutoff + 1, : cutoff + 1]
    return OperatorMatrix(ModeLayout(((mode_id, cutoff),)), crop, big.label)


def fidelity(state, target: FockVector) -> float:
    """``|<target|state>|^2`` for normalized pure states.

    ``state`` may be a :class:`HeraldResult`.  Layouts must share mode ids;
    differing cutoffs are reconciled by zero-padding.
    """
    if isinstance(state, HeraldResult):
        if state.state is None:
            raise ValueError("impossible herald outcome has no state")
        state = state.state
    if state.layout.ids != target.layout.ids:
        raise LayoutError(f"mode ids differ: {state.layout.ids} vs {target.layout.ids}")
    cut = tuple(max(a, b) for a, b in zip(state.layout.cutoffs, target.layout.cutoffs))
    a = state.with_cutoffs(*cut)
    b = target.with_cutoffs(*cut)
    return abs(overlap(b, a)) ** 2 / (a.norm_sq * b.norm_sq)


def perturbative_plus_state(params: SchemeParams, published: bool = False) -> FockVector:
    """Fourth-order heralded mode-A amplitudes (unnormalized) on ``|0>..|4>``.

    The ``|n>_A`` term pairs ``n`` source photons, split one per detector
    with amplitude ``sqrt(n!)/2^n``, with the elementary symmetric function
    ``e_{4-n}`` of the displacements.  ``published=True`` replaces the
    ``n = 4`` factor by the printed ``1/(4 sqrt 6)``.
    """
    e = params.symmetric_functions()
    q = params.q
    amps = np.zeros(5, dtype=complex)
    for n in range(5):
        amps[n] = math.sqrt(math.factorial(n)) / 2**n * q**n * e[4 - n]
    if published:
        amps[4] = FOUR_PHOTON_PUBLISHED * q**4
    amps *= math.sqrt(1 - q * q)
    return FockVector(ModeLayout((("A", 4),)), amps)


# ---------------------------------------------------------------------------
# |r;+> -> |r;-> conversion
# ---------------------------------------------------------------------------


def conversion_splitter(T: float) -> np.ndarray:
    """Mode transform of the transmittance-``T`` splitter used for the conversion.

    ``a^dag -> sqrt(T) a^dag + sqrt(1-T) b^dag``,
    ``b^dag -> -sqrt(1-T) a^dag + sqrt(T) b^dag``.
    """
    t, rr = math.sqrt(T), math.sqrt(1 - T)
    return np.array([[t, rr], [-rr, t]])


def convert_to_minus(state_a: FockVector, T: float, ancilla_id: str = "b") -> HeraldResult:
    """Mix ``state_a`` with ``|2>_b`` on a transmittance-``T`` splitter and keep ``b = 0``.

    Mode a is widened by two levels so the two ancilla photons always fit;
    every photon-number sector involved is complete, so the amplitudes are
    exact.
    """
    if not 0 < T < 1:
        raise ValueError(f"T must lie in (0, 1), got {T}")
    if len(state_a.layout) != 1:
        raise LayoutError("convert_to_minus takes a single-mode state")
    a_id = state_a.layout.ids[0]
    work = state_a.layout.cutoffs[0] + 2
    psi = tensor_product(
        state_a.with_cutoffs(work),
        fock_state(ModeLayout(((ancilla_id, work),)), (2,)),
    )
    psi = apply(beam_splitter_matrix(conversion_splitter(T), (work, work), (a_id, ancilla_id)), psi)
    result = project_fock(psi, [(ancilla_id, 0)])
    if not result.possible:
        raise ValueError("zero-probability conversion outcome")
    result.diagnostics.update(T=T, work_cutoff=work)
    return result


def minus_conversion_closed_form(
    c0: complex, c4: complex, T: float, coefficient: Calibration = "exact"
) -> dict[int, complex]:
    """Unnormalized ``{2: c0 (1-T), 6: k c4 T^2 (1-T)}`` with ``k`` from :data:`SIX_PHOTON`."""
    return {2: c0 * (1 - T), 6: SIX_PHOTON[coefficient] * c4 * T**2 * (1 - T)}


def scan_transmittance(
    state_a: FockVector, target: FockVector, step: float = 1e-3
) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Grid search of ``T`` in (0, 1) maximizing fidelity of the converted state with ``target``.

    Returns ``(T_best, F_best, T_grid, F_grid)``.
    """
    grid = np.arange(step, 1.0 - step / 2, step)
    fids = np.array([fidelity(convert_to_minus(state_a, T), target) for T in grid])
    k = int(np.argmax(fids))
    return float(grid[k]), float(fids[k]), grid, fids
