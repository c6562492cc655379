"""Wigner functions of single-mode states.

``W(alpha) = (2/pi) <psi| D(alpha) P D(alpha)^dag |psi>`` with ``P`` the
photon-number parity.  The displaced amplitudes ``D(-alpha)|psi>`` are built
from exact displacement matrix elements (generalized Laguerre form), so no
truncated matrix exponential enters.  The output basis is widened
until the last rows of the displaced state carry negligible weight.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import FockVector, LayoutError

TWO_OVER_PI = 2.0 / math.pi
_TAIL_WEIGHT = 1e-14


def _displacement_columns(beta: np.ndarray, psi: np.ndarray, out_dim: int) -> np.ndarray:
    """``D(beta) psi`` for every entry of ``beta``; result shape ``(out_dim, len(beta))``.

    Along each diagonal ``m = n + k`` the elements are
    ``sqrt(n!/m!) beta^k e^{-|beta|^2/2} L_n^(k)(|beta|^2)``, generated by the
    forward Laguerre recurrence with the prefactor folded in.  Elements above
    the diagonal follow from ``<m|D|n> = (-1)^(n-m) conj(<n|D|m>)``.  The
    two-term recurrences in ``m`` or ``n`` alone are unstable for ``|beta| > 1``.
    """
    size = psi.size
    x = np.abs(beta) ** 2
    k = np.arange(out_dim)[:, None]
    # d_0[k] = beta^k e^{-x/2} / sqrt(k!), in log space to avoid overflow
    safe = np.where(x > 0, np.abs(beta), 1.0)
    log_mag = k * np.log(safe) - 0.5 * x - 0.5 * gammaln(k + 1)
    d_prev = np.where(x > 0, np.exp(log_mag), 0.0) * np.exp(1j * k * np.angle(beta))
    d_prev[0] = np.exp(-0.5 * x)
    sign = (-1.0) ** np.arange(size)
    out = np.zeros((out_dim, beta.size), dtype=complex)
    d_prevprev = None
    for n in range(size):
        if n == 1:
            d = d_prev * (1 + k - x) / np.sqrt(1 + k)
        elif n > 1:
            d = (2 * n - 1 + k - x) / np.sqrt(n * (n + k)) * d_prev - np.sqrt(
                (n - 1) * (n - 1 + k) / (n * (n + k))
            ) * d_prevprev
        else:
            d = d_prev
        if n:
            d_prevprev, d_prev = d_prev, d
        rows = out_dim - n
        if psi[n] != 0:
            out[n:] += d[:rows] * psi[n]
        upper = min(size - n, rows)
        if upper > 1:
            w = psi[n + 1 : n + upper] * sign[1:upper]
            out[n] += w @ np.conj(d[1:upper])
    return out


def _single_mode_amplitudes(state: FockVector) -> np.ndarray:
    if len(state.layout) != 1:
        raise LayoutError("Wigner functions are computed for single-mode states only")
    return np.asarray(state.amplitudes)


def wigner_values(state: FockVector, alphas) -> np.ndarray:
    """Wigner function at each point of ``alphas`` (any shape, complex)."""
    psi = _single_mode_amplitudes(state)
    pts = np.asarray(alphas, dtype=complex)
    flat = pts.reshape(-1)
    if flat.size == 0:
        return np.zeros(pts.shape)
    norm = float(np.vdot(psi, psi).real)
    reach = math.sqrt(psi.size) + float(np.max(np.abs(flat)))
    out_dim = int(reach**2 + 12 * reach + 20)
    for _ in range(6):
        v = _displacement_columns(-flat, psi, out_dim)
        tail = np.sum(np.abs(v[-max(10, out_dim // 5) :]) ** 2, axis=0)
        if np.max(tail) <= _TAIL_WEIGHT * norm:
            break
        out_dim *= 2
    else:
        raise RuntimeError("displaced state did not converge in the widened basis")
    parity = (-1.0) ** np.arange(out_dim)
    expect = np.einsum("mb,m,mb->b", v.conj(), parity, v)
    assert np.max(np.abs(expect.imag)) <= 1e-10
    return (TWO_OVER_PI * expect.real / norm).reshape(pts.shape)


def wigner_value(state: FockVector, alpha: complex) -> float:
    return float(wigner_values(state, np.array([alpha]))[0])


def characteristic_function(state: FockVector, xis) -> np.ndarray:
    """``chi(xi) = <psi| D(xi) |psi>``."""
    psi = _single_mode_amplitudes(state)
    pts = np.asarray(xis, dtype=complex)
    v = _displacement_columns(pts.reshape(-1), psi, psi.size)
    return (psi.conj() @ v).reshape(pts.shape)


def wigner_via_characteristic(state: FockVector, alphas, extent: float = 8.0, points: int = 321):
    """Slow cross-check: Fourier transform of the characteristic function.

    ``W(alpha) = (1/pi^2) int d^2 xi chi(xi) exp(alpha conj(xi) - conj(alpha) xi)``
    evaluated by a midpoint sum on ``[-extent, extent]^2``.  ``chi`` is computed
    once and reused for every entry of ``alphas``.
    """
    axis = np.linspace(-extent, extent, points)
    h = axis[1] - axis[0]
    xr, xi = np.meshgrid(axis, axis, indexing="ij")
    xis = (xr + 1j * xi).ravel()
    chi = characteristic_function(state, xis)
    pts = np.asarray(alphas, dtype=complex)
    out = np.array(
        [(chi * np.exp(a * np.conj(xis) - np.conj(a) * xis)).sum().real for a in pts.ravel()]
    ) * (h * h / math.pi**2)
    return float(out[0]) if pts.ndim == 0 else out.reshape(pts.shape)


def coherent_cat_wigner_closed_form(a: float, alpha, sign: int = -1) -> np.ndarray | float:
    """Closed-form Wigner function of the normalized cat ``|a> +/- |-a>`` (real ``a``).

    ``[e^{-2|alpha-a|^2} + e^{-2|alpha+a|^2} +/- 2 e^{-2|alpha|^2} cos(4 a Im alpha)]
    / (pi (1 +/- e^{-2 a^2}))``
    """
    alpha = np.asarray(alpha, dtype=complex)
    interference = 2 * np.exp(-2 * np.abs(alpha) ** 2) * np.cos(4 * a * alpha.imag)
    w = (
        np.exp(-2 * np.abs(alpha - a) ** 2) + np.exp(-2 * np.abs(alpha + a) ** 2) + sign * interference
    ) / (math.pi * (1 + sign * math.exp(-2 * a * a)))
    return float(w) if w.ndim == 0 else w


def squeezed_vacuum_wigner_closed_form(r: float, alpha) -> np.ndarray | float:
    """``(2/pi) exp[-2 (Im(alpha)^2 e^{-2r} + Re(alpha)^2 e^{2r})]``."""
    alpha = np.asarray(alpha, dtype=complex)
    w = TWO_OVER_PI * np.exp(-2 * (alpha.imag**2 * math.exp(-2 * r) + alpha.real**2 * math.exp(2 * r)))
    return float(w) if w.ndim == 0 else w


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


def axis_points(lo: float, hi: float, step: float) -> np.ndarray:
    """``lo, lo + step, ...`` up to ``hi`` (inclusive within rounding)."""
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a rectangular grid.

    ``values[i, j]`` is ``W(re_axis[j] + 1j * im_axis[i])``.
    """

    re_range: tuple[float, float, float]
    im_range: tuple[float, float, float]
    values: np.ndarray
    state_descriptor: str
    cutoff: int

    @property
    def re_axis(self) -> np.ndarray:
        return axis_points(*self.re_range)

    @property
    def im_axis(self) -> np.ndarray:
        return axis_points(*self.im_range)

    def integral(self) -> float:
        """Trapezoidal integral over the grid window."""
        return float(np.trapezoid(np.trapezoid(self.values, self.re_axis, axis=1), self.im_axis))

    def value_near(self, alpha: complex) -> float:
        j = int(np.argmin(np.abs(self.re_axis - alpha.real)))
        i = int(np.argmin(np.abs(self.im_axis - alpha.imag)))
        return float(self.values[i, j])


def wigner_grid(
    state: FockVector,
    re_range: tuple[float, float, float] = (-3.0, 3.0, 0.02),
    im_range: tuple[float, float, float] = (-3.0, 3.0, 0.02),
    descriptor: str = "",
    workers: int | None = None,
) -> WignerGrid:
    """Evaluate the Wigner function on a grid, one row of ``Im(alpha)`` per task.

    Rows are independent, so the result does not depend on ``workers``.
    """
    _single_mode_amplitudes(state)
    re = axis_points(*re_range)
    im = axis_points(*im_range)

    def row(y: float) -> np.ndarray:
        return wigner_values(state, re + 1j * y)

    if workers == 1:
        rows = [row(y) for y in im]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, im))
    return WignerGrid(
        tuple(map(float, re_range)),
        tuple(map(float, im_range)),
        np.vstack(rows),
        descriptor,
        state.layout.cutoffs[0],
    )
