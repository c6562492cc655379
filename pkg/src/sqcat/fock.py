"""Truncated Fock-space states and operators.

Multimode pure states are stored as dense complex amplitude vectors over a
product Fock basis.  Each mode carries its own photon-number cutoff and the
basis index is row-major over the ordered modes, so the amplitude of
``|n_0, n_1, ...>`` sits at ``np.ravel_multi_index((n_0, n_1, ...), shape)``.

Operators act on one or two named modes.  They carry a local layout (mode
labels and cutoffs) and are matched to a state's layout by label when
applied.

Conventions used throughout:

* single-mode squeezer  ``S(z) = exp((conj(z) a^2 - z a^dag^2) / 2)``
* two-mode squeezer     ``S_ab(s) = exp(s (a b - a^dag b^dag))``, so
  ``S_ab(-s)|0,0> = sqrt(1 - q^2) sum q^n |n,n>`` with ``q = tanh s``
* displacement          ``D(alpha) = exp(alpha a^dag - conj(alpha) a)``
* beam splitter given by a real orthogonal 2x2 matrix ``M`` maps the input
  creation operators as ``a_i^dag -> sum_j M[i, j] a_j^dag``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import gammaln

NORMALIZED_ATOL = 1e-10
LEAKAGE_WARN = 1e-6

DisplacementMethod = Literal["exact", "series6"]


class LayoutError(ValueError):
    """Raised when states and operators disagree about modes or cutoffs."""


class TruncationError(ValueError):
    """Raised when a truncated representation loses too much weight."""


class TruncationWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# layout, vectors, operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeLayout:
    """Ordered modes with per-mode photon-number cutoffs.

    ``modes`` is a sequence of ``(mode_id, cutoff)`` pairs.  A cutoff ``c``
    keeps Fock levels ``0..c`` for that mode.
    """

    modes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        modes = tuple((str(m), int(c)) for m, c in self.modes)
        ids = [m for m, _ in modes]
        if len(set(ids)) != len(ids):
            raise LayoutError(f"duplicate mode ids in {ids}")
        for m, c in modes:
            if c < 0:
                raise LayoutError(f"mode {m!r}: cutoff must be >= 0, got {c}")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "ModeLayout":
        return cls(tuple(pairs))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(m for m, _ in self.modes)

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.modes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c + 1 for _, c in self.modes)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.modes)

    def position(self, mode_id: str) -> int:
        try:
            return self.ids.index(str(mode_id))
        except ValueError:
            raise LayoutError(f"unknown mode id {mode_id!r}; layout has {self.ids}") from None

    def cutoff(self, mode_id: str) -> int:
        return self.modes[self.position(mode_id)][1]

    def index(self, occupations: Sequence[int]) -> int:
        """Basis index of an occupation tuple (row-major over modes)."""
        if len(occupations) != len(self.modes):
            raise LayoutError("occupation tuple length does not match layout")
        return int(np.ravel_multi_index(tuple(occupations), self.shape))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    def select(self, mode_ids: Iterable[str]) -> "ModeLayout":
        return ModeLayout(tuple((m, self.cutoff(m)) for m in mode_ids))

    def without(self, mode_ids: Iterable[str]) -> "ModeLayout":
        drop = {str(m) for m in mode_ids}
        for m in drop:
            self.position(m)
        return ModeLayout(tuple(p for p in self.modes if p[0] not in drop))

    def __add__(self, other: "ModeLayout") -> "ModeLayout":
        return ModeLayout(self.modes + other.modes)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    """Pure state on a truncated product Fock basis.

    ``leakage`` records the weight the ideal (untruncated) state had outside
    the retained basis before any renormalization.
    """

    layout: ModeLayout
    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if amps.size != self.layout.dimension:
            raise LayoutError(
                f"amplitude vector has {amps.size} entries, layout needs {self.layout.dimension}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_sq - 1.0) <= NORMALIZED_ATOL

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per mode (read-only view)."""
        return self.amplitudes.reshape(self.layout.shape)

    def cutoff_weight(self) -> float:
        """Weight on basis states with at least one mode at its cutoff."""
        t = np.abs(self.tensor()) ** 2
        edge = np.zeros(t.shape, dtype=bool)
        for axis, c in enumerate(self.layout.cutoffs):
            idx = [slice(None)] * t.ndim
            idx[axis] = c
            edge[tuple(idx)] = True
        return float(t[edge].sum())

    def normalized(self) -> "FockVector":
        n = self.norm_sq
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.layout, self.amplitudes / math.sqrt(n), self.leakage)

    def relabel(self, *mode_ids: str) -> "FockVector":
        if len(mode_ids) != len(self.layout):
            raise LayoutError("relabel needs one id per mode")
        layout = ModeLayout(tuple(zip(mode_ids, self.layout.cutoffs)))
        return FockVector(layout, self.amplitudes, self.leakage)

    def with_cutoffs(self, *cutoffs: int) -> "FockVector":
        """Zero-pad or crop each mode to new cutoffs (cropped weight is dropped)."""
        if len(cutoffs) != len(self.layout):
            raise LayoutError("with_cutoffs needs one cutoff per mode")
        layout = ModeLayout(tuple(zip(self.layout.ids, cutoffs)))
        out = np.zeros(layout.shape, dtype=complex)
        src = self.tensor()
        common = tuple(slice(0, min(a, b)) for a, b in zip(src.shape, layout.shape))
        out[common] = src[common]
        return FockVector(layout, out, self.leakage)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.tensor()) ** 2


def tensor_product(*vectors: FockVector) -> FockVector:
    """Product state; layouts are concatenated in argument order."""
    layout = ModeLayout(())
    amps = np.ones(1, dtype=complex)
    kept = 1.0
    for v in vectors:
        layout = layout + v.layout
        amps = np.kron(amps, v.amplitudes)
        kept *= 1.0 - v.leakage
    return FockVector(layout, amps, 1.0 - kept)


def fock_state(layout: ModeLayout, occupations: Sequence[int]) -> FockVector:
    amps = np.zeros(layout.dimension, dtype=complex)
    amps[layout.index(occupations)] = 1.0
    return FockVector(layout, amps)


def vacuum(layout: ModeLayout) -> FockVector:
    return fock_state(layout, (0,) * len(layout))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on the modes named in ``layout``.

    ``layout`` holds only the targeted modes (one or two), in the order the
    matrix indices use.
    """

    layout: ModeLayout
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        if len(self.layout) not in (1, 2):
            raise LayoutError("operators target one or two modes")
        mat = _frozen(self.matrix)
        d = self.layout.dimension
        if mat.shape != (d, d):
            raise LayoutError(f"matrix shape {mat.shape} does not match target dimension {d}")
        object.__setattr__(self, "matrix", mat)

    @property
    def target_modes(self) -> tuple[str, ...]:
        return self.layout.ids

    def on(self, *mode_ids: str) -> "OperatorMatrix":
        """Same matrix, retargeted at other mode labels."""
        if len(mode_ids) != len(self.layout):
            raise LayoutError("on() needs one id per targeted mode")
        layout = ModeLayout(tuple(zip(mode_ids, self.layout.cutoffs)))
        return OperatorMatrix(layout, self.matrix, self.label)

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.layout, self.matrix.conj().T, f"{self.label}^dag")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.layout != self.layout:
            raise LayoutError("composition needs identical target layouts")
        return OperatorMatrix(self.layout, self.matrix @ other.matrix, f"{self.label}*{other.label}")

    def unitarity_error(self, subspace: np.ndarray | None = None) -> float:
        """max |U^dag U - I| over the full space or over the basis indices in ``subspace``."""
        u = self.matrix
        if subspace is not None:
            u = u[np.ix_(subspace, subspace)]
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class HeraldResult:
    """Outcome of a projective measurement on some modes.

    ``probability`` is the squared norm of the projected component (it is the
    success probability when the pre-measurement state is normalized).
    ``state`` is the renormalized remainder, or ``None`` when the outcome is
    impossible.
    """

    probability: float
    state: FockVector | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def possible(self) -> bool:
        return self.state is not None


@dataclass(frozen=True)
class SqueezeParams:
    """Complex squeezing ``zeta = r exp(i phi)``.

    ``q = tanh(r)`` is the two-mode squeezing amplitude when ``r`` is read as
    a two-mode squeezing parameter.
    """

    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.phi)):
            raise ValueError("squeezing parameters must be finite")

    @classmethod
    def from_q(cls, q: float) -> "SqueezeParams":
        if not -1.0 < q < 1.0:
            raise ValueError(f"q must lie in (-1, 1), got {q}")
        return cls(math.atanh(q))

    @property
    def zeta(self) -> complex:
        return self.r * complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def q(self) -> float:
        return math.tanh(self.r)


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------


def _single(mode_id: str, cutoff: int) -> ModeLayout:
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    return ModeLayout(((mode_id, cutoff),))


def _squeezed_amplitudes(r: float, phi: float, cutoff: int) -> np.ndarray:
    """Untruncated-normalization amplitudes of S(r e^{i phi})|0> for n <= cutoff."""
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = 1.0 / math.sqrt(math.cosh(r))
    t = math.tanh(r)
    if t == 0.0:
        return amps
    n = np.arange(1, cutoff // 2 + 1)
    log_mag = (
        0.5 * gammaln(2 * n + 1) - n * math.log(2.0) - gammaln(n + 1)
        + n * math.log(abs(t)) - 0.5 * math.log(math.cosh(r))
    )
    phase = (-np.sign(t) * np.exp(1j * phi)) ** n
    amps[2 * n] = np.exp(log_mag) * phase
    return amps


def _warn_leakage(what: str, leakage: float):
    if leakage > LEAKAGE_WARN:
        warnings.warn(f"{what}: truncation leakage {leakage:.3e}", TruncationWarning, stacklevel=3)


def squeezed_vacuum(r: float, phi: float = 0.0, cutoff: int = 40, mode_id: str = "a") -> FockVector:
    """Single-mode squeezed vacuum ``S(r e^{i phi})|0>``, renormalized after truncation."""
    if not (math.isfinite(r) and math.isfinite(phi)):
        raise ValueError("r and phi must be finite")
    amps = _squeezed_amplitudes(r, phi, cutoff)
    kept = float(np.sum(np.abs(amps) ** 2))
    leakage = max(0.0, 1.0 - kept)
    _warn_leakage(f"squeezed_vacuum(r={r})", leakage)
    return FockVector(_single(mode_id, cutoff), amps / math.sqrt(kept), leakage)


def coherent_state(alpha: complex, cutoff: int = 40, mode_id: str = "a") -> FockVector:
    alpha = complex(alpha)
    n = np.arange(cutoff + 1)
    amps = np.zeros(cutoff + 1, dtype=complex)
    if alpha == 0:
        amps[0] = 1.0
    else:
        log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    kept = float(np.sum(np.abs(amps) ** 2))
    leakage = max(0.0, 1.0 - kept)
    _warn_leakage(f"coherent_state(alpha={alpha})", leakage)
    return FockVector(_single(mode_id, cutoff), amps / math.sqrt(kept), leakage)


def squeezed_cat(r: float, sign: int, cutoff: int = 40, phi: float = 0.0, mode_id: str = "a") -> FockVector:
    """Normalized ``|r;+>`` (sign=+1) or ``|r;->`` (sign=-1), i.e. ``|z> +/- |-z>``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if sign == -1 and r == 0.0:
        raise ValueError("|r;-> is undefined at r = 0")
    amps = _squeezed_amplitudes(r, phi, cutoff) + sign * _squeezed_amplitudes(-r, phi, cutoff)
    kept = float(np.sum(np.abs(amps) ** 2))
    leakage = max(0.0, 1.0 - kept / cat_normalization(r, sign))
    _warn_leakage(f"squeezed_cat(r={r}, sign={sign})", leakage)
    return FockVector(_single(mode_id, cutoff), amps / math.sqrt(kept), leakage)


def cat_normalization(r: float, sign: int) -> float:
    """Squared norm of ``|r> +/- |-r>``: ``2 [1 +/- 1 / (cosh r sqrt(1 + tanh^2 r))]``."""
    return 2.0 * (1.0 + sign * squeezed_overlap_closed_form(r))


def squeezed_overlap_closed_form(r: float) -> float:
    """``<r|-r>`` for real ``r``."""
    return 1.0 / (math.cosh(r) * math.sqrt(1.0 + math.tanh(r) ** 2))


def coherent_cat(a: complex, sign: int, cutoff: int = 40, mode_id: str = "a") -> FockVector:
    """Normalized ``|a> +/- |-a>``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if sign == -1 and a == 0:
        raise ValueError("odd coherent cat is undefined at a = 0")
    plus = coherent_state(a, cutoff).amplitudes
    minus = coherent_state(-a, cutoff).amplitudes
    amps = plus + sign * minus
    return FockVector(_single(mode_id, cutoff), amps / np.linalg.norm(amps))


def two_mode_squeezed_vacuum(
    q: float, cutoff: int = 24, modes: tuple[str, str] = ("a", "b"), normalize: bool = True
) -> FockVector:
    """``sqrt(1 - q^2) sum_{n <= cutoff} q^n |n, n>``.

    With ``normalize=False`` the truncated sum is returned as is, which is how
    the six-term source of the heralding scheme is modelled.
    """
    if not -1.0 < q < 1.0:
        raise ValueError(f"|q| must be < 1, got {q}")
    layout = ModeLayout(((modes[0], cutoff), (modes[1], cutoff)))
    t = np.zeros(layout.shape, dtype=complex)
    n = np.arange(cutoff + 1)
    t[n, n] = math.sqrt(1.0 - q * q) * float(q) ** n
    leakage = float(q * q) ** (cutoff + 1)
    vec = FockVector(layout, t, leakage)
    return vec.normalized() if normalize else vec


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def _expm_blockwise(gen: np.ndarray) -> np.ndarray:
    """expm of a matrix that is block diagonal up to a permutation."""
    n_blocks, labels = connected_components(csr_matrix(np.abs(gen) > 0), directed=False)
    out = np.zeros_like(gen, dtype=complex)
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        out[np.ix_(idx, idx)] = expm(gen[np.ix_(idx, idx)])
    return out


def displacement_matrix(
    alpha: complex, cutoff: int, method: DisplacementMethod = "exact", target: str = "a"
) -> OperatorMatrix:
    """``D(alpha)`` on levels ``0..cutoff``.

    ``exact`` exponentiates the truncated generator (unitary on the retained
    space).  ``series6`` keeps the first six Taylor terms
    ``sum_{n<6} (alpha a^dag - conj(alpha) a)^n / n!``.
    """
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    a = annihilation(cutoff)
    gen = alpha * a.conj().T - alpha.conjugate() * a
    if method == "exact":
        mat = expm(gen)
    elif method == "series6":
        mat = np.zeros_like(gen)
        term = np.eye(cutoff + 1, dtype=complex)
        for n in range(6):
            mat = mat + term
            term = term @ gen / (n + 1)
    else:
        raise ValueError(f"unknown displacement method {method!r}")
    return OperatorMatrix(_single(target, cutoff), mat, f"D[{method}]")


def single_mode_squeezer(r: float, cutoff: int, phi: float = 0.0, target: str = "a") -> OperatorMatrix:
    """``S(r e^{i phi})`` by exponentiating the truncated generator."""
    z = r * complex(math.cos(phi), math.sin(phi))
    a = annihilation(cutoff)
    gen = 0.5 * (z.conjugate() * a @ a - z * a.conj().T @ a.conj().T)
    return OperatorMatrix(_single(target, cutoff), _expm_blockwise(gen), "S")


def two_mode_squeezer(
    s: float, cutoffs: tuple[int, int] = (24, 24), targets: tuple[str, str] = ("a", "b")
) -> OperatorMatrix:
    """``S_ab(s) = exp(s (a b - a^dag b^dag))`` on the truncated product space."""
    if not math.isfinite(s):
        raise ValueError("s must be finite")
    a = np.kron(annihilation(cutoffs[0]), np.eye(cutoffs[1] + 1))
    b = np.kron(np.eye(cutoffs[0] + 1), annihilation(cutoffs[1]))
    gen = s * (a @ b - a.conj().T @ b.conj().T)
    layout = ModeLayout(((targets[0], cutoffs[0]), (targets[1], cutoffs[1])))
    return OperatorMatrix(layout, _expm_blockwise(gen), "S_ab")


def _is_orthogonal(m: np.ndarray, tol: float = 1e-12) -> bool:
    return m.shape == (2, 2) and np.isrealobj(m) and np.max(np.abs(m.T @ m - np.eye(2))) <= tol


def _checked_transform(transform) -> np.ndarray:
    m = np.asarray(transform)
    if np.iscomplexobj(m):
        if np.max(np.abs(m.imag)) > 1e-12:
            raise ValueError("beam splitter transform must be real")
        m = m.real
    m = m.astype(float)
    if not _is_orthogonal(m):
        raise ValueError("beam splitter transform must be a real orthogonal 2x2 matrix")
    return m


@lru_cache(maxsize=32)
def _splitter_sectors(entries: tuple[float, ...], cutoffs: tuple[int, int]) -> tuple:
    """Per photon-number sector: retained ``n_a`` values and the cropped block.

    A reflection (``det M = -1``) is a rotation followed by ``b -> -b``.
    """
    m = np.array(entries).reshape(2, 2)
    reflect = np.linalg.det(m) < 0
    if reflect:
        m = m @ np.diag([1.0, -1.0])
    theta = math.atan2(m[1, 0], m[0, 0])
    c1, c2 = cutoffs
    sectors = []
    for total in range(c1 + c2 + 1):
        keep = np.arange(max(0, total - c2), min(c1, total) + 1)
        # sector basis |k, total - k>, k = 0..total
        k = np.arange(total)
        up = np.sqrt((k + 1.0) * (total - k))  # <k+1| a^dag b |k>
        gen = np.zeros((total + 1, total + 1))
        gen[k + 1, k] = up
        gen[k, k + 1] = -up
        sub = expm(theta * gen)[np.ix_(keep, keep)]
        if reflect:
            sub = sub * ((-1.0) ** (total - keep))[:, None]
        keep.flags.writeable = False
        sub.flags.writeable = False
        sectors.append((total, keep, sub))
    return tuple(sectors)


def beam_splitter_matrix(
    transform: np.ndarray,
    cutoffs: tuple[int, int] = (24, 24),
    targets: tuple[str, str] = ("a", "b"),
) -> OperatorMatrix:
    """Fock-space beam splitter for a real orthogonal 2x2 mode transform.

    Input creation operators map as ``a_i^dag -> sum_j M[i, j] a_j^dag``.
    Matrix elements are exact for every retained basis pair; the operator is
    unitary on the complete photon-number sectors ``n_a + n_b <= min(cutoffs)``
    (see :func:`complete_sector_indices`).
    """
    m = _checked_transform(transform)
    c1, c2 = cutoffs
    layout = ModeLayout(((targets[0], c1), (targets[1], c2)))
    out = np.zeros((layout.dimension, layout.dimension), dtype=complex)
    for total, keep, sub in _splitter_sectors(tuple(m.ravel()), (c1, c2)):
        idx = keep * (c2 + 1) + (total - keep)
        out[np.ix_(idx, idx)] = sub
    return OperatorMatrix(layout, out, "B")


def apply_beam_splitter(transform: np.ndarray, state: FockVector, targets: tuple[str, str]) -> FockVector:
    """Same result as ``apply(beam_splitter_matrix(...), state)`` without the dense matrix.

    Works sector by sector, so it stays cheap at cutoffs where the dense
    operator would not fit in memory.
    """
    m = _checked_transform(transform)
    pos = [state.layout.position(t) for t in targets]
    if pos[0] == pos[1]:
        raise LayoutError("beam splitter needs two distinct modes")
    cutoffs = (state.layout.modes[pos[0]][1], state.layout.modes[pos[1]][1])
    t = np.moveaxis(state.tensor(), pos, [0, 1])
    out = np.zeros_like(t)
    for total, keep, sub in _splitter_sectors(tuple(m.ravel()), cutoffs):
        out[keep, total - keep] = np.tensordot(sub, t[keep, total - keep], axes=1)
    return FockVector(state.layout, np.moveaxis(out, [0, 1], pos), state.leakage)


def complete_sector_indices(cutoffs: tuple[int, int]) -> np.ndarray:
    """Basis indices of two-mode states with ``n_a + n_b <= min(cutoffs)``."""
    c1, c2 = cutoffs
    na, nb = np.meshgrid(np.arange(c1 + 1), np.arange(c2 + 1), indexing="ij")
    return np.flatnonzero((na + nb).ravel() <= min(c1, c2))


# ---------------------------------------------------------------------------
# state algebra
# ---------------------------------------------------------------------------


def apply(op: OperatorMatrix, state: FockVector) -> FockVector:
    """Apply ``op`` to the modes of ``state`` that share its labels."""
    axes = []
    for mode_id, cutoff in op.layout.modes:
        pos = state.layout.position(mode_id)
        if state.layout.modes[pos][1] != cutoff:
            raise LayoutError(
                f"mode {mode_id!r}: operator cutoff {cutoff} != state cutoff {state.layout.modes[pos][1]}"
            )
        axes.append(pos)
    k = len(axes)
    mat = op.matrix.reshape(op.layout.shape * 2)
    t = np.moveaxis(state.tensor(), axes, list(range(k)))
    t = np.tensordot(mat, t, axes=(list(range(k, 2 * k)), list(range(k))))
    t = np.moveaxis(t, list(range(k)), axes)
    return FockVector(state.layout, t, state.leakage)


def project_fock(state: FockVector, outcomes: Sequence[tuple[str, int]]) -> HeraldResult:
    """Project the listed modes onto Fock states ``|n>``.

    The returned probability is the squared norm of the projected component;
    the remainder is renormalized.  A zero-weight outcome gives a result with
    ``state=None``.
    """
    layout = state.layout
    index: list = [slice(None)] * len(layout)
    measured = []
    for mode_id, n in outcomes:
        pos = layout.position(mode_id)
        if not 0 <= n <= layout.modes[pos][1]:
            raise ValueError(f"outcome n={n} outside cutoff of mode {mode_id!r}")
        if pos in measured:
            raise ValueError(f"mode {mode_id!r} measured twice")
        index[pos] = int(n)
        measured.append(pos)
    rest = layout.without(layout.ids[p] for p in measured)
    component = np.asarray(state.tensor()[tuple(index)]).reshape(-1)
    prob = float(np.vdot(component, component).real)
    diagnostics = {"input_leakage": state.leakage, "outcomes": tuple((str(m), int(n)) for m, n in outcomes)}
    if prob == 0.0:
        return HeraldResult(0.0, None, diagnostics)
    remainder = FockVector(rest, component / math.sqrt(prob), state.leakage)
    diagnostics["cutoff_weight"] = remainder.cutoff_weight()
    return HeraldResult(prob, remainder, diagnostics)


def overlap(a: FockVector, b: FockVector) -> complex:
    """``<a|b>``."""
    if a.layout != b.layout:
        raise LayoutError(f"layout mismatch: {a.layout.modes} vs {b.layout.modes}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
