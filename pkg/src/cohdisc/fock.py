"""Truncated Fock-space linear algebra: states, operators, overlaps, Wigner maps.

Everything lives on the photon-number basis |0>, ..., |d-1> as dense complex
arrays.  Displacement and squeezing unitaries are exponentiated in a
guard-enlarged working space and then cut back to the requested cutoff, which
keeps truncation damage confined to the upper edge of the basis.  Cutoffs are
sized from a Poisson photon-number tail bound so that results are converged
to well below the tolerances quoted by the callers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

__all__ = [
    "MIN_CUTOFF",
    "CutoffPolicy",
    "DEFAULT_POLICY",
    "FockVector",
    "FockOperator",
    "DensityOperator",
    "choose_cutoff",
    "coherent_state",
    "number_state",
    "displacement_operator",
    "squeeze_operator",
    "displaced_squeezed_state",
    "expectation",
    "wigner",
]

MIN_CUTOFF = 8
MAX_SQUEEZE = 2.0

HERMITICITY_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
TRACE_ATOL = 1e-9
NORM_ATOL = 1e-12


@dataclass(frozen=True)
class CutoffPolicy:
    """Sizing rule for the truncated basis.

    tail_tolerance bounds the Poisson photon-number weight allowed above the
    cutoff before the guard factor is applied; guard_factor enlarges the
    result so that operator products computed at the final cutoff stay
    accurate on the physically relevant block.
    """

    tail_tolerance: float = 1e-12
    guard_factor: float = 2.0

    def __post_init__(self) -> None:
        if not (0.0 < self.tail_tolerance < 1.0):
            raise ValueError(
                f"tail_tolerance must lie in (0, 1), got {self.tail_tolerance!r}"
            )
        if not (math.isfinite(self.guard_factor) and self.guard_factor >= 1.0):
            raise ValueError(f"guard_factor must be >= 1, got {self.guard_factor!r}")


DEFAULT_POLICY = CutoffPolicy()


def choose_cutoff(max_amplitude: float, policy: CutoffPolicy = DEFAULT_POLICY) -> int:
    """Pick a safe Fock cutoff for states of at most the given amplitude.

    Finds the smallest d whose Poisson tail sum_{k>=d} e^{-a^2} a^{2k} / k!
    falls below policy.tail_tolerance for a = max_amplitude, multiplies it by
    the guard factor, rounds up, and never returns less than MIN_CUTOFF.
    """
    amp = float(max_amplitude)
    if not math.isfinite(amp) or amp < 0.0:
        raise ValueError(f"max_amplitude must be finite and >= 0, got {max_amplitude!r}")
    lam = amp * amp
    # Forward summation of the Poisson terms; the tail is then accumulated
    # from the far end so no cancellation is involved.
    terms = [math.exp(-lam)]
    k = 0
    while k < lam or terms[-1] > policy.tail_tolerance * 1e-6:
        k += 1
        terms.append(terms[-1] * lam / k)
        if k > 1_000_000:
            raise ValueError("cutoff search failed to converge")
    tail = 0.0
    d_min = 1
    for j in range(len(terms) - 1, -1, -1):
        tail += terms[j]
        if tail >= policy.tail_tolerance:
            d_min = j + 1
            break
    return max(MIN_CUTOFF, math.ceil(d_min * policy.guard_factor))


class FockVector:
    """Pure-state amplitudes over |0>, ..., |d-1>.

    Truncated states may be slightly sub-normalized; norms above one (beyond
    roundoff) are rejected.
    """

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes) -> None:
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1-D array")
        nrm = float(np.linalg.norm(amps))
        if nrm > 1.0 + NORM_ATOL:
            raise ValueError(f"state norm {nrm} exceeds 1")
        self.amplitudes = amps

    @property
    def d(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self) -> "DensityOperator":
        """Rank-one density matrix |psi><psi| of this (near unit norm) state."""
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


class FockOperator:
    """Dense operator on the truncated basis."""

    __slots__ = ("matrix",)

    def __init__(self, matrix) -> None:
        m = np.ascontiguousarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError("operator matrix must be square and non-empty")
        self.matrix = m

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T)


class DensityOperator:
    """Hermitian, positive, unit-trace matrix on the truncated basis.

    Construction validates Hermiticity (max element deviation), the smallest
    eigenvalue (down to a small negative roundoff floor) and the trace.  The
    trace tolerance can be loosened by callers that deliberately work with
    slightly leaky truncations.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, trace_atol: float = TRACE_ATOL) -> None:
        m = np.ascontiguousarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError("density matrix must be square and non-empty")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > HERMITICITY_ATOL:
            raise ValueError(f"density matrix is not Hermitian (max deviation {herm:.3e})")
        low = float(np.linalg.eigvalsh(m)[0])
        if low < EIGENVALUE_FLOOR:
            raise ValueError(f"density matrix has negative eigenvalue {low:.3e}")
        tr = float(m.trace().real)
        if abs(tr - 1.0) > trace_atol:
            raise ValueError(f"density matrix trace {tr} is not 1 within {trace_atol}")
        self.matrix = m

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(self.matrix.trace().real)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@lru_cache(maxsize=None)
def _annihilation(d: int) -> np.ndarray:
    a = np.zeros((d, d))
    for k in range(d - 1):
        a[k, k + 1] = math.sqrt(k + 1.0)
    a.flags.writeable = False
    return a


def _enlarged_dim(d: int, policy: CutoffPolicy) -> int:
    return int(math.ceil(d * policy.guard_factor))


def coherent_state(alpha: complex, d: int) -> FockVector:
    """Truncated coherent state with amplitudes e^{-|a|^2/2} a^k / sqrt(k!)."""
    a = complex(alpha)
    if not (math.isfinite(a.real) and math.isfinite(a.imag)):
        raise ValueError(f"coherent amplitude must be finite, got {alpha!r}")
    if d < 1:
        raise ValueError(f"cutoff must be >= 1, got {d}")
    amps = np.zeros(d, dtype=np.complex128)
    amps[0] = math.exp(-abs(a) ** 2 / 2.0)
    for k in range(1, d):
        amps[k] = amps[k - 1] * a / math.sqrt(k)
    return FockVector(amps)


def number_state(k: int, d: int) -> FockVector:
    """Photon-number basis state |k>."""
    if not 0 <= k < d:
        raise ValueError(f"need 0 <= k < d, got k={k}, d={d}")
    amps = np.zeros(d, dtype=np.complex128)
    amps[k] = 1.0
    return FockVector(amps)


def displacement_operator(
    beta: complex, d: int, policy: CutoffPolicy = DEFAULT_POLICY
) -> FockOperator:
    """Truncation of exp(beta a+ - beta* a), built in the guard-enlarged space."""
    b = complex(beta)
    if not (math.isfinite(b.real) and math.isfinite(b.imag)):
        raise ValueError(f"displacement must be finite, got {beta!r}")
    de = _enlarged_dim(d, policy)
    a = _annihilation(de)
    gen = b * a.T - b.conjugate() * a
    u = expm(gen.astype(np.complex128))
    return FockOperator(u[:d, :d])


@lru_cache(maxsize=64)
def _squeeze_matrix(r: float, d: int, guard: float) -> np.ndarray:
    de = int(math.ceil(d * guard))
    a = _annihilation(de)
    gen = (a @ a - a.T @ a.T) * (r / 2.0)
    u = expm(gen)
    out = np.ascontiguousarray(u[:d, :d], dtype=np.complex128)
    out.flags.writeable = False
    return out


def squeeze_operator(r: float, d: int, policy: CutoffPolicy = DEFAULT_POLICY) -> FockOperator:
    """Truncation of exp((a^2 - a+^2) r / 2), built in the guard-enlarged space."""
    rr = float(r)
    if not math.isfinite(rr) or abs(rr) > MAX_SQUEEZE:
        raise ValueError(f"squeezing parameter must satisfy |r| <= {MAX_SQUEEZE}, got {r!r}")
    return FockOperator(_squeeze_matrix(rr, d, policy.guard_factor))


def displaced_squeezed_state(
    beta: complex, r: float, d: int, policy: CutoffPolicy = DEFAULT_POLICY
) -> FockVector:
    """The state S(-r) D(beta) |0>: displaced vacuum, then squeezed."""
    base = coherent_state(beta, d)
    if r == 0.0:
        return base
    s = squeeze_operator(-r, d, policy)
    return FockVector(s.matrix @ base.amplitudes)


def expectation(state: FockVector, rho: DensityOperator) -> float:
    """<psi| rho |psi>, clamped to [0, 1 + 1e-9] against roundoff."""
    if state.d != rho.d:
        raise ValueError(f"dimension mismatch: state d={state.d}, rho d={rho.d}")
    val = float(np.real(state.amplitudes.conj() @ rho.matrix @ state.amplitudes))
    return min(max(val, 0.0), 1.0 + 1e-9)


@lru_cache(maxsize=8)
def _displacement_eigensystem(d: int) -> tuple[np.ndarray, np.ndarray]:
    # i (a+ - a) is Hermitian; its spectral factors turn every displacement
    # along a fixed direction into two diagonal phase multiplications.
    a = _annihilation(d)
    lam, v = np.linalg.eigh(1j * (a.T - a))
    lam.flags.writeable = False
    v.flags.writeable = False
    return lam, v


@lru_cache(maxsize=8)
def _squeeze_eigensystem(d: int) -> tuple[np.ndarray, np.ndarray]:
    # i (a^2 - a+^2)/2 is Hermitian, so S(r) = V e^{-i r lam} V+; one
    # factorization serves every squeezing strength at this dimension.
    a = _annihilation(d)
    aa = a @ a
    lam, v = np.linalg.eigh(0.5j * (aa - aa.T))
    lam.flags.writeable = False
    v.flags.writeable = False
    return lam, v


def wigner(rho: DensityOperator, points, policy: CutoffPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Wigner function W(p) = (2/pi) sum_k (-1)^k <k| D(-p) rho D(p) |k>.

    The displaced parity sum runs over the cutoff of rho; callers must size
    that cutoff to cover the displaced states for all requested points.  The
    displacement action is evaluated through a cached spectral factorization
    of the displacement generator in the guard-enlarged space, which agrees
    with displacement_operator to machine precision.
    """
    pts = np.asarray(points, dtype=np.complex128).ravel()
    d = rho.d
    de = _enlarged_dim(d, policy)
    lam, v = _displacement_eigensystem(de)
    evals, evecs = np.linalg.eigh(rho.matrix)
    keep = evals > 1e-14
    weights = evals[keep]
    psi = np.zeros((de, weights.size), dtype=np.complex128)
    psi[:d, :] = evecs[:, keep]
    signs = (-1.0) ** np.arange(d)
    modes = np.arange(de)
    out = np.empty(pts.size)
    for i, gamma in enumerate(pts):
        t = abs(gamma)
        theta = cmath.phase(gamma) if t > 0.0 else 0.0
        rot = np.exp(1j * theta * modes)
        # D(-gamma) = R(theta) T(-|gamma|) R(theta)+ with T(t) = e^{t (a+ - a)}
        u = v.conj().T @ (rot.conj()[:, None] * psi)
        u *= np.exp(1j * t * lam)[:, None]
        phi = rot[:, None] * (v @ u)
        probs = np.abs(phi[:d, :]) ** 2
        out[i] = (2.0 / math.pi) * float(signs @ probs @ weights)
    return out
