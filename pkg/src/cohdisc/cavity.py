"""Atom-cavity exchange protocol that realizes a two-level dephaser.

A two-level atom (ground G, excited E) couples to the cavity mode through
the excitation-exchange interaction g(a+ s- + a s+), simulated exactly in
the interaction picture where each pair {|k,E>, |k+1,G>} rotates at the Rabi
angle g*tau*sqrt(k+1) and |0,G> is stationary.  The protocol applies one
such rotation at the quarter-period g*tau = pi/2, scrambles the cavity phase
(an exact average that keeps only photon-number-diagonal blocks, atom
coherence included), applies the rotation again, and discards the atom.
The resulting field map keeps the vacuum fixed, flips the sign of |1>
relative to |0> on the protected two-level block, and leaves only
nearest-neighbor photon coherences elsewhere.

Joint states use the atom-major layout: index s*d + k holds atom level
s (0 = G, 1 = E) and photon number k.  The topmost excited level |d-1,E>
has no partner inside the cutoff and is frozen; protocol inputs never
populate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from cohdisc.fock import (
    EIGENVALUE_FLOOR,
    HERMITICITY_ATOL,
    TRACE_ATOL,
    DensityOperator,
    coherent_state,
)

__all__ = [
    "JCParams",
    "JointState",
    "jc_evolve",
    "dephase_cavity",
    "CavityDephaser",
    "cavity_dephaser_channel",
    "cavity_receiver_state",
]


@dataclass(frozen=True)
class JCParams:
    """Coupling settings for the atom-cavity exchange.

    gamma sets the frequency unit and tau the interaction time; omega is the
    bare mode frequency, representing a phase that the interaction picture
    compensates exactly, so it never enters the dynamics.
    """

    omega: float = 0.0
    gamma: float = 1.0
    tau: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        if self.tau is None:
            object.__setattr__(self, "tau", math.pi / (2.0 * self.gamma))
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError(f"tau must be > 0, got {self.tau!r}")

    @property
    def angle(self) -> float:
        """Base Rabi angle gamma*tau of the lowest exchange block."""
        return self.gamma * self.tau


class JointState:
    """Atom (G, E) plus cavity density matrix in the atom-major layout."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, trace_atol: float = TRACE_ATOL) -> None:
        m = np.ascontiguousarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2 or m.shape[0] % 2:
            raise ValueError("joint state must be a square matrix of even dimension")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > HERMITICITY_ATOL:
            raise ValueError(f"joint state is not Hermitian (max deviation {herm:.3e})")
        low = float(np.linalg.eigvalsh(m)[0])
        if low < EIGENVALUE_FLOOR:
            raise ValueError(f"joint state has negative eigenvalue {low:.3e}")
        tr = float(m.trace().real)
        if abs(tr - 1.0) > trace_atol:
            raise ValueError(f"joint state trace {tr} is not 1 within {trace_atol}")
        self.matrix = m

    @property
    def d(self) -> int:
        """Cavity cutoff (half the joint dimension)."""
        return self.matrix.shape[0] // 2

    @classmethod
    def with_ground_atom(cls, rho: DensityOperator) -> "JointState":
        d = rho.d
        joint = np.zeros((2 * d, 2 * d), dtype=np.complex128)
        joint[:d, :d] = rho.matrix
        return cls(joint)

    def cavity_matrix(self) -> np.ndarray:
        """Partial trace over the atom (raw matrix)."""
        d = self.d
        return self.matrix[:d, :d] + self.matrix[d:, d:]


@lru_cache(maxsize=8)
def _jc_unitary(d: int, angle: float) -> np.ndarray:
    u = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    u[0, 0] = 1.0
    u[2 * d - 1, 2 * d - 1] = 1.0
    for k in range(d - 1):
        theta = angle * math.sqrt(k + 1.0)
        ie = d + k
        ig = k + 1
        c, s = math.cos(theta), math.sin(theta)
        u[ie, ie] = c
        u[ig, ig] = c
        u[ie, ig] = -1j * s
        u[ig, ie] = -1j * s
    u.flags.writeable = False
    return u


@lru_cache(maxsize=8)
def _photon_mask(d: int) -> np.ndarray:
    kk = np.concatenate([np.arange(d), np.arange(d)])
    mask = (kk[:, None] == kk[None, :]).astype(float)
    mask.flags.writeable = False
    return mask


def jc_evolve(state: JointState, params: JCParams) -> JointState:
    """Exact exchange evolution for time tau at coupling gamma."""
    u = _jc_unitary(state.d, params.angle)
    return JointState(u @ state.matrix @ u.conj().T)


def dephase_cavity(state: JointState) -> JointState:
    """Uniform average over a random cavity phase rotation.

    Keeps every element at equal photon number (atom coherence included);
    elements connecting distinct photon numbers vanish identically.
    """
    return JointState(state.matrix * _photon_mask(state.d))


class CavityDephaser:
    """Field channel of the full protocol: rotate, phase-scramble, rotate, drop atom.

    The map is applied directly as two unitary sandwiches plus a mask, which
    is exactly the action of its process matrix; process_matrix() and
    choi_matrix() materialize the dense forms for structural tests at small
    cutoffs.
    """

    __slots__ = ("label", "params", "_u", "_mask")

    def __init__(self, d: int, params: JCParams | None = None) -> None:
        if d < 4:
            raise ValueError(f"cutoff must be >= 4, got {d}")
        p = params or JCParams()
        self.label = "cavity"
        self.params = p
        self._u = _jc_unitary(d, p.angle)
        self._mask = _photon_mask(d)

    @property
    def d(self) -> int:
        return self._u.shape[0] // 2

    def apply_matrix(self, mat) -> np.ndarray:
        """Raw action on an arbitrary cavity matrix (no state validation)."""
        d = self.d
        m = np.asarray(mat, dtype=np.complex128)
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match cutoff {d}")
        joint = np.zeros((2 * d, 2 * d), dtype=np.complex128)
        joint[:d, :d] = m
        u = self._u
        mid = u @ joint @ u.conj().T
        mid *= self._mask
        out = u @ mid @ u.conj().T
        return out[:d, :d] + out[d:, d:]

    def apply(self, rho: DensityOperator, *, trace_atol: float = TRACE_ATOL) -> DensityOperator:
        if rho.d != self.d:
            raise ValueError(f"cutoff mismatch: channel d={self.d}, state d={rho.d}")
        return DensityOperator(self.apply_matrix(rho.matrix), trace_atol=trace_atol)

    def process_matrix(self) -> np.ndarray:
        """Dense d^2 x d^2 matrix acting on row-major vectorized states."""
        d = self.d
        proc = np.zeros((d * d, d * d), dtype=np.complex128)
        for j in range(d):
            for k in range(d):
                unit = np.zeros((d, d), dtype=np.complex128)
                unit[j, k] = 1.0
                proc[:, j * d + k] = self.apply_matrix(unit).ravel()
        return proc

    def choi_matrix(self) -> np.ndarray:
        """Choi form: block (j, k) holds the image of the matrix unit |j><k|."""
        d = self.d
        choi = np.zeros((d * d, d * d), dtype=np.complex128)
        for j in range(d):
            for k in range(d):
                unit = np.zeros((d, d), dtype=np.complex128)
                unit[j, k] = 1.0
                choi[j * d : (j + 1) * d, k * d : (k + 1) * d] = self.apply_matrix(unit)
        return choi


def cavity_dephaser_channel(d: int, params: JCParams | None = None) -> CavityDephaser:
    """The protocol's field map at cutoff d."""
    return CavityDephaser(d, params)


def cavity_receiver_state(alpha: complex, d: int, params: JCParams | None = None) -> DensityOperator:
    """Protocol output for a coherent input of the given amplitude."""
    return CavityDephaser(d, params).apply(coherent_state(alpha, d).density())
