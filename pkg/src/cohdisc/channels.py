"""Kraus-form quantum channels on the truncated Fock basis.

Two families live here.  The photon-number-diagonal channels (probabilistic
amplifier without heralding, its infinite-gain limit, and the partial
dephasers) have exact closed-form Kraus operators; their action reduces to an
elementwise mask on the density matrix, which apply() uses automatically.
The Gaussian pair (quantum-limited attenuator and amplifier) is built by
unitary dilation with a vacuum ancilla: a beamsplitter or two-mode squeezer
is exponentiated block by block in the conserved-quantum-number sectors and
the ancilla is traced out.  Both constructions give Kraus sets that are
complete to machine precision at any cutoff.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from cohdisc.fock import DensityOperator, FockOperator, coherent_state, expectation
from cohdisc.optimize import SearchSpec, maximize_1d

__all__ = [
    "QuantumChannel",
    "nhpamp_channel",
    "infgain_channel",
    "dephaser_channel",
    "attenuator_channel",
    "amplifier_channel",
    "apply",
    "apply_matrix",
    "overlap_gap",
]

EXACT_COMPLETENESS_TOL = 1e-12
DILATION_COMPLETENESS_TOL = 1e-10


class QuantumChannel:
    """A CPTP map given by explicit Kraus operators.

    Completeness (sum of K+K equal to the identity) is certified at
    construction; the residual is kept on the instance for reporting.  When
    every Kraus operator is diagonal the channel action is precomputed as an
    elementwise mask.
    """

    __slots__ = ("kraus", "label", "params", "completeness_error", "_mask")

    def __init__(
        self,
        kraus,
        label: str = "",
        params: dict | None = None,
        completeness_tol: float = DILATION_COMPLETENESS_TOL,
    ) -> None:
        ops = list(kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].d
        if any(op.d != d for op in ops):
            raise ValueError("all Kraus operators must share one cutoff")
        all_diag = all(_is_diagonal(op.matrix) for op in ops)
        if all_diag:
            # Diagonal Kraus sets: completeness reduces to the diagonal sum
            # and the channel action to an elementwise mask.
            mask = np.zeros((d, d), dtype=np.complex128)
            total = np.zeros(d)
            for op in ops:
                u = np.diag(op.matrix)
                mask += np.outer(u, u.conj())
                total += np.abs(u) ** 2
            err = float(np.max(np.abs(total - 1.0)))
        else:
            mask = None
            dense = np.zeros((d, d), dtype=np.complex128)
            for op in ops:
                dense += op.matrix.conj().T @ op.matrix
            err = float(np.max(np.abs(dense - np.eye(d))))
        if err > completeness_tol:
            raise ValueError(
                f"Kraus completeness residual {err:.3e} exceeds {completeness_tol:.1e}"
            )
        self.kraus = ops
        self.label = label
        self.params = dict(params or {})
        self.completeness_error = err
        self._mask = mask

    @property
    def d(self) -> int:
        return self.kraus[0].d


def _is_diagonal(m: np.ndarray) -> bool:
    return not np.any(m - np.diag(np.diag(m)))


def nhpamp_channel(g: float, n: int, d: int) -> QuantumChannel:
    """Non-heralded probabilistic amplifier with gain g and pivot level n.

    Both Kraus operators are diagonal: the success branch multiplies |k> by
    g^(k-n) for k <= n and leaves higher levels alone; the failure branch
    carries the complementary weight sqrt(1 - g^(2(k-n))) on k <= n.
    """
    g = float(g)
    if not math.isfinite(g) or g < 1.0:
        raise ValueError(f"gain must be finite and >= 1, got {g!r} (infinite gain has its own constructor)")
    if not 0 <= n < d:
        raise ValueError(f"need 0 <= n < d, got n={n}, d={d}")
    exps = np.minimum(np.arange(d) - n, 0).astype(float)
    ms = g**exps
    mf = np.sqrt(1.0 - ms * ms)
    kraus = [
        FockOperator(np.diag(ms.astype(np.complex128))),
        FockOperator(np.diag(mf.astype(np.complex128))),
    ]
    return QuantumChannel(
        kraus, label="nhpamp", params={"g": g, "n": n}, completeness_tol=EXACT_COMPLETENESS_TOL
    )


def infgain_channel(n: int, d: int) -> QuantumChannel:
    """Infinite-gain limit of the non-heralded amplifier: project above/below n."""
    if not 0 <= n < d:
        raise ValueError(f"need 0 <= n < d, got n={n}, d={d}")
    above = np.diag((np.arange(d) >= n).astype(np.complex128))
    below = np.diag((np.arange(d) < n).astype(np.complex128))
    return QuantumChannel(
        [FockOperator(above), FockOperator(below)],
        label="infgain",
        params={"n": n},
        completeness_tol=EXACT_COMPLETENESS_TOL,
    )


def dephaser_channel(n: int, d: int) -> QuantumChannel:
    """Partial dephaser: keep coherence among |0>..|n-1>, kill the rest.

    Kraus set is the projector onto the first n levels plus a rank-one
    projector per higher level, so only the leading n x n block and the
    diagonal survive.
    """
    if not 1 <= n < d:
        raise ValueError(f"need 1 <= n < d, got n={n}, d={d}")
    kraus = [FockOperator(np.diag((np.arange(d) < n).astype(np.complex128)))]
    for k in range(n, d):
        m = np.zeros((d, d), dtype=np.complex128)
        m[k, k] = 1.0
        kraus.append(FockOperator(m))
    return QuantumChannel(
        kraus, label="dephaser", params={"n": n}, completeness_tol=EXACT_COMPLETENESS_TOL
    )


def _beamsplitter_kraus(theta: float, d: int) -> list[np.ndarray]:
    # Photon loss l: K_l[n-l, n] from the total-photon-number block T = n,
    # where the block unitary is exp(theta (a+b - ab+)) on |n_a, T-n_a>.
    kraus = [np.zeros((d, d), dtype=np.complex128) for _ in range(d)]
    for t in range(d):
        gen = np.zeros((t + 1, t + 1))
        for na in range(t):
            amp = math.sqrt((na + 1.0) * (t - na))
            gen[na + 1, na] = amp
            gen[na, na + 1] = -amp
        u = expm(theta * gen)
        for l in range(t + 1):
            kraus[l][t - l, t] = u[t - l, t]
    return kraus


def _two_mode_squeezer_kraus(s: float, d: int) -> list[np.ndarray]:
    # Photon gain l: K_l[n+l, n] from the photon-difference block n, where
    # the block unitary is exp(s (a+b+ - ab)) on |n+j, j>.
    kraus = [np.zeros((d, d), dtype=np.complex128) for _ in range(d)]
    for n in range(d):
        size = d - n
        gen = np.zeros((size, size))
        for j in range(size - 1):
            amp = math.sqrt((n + j + 1.0) * (j + 1.0))
            gen[j + 1, j] = amp
            gen[j, j + 1] = -amp
        u = expm(s * gen)
        for l in range(size):
            kraus[l][n + l, n] = u[l, 0]
    return kraus


def attenuator_channel(eta: float, d: int) -> QuantumChannel:
    """Quantum-limited attenuator: coherent amplitudes shrink by sqrt(eta).

    Dilated through a beamsplitter with a vacuum ancilla at the same cutoff,
    then the ancilla is traced out.
    """
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"transmissivity must lie in (0, 1], got {eta!r}")
    theta = math.acos(math.sqrt(eta))
    mats = _beamsplitter_kraus(theta, d)
    kraus = [FockOperator(m) for m in mats if np.any(m)]
    return QuantumChannel(kraus, label="attenuator", params={"eta": eta})


def amplifier_channel(k: float, d: int) -> QuantumChannel:
    """Quantum-limited amplifier: coherent amplitudes grow by sqrt(k).

    Dilated through a two-mode squeezer with a vacuum ancilla at the same
    cutoff, then the ancilla is traced out.
    """
    k = float(k)
    if not (math.isfinite(k) and k >= 1.0):
        raise ValueError(f"amplifier parameter must be finite and >= 1, got {k!r}")
    s = math.acosh(math.sqrt(k))
    mats = _two_mode_squeezer_kraus(s, d)
    kraus = [FockOperator(m) for m in mats if np.any(m)]
    return QuantumChannel(kraus, label="amplifier", params={"k": k})


def apply_matrix(channel: QuantumChannel, mat) -> np.ndarray:
    """Raw channel action on an arbitrary matrix (no state validation)."""
    m = np.asarray(mat, dtype=np.complex128)
    if m.shape != (channel.d, channel.d):
        raise ValueError(f"matrix shape {m.shape} does not match cutoff {channel.d}")
    if channel._mask is not None:
        return m * channel._mask
    out = np.zeros_like(m)
    for op in channel.kraus:
        out += op.matrix @ m @ op.matrix.conj().T
    return out


def apply(channel: QuantumChannel, rho: DensityOperator, *, trace_atol: float = 1e-9) -> DensityOperator:
    """Channel output as a validated density operator."""
    if channel.d != rho.d:
        raise ValueError(f"cutoff mismatch: channel d={channel.d}, state d={rho.d}")
    return DensityOperator(apply_matrix(channel, rho.matrix), trace_atol=trace_atol)


def overlap_gap(
    rho_a: DensityOperator,
    rho_b: DensityOperator,
    beta_max: float,
    *,
    tolerance: float = 1e-9,
) -> float:
    """Largest coherent-probe overlap advantage of rho_a over rho_b.

    Maximizes <b|rho_a|b> - <b|rho_b|b> over real probe amplitudes b in
    [-beta_max, beta_max].
    """
    if rho_a.d != rho_b.d:
        raise ValueError("states must share one cutoff")
    d = rho_a.d

    def gap(b: float) -> float:
        probe = coherent_state(b, d)
        return expectation(probe, rho_a) - expectation(probe, rho_b)

    _, best = maximize_1d(gap, SearchSpec(bounds=(-beta_max, beta_max), tolerance=tolerance))
    return best
