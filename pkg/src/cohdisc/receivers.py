"""Binary coherent-state receivers built from displacement, channel, squeezing.

The two candidate signals |+-a> are referred to the frame where the favored
hypothesis (prior q0 >= 1/2) is displaced to the vacuum and the other to
|2a>.  Both branches are pushed through the scheme's channel (the vacuum
branch included: fixed points are computed, never assumed), then projected
onto the displaced (optionally squeezed) vacuum that models an ideal on/off
detector after the final displacement.  A no-click is read as the favored
hypothesis.

Schemes
  kennedy     bare displaced on/off detection
  nhpamp      probabilistic-amplifier channel, kept unheralded, before detection
  infgain     the infinite-gain limit of nhpamp (projective channel)
  dephaser    partial dephaser keeping the lowest-n coherences
  cavity      atom-cavity protocol approximating the two-level dephaser
  ts_*        same as the base scheme plus a tunable squeezer before the
              final displacement (kennedy, nhpamp, infgain variants)

Optimizations run on a cutoff fixed once per search, sized for the worst
corner of the search box, so channel outputs are computed a single time and
each objective evaluation reduces to one quadratic form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cohdisc.cavity import CavityDephaser
from cohdisc.channels import apply, infgain_channel, nhpamp_channel, dephaser_channel
from cohdisc.fock import (
    DEFAULT_POLICY,
    CutoffPolicy,
    DensityOperator,
    FockVector,
    _squeeze_eigensystem,
    choose_cutoff,
    coherent_state,
    displaced_squeezed_state,
    expectation,
)
from cohdisc.optimize import SearchSpec, maximize_1d, maximize_2d, maximize_over_gain

__all__ = [
    "SCHEMES",
    "TS_SCHEMES",
    "ReceiverSpec",
    "DiscriminationResult",
    "prob_no_click",
    "success_probability",
    "optimized_kennedy",
    "optimize_receiver",
    "optimize_gain",
    "helstrom_success",
    "no_gain_without_displacement",
]

SCHEMES = (
    "kennedy",
    "nhpamp",
    "infgain",
    "dephaser",
    "cavity",
    "ts_kennedy",
    "ts_nhpamp",
    "ts_infgain",
)
TS_SCHEMES = frozenset({"ts_kennedy", "ts_nhpamp", "ts_infgain"})
GAIN_SCHEMES = frozenset({"nhpamp", "ts_nhpamp"})
LEVEL_SCHEMES = frozenset({"nhpamp", "infgain", "dephaser", "ts_nhpamp", "ts_infgain"})

MAX_ABS_R = 2.0
R_BOUNDS = (-1.5, 0.5)


@dataclass(frozen=True)
class ReceiverSpec:
    """One receiver configuration: scheme plus its tunable parameters.

    beta is the final displacement, r the squeezing (ts_* schemes only),
    g and n the amplifier-family channel settings, q0 the prior of the
    favored (nulled) hypothesis.
    """

    scheme: str
    beta: float = 0.0
    r: float = 0.0
    g: float = 1.0
    n: int = 0
    q0: float = 0.5

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta!r}")
        if not (math.isfinite(self.r) and abs(self.r) <= MAX_ABS_R):
            raise ValueError(f"squeezing must satisfy |r| <= {MAX_ABS_R}, got {self.r!r}")
        if self.r != 0.0 and self.scheme not in TS_SCHEMES:
            raise ValueError(f"scheme {self.scheme!r} does not take a squeezer")
        if not 0.5 <= self.q0 <= 1.0:
            raise ValueError(f"favored prior must lie in [0.5, 1], got {self.q0!r}")
        if self.scheme in GAIN_SCHEMES:
            if math.isnan(self.g) or self.g < 1.0:
                raise ValueError(f"gain must be >= 1 (or infinite), got {self.g!r}")
        if self.scheme in LEVEL_SCHEMES:
            low = 1 if self.scheme == "dephaser" else 0
            if self.n < low:
                raise ValueError(f"level must be >= {low} for {self.scheme!r}, got {self.n!r}")


@dataclass(frozen=True)
class DiscriminationResult:
    """Success probability with its two conditional no-click probabilities."""

    p_success: float
    p_no_click_h0: float
    p_no_click_h1: float

    def __post_init__(self) -> None:
        for name in ("p_success", "p_no_click_h0", "p_no_click_h1"):
            v = getattr(self, name)
            if not (-1e-12 <= v <= 1.0 + 1e-12):
                raise ValueError(f"{name} = {v!r} is outside [0, 1]")


def prob_no_click(rho: DensityOperator, beta: float, r: float = 0.0) -> float:
    """Probability that the on/off detector stays dark: <b,-r| rho |b,-r>.

    The projector is the squeezed displaced vacuum S(-r) D(b) |0>; r = 0
    reduces to a plain coherent-state overlap.
    """
    if r == 0.0:
        probe = coherent_state(beta, rho.d)
    else:
        probe = displaced_squeezed_state(beta, r, rho.d)
    return min(expectation(probe, rho), 1.0)


def _channel_for(spec: ReceiverSpec, d: int):
    if spec.scheme in ("kennedy", "ts_kennedy"):
        return None
    if spec.scheme in ("nhpamp", "ts_nhpamp"):
        if math.isinf(spec.g):
            return infgain_channel(spec.n, d)
        return nhpamp_channel(spec.g, spec.n, d)
    if spec.scheme in ("infgain", "ts_infgain"):
        return infgain_channel(spec.n, d)
    if spec.scheme == "dephaser":
        return dephaser_channel(spec.n, d)
    if spec.scheme == "cavity":
        return CavityDephaser(d)
    raise ValueError(f"unknown scheme {spec.scheme!r}")


def _pipeline_states(spec: ReceiverSpec, alpha: float, d: int):
    rho0 = coherent_state(0.0, d).density()
    rho1 = coherent_state(2.0 * alpha, d).density()
    ch = _channel_for(spec, d)
    if ch is None:
        return rho0, rho1
    if isinstance(ch, CavityDephaser):
        return ch.apply(rho0), ch.apply(rho1)
    return apply(ch, rho0), apply(ch, rho1)


def _cutoff_for(alpha: float, beta: float, r: float, policy: CutoffPolicy) -> int:
    return choose_cutoff(2.0 * alpha + abs(beta) + 2.0 * math.sqrt(abs(r)), policy)


def success_probability(
    spec: ReceiverSpec, alpha: float, policy: CutoffPolicy = DEFAULT_POLICY
) -> DiscriminationResult:
    """Exact success probability of the given receiver at signal amplitude alpha."""
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    d = _cutoff_for(alpha, spec.beta, spec.r, policy)
    rho0, rho1 = _pipeline_states(spec, alpha, d)
    p0 = prob_no_click(rho0, spec.beta, spec.r)
    p1 = prob_no_click(rho1, spec.beta, spec.r)
    p = spec.q0 * p0 + (1.0 - spec.q0) * (1.0 - p1)
    return DiscriminationResult(p, p0, p1)


def helstrom_success(alpha: float, q0: float = 0.5) -> float:
    """Best success probability allowed by quantum mechanics for |+-alpha>."""
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    if not 0.0 <= q0 <= 1.0:
        raise ValueError(f"prior must lie in [0, 1], got {q0!r}")
    inside = 1.0 - 4.0 * q0 * (1.0 - q0) * math.exp(-4.0 * alpha * alpha)
    return 0.5 * (1.0 + math.sqrt(max(inside, 0.0)))


class _Evaluator:
    """Fixed-cutoff objective for one optimization run.

    The cutoff covers the worst corner of the search box, the channel
    outputs are computed once, and each (beta, r) evaluation is a quadratic
    form against the cached states.  Squeezed probes are produced from a
    cached spectral factorization of the squeeze generator in the
    guard-enlarged space, matching the canonical constructor to roundoff.
    """

    def __init__(
        self,
        scheme: str,
        alpha: float,
        q0: float,
        g: float,
        n: int,
        beta_hi: float,
        policy: CutoffPolicy,
    ) -> None:
        if not (math.isfinite(alpha) and alpha >= 0.0):
            raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
        self.q0 = q0
        r_reach = max(abs(R_BOUNDS[0]), abs(R_BOUNDS[1])) if scheme in TS_SCHEMES else 0.0
        self.d = choose_cutoff(2.0 * alpha + beta_hi + 2.0 * math.sqrt(r_reach), policy)
        template = ReceiverSpec(scheme=scheme, g=g, n=n, q0=q0)
        rho0, rho1 = _pipeline_states(template, alpha, self.d)
        self.rho0 = rho0.matrix
        self.rho1 = rho1.matrix
        if scheme in TS_SCHEMES:
            self.de = int(math.ceil(self.d * policy.guard_factor))
            self.squeeze_eig = _squeeze_eigensystem(self.de)
        else:
            self.de = 0
            self.squeeze_eig = None

    def _probe(self, beta: float, r: float) -> np.ndarray:
        if r == 0.0:
            return coherent_state(beta, self.d).amplitudes
        lam, v = self.squeeze_eig
        psi = np.zeros(self.de, dtype=np.complex128)
        psi[: self.d] = coherent_state(beta, self.d).amplitudes
        phi = v @ (np.exp(1j * r * lam) * (v.conj().T @ psi))
        return phi[: self.d]

    def no_click_pair(self, beta: float, r: float) -> tuple[float, float]:
        probe = self._probe(beta, r)
        p0 = float(np.real(probe.conj() @ self.rho0 @ probe))
        p1 = float(np.real(probe.conj() @ self.rho1 @ probe))
        return min(max(p0, 0.0), 1.0), min(max(p1, 0.0), 1.0)

    def success(self, beta: float, r: float) -> float:
        p0, p1 = self.no_click_pair(beta, r)
        return self.q0 * p0 + (1.0 - self.q0) * (1.0 - p1)


def optimize_receiver(
    scheme: str,
    alpha: float,
    q0: float = 0.5,
    *,
    g: float = 1.0,
    n: int = 0,
    beta_bounds: tuple[float, float] | None = None,
    tolerance: float = 1e-7,
    max_evals: int = 10000,
    policy: CutoffPolicy = DEFAULT_POLICY,
) -> tuple[float, float, DiscriminationResult]:
    """Maximize success over the final displacement (and squeezing for ts_*).

    Returns (beta_opt, r_opt, result); the result is re-evaluated through
    success_probability at the optimum so it is interchangeable with any
    other call of the standard pipeline.
    """
    if beta_bounds is None:
        hi = 3.0 * alpha + 1.0
        beta_bounds = (-hi, hi)
    beta_hi = max(abs(beta_bounds[0]), abs(beta_bounds[1]))
    ev = _Evaluator(scheme, alpha, q0, g, n, beta_hi, policy)
    if scheme in TS_SCHEMES:
        spec2 = SearchSpec(bounds=(beta_bounds, R_BOUNDS), tolerance=tolerance, max_evals=max_evals)
        (beta, r), _ = maximize_2d(ev.success, spec2)
    else:
        spec1 = SearchSpec(bounds=beta_bounds, tolerance=tolerance, max_evals=max_evals)
        beta, _ = maximize_1d(lambda b: ev.success(b, 0.0), spec1)
        r = 0.0
    final = ReceiverSpec(scheme=scheme, beta=beta, r=r, g=g, n=n, q0=q0)
    return beta, r, success_probability(final, alpha, policy)


def optimized_kennedy(
    alpha: float,
    q0: float = 0.5,
    *,
    tolerance: float = 1e-7,
    policy: CutoffPolicy = DEFAULT_POLICY,
) -> tuple[float, float]:
    """Best displaced on/off receiver: returns (beta_opt, p_opt)."""
    beta, _, result = optimize_receiver(
        "kennedy", alpha, q0, tolerance=tolerance, policy=policy
    )
    return beta, result.p_success


def optimize_gain(
    scheme: str,
    alpha: float,
    q0: float = 0.5,
    *,
    n: int,
    tolerance: float = 1e-7,
    max_evals: int = 10000,
    policy: CutoffPolicy = DEFAULT_POLICY,
) -> tuple[float, float, float, DiscriminationResult]:
    """Maximize the beta-optimized success over the gain as well.

    Returns (g_opt, beta_opt, r_opt, result).  g_opt is math.inf when the
    projective limit strictly beats every finite gain, and exactly 1.0 when
    amplification never helps.
    """
    if scheme not in GAIN_SCHEMES:
        raise ValueError(f"scheme {scheme!r} has no gain to optimize")

    def objective(g: float) -> float:
        _, _, res = optimize_receiver(
            scheme, alpha, q0, g=g, n=n, tolerance=tolerance, max_evals=max_evals, policy=policy
        )
        return res.p_success

    g_opt, _ = maximize_over_gain(objective, tolerance=tolerance, max_evals=max_evals)
    beta, r, result = optimize_receiver(
        scheme, alpha, q0, g=g_opt, n=n, tolerance=tolerance, max_evals=max_evals, policy=policy
    )
    return g_opt, beta, r, result


def no_gain_without_displacement(
    alpha: float, g: float, n: int, q0: float = 0.5, *, margin: float = 1e-9
) -> bool:
    """Whether the bare (beta = 0) amplified receiver stays below the optimized
    displaced one, as required for every gain and level."""
    spec = ReceiverSpec(scheme="nhpamp", beta=0.0, g=g, n=n, q0=q0)
    fixed = success_probability(spec, alpha).p_success
    _, best = optimized_kennedy(alpha, q0)
    return fixed <= best + margin
