"""Unperturbed eigenvalue sequences: generation, gap checks, clustering, dyadic blocks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError, PreconditionError, UnsupportedParameterError

# relative slack for floating-point comparisons of gaps computed from sums
_GAP_RTOL = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class EigenSequence:
    """Either an explicit increasing list or a power-law generator.

    The generator produces ``t[k+1] = t[k] + kappa * k**(alpha - 1)`` for
    ``k = 1, ..., n_max - 1`` starting from ``t1``.
    """

    kind: str
    values: Optional[tuple] = None
    kappa: float = 1.0
    alpha: float = 2.0
    t1: float = 0.0
    n_max: Optional[int] = None

    @classmethod
    def explicit(cls, values):
        values = tuple(float(v) for v in values)
        return cls(kind="explicit", values=values, n_max=len(values))

    @classmethod
    def power_law(cls, kappa, alpha, n_max, t1=0.0):
        return cls(kind="power-law", kappa=float(kappa), alpha=float(alpha),
                   t1=float(t1), n_max=int(n_max))


@dataclass(frozen=True)
class GapProfile:
    mode: str
    p: int = 1
    d: float = 1.0
    kappa: float = 1.0
    alpha: float = 2.0

    @classmethod
    def uniform(cls, p, d):
        return cls(mode="uniform", p=int(p), d=float(d))

    @classmethod
    def power(cls, kappa, alpha):
        return cls(mode="power", kappa=float(kappa), alpha=float(alpha))

    def validate(self):
        if self.mode == "uniform":
            if self.p < 1 or not self.d > 0:
                raise InvalidInputError(f"need p >= 1 and d > 0, got p={self.p}, d={self.d}")
        elif self.mode == "power":
            if not self.kappa > 0:
                raise InvalidInputError(f"kappa must be positive, got {self.kappa}")
            _check_alpha(self.alpha)
        else:
            raise InvalidInputError(f"unknown gap mode {self.mode!r}")


@dataclass
class GapReport:
    ok: bool
    first_violation: Optional[int]  # 1-based k of the first failing inequality
    checked_up_to: int
    note: str = "not checked beyond horizon"

    def __bool__(self):
        return self.ok


@dataclass
class ClusterDecomposition:
    gamma: list
    anchors: list  # 1-based index of the top eigenvalue of each cluster
    heads: list
    intervals: list  # list of (lo, hi)
    counts: list
    members: list = field(default_factory=list)  # 1-based indices per cluster
    p: int = 1
    d: float = 1.0

    @property
    def half_gap(self):
        return self.d / (2 * self.p)


@dataclass
class DyadicBlocks:
    v: float
    blocks: list  # list of lists of 1-based indices; blocks[K] = V_K

    def block_of(self, j):
        return block_index(j, self.v_exponent)

    v_exponent: float = 1.0  # |alpha - 1|; v = 2**(1/v_exponent)


def _check_alpha(alpha):
    if not alpha > 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    if alpha == 1:
        raise UnsupportedParameterError("alpha = 1 is not supported (linear-gap case)")


def make_sequence(spec: EigenSequence) -> np.ndarray:
    if spec.kind == "explicit":
        t = np.asarray(spec.values, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise InvalidInputError("explicit sequence must be a non-empty list")
        if not np.all(np.isfinite(t)):
            raise InvalidInputError("explicit sequence contains non-finite values")
        bad = np.nonzero(np.diff(t) <= 0)[0]
        if bad.size:
            k = int(bad[0]) + 1
            raise InvalidInputError(
                f"sequence not strictly increasing at k={k}: t_k={t[k - 1]}, t_(k+1)={t[k]}")
        return t
    if spec.kind == "power-law":
        if not spec.kappa > 0:
            raise InvalidInputError(f"kappa must be positive, got {spec.kappa}")
        _check_alpha(spec.alpha)
        if spec.n_max is None or spec.n_max < 1:
            raise InvalidInputError("n_max must be a positive integer")
        k = np.arange(1, spec.n_max, dtype=float)
        gaps = spec.kappa * k ** (spec.alpha - 1.0)
        return spec.t1 + np.concatenate(([0.0], np.cumsum(gaps)))
    raise InvalidInputError(f"unknown sequence kind {spec.kind!r}")


def verify_gap(t, profile: GapProfile) -> GapReport:
    profile.validate()
    t = np.asarray(t, dtype=float)
    n = t.size
    if profile.mode == "uniform":
        p, d = profile.p, profile.d
        if n < p + 1:
            raise PreconditionError(f"need at least p+1={p + 1} values, got {n}")
        ok = t[p:] - t[:-p] > d
    else:
        if n < 2:
            raise PreconditionError("need at least two values")
        k = np.arange(1, n, dtype=float)
        need = profile.kappa * k ** (profile.alpha - 1.0)
        slack = _GAP_RTOL * np.maximum(np.abs(t[1:]), np.abs(t[:-1]))
        ok = np.diff(t) >= need - slack
    bad = np.nonzero(~ok)[0]
    first = int(bad[0]) + 1 if bad.size else None
    return GapReport(ok=first is None, first_violation=first, checked_up_to=n)


def gamma_offsets(t, p, d):
    """gamma(k) for every k; near the horizon a cluster with no visible large
    gap is closed at the last index."""
    t = np.asarray(t, dtype=float)
    n = t.size
    big = np.diff(t) >= d / p  # big[i] <-> Delta t_{i+1}
    gamma = []
    for k in range(1, n + 1):
        g = None
        for j in range(p):
            i = k + j  # Delta t_i, 1-based
            if i > n - 1:
                break
            if big[i - 1]:
                g = j
                break
        if g is None:
            g = n - k
            if g > p - 1:
                raise InvalidInputError(f"no gap >= d/p among the {p} gaps after k={k}")
        gamma.append(int(g))
    return gamma


def cluster_uniform(t, p, d) -> ClusterDecomposition:
    """Group the sequence into clusters of at most ``p`` points.

    Anchors advance as ``j_k = j_{k-1} + 1 + gamma(j_{k-1} + 1)`` (with
    ``j_0 = 0``), so each head ``T_k`` is the top point of cluster ``k``.
    Intervals are ``F_1 = [t_1 - d/2p, T_1 + d/2p]`` and
    ``F_k = [T_{k-1} + d/2p, T_k + d/2p]``.
    """
    t = np.asarray(t, dtype=float)
    rep = verify_gap(t, GapProfile.uniform(p, d))
    if not rep.ok:
        raise InvalidInputError(f"uniform gap condition fails at k={rep.first_violation}")
    gamma = gamma_offsets(t, p, d)
    n = t.size
    half = d / (2 * p)
    anchors, members = [], []
    prev = 0
    while prev < n:
        start = prev + 1
        top = start + gamma[start - 1]
        anchors.append(top)
        members.append(list(range(start, top + 1)))
        prev = top
    heads = [float(t[j - 1]) for j in anchors]
    intervals = []
    for k, T in enumerate(heads):
        lo = float(t[0]) - half if k == 0 else heads[k - 1] + half
        intervals.append((lo, T + half))
    counts = [int(np.count_nonzero((t >= lo) & (t <= hi))) for lo, hi in intervals]
    return ClusterDecomposition(gamma=gamma, anchors=anchors, heads=heads,
                                intervals=intervals, counts=counts, members=members,
                                p=int(p), d=float(d))


def literal_anchors(t, p, d, steps):
    """Anchors from the unshifted recursion ``j_k = j_{k-1} + gamma(j_{k-1})``.

    Kept for comparison only: it stops advancing as soon as it meets an index
    with ``gamma = 0``.
    """
    gamma = gamma_offsets(t, p, d)
    j = [1]
    for _ in range(steps - 1):
        j.append(j[-1] + gamma[j[-1] - 1])
    return j


def dyadic_v(alpha):
    _check_alpha(alpha)
    return 2.0 ** (1.0 / abs(alpha - 1.0))


def block_index(j, v_exponent):
    # largest K with v**K <= j, i.e. K <= |alpha - 1| * log2(j)
    return int(math.floor(v_exponent * math.log2(j) + 1e-12))


def dyadic_blocks(alpha, n_max) -> DyadicBlocks:
    v = dyadic_v(alpha)
    expo = abs(alpha - 1.0)
    if n_max < 1:
        raise InvalidInputError("n_max must be a positive integer")
    kmax = block_index(n_max, expo)
    blocks = [[] for _ in range(kmax + 1)]
    for j in range(1, n_max + 1):
        blocks[block_index(j, expo)].append(j)
    return DyadicBlocks(v=v, blocks=blocks, v_exponent=expo)


@dataclass
class SeparationResult:
    bound: float
    actual: float
    ok: bool
    block_m: int
    block_n: int


def separation_check(t, alpha, kappa, m, n) -> SeparationResult:
    """Compare ``t_n - t_m`` with ``kappa (1 - 1/v) v**(alpha N)`` where
    ``m`` lies in block ``M`` and ``n - 1`` in block ``N``, ``M <= N - 2``."""
    t = np.asarray(t, dtype=float)
    v = dyadic_v(alpha)
    expo = abs(alpha - 1.0)
    if not (1 <= m < n <= t.size):
        raise PreconditionError(f"need 1 <= m < n <= {t.size}, got m={m}, n={n}")
    M = block_index(m, expo)
    N = block_index(n - 1, expo)
    if M > N - 2:
        raise PreconditionError(f"block condition M <= N-2 fails (M={M}, N={N})")
    bound = kappa * (1.0 - 1.0 / v) * v ** (alpha * N)
    actual = float(t[n - 1] - t[m - 1])
    return SeparationResult(bound=float(bound), actual=actual, ok=actual >= bound,
                            block_m=M, block_n=N)


def lim_sup_surrogate(values: Sequence[float]) -> float:
    """Max over the second half of the horizon."""
    values = np.asarray(values, dtype=float)
    return float(np.max(values[values.size // 2:])) if values.size else 0.0
