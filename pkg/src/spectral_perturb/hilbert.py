"""Discrete Hilbert transforms: classical, generalized, shifted and weighted.

Every operator is realized as a finite section.  The kernel of all five kinds
is ``w_k / (a_k - z_n)`` with the diagonal ``k = n`` left out:

==================  ==========  ==========  ===============
kind                nodes a     targets z   weights w
==================  ==========  ==========  ===============
classical           1, 2, ...   a           1
gdht                a           a           1
shifted             a           z           1
weighted            t           t           m**(alpha-1)
weighted-shifted    t           z           m**(alpha-1)
==================  ==========  ==========  ===============
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import (EstimationFailure, InvalidInputError, PreconditionError,
                     SingularKernelError)

KINDS = ("classical", "gdht", "shifted", "weighted", "weighted-shifted")
G_NORM = math.pi  # norm of the classical transform
DENSE_LIMIT = 2000
POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    a: Optional[tuple] = None
    z: Optional[tuple] = None
    t: Optional[tuple] = None
    alpha: Optional[float] = None
    delta: Optional[float] = None
    Delta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown transform kind {self.kind!r}")
        for name in ("a", "t"):
            seq = getattr(self, name)
            if seq is not None:
                arr = np.asarray(seq, dtype=float)
                if arr.ndim != 1 or np.any(np.diff(arr) <= 0):
                    raise InvalidInputError(f"{name} must be strictly increasing")
        need = {"gdht": ("a",), "shifted": ("a", "z"), "weighted": ("t", "alpha"),
                "weighted-shifted": ("t", "z", "alpha")}.get(self.kind, ())
        missing = [f for f in need if getattr(self, f) is None]
        if missing:
            raise InvalidInputError(f"{self.kind} transform needs {', '.join(missing)}")
        if self.z is not None:
            n_nodes = len(self.a if self.a is not None else self.t)
            if len(self.z) != n_nodes:
                raise InvalidInputError("z must have one entry per node")

    @classmethod
    def make(cls, kind, a=None, z=None, t=None, alpha=None, delta=None, Delta=None):
        tup = (lambda x: None if x is None else tuple(np.asarray(x).tolist()))
        return cls(kind=kind, a=tup(a), z=tup(z), t=tup(t), alpha=alpha, delta=delta, Delta=Delta)

    @property
    def horizon(self):
        """Number of nodes carried by the spec (``None`` for the classical kind)."""
        seq = self.a if self.a is not None else self.t
        return None if seq is None else len(seq)


def _parts(spec: TransformSpec, n):
    """Nodes, targets and weights of the ``n``-point section."""
    if spec.kind == "classical":
        a = np.arange(1, n + 1, dtype=float)
        return a, a, np.ones(n)
    if spec.horizon is not None and n > spec.horizon:
        raise InvalidInputError(f"section size {n} exceeds the spec horizon {spec.horizon}")
    if spec.kind in ("gdht", "shifted"):
        a = np.asarray(spec.a[:n], dtype=float)
        z = a if spec.kind == "gdht" else np.asarray(spec.z[:n], dtype=complex)
        return a, z, np.ones(n)
    t = np.asarray(spec.t[:n], dtype=float)
    w = np.arange(1, n + 1, dtype=float) ** (float(spec.alpha) - 1.0)
    z = t if spec.kind == "weighted" else np.asarray(spec.z[:n], dtype=complex)
    return t, z, w


def _check_kernel(a, z):
    if z is a:
        return
    if np.isrealobj(z):
        z = np.asarray(z, dtype=float)
        hit = np.isin(z, a)
    else:
        hit = (z.imag == 0) & np.isin(z.real, a)
    for n in np.nonzero(hit)[0]:
        k = np.nonzero(a == z[n].real)[0]
        if k.size and k[0] != n:
            raise SingularKernelError(f"z_{n + 1} = {z[n]} coincides with node a_{k[0] + 1}")


def transform_matrix(spec: TransformSpec, n=None) -> np.ndarray:
    n = spec.horizon if n is None else int(n)
    if n is None or n < 1:
        raise InvalidInputError("section size must be given for the classical transform")
    a, z, w = _parts(spec, n)
    _check_kernel(a, z)
    return _kernels.cauchy_matrix(a, z, w)


def apply_transform(spec: TransformSpec, xi) -> np.ndarray:
    """Finite-section transform of ``xi``; the section size is ``len(xi)``."""
    xi = np.asarray(xi)
    if xi.ndim != 1:
        raise InvalidInputError("xi must be one-dimensional")
    n = xi.size
    if spec.horizon is not None and n != spec.horizon:
        raise InvalidInputError(f"xi has length {n}, the spec horizon is {spec.horizon}")
    a, z, w = _parts(spec, n)
    _check_kernel(a, z)
    return _kernels.cauchy_matvec(a, z, w, xi)


def apply_vector_transform(spec: TransformSpec, xi) -> np.ndarray:
    """Transform of an ``l^2(H)`` sequence given as rows ``xi[j]`` in ``C^d``."""
    try:
        arr = np.asarray(xi)
    except ValueError as exc:  # ragged rows on numpy >= 1.24
        raise InvalidInputError("all entries must share one inner dimension") from exc
    if arr.dtype == object or arr.ndim != 2:
        raise InvalidInputError("all entries must share one inner dimension")
    cols = [apply_transform(spec, arr[:, d]) for d in range(arr.shape[1])]
    return np.stack(cols, axis=1)


def estimate_opnorm(spec: TransformSpec, n_trunc, method="auto", tol=POWER_TOL,
                    max_iter=POWER_MAX_ITER) -> float:
    """Norm of the ``n_trunc`` section: dense SVD up to ``DENSE_LIMIT``,
    matrix-free power iteration on ``A^* A`` beyond."""
    n = int(n_trunc)
    if n < 2:
        raise InvalidInputError("n_trunc must be at least 2")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "power"
    if method == "dense":
        return float(np.linalg.svd(transform_matrix(spec, n), compute_uv=False)[0])
    if method != "power":
        raise InvalidInputError(f"unknown method {method!r}")
    a, z, w = _parts(spec, n)
    _check_kernel(a, z)
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(n)
    if not (np.isrealobj(z) and np.isrealobj(w)):
        x = x + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(int(max_iter)):
        y = _kernels.cauchy_matvec(a, z, w, x)
        new = float(np.linalg.norm(y))
        x = _kernels.cauchy_matvec(a, z, w, y, adjoint=True)
        nx = np.linalg.norm(x)
        if nx == 0:
            return 0.0
        x /= nx
        if abs(new - est) <= tol * new:
            return new
        est = new
    raise EstimationFailure(f"power iteration did not reach {tol} in {max_iter} steps",
                            last_iterate=x, last_value=est)


def lemma_b_bound(C) -> float:
    """Norm bound ``C pi^2 / 3`` for matrices with ``|A_kj| <= C/|k-j|^2`` off the diagonal."""
    return float(C) * math.pi ** 2 / 3.0


def theoretical_bound(spec: TransformSpec) -> float:
    if spec.kind == "classical":
        return G_NORM
    if spec.kind == "gdht":
        if spec.delta is None:
            raise InvalidInputError("the separated-node bound needs delta")
        return (2 * math.pi ** 2 / 3 + 2 * G_NORM) / spec.delta
    if spec.kind == "shifted":
        if spec.delta is None or spec.Delta is None:
            raise InvalidInputError("the shifted-node bound needs delta and Delta")
        return G_NORM / (2 * spec.delta) + 2 * spec.delta * math.pi ** 2 / (3 * spec.Delta ** 2)
    raise InvalidInputError(f"no closed-form bound for the {spec.kind} transform")


def shift_constraints(a, z, delta, Delta):
    """Which of the shifted-node constraints hold, as a dict of booleans."""
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=complex)
    lo = np.concatenate(([-np.inf], a[:-1])) + delta
    hi = np.concatenate((a[1:], [np.inf])) - delta
    return {
        "|Im z_k| < delta": bool(np.all(np.abs(z.imag) < delta)),
        "Re z_k in (a_(k-1) + delta, a_(k+1) - delta)": bool(np.all((z.real > lo) & (z.real < hi))),
        "|Re z_k - a_k| < Delta": bool(np.all(np.abs(z.real - a) < Delta)),
    }


def is_separated(a, delta) -> bool:
    return bool(np.all(np.diff(np.asarray(a, dtype=float)) > delta))


def separated_sequence(n, delta, rng, spread=1.0, start=0.0):
    """Random nodes with every gap in ``(delta, delta (1 + spread)]``."""
    gaps = delta * (1.0 + spread * (1.0 - rng.random(n - 1)))
    # guard the strict inequality against rounding in the cumulative sum
    gaps = np.maximum(gaps, np.nextafter(delta, np.inf) * (1 + 1e-12))
    return start + np.concatenate(([0.0], np.cumsum(gaps)))


def shifted_targets(a, delta, rng, shift=0.9):
    """Targets ``z_k = a_k + u_k + i v_k`` with ``|u_k|, |v_k| < shift * delta``; the
    nodes must be more than ``2 delta`` apart for the result to be admissible."""
    a = np.asarray(a, dtype=float)
    u = shift * delta * (2 * rng.random(a.size) - 1)
    v = shift * delta * (2 * rng.random(a.size) - 1)
    return a + u + 1j * v


def grid_rounding(a, delta) -> np.ndarray:
    """Nodes moved to the nearest point of the ``delta/2`` grid.

    For ``delta``-separated nodes each grid cell holds at most one node, so
    the result is again strictly increasing.
    """
    a = np.asarray(a, dtype=float)
    if not is_separated(a, delta):
        raise PreconditionError(f"nodes are not {delta}-separated")
    step = delta / 2.0
    return np.floor(a / step + 0.5) * step


@dataclass
class RoundingSplit:
    difference_norm: float  # ||G_a - G_a~||
    difference_bound: float  # 2 pi^2 / (3 delta)
    rounded_norm: float  # ||G_a~||
    rounded_bound: float  # (2/delta) ||G||
    entry_ratio: float  # max |A_jk| |j-k|^2 / (2/delta)


def rounding_split(a, delta) -> RoundingSplit:
    """The two pieces of the separated-node estimate on one finite section."""
    a = np.asarray(a, dtype=float)
    at = grid_rounding(a, delta)
    G = transform_matrix(TransformSpec.make("gdht", a=a))
    Gt = transform_matrix(TransformSpec.make("gdht", a=at))
    A = G - Gt
    n = a.size
    k = np.arange(n)
    dist2 = (k[:, None] - k[None, :]).astype(float) ** 2
    np.fill_diagonal(dist2, 1.0)
    ratio = float(np.max(np.abs(A) * dist2) / (2.0 / delta)) if n > 1 else 0.0
    svals = lambda M: float(np.linalg.svd(M, compute_uv=False)[0])  # noqa: E731
    return RoundingSplit(difference_norm=svals(A), difference_bound=2 * math.pi ** 2 / (3 * delta),
                         rounded_norm=svals(Gt), rounded_bound=2 * G_NORM / delta, entry_ratio=ratio)


def power_law_nodes(alpha, n, kappa=1.0, t1=1.0) -> np.ndarray:
    """``t_1 = t1`` and gaps exactly ``kappa k**(alpha-1)``."""
    k = np.arange(1, n, dtype=float)
    return t1 + np.concatenate(([0.0], np.cumsum(kappa * k ** (alpha - 1.0))))


def weighted_section_norms(alpha, sizes, kappa=1.0, t1=1.0):
    """Section norms of the weighted transform on exact power-law nodes."""
    sizes = [int(s) for s in sizes]
    t = power_law_nodes(alpha, max(sizes), kappa, t1)
    spec = TransformSpec.make("weighted", t=t, alpha=alpha)
    return [estimate_opnorm(spec, s) for s in sizes]


def divergence_witness(alpha, t, N_partial) -> list:
    """Partial sums ``S(N) = sum_{2 <= n <= N} |1/(t_1 - t_n)|^2`` of the weighted
    transform applied to ``e_1``.

    ``alpha`` enters only through the weight ``1**(alpha-1) = 1``, so any
    positive value is accepted; divergence is expected when ``alpha <= 1/2``.
    """
    if not alpha > 0:
        raise InvalidInputError("alpha must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise InvalidInputError("t must be strictly increasing")
    stops = np.asarray([int(N) for N in N_partial], dtype=np.int64)
    if stops.size == 0:
        return []
    if stops.min() < 2 or stops.max() > t.size:
        raise InvalidInputError(f"each N must lie in [2, {t.size}]")
    return [float(x) for x in _kernels.inverse_square_partial_sums(t, 1.0, stops)]
