"""Rectangular enclosures of the perturbed spectrum and their boundary quadratures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import polygamma

from . import _kernels
from .errors import DegenerateInputError, HypothesisFailure, InvalidInputError
from .spectrum import (ClusterDecomposition, _check_alpha, block_index, dyadic_blocks,
                       lim_sup_surrogate)


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InvalidInputError(f"degenerate rectangle {self}")

    @classmethod
    def symmetric(cls, re_min, re_max, half_height):
        return cls(float(re_min), float(re_max), -float(half_height), float(half_height))

    @property
    def width(self):
        return self.re_max - self.re_min

    @property
    def height(self):
        return self.im_max - self.im_min

    @property
    def perimeter(self):
        return 2.0 * (self.width + self.height)

    @property
    def corners(self):
        # counterclockwise from the lower left
        return (complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max))

    def contains(self, z, tol=0.0):
        z = np.asarray(z)
        return ((z.real >= self.re_min - tol) & (z.real <= self.re_max + tol)
                & (z.imag >= self.im_min - tol) & (z.imag <= self.im_max + tol))

    def boundary_distance(self, z):
        """Distance from each point to the boundary (inside or outside)."""
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        dx = np.maximum(np.maximum(self.re_min - x, x - self.re_max), 0.0)
        dy = np.maximum(np.maximum(self.im_min - y, y - self.im_max), 0.0)
        outside = np.hypot(dx, dy)
        inside = np.minimum.reduce([x - self.re_min, self.re_max - x,
                                    y - self.im_min, self.im_max - y])
        return np.where(outside > 0, outside, np.abs(inside))

    def inflated(self, rel):
        pad_re = rel * max(self.width, 1.0)
        pad_im = rel * max(self.height, 1.0)
        return Rectangle(self.re_min - pad_re, self.re_max + pad_re,
                         self.im_min - pad_im, self.im_max + pad_im)


@dataclass
class Contour:
    rectangle: Rectangle
    nodes: np.ndarray
    weights: np.ndarray  # complex: quadrature weight times edge direction
    per_edge: int
    rule: str = "trapezoid"


def _edge_rule(per_edge, rule):
    """Nodes in [0, 1] and weights summing to 1 for one edge."""
    if rule == "trapezoid":
        s = np.linspace(0.0, 1.0, per_edge)
        w = np.full(per_edge, 1.0 / (per_edge - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return s, w
    if rule == "gauss":
        if per_edge >= 16 and per_edge % 16 == 0:
            panels, order = per_edge // 16, 16
        else:
            panels, order = 1, per_edge
        x, w = np.polynomial.legendre.leggauss(order)
        x = 0.5 * (x + 1.0)
        w = 0.5 * w
        s = np.concatenate([(p + x) / panels for p in range(panels)])
        w = np.tile(w / panels, panels)
        return s, w
    raise InvalidInputError(f"unknown quadrature rule {rule!r}")


def contour_nodes(rect: Rectangle, per_edge: int, rule: str = "trapezoid") -> Contour:
    """Counterclockwise boundary quadrature, ``per_edge`` nodes on each of the four edges.

    With ``rule="trapezoid"`` each edge carries a composite trapezoid rule
    including both end points (so corners appear twice, once per edge);
    ``rule="gauss"`` uses 16-point Gauss-Legendre panels.
    """
    if per_edge < 2:
        raise InvalidInputError("per_edge must be at least 2")
    s, w = _edge_rule(int(per_edge), rule)
    c = rect.corners
    nodes, weights = [], []
    for k in range(4):
        a, b = c[k], c[(k + 1) % 4]
        nodes.append(a + s * (b - a))
        weights.append(w * (b - a))
    return Contour(rectangle=rect, nodes=np.concatenate(nodes),
                   weights=np.concatenate(weights), per_edge=int(per_edge), rule=rule)


@dataclass
class EnclosureFamily:
    mode: str
    head: Rectangle
    tail: list
    tail_indices: list  # cluster index (uniform) or eigen index (power), 1-based
    cutoff: int
    constants: dict
    hypotheses: dict = field(default_factory=dict)  # description -> bool
    t: Optional[np.ndarray] = None
    head_count: int = 0  # number of t_k inside the head
    tail_counts: list = field(default_factory=list)

    @property
    def hypotheses_hold(self):
        return all(self.hypotheses.values())

    def rectangles(self):
        return [self.head] + list(self.tail)

    def contains(self, z, tol=0.0):
        z = np.asarray(z)
        inside = self.head.contains(z, tol)
        for r in self.tail:
            inside = inside | r.contains(z, tol)
        return inside

    def overlap(self):
        """Largest overlap width between interiors of distinct rectangles (0 when
        they at most share boundary segments)."""
        rects = self.rectangles()
        worst = 0.0
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                a, b = rects[i], rects[j]
                ox = min(a.re_max, b.re_max) - max(a.re_min, b.re_min)
                oy = min(a.im_max, b.im_max) - max(a.im_min, b.im_min)
                if ox > 0 and oy > 0:
                    worst = max(worst, min(ox, oy))
        return worst

    def min_separation(self):
        """Smallest distance between distinct tail rectangles (0 if they touch)."""
        best = math.inf
        rects = self.tail
        for i in range(len(rects) - 1):
            a, b = rects[i], rects[i + 1]
            gap = max(b.re_min - a.re_max, a.re_min - b.re_max, 0.0)
            best = min(best, gap)
        return best


def _uniform_threshold(p, d):
    return (d / (2 * p)) ** 2 / (8 * p * (1 + math.pi ** 2 / 3))


def _tail_zeta2(N):
    """sum_{j >= N+1} 1/j^2."""
    return float(polygamma(1, N + 1))


def lorentz_series(h, delta, d):
    """sum_{j >= 0} 1/(h^2 + (j delta)^2): explicit part to j = 10**6/d plus an
    integral bound for the rest."""
    jmax = int(math.ceil(1e6 / d))
    head = _kernels.lorentz_sum(h, delta, jmax)
    tail = (math.pi / 2 - math.atan(jmax * delta / h)) / (h * delta)
    return head + tail


def minimal_h(beta_sup, p, d, tol=1e-9):
    delta = d / (2 * p)
    target = 1.0 / (8 * p * beta_sup)
    lo = 1.0 / math.sqrt(target)
    hi = max(2.0 / math.sqrt(target), math.pi / (delta * target))
    while lorentz_series(hi, delta, d) > target:
        hi *= 2.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if lorentz_series(mid, delta, d) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def uniform_enclosures(cluster: ClusterDecomposition, beta, p, d, t=None,
                       strict=True) -> EnclosureFamily:
    """Head rectangle plus one rectangle per cluster beyond ``K = M + N``.

    ``beta`` holds ``||B phi_k||**2``.  With ``strict=False`` a violated
    lim-sup condition is recorded in ``hypotheses`` instead of raised.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1 or beta.size == 0 or np.any(beta < 0) or not np.all(np.isfinite(beta)):
        raise InvalidInputError("beta must be a non-empty list of finite nonnegative numbers")
    p, d = int(p), float(d)
    if cluster.p != p or cluster.d != d:
        raise InvalidInputError("cluster decomposition was built with different p, d")
    n_clusters = len(cluster.heads)
    if beta.size != sum(cluster.counts):
        raise InvalidInputError("beta length must equal the number of eigenvalues")
    thr = _uniform_threshold(p, d)
    limsup = lim_sup_surrogate(beta)
    cond1 = limsup < thr
    hyp_name = "limsup beta_k < (d/2p)^2 / (8p(1+pi^2/3))"
    if not cond1 and strict:
        raise HypothesisFailure(hyp_name, f"max over second half of horizon is {limsup:.6g} >= {thr:.6g}")

    over = np.nonzero(beta > thr)[0]
    M = int(over[-1]) + 2 if over.size else 1
    bsup = float(beta.max())
    rhs = d * d / (16 * p * p)
    if bsup == 0.0:
        N = 1
    else:
        N = 1
        while 2 * p * bsup * _tail_zeta2(N) > rhs:
            N *= 2
        lo = max(1, N // 2)
        while lo < N:
            mid = (lo + N) // 2
            if 2 * p * bsup * _tail_zeta2(mid) > rhs:
                lo = mid + 1
            else:
                N = mid
    h = d / (2 * p) if bsup == 0.0 else minimal_h(bsup, p, d)
    K = M + N
    half = d / (2 * p)
    t0 = cluster.heads[0] if t is None else float(np.asarray(t)[0])
    left = min(0.0, t0) - h
    right = cluster.heads[min(K, n_clusters) - 1] + half
    head = Rectangle.symmetric(left, right, h)
    tail, idx, counts = [], [], []
    for j in range(K + 1, n_clusters + 1):
        lo_, hi_ = cluster.intervals[j - 1]
        tail.append(Rectangle.symmetric(lo_, hi_, half))
        idx.append(j)
        counts.append(cluster.counts[j - 1])
    constants = dict(M=M, N=N, K=K, h=h, threshold=thr, limsup_surrogate=limsup,
                     beta_sup=bsup, half_gap=half, p=p, d=d)
    return EnclosureFamily(mode="uniform", head=head, tail=tail, tail_indices=idx, cutoff=K,
                           constants=constants, hypotheses={hyp_name: bool(cond1)},
                           t=None if t is None else np.asarray(t, dtype=float),
                           head_count=int(sum(cluster.counts[:min(K, n_clusters)])),
                           tail_counts=counts)


def power_threshold(kappa, v):
    return 0.25 / ((16.0 / kappa ** 2) * (1 + 2 * math.pi ** 2 / 3) + 4.0 / (1 - 1.0 / v))


def power_enclosures(t, c, kappa, alpha, strict=True, head_height="literal") -> EnclosureFamily:
    """Head rectangle ``[-Y, t_l + (kappa/2) l**(alpha-1)] x [-Y, Y]`` plus one
    rectangle around each ``t_j``, ``j > l``.

    ``c`` holds ``c_k = ||B phi_k|| / k**(alpha-1)``.

    ``head_height="literal"`` uses the dyadic formula for ``Y``.  For
    ``alpha > 1`` that head can be too thin for ``||B R0(z)|| <= 1/2`` on its
    top edge; ``"column-sum"`` instead takes the smallest ``Y`` for which the
    column bound ``sum_j c_inf^2 j^(2 alpha - 2) / |z - t_j|^2 <= 1/4`` holds on
    the head boundary (over the available horizon).
    """
    _check_alpha(alpha)
    if head_height not in ("literal", "column-sum"):
        raise InvalidInputError(f"unknown head_height {head_height!r}")
    t = np.asarray(t, dtype=float)
    c = np.abs(np.asarray(c, dtype=float))
    n = t.size
    if c.size != n:
        raise InvalidInputError("c must have one entry per eigenvalue")
    c_inf = float(c.max()) if n else 0.0
    if c_inf == 0.0:
        raise DegenerateInputError("c_inf = 0: unperturbed operator, use the B = 0 path")
    blocks = dyadic_blocks(alpha, n)
    v = blocks.v
    expo = blocks.v_exponent
    kmax = len(blocks.blocks) - 1
    thr7 = power_threshold(kappa, v)
    block_of = np.array([block_index(j, expo) for j in range(1, n + 1)])

    growth_name = "v^(N alpha) > c_inf^2 / (1 - 1/v)"
    small_name = "c_j^2 <= (1/4)(16/kappa^2 (1 + 2pi^2/3) + 4/(1 - 1/v))^-1 on blocks J >= N/2"

    def cond_growth(N):
        return v ** (N * alpha) > c_inf ** 2 / (1 - 1 / v)

    def cond_small(N):
        sel = block_of >= N / 2.0
        return bool(np.all(c[sel] ** 2 <= thr7))

    chosen = None
    for N in range(1, kmax):
        if cond_growth(N) and cond_small(N):
            chosen = N
            break
    hyps = {}
    if chosen is None:
        if strict:
            raise HypothesisFailure(small_name, f"no admissible N below the horizon block {kmax}")
        for N in range(1, max(kmax, 2)):
            if cond_growth(N):
                chosen = N
                break
        if chosen is None:
            chosen = 1
    N = chosen
    hyps[growth_name] = bool(cond_growth(N))
    hyps[small_name] = bool(cond_small(N))
    members = [j for J in range(0, N + 1) if J < len(blocks.blocks) for j in blocks.blocks[J]]
    ell = min(max(members), n)
    Y = math.sqrt(4 * c_inf ** 2 * v * sum((math.sqrt(v) / 2) ** (2 * j) for j in range(1, N + 1)))
    Y_literal = Y
    right = t[ell - 1] + 0.5 * kappa * ell ** (alpha - 1)
    if head_height == "column-sum":
        k = np.arange(1, n + 1, dtype=float)
        col2 = c_inf ** 2 * k ** (2 * (alpha - 1))
        beyond = float(np.sum(col2[ell:] / (t[ell:] - right) ** 2))
        if beyond >= 0.25:
            raise HypothesisFailure("column-sum head", "columns beyond l already exceed 1/4")
        Y = max(Y, math.sqrt(float(np.sum(col2[:ell])) / (0.25 - beyond)))
    head = Rectangle.symmetric(min(0.0, t[0]) - Y, right, Y)
    tail, idx, perim_ok = [], [], []
    prev_right = right
    for j in range(ell + 1, n + 1):
        half = 0.5 * kappa * j ** (alpha - 1)
        lo = t[j - 1] - 0.5 * kappa * (j - 1) ** (alpha - 1)
        if abs(lo - prev_right) <= 1e-12 * max(1.0, abs(lo)):
            lo = prev_right  # edges meant to coincide; drop the rounding sliver
        prev_right = t[j - 1] + half
        r = Rectangle.symmetric(lo, t[j - 1] + half, half)
        tail.append(r)
        idx.append(j)
        perim_ok.append(r.perimeter <= 4 * kappa * j ** (alpha - 1) * (1 + 1e-12))
    constants = dict(N=N, ell=ell, Y=Y, Y_literal=Y_literal, head_height=head_height, v=v, c_inf=c_inf, threshold=thr7, kappa=kappa,
                     alpha=alpha, perimeter_bound_holds=bool(all(perim_ok)))
    return EnclosureFamily(mode="power", head=head, tail=tail, tail_indices=idx, cutoff=ell,
                           constants=constants, hypotheses=hyps, t=t, head_count=ell,
                           tail_counts=[1] * len(tail))
