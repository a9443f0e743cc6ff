"""Resolvent norms, Neumann factors and contour-integral (Riesz) projections."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import schur

from . import _kernels
from .enclosure import Contour, EnclosureFamily, Rectangle, contour_nodes
from .errors import (AmbiguousRankError, ContourDegeneracyError, QuadratureFailure,
                     SingularPointError)
from .operators import TruncatedOperator
from .report import DiagnosticsReport, check

SINGULAR_TOL = 1e-12
COLLISION_TOL = 1e-8
INFLATE_REL = 1e-6
TRACE_TOL = 1e-8
START_PER_EDGE = 64
MAX_PER_EDGE = 4096
# elements per batched inverse; keeps memory bounded
_BATCH_ELEMS = 1 << 22


def _matrix(op):
    return op.l if isinstance(op, TruncatedOperator) else np.asarray(op, dtype=complex)


def resolvent_norm(op, z) -> float:
    """``||(z - L)^{-1}||`` as ``1 / sigma_min(z I - L)``."""
    L = _matrix(op)
    s = np.linalg.svd(z * np.eye(L.shape[0]) - L, compute_uv=False)
    smin = s[-1]
    if smin <= SINGULAR_TOL * max(1.0, s[0]):
        raise SingularPointError(f"z = {z} is (numerically) an eigenvalue: sigma_min = {smin:.3g}")
    return float(1.0 / smin)


def neumann_factor(t, b, z) -> float:
    """``||B (z - T)^{-1}||`` with ``T = diag(t)``."""
    t = np.asarray(t, dtype=float)
    b = np.asarray(b, dtype=complex)
    dist = np.abs(z - t)
    if dist.min() <= SINGULAR_TOL * max(1.0, np.abs(t).max()):
        raise SingularPointError(f"z = {z} coincides with an eigenvalue of T")
    return float(np.linalg.norm(b / (z - t)[None, :], 2))


def neumann_factors(t, b, nodes) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    b = np.asarray(b, dtype=complex)
    nodes = np.asarray(nodes, dtype=complex)
    n = t.size
    out = np.empty(nodes.size)
    step = max(1, _BATCH_ELEMS // (n * n))
    for s in range(0, nodes.size, step):
        z = nodes[s:s + step]
        stack = b[None, :, :] / (z[:, None] - t[None, :])[:, None, :]
        out[s:s + step] = np.linalg.svd(stack, compute_uv=False)[:, 0]
    return out


def resolvent_norms(op, nodes) -> np.ndarray:
    L = _matrix(op)
    nodes = np.asarray(nodes, dtype=complex)
    n = L.shape[0]
    eye = np.eye(n)
    out = np.empty(nodes.size)
    step = max(1, _BATCH_ELEMS // (n * n))
    for s in range(0, nodes.size, step):
        z = nodes[s:s + step]
        stack = z[:, None, None] * eye[None] - L[None]
        out[s:s + step] = 1.0 / np.linalg.svd(stack, compute_uv=False)[:, -1]
    return out


@dataclass
class ProjectionResult:
    matrix: np.ndarray
    trace: complex
    rank: int
    idempotency_defect: float
    norm: float
    per_edge: int = 0
    contour: Optional[Contour] = None
    inflated: bool = False


@dataclass(frozen=True)
class SchurForm:
    """``L = U S U^H`` with ``S`` upper triangular; resolvents are evaluated on ``S``."""

    S: np.ndarray
    U: np.ndarray

    @property
    def eigenvalues(self):
        return np.diag(self.S)

    @classmethod
    def of(cls, op):
        L = _matrix(op)
        if _is_diagonal(L):
            return cls(S=L.astype(complex), U=np.eye(L.shape[0], dtype=complex))
        S, U = schur(L.astype(complex), output="complex")
        return cls(S=S, U=U)


def _is_diagonal(L):
    return not np.any(L[~np.eye(L.shape[0], dtype=bool)])


def _quadrature_trace(lam, contour: Contour):
    # tr (z - L)^{-1} = sum_i 1/(z - lambda_i)
    if lam.size == 0:
        return 0j
    vals = contour.weights[:, None] / (contour.nodes[:, None] - lam[None, :])
    return complex(vals.sum() / (2j * np.pi))


def _quadrature_matrix(sf: SchurForm, contour: Contour):
    S = sf.S
    if _is_diagonal(S):
        d = np.diag(S)
        F = np.diag((contour.weights[:, None] / (contour.nodes[:, None] - d[None, :])).sum(axis=0))
    else:
        F = _kernels.triangular_resolvent_sum(S, contour.nodes, contour.weights)
    return sf.U @ F @ sf.U.conj().T / (2j * np.pi)


def converged_contour(lam, rect, per_edge=START_PER_EDGE, rule="gauss", tol=TRACE_TOL,
                      max_per_edge=MAX_PER_EDGE, converge=True):
    """Double the nodes per edge until the quadrature trace moves by less than
    ``tol``; returns the finer contour and its trace."""
    cont = contour_nodes(rect, per_edge, rule)
    tr = _quadrature_trace(lam, cont)
    while converge:
        nxt = cont.per_edge * 2
        if nxt > max_per_edge:
            raise QuadratureFailure(f"trace not stable to {tol} with {cont.per_edge} nodes per edge")
        cont2 = contour_nodes(rect, nxt, rule)
        tr2 = _quadrature_trace(lam, cont2)
        moved = abs(tr2 - tr)
        cont, tr = cont2, tr2
        if moved < tol:
            break
    return cont, tr


def _guard_collision(rect, lam):
    if lam.size and rect.boundary_distance(lam).min() < COLLISION_TOL:
        rect = rect.inflated(INFLATE_REL)
        if rect.boundary_distance(lam).min() < COLLISION_TOL:
            raise ContourDegeneracyError(f"eigenvalue on the contour of {rect} even after inflation")
        return rect, True
    return rect, False


def riesz_projection(op, contour, per_edge=None, rule=None, tol=TRACE_TOL,
                     max_per_edge=MAX_PER_EDGE, schur_form=None, converge=True) -> ProjectionResult:
    """``(1/2 pi i) sum_j w_j (z_j - L)^{-1}`` over a rectangle boundary.

    ``contour`` may be a :class:`Contour` (its rule and node count are the
    starting point) or a bare :class:`Rectangle`.  The node count per edge is
    doubled until the trace moves by less than ``tol``; the matrix is then
    assembled on the finer contour.  Resolvents are taken in Schur
    coordinates, ``(z - L)^{-1} = U (z - S)^{-1} U^H``.
    """
    if isinstance(contour, Contour):
        rect = contour.rectangle
        per_edge = per_edge or contour.per_edge
        rule = rule or contour.rule
    else:
        rect = contour
        per_edge = per_edge or START_PER_EDGE
        rule = rule or "gauss"
    sf = schur_form or SchurForm.of(op)
    lam = sf.eigenvalues
    rect, inflated = _guard_collision(rect, lam)
    cont, _ = converged_contour(lam, rect, per_edge, rule, tol, max_per_edge, converge)
    P = _quadrature_matrix(sf, cont)
    tr = complex(np.trace(P))
    rank = int(round(tr.real))
    if abs(tr - rank) >= 1e-6:
        raise QuadratureFailure(f"non-integer trace {tr} after convergence")
    defect = float(np.linalg.norm(P @ P - P, 2))
    return ProjectionResult(matrix=P, trace=tr, rank=rank, idempotency_defect=defect,
                            norm=float(np.linalg.norm(P, 2)), per_edge=cont.per_edge, contour=cont,
                            inflated=inflated)


def projection_rank(pr, tol=1e-6) -> int:
    tr = pr.trace if isinstance(pr, ProjectionResult) else complex(pr)
    r = int(round(tr.real))
    if abs(tr - r) >= tol:
        raise AmbiguousRankError(f"trace {tr} is not within {tol} of an integer")
    return r


def _eig_condition(op):
    L = _matrix(op)
    lam, V = np.linalg.eig(L)
    sv = np.linalg.svd(V, compute_uv=False)
    return lam, (sv[0] / sv[-1] if sv[-1] > 0 else np.inf)


def max_resolvent_norm(op, nodes, spectral=None) -> float:
    """``max ||R(z)||`` over ``nodes``.

    With ``L = V diag(lambda) V^{-1}``, ``1/dist(z) <= ||R(z)|| <= cond(V)/dist(z)``,
    so exact SVDs are only needed where the upper bound can still beat the
    running maximum.  ``spectral`` may pass a precomputed ``(lambda, cond)``.
    """
    nodes = np.asarray(nodes, dtype=complex)
    lam, cond = spectral if spectral is not None else _eig_condition(op)
    dist = np.abs(nodes[:, None] - lam[None, :]).min(axis=1)
    upper = cond / dist if np.isfinite(cond) else np.full(nodes.size, np.inf)
    order = np.argsort(-upper, kind="stable")
    best = 0.0
    chunk = 16
    for s in range(0, order.size, chunk):
        idx = order[s:s + chunk]
        if upper[idx[0]] <= best:
            break
        best = max(best, float(resolvent_norms(op, nodes[idx]).max()))
    return best


def max_neumann_factor(t, b, nodes) -> float:
    """``max ||B R0(z)||`` over ``nodes``, pruned with the Frobenius bound."""
    t = np.asarray(t, dtype=float)
    b = np.asarray(b, dtype=complex)
    nodes = np.asarray(nodes, dtype=complex)
    col2 = np.sum(np.abs(b) ** 2, axis=0)
    fro = np.sqrt((col2[None, :] / np.abs(nodes[:, None] - t[None, :]) ** 2).sum(axis=1))
    best = 0.0
    order = np.argsort(-fro, kind="stable")
    chunk = 32
    for s in range(0, order.size, chunk):
        idx = order[s:s + chunk]
        if fro[idx[0]] <= best:
            break
        best = max(best, float(neumann_factors(t, b, nodes[idx]).max()))
    return best


@dataclass
class FamilyProjections:
    head: ProjectionResult
    tails: list
    ref_head: ProjectionResult
    ref_tails: list
    eigenvalues: np.ndarray
    errors: list = field(default_factory=list)  # (label, message) for projections that failed
    schur_form: Optional[SchurForm] = None


def family_projections(op: TruncatedOperator, family: EnclosureFamily, rule="gauss",
                       per_edge=START_PER_EDGE) -> FamilyProjections:
    sf = SchurForm.of(op)
    ref = SchurForm.of(np.diag(op.t).astype(complex))
    errors = []

    def proj(form, rect, label):
        try:
            return riesz_projection(None, rect, per_edge=per_edge, rule=rule, schur_form=form)
        except (QuadratureFailure, ContourDegeneracyError) as exc:
            errors.append((label, str(exc)))
            return None

    head = proj(sf, family.head, "head")
    ref_head = proj(ref, family.head, "reference head")
    tails, ref_tails = [], []
    for j, rect in zip(family.tail_indices, family.tail):
        tails.append(proj(sf, rect, f"tail {j}"))
        ref_tails.append(proj(ref, rect, f"reference tail {j}"))
    return FamilyProjections(head=head, tails=tails, ref_head=ref_head, ref_tails=ref_tails,
                             eigenvalues=sf.eigenvalues, errors=errors, schur_form=sf)


def homotopy_ranks(op: TruncatedOperator, rects, steps=(0.0, 0.25, 0.5, 0.75, 1.0),
                   per_edge=START_PER_EDGE, rule="gauss"):
    """Quadrature ranks over fixed contours along ``T + s B``.

    ``rects`` is one rectangle or a list; the result has one list of ranks
    per rectangle.  Only traces are needed, so each step costs one
    eigenvalue solve.
    """
    single = isinstance(rects, Rectangle)
    rects = [rects] if single else list(rects)
    out = [[] for _ in rects]
    for s in steps:
        lam = np.linalg.eigvals(op.scaled(s).l)
        for i, rect in enumerate(rects):
            r, _ = _guard_collision(rect, lam)
            _, tr = converged_contour(lam, r, per_edge, rule)
            out[i].append(projection_rank(tr))
    return out[0] if single else out


def _max_or(vals, default=0.0):
    vals = [v for v in vals if v is not None]
    return max(vals) if vals else default


def enclosure_spectrum_report(op: TruncatedOperator, family: EnclosureFamily, projections=None,
                              homotopy=True, rule="gauss") -> DiagnosticsReport:
    """Check spectral inclusion, projection ranks and resolvent bounds for one
    truncated operator against one enclosure family.  Failures become report
    entries, not exceptions."""
    rep = DiagnosticsReport(experiment=f"enclosure-{family.mode}")
    if family.t is not None and (family.t.size != op.n or not np.array_equal(family.t, op.t)):
        raise ValueError("family and operator were built from different sequences")
    for name, ok in family.hypotheses.items():
        rep.add(check(f"hypothesis: {name}", "enclosure construction hypothesis", ok, True, ok))

    fp = projections or family_projections(op, family, rule=rule)
    lam = fp.eigenvalues
    scale = max(1.0, float(np.abs(op.t).max()))
    inside = family.contains(lam, tol=1e-12 * scale)
    outside = lam[~inside]
    rep.add(check("spectral inclusion", "spectrum inside head and tail rectangles",
                  int(outside.size), 0, outside.size == 0,
                  f"{lam.size} eigenvalues checked"))
    for z in outside[:20]:
        rep.add(check("containment-failure", "spectrum inside head and tail rectangles",
                      complex(z), "inside union", False))

    counts = [int(np.count_nonzero(r.contains(lam, 1e-12 * scale))) for r in family.tail]
    mismatch = [(j, c, e) for j, c, e in zip(family.tail_indices, counts, family.tail_counts) if c != e]
    label = "one eigenvalue per tail rectangle" if family.mode == "power" else "tail cluster sizes preserved"
    rep.add(check(label, "eventual simplicity / dimension preservation", len(mismatch), 0,
                  not mismatch, "; ".join(f"j={j}: {c} vs {e}" for j, c, e in mismatch[:10])))
    for lab, msg in fp.errors:
        rep.add(check(f"projection failure ({lab})", "contour projection", msg, "converged", False))

    results = [fp.head] + fp.tails
    refs = [fp.ref_head] + fp.ref_tails
    ok_pairs = [(p, r) for p, r in zip(results, refs) if p is not None and r is not None]
    if fp.head is not None and fp.ref_head is not None:
        rep.add(check("head projection rank", "head dimension equals sum of reference dimensions",
                      fp.head.rank, fp.ref_head.rank,
                      fp.head.rank == fp.ref_head.rank == family.head_count))
    tail_bad = [j for j, p, r, e in zip(family.tail_indices, fp.tails, fp.ref_tails, family.tail_counts)
                if p is None or r is None or not (p.rank == r.rank == e)]
    rep.add(check("tail projection ranks", "tail dimension equals reference dimension",
                  len(tail_bad), 0, not tail_bad, f"indices {tail_bad[:10]}"))
    trace_dev = _max_or([abs(p.trace - p.rank) for p, _ in ok_pairs])
    rep.add(check("integer traces", "projection trace is an integer", trace_dev, 1e-6, trace_dev < 1e-6))
    idem = _max_or([p.idempotency_defect for p, _ in ok_pairs])
    rep.add(check("idempotency", "contour integral is a projection", idem, 1e-8, idem < 1e-8))
    L = op.l
    comm = _max_or([float(np.linalg.norm(p.matrix @ L - L @ p.matrix, 2)) for p, _ in ok_pairs])
    rep.add(check("commutation with L", "projection commutes with L", comm, 1e-8, comm < 1e-8))
    if len(ok_pairs) == len(results):
        total = sum(p.matrix for p, _ in ok_pairs)
        res = float(np.linalg.norm(total - np.eye(op.n), 2))
        rep.add(check("resolution of identity", "projections sum to identity", res, 1e-7, res < 1e-7))

    if homotopy:
        labels = ["head"] + [f"tail {j}" for j in family.tail_indices]
        bad = []
        try:
            ranks = homotopy_ranks(op, family.rectangles(), rule=rule)
            bad = [f"{lab}: {r}" for lab, r in zip(labels, ranks) if len(set(r)) != 1]
        except (QuadratureFailure, ContourDegeneracyError, AmbiguousRankError) as exc:
            bad = [str(exc)]
        rep.add(check("rank constant along T + sB", "trace continuity along homotopy",
                      len(bad), 0, not bad, "; ".join(bad[:5])))

    _resolvent_rows(rep, op, family, fp)
    return rep


def _resolvent_rows(rep, op, family, fp):
    spectral = _eig_condition(op)
    if family.mode == "power":
        kappa, alpha = family.constants["kappa"], family.constants["alpha"]
        worst_lit, worst_fix, measured_max = -np.inf, -np.inf, 0.0
        for j, pr in zip(family.tail_indices, fp.tails):
            if pr is None:
                continue
            r = max_resolvent_norm(op, pr.contour.nodes, spectral)
            measured_max = max(measured_max, r)
            base = (j ** (1 - alpha)) if alpha < 1 else ((j - 1) ** (1 - alpha))
            worst_lit = max(worst_lit, r / (kappa * base))
            worst_fix = max(worst_fix, r / ((4.0 / kappa) * base))
        rep.add(check("tail resolvent bound (4/kappa) n^(1-alpha)",
                      "resolvent bound on tail contours", worst_fix, 1.0, worst_fix <= 1.0,
                      "max ratio measured/bound"))
        rep.add(check("tail resolvent bound kappa n^(1-alpha) as printed",
                      "resolvent bound on tail contours", worst_lit, 1.0, None,
                      "max ratio measured/bound; informational"))
        rep.add(check("perimeter bound |boundary| <= 4 kappa j^(alpha-1)", "tail contour length",
                      family.constants["perimeter_bound_holds"], True,
                      None if alpha < 1 else family.constants["perimeter_bound_holds"]))
    else:
        p, d = family.constants["p"], family.constants["d"]
        prs = [pr for pr in [fp.head] + fp.tails if pr is not None]
        r = max(max_resolvent_norm(op, pr.contour.nodes, spectral) for pr in prs) if prs else np.nan
        if d:
            rep.add(check("resolvent: ||R||^2 <= (d/p)^2 as printed", "resolvent bound outside enclosures",
                          r * r, (d / p) ** 2, None, f"holds={r * r <= (d / p) ** 2}"))
            rep.add(check("resolvent: ||R|| <= d/p (proof text)", "resolvent bound outside enclosures",
                          r, d / p, None, f"holds={r <= d / p}"))
            rep.add(check("resolvent: ||R|| <= 4p/d (scale-consistent)", "resolvent bound outside enclosures",
                          r, 4 * p / d, None, f"holds={r <= 4 * p / d}"))

    nodes = [pr.contour.nodes for pr in [fp.head] + fp.tails if pr is not None]
    if nodes:
        nf = max_neumann_factor(op.t, op.b, np.concatenate(nodes))
        rep.add(check("Neumann factor ||B R0(z)|| <= 1/2 on contours",
                      "Neumann series for the perturbed resolvent", nf, 0.5,
                      (nf <= 0.5) if family.hypotheses_hold else None))
