"""Riesz-system diagnostics: Kato's criterion, the similarity W, basis constants
and the counterexample whose eigenprojections blow up."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (CriterionFailure, InvalidInputError, PreconditionError, SimilarityFailure,
                     VerificationFailure)
from .operators import block_eigenpairs, counterexample_operator
from .report import DiagnosticsReport, check

FAMILY_TOL = 1e-8
CONJ_TOL = 1e-8


@dataclass
class ProjectionFamily:
    """Pairs ``(Q_j, Q_j^0)``; ``reference[pairing[j]]`` is the partner of ``perturbed[j]``.

    ``head`` marks the position of a lumped finite-rank pair (``U_l`` against
    the sum of the first reference projections).  It takes part in ``W``
    but not in the Kato sum.
    """

    reference: list
    perturbed: list
    pairing: Optional[list] = None
    head: Optional[int] = None

    def __post_init__(self):
        if len(self.reference) != len(self.perturbed):
            raise InvalidInputError("reference and perturbed lists differ in length")
        if self.pairing is None:
            self.pairing = list(range(len(self.perturbed)))
        if sorted(self.pairing) != list(range(len(self.perturbed))):
            raise InvalidInputError("pairing must be a permutation")

    def __len__(self):
        return len(self.perturbed)

    @property
    def dim(self):
        return self.perturbed[0].shape[0]

    def pairs(self):
        for j, Q in enumerate(self.perturbed):
            yield j, Q, self.reference[self.pairing[j]]

    def defects(self):
        """Largest deviations from the family invariants (Frobenius norms, which
        bound the operator norms from above)."""
        n = self.dim
        eye = np.eye(n)
        ref = self.reference
        herm = max(float(np.linalg.norm(R - R.conj().T)) for R in ref)
        total_ref = float(np.linalg.norm(sum(ref) - eye))
        total_pert = float(np.linalg.norm(sum(self.perturbed) - eye))
        ortho_ref = 0.0
        ortho = 0.0
        for j, Qj in enumerate(self.perturbed):
            for k, Qk in enumerate(self.perturbed):
                target = Qj if j == k else 0.0
                ortho = max(ortho, float(np.linalg.norm(Qj @ Qk - target)))
        for j, Rj in enumerate(ref):
            for k, Rk in enumerate(ref):
                target = Rj if j == k else 0.0
                ortho_ref = max(ortho_ref, float(np.linalg.norm(Rj @ Rk - target)))
        rank_gap = max(abs(np.trace(Q).real - np.trace(R).real) for _, Q, R in self.pairs())
        return {"reference hermitian": herm, "reference orthogonality": ortho_ref,
                "reference sum": total_ref, "perturbed products": ortho,
                "perturbed sum": total_pert, "paired rank gap": float(rank_gap)}

    def validate(self, tol=FAMILY_TOL):
        bad = {k: v for k, v in self.defects().items() if not v < tol}
        if bad:
            raise PreconditionError("projection family invariants fail: "
                                    + ", ".join(f"{k}={v:.3g}" for k, v in bad.items()))
        return self

    @classmethod
    def from_projections(cls, fp):
        """Head pair plus one pair per tail rectangle, from resolvent projections."""
        if fp.errors or fp.head is None:
            raise PreconditionError("projection family is incomplete: "
                                    + "; ".join(f"{a}: {b}" for a, b in fp.errors))
        perturbed = [fp.head.matrix] + [p.matrix for p in fp.tails]
        reference = [fp.ref_head.matrix] + [p.matrix for p in fp.ref_tails]
        return cls(reference=reference, perturbed=perturbed, head=0)


def counterexample_family(m_max, t=None, h=None) -> ProjectionFamily:
    """Eigenprojections of the block counterexample, paired by proximity:
    the lower eigenvalue of block ``m`` with ``phi_{2m-1}``, the upper with ``phi_{2m}``."""
    m_max = int(m_max)
    t = np.arange(1, 2 * m_max + 1, dtype=float) if t is None else np.asarray(t, dtype=float)
    op = counterexample_operator(m_max, t, h)
    n = op.n
    perturbed, reference = [], []
    for m in range(1, m_max + 1):
        i = 2 * m - 2
        blk = op.l[i:i + 2, i:i + 2]
        lam, vec = np.linalg.eig(blk)
        order = np.argsort(lam.real)  # lower first
        inv = np.linalg.inv(vec)
        for r in order:
            P = np.zeros((n, n), dtype=complex)
            P[i:i + 2, i:i + 2] = np.outer(vec[:, r], inv[r, :])
            perturbed.append(P)
        for k in (i, i + 1):
            E = np.zeros((n, n), dtype=complex)
            E[k, k] = 1.0
            reference.append(E)
    return ProjectionFamily(reference=reference, perturbed=perturbed)


def _stacked(fam: ProjectionFamily):
    rows = [R @ (Q - R) for j, Q, R in fam.pairs() if j != fam.head]
    if not rows:
        return np.zeros((1, fam.dim))
    return np.vstack(rows)


def kato_bounds(fam: ProjectionFamily, n_samples=64, seed=0):
    """``(exact, sampled)``: the stacked-operator value of
    ``sup_{|u|=1} sum_j |Q_j^0 (Q_j - Q_j^0) u|^2`` and the best of ``n_samples``
    random unit vectors (a lower bound)."""
    M = _stacked(fam)
    exact = float(np.linalg.svd(M, compute_uv=False)[0] ** 2)
    sampled = 0.0
    if n_samples:
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((fam.dim, n_samples)) + 1j * rng.standard_normal((fam.dim, n_samples))
        U /= np.linalg.norm(U, axis=0)
        sampled = float(np.max(np.sum(np.abs(M @ U) ** 2, axis=0)))
    return exact, sampled


def kato_sum(fam: ProjectionFamily, n_samples=64, seed=0, validate=True) -> float:
    if validate:
        fam.validate()
    exact, sampled = kato_bounds(fam, n_samples, seed)
    if sampled > exact * (1 + 1e-10) + 1e-14:
        raise VerificationFailure(f"sampled value {sampled} exceeds the exact norm {exact}")
    return exact


@dataclass
class SimilarityResult:
    W: np.ndarray
    cond: float
    sigma_min: float
    conjugation_error: float  # max_j |W Q_j W^-1 - Q_j^0|
    head_error: Optional[float] = None  # same, for the head pair only

    def __iter__(self):
        # unpacks as (W, cond)
        return iter((self.W, self.cond))


def similarity_transform(fam: ProjectionFamily, kato=None, tol=CONJ_TOL) -> SimilarityResult:
    """``W = sum_j Q_j^0 Q_j``, checked to conjugate every ``Q_j`` onto ``Q_j^0``."""
    for j, Q, R in fam.pairs():
        if abs(np.trace(Q).real - np.trace(R).real) > 1e-6:
            raise CriterionFailure(f"pair {j}: rank {np.trace(Q).real:.6g} vs {np.trace(R).real:.6g}")
    c0 = kato_sum(fam) if kato is None else kato
    if not c0 < 1:
        raise CriterionFailure(f"Kato sum {c0:.6g} is not below 1")
    W = sum(R @ Q for _, Q, R in fam.pairs())
    s = np.linalg.svd(W, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SimilarityFailure(f"W is numerically singular (sigma_min = {s[-1]:.3g})")
    Winv = np.linalg.inv(W)
    errs = [float(np.linalg.norm(W @ Q @ Winv - R, 2)) for _, Q, R in fam.pairs()]
    worst = max(errs)
    if not worst < tol:
        raise SimilarityFailure(f"conjugation error {worst:.3g} exceeds {tol}")
    head = errs[fam.head] if fam.head is not None else None
    return SimilarityResult(W=W, cond=float(s[0] / s[-1]), sigma_min=float(s[-1]),
                            conjugation_error=worst, head_error=head)


def basis_constant(fam: ProjectionFamily, n_subsets=200, seed=0) -> float:
    """Lower bound on the unconditional constant: the largest ``|sum_{j in S} Q_j|``
    over all singletons and ``n_subsets`` random subsets."""
    best = max(float(np.linalg.norm(Q, 2)) for Q in fam.perturbed)
    rng = np.random.default_rng(seed)
    k = len(fam)
    for _ in range(int(n_subsets)):
        mask = rng.random(k) < 0.5
        if not mask.any():
            continue
        S = sum(Q for Q, keep in zip(fam.perturbed, mask) if keep)
        best = max(best, float(np.linalg.norm(S, 2)))
    return best


def counterexample_growth(m_max, t=None) -> list:
    """Projection norms of blocks ``m = 2..m_max`` from numerical eigenvectors;
    each must equal ``m`` to 1e-8 relative."""
    m_max = int(m_max)
    if m_max < 2:
        raise InvalidInputError("m_max must be at least 2")
    t = np.arange(1, 2 * m_max + 1, dtype=float) if t is None else np.asarray(t, dtype=float)
    op = counterexample_operator(m_max, t)
    out = []
    for m in range(2, m_max + 1):
        i = 2 * m - 2
        lam, vec = np.linalg.eig(op.l[i:i + 2, i:i + 2])
        inv = np.linalg.inv(vec)
        norm = float(np.linalg.norm(np.outer(vec[:, 0], inv[0, :]), 2))
        if abs(norm - m) > 1e-8 * m:
            raise VerificationFailure(f"block {m}: projection norm {norm!r} differs from {m}")
        out.append(norm)
    return out


def counterexample_closed_form(m, t=None):
    """Angle data of block ``m`` from the closed-form eigenvectors: ``1/sin`` of
    the angle between them, which should be ``m``."""
    t = np.arange(1, 2 * m + 1, dtype=float) if t is None else np.asarray(t, dtype=float)
    _, vecs = block_eigenpairs(t, m)
    u, v = vecs[:, 0], vecs[:, 1]
    cos = abs(np.dot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return 1.0 / np.sqrt(1.0 - cos * cos)


def linear_fit(x, y):
    """Least-squares slope, intercept and R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def riesz_report(fam: ProjectionFamily, n_samples=64, n_subsets=200, seed=0,
                 experiment="riesz-verify") -> DiagnosticsReport:
    """Kato sum, similarity and basis constant of one family as report rows."""
    rep = DiagnosticsReport(experiment=experiment, seed=seed)
    d = fam.defects()
    worst = max(d.values())
    rep.add(check("family invariants", "complete family of projections", worst, FAMILY_TOL,
                  worst < FAMILY_TOL, ", ".join(f"{k}={v:.2e}" for k, v in d.items())))
    exact, sampled = kato_bounds(fam, n_samples, seed)
    rep.add(check("kato sum < 1", "Kato similarity criterion", exact, 1.0, exact < 1.0,
                  f"sampled lower bound {sampled:.6g}"))
    rep.add(check("sampled Kato value <= exact", "stacked norm dominates samples", sampled, exact,
                  sampled <= exact * (1 + 1e-10) + 1e-14))
    try:
        sim = similarity_transform(fam, kato=exact)
        rep.add(check("similarity conjugation", "W Q_j W^-1 = Q_j^0", sim.conjugation_error,
                      CONJ_TOL, sim.conjugation_error < CONJ_TOL, f"cond(W) = {sim.cond:.6g}"))
        if sim.head_error is not None:
            rep.add(check("head identity", "W U W^-1 = sum of head reference projections",
                          sim.head_error, CONJ_TOL, sim.head_error < CONJ_TOL))
    except (CriterionFailure, SimilarityFailure) as exc:
        rep.add(check("similarity conjugation", "W Q_j W^-1 = Q_j^0", str(exc), "W exists", False))
    rep.add(check("basis constant (lower bound)", "uniform bound on partial-sum projections",
                  basis_constant(fam, n_subsets, seed), None, None))
    return rep
