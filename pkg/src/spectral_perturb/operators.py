"""Finite sections of T, B and L = T + B in the eigenbasis of T."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import InvalidInputError

KINDS = ("zero", "diagonal", "random-column", "banded", "block-2x2")


@dataclass(frozen=True)
class PerturbationSpec:
    """Recipe for B.

    Column norms come from ``norms`` (``||B phi_k||`` directly) or from ``c``
    together with ``alpha`` (``||B phi_k|| = c_k k**(alpha-1)``).  Scalars are
    broadcast.  For ``block-2x2`` the column norms are implied by the gaps and
    ``h``.
    """

    kind: str = "zero"
    norms: Optional[object] = None
    c: Optional[object] = None
    alpha: Optional[float] = None
    seed: int = 0
    bandwidth: int = 1
    h: Union[float, Callable[[int], float], None] = None

    def target_norms(self, n):
        if self.kind in ("zero", "block-2x2"):
            return np.zeros(n)
        if self.norms is not None:
            out = np.broadcast_to(np.asarray(self.norms, dtype=float), (n,)) if np.ndim(self.norms) == 0 \
                else np.asarray(self.norms, dtype=float)[:n]
        elif self.c is not None:
            if self.alpha is None:
                raise InvalidInputError("alpha is required when column norms are given through c")
            k = np.arange(1, n + 1, dtype=float)
            c = np.asarray(self.c, dtype=float)
            c = np.broadcast_to(c, (n,)) if c.ndim == 0 else c[:n]
            out = np.abs(c) * k ** (self.alpha - 1.0)
        else:
            raise InvalidInputError(f"{self.kind} perturbation needs norms or c")
        out = np.array(out, dtype=float)
        if out.size != n:
            raise InvalidInputError(f"need {n} column norms, got {out.size}")
        if np.any(out < 0) or not np.all(np.isfinite(out)):
            raise InvalidInputError("column norms must be finite and nonnegative")
        return out


@dataclass(frozen=True)
class TruncatedOperator:
    n: int
    t: np.ndarray
    b: np.ndarray
    l: np.ndarray

    @classmethod
    def from_parts(cls, t, b):
        t = np.asarray(t, dtype=float)
        b = np.asarray(b, dtype=complex)
        l = b.copy()
        l[np.diag_indices_from(l)] += t
        for arr in (t, b, l):
            arr.setflags(write=False)
        return cls(n=t.size, t=t, b=b, l=l)

    def scaled(self, s):
        """T + s B, for homotopy arguments."""
        return TruncatedOperator.from_parts(self.t, s * self.b)


def _column_rng(seed, k):
    return np.random.default_rng([int(seed), int(k)])


def _unit_complex(rng, size):
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


def _block_h(h, m):
    if h is None:
        return 1.0 / m
    if callable(h):
        return float(h(m))
    return float(h)


def _block_matrix(t, h):
    n = t.size
    b = np.zeros((n, n), dtype=complex)
    for m in range(1, n // 2 + 1):
        hm = _block_h(h, m)
        if not 0 < hm <= 1:
            raise InvalidInputError(f"block parameter h({m}) = {hm} outside (0, 1]")
        s = np.sqrt(1.0 - hm * hm)
        g = 0.5 * (t[2 * m - 1] - t[2 * m - 2])
        b[2 * m - 2, 2 * m - 1] = g * s
        b[2 * m - 1, 2 * m - 2] = -g * s
    return b


def assemble(t, pert: PerturbationSpec, n=None) -> TruncatedOperator:
    t = np.asarray(t, dtype=float)
    n = t.size if n is None else int(n)
    if n < 1 or n > t.size:
        raise InvalidInputError(f"n={n} exceeds the sequence horizon {t.size}")
    t = t[:n]
    if pert.kind not in KINDS:
        raise InvalidInputError(f"unknown perturbation kind {pert.kind!r}")
    if pert.kind == "zero":
        b = np.zeros((n, n), dtype=complex)
    elif pert.kind == "block-2x2":
        b = _block_matrix(t, pert.h)
    else:
        norms = pert.target_norms(n)
        b = np.zeros((n, n), dtype=complex)
        if pert.kind == "diagonal":
            b[np.diag_indices(n)] = norms
        elif pert.kind == "random-column":
            for k in range(n):
                b[:, k] = norms[k] * _unit_complex(_column_rng(pert.seed, k), n)
        elif pert.kind == "banded":
            w = int(pert.bandwidth)
            if w < 0:
                raise InvalidInputError("bandwidth must be nonnegative")
            for k in range(n):
                lo, hi = max(0, k - w), min(n, k + w + 1)
                b[lo:hi, k] = norms[k] * _unit_complex(_column_rng(pert.seed, k), hi - lo)
    return TruncatedOperator.from_parts(t, b)


def column_norms(op: TruncatedOperator) -> np.ndarray:
    return np.linalg.norm(op.b, axis=0)


def counterexample_operator(m_max, t, h=None) -> TruncatedOperator:
    """Block-diagonal B on span{phi_{2m-1}, phi_{2m}}, m = 1..m_max.

    Block ``m`` is ``(t_{2m} - t_{2m-1})/2 * [[0, s], [-s, 0]]`` with
    ``s**2 + h(m)**2 = 1`` and ``h(m) = 1/m`` unless ``h`` says otherwise
    (a constant or a callable of ``m``).
    """
    m_max = int(m_max)
    if m_max < 2:
        raise InvalidInputError("m_max must be at least 2")
    t = np.asarray(t, dtype=float)
    if t.size < 2 * m_max:
        raise InvalidInputError(f"need {2 * m_max} eigenvalues, got {t.size}")
    return assemble(t[:2 * m_max], PerturbationSpec(kind="block-2x2", h=h))


def block_eigenpairs(t, m, h=None):
    """Closed-form eigenvalues and eigenvectors of block ``m`` of the
    counterexample, in block coordinates (phi_{2m-1}, phi_{2m})."""
    t = np.asarray(t, dtype=float)
    hm = _block_h(h, m)
    lo, hi = t[2 * m - 2], t[2 * m - 1]
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    G = np.sqrt((1 + hm) / (1 - hm))
    lam = np.array([mid + half * hm, mid - half * hm])
    vecs = np.array([[1.0, G], [1.0, 1.0 / G]]).T
    return lam, vecs


def write_matrix_csv(path, mat):
    """Real and imaginary parts interleaved column by column."""
    mat = np.asarray(mat, dtype=complex)
    n_cols = mat.shape[1]
    header = []
    for k in range(n_cols):
        header += [f"re_{k + 1}", f"im_{k + 1}"]
    inter = np.empty((mat.shape[0], 2 * n_cols))
    inter[:, 0::2] = mat.real
    inter[:, 1::2] = mat.imag
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in inter:
            w.writerow([repr(float(x)) for x in row])


def read_matrix_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    if data.ndim != 2 or data.shape[1] % 2:
        raise InvalidInputError("matrix csv must have an even number of columns")
    return data[:, 0::2] + 1j * data[:, 1::2]
