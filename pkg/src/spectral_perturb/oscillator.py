"""The anharmonic oscillator ``-y'' + |x|^beta y`` on the line: finite-difference
eigenpairs, WKB quantization, gap and multiplier exponents."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import (DomainTooSmallError, InvalidInputError, PreconditionError, ResolutionError,
                     VerificationFailure)

MIN_POINTS = 1000
RICHARDSON_RTOL = 1e-4
EDGE_TOL = 1e-8
# decay of exp(-integral) beyond the turning point; e^-23 ~ 1e-10
DECAY_ACTION = 23.0
# target relative discretization error ~ lambda dx^2 / 12 ~ 1e-5
_DX_COEFF = 1.2e-4


@dataclass
class OscillatorModel:
    beta: float
    X: float
    m: int
    x: np.ndarray  # interior grid points
    eigenvalues: np.ndarray
    vectors: np.ndarray  # column n is phi_n on the grid, sum(phi^2) dx = 1
    richardson_change: float = float("nan")

    @property
    def dx(self):
        return 2.0 * self.X / (self.m + 1)

    @property
    def n_modes(self):
        return self.eigenvalues.size


@dataclass(frozen=True)
class MultiplierSpec:
    """``b`` on the grid (callable of ``x`` or an array) with ``b (1+x^2)^(-alpha_w/2)``
    in ``L^p``; ``p`` may be ``math.inf``."""

    b: Union[Callable, np.ndarray]
    p: float = math.inf
    alpha_w: float = 0.0

    def values(self, x):
        b = self.b(x) if callable(self.b) else np.asarray(self.b, dtype=float)
        b = np.broadcast_to(np.asarray(b, dtype=float), x.shape)
        return np.array(b)

    def weighted_norm(self, x, dx):
        """Grid ``L^p`` norm of ``b (1+x^2)^(-alpha_w/2)``."""
        if not self.p >= 2:
            raise InvalidInputError(f"p must be at least 2, got {self.p}")
        f = np.abs(self.values(x)) * (1.0 + x * x) ** (-self.alpha_w / 2.0)
        if math.isinf(self.p):
            return float(f.max())
        return float((np.sum(f ** self.p) * dx) ** (1.0 / self.p))


def omega_beta(beta) -> float:
    """``2 int_0^1 (1 - x^beta)^(1/2) dx``."""
    if not beta > 0:
        raise InvalidInputError("beta must be positive")
    return wkb_phase(1.0, beta)


def _sqrt_ratio(u, beta):
    # sqrt((1 - u^beta) / (1 - u)) for u in [0, 1], stable as u -> 1
    if u >= 1.0:
        return math.sqrt(beta)
    if u <= 0.0:
        return 1.0
    lu = math.log(u)
    return math.sqrt(math.expm1(beta * lu) / math.expm1(lu))


def wkb_phase(lam, beta) -> float:
    """``2 int_0^{lam^(1/beta)} (lam - x^beta)^(1/2) dx``.

    The square-root zero at the turning point is handled by an algebraic
    weight ``(b - x)^(1/2)`` in the quadrature.
    """
    if not lam > 0:
        raise InvalidInputError("lambda must be positive")
    beta = float(beta)
    b = lam ** (1.0 / beta)
    # lam - x^beta = lam (1 - (x/b)^beta) = lam/b (b - x) ratio^2
    scale = math.sqrt(lam / b)
    val, _ = quad(lambda x: _sqrt_ratio(x / b, beta), 0.0, b, weight="alg", wvar=(0.0, 0.5),
                  epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * scale * val


def wkb_estimate(n, beta) -> float:
    """Eigenvalue predicted by the quantization rule ``lam^((beta+2)/(2 beta)) Omega = (n+1/2) pi``."""
    return ((n + 0.5) * math.pi / omega_beta(beta)) ** (2.0 * beta / (beta + 2.0))


def turning_point(lam, beta) -> float:
    return lam ** (1.0 / beta)


def decay_width(lam, beta, action=DECAY_ACTION) -> float:
    """Smallest ``X`` with ``int_{x_t}^{X} (x^beta - lam)^(1/2) dx >= action``."""
    xt = turning_point(lam, beta)

    def excess(X):
        val, _ = quad(lambda x: math.sqrt(max(x ** beta - lam, 0.0)), xt, X, limit=200)
        return val - action

    hi = xt + 1.0
    while excess(hi) < 0:
        hi = xt + 2.0 * (hi - xt)
    return brentq(excess, xt, hi, xtol=1e-10)


def auto_domain(lam_max, beta) -> float:
    return max(1.5 * turning_point(lam_max, beta), decay_width(lam_max, beta))


def auto_points(X, lam_max) -> int:
    dx = math.sqrt(_DX_COEFF / max(lam_max, 1.0))
    return max(MIN_POINTS, int(math.ceil(2.0 * X / dx)))


def _fd_solve(beta, X, m, n_modes):
    dx = 2.0 * X / (m + 1)
    x = -X + dx * np.arange(1, m + 1)
    diag = 2.0 / dx ** 2 + np.abs(x) ** beta
    off = np.full(m - 1, -1.0 / dx ** 2)
    lam, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_modes - 1))
    vec = vec / math.sqrt(dx)
    # deterministic sign: the first sizable entry is positive
    for k in range(vec.shape[1]):
        col = vec[:, k]
        i = int(np.argmax(np.abs(col) > 1e-3 * np.abs(col).max()))
        if col[i] < 0:
            vec[:, k] = -col
    return x, lam, vec


def solve_eigen(beta, n_modes, X=None, m=None, richardson=True) -> OscillatorModel:
    """Lowest ``n_modes`` eigenpairs by central differences with Dirichlet ends.

    ``X`` defaults to the larger of 1.5 turning points and the width at which
    the WKB decay factor reaches ``e^-23``; ``m`` defaults to a spacing with
    relative error near 1e-5.  With ``richardson=True`` the solve is repeated
    on the halved spacing and must agree to 1e-4 relative.
    """
    beta = float(beta)
    if not beta > 1:
        raise PreconditionError("beta must exceed 1")
    n_modes = int(n_modes)
    if n_modes < 1:
        raise InvalidInputError("n_modes must be positive")
    auto_X = X is None
    lam_guess = 1.3 * wkb_estimate(n_modes - 1, beta)
    for _ in range(3):
        X_use = auto_domain(lam_guess, beta) if auto_X else float(X)
        m_use = auto_points(X_use, lam_guess) if m is None else int(m)
        if m_use < MIN_POINTS:
            raise InvalidInputError(f"need at least {MIN_POINTS} grid points, got {m_use}")
        x, lam, vec = _fd_solve(beta, X_use, m_use, n_modes)
        lam_max = float(lam[-1])
        if turning_point(lam_max, beta) <= X_use / 1.5:
            break
        if not auto_X:
            raise DomainTooSmallError(
                f"turning point {turning_point(lam_max, beta):.4g} of lambda={lam_max:.6g} "
                f"is not inside X/1.5 = {X_use / 1.5:.4g}")
        lam_guess = 1.3 * lam_max
    else:  # pragma: no cover - the guess grows geometrically
        raise DomainTooSmallError("could not place the turning point inside X/1.5")
    if auto_X and lam_max > lam_guess:
        # the guess undershot; widen once for the decay margin
        X_use = auto_domain(1.3 * lam_max, beta)
        m_use = auto_points(X_use, 1.3 * lam_max) if m is None else int(m)
        x, lam, vec = _fd_solve(beta, X_use, m_use, n_modes)
    edge = float(np.max(np.abs(vec[[0, -1], :])))
    if edge >= EDGE_TOL:
        raise DomainTooSmallError(f"eigenfunctions reach {edge:.3g} at the boundary")
    change = float("nan")
    if richardson:
        _, lam2, _ = _fd_solve(beta, X_use, 2 * m_use + 1, n_modes)
        change = float(np.max(np.abs(lam2 - lam) / np.abs(lam2)))
        if not change < RICHARDSON_RTOL:
            raise ResolutionError(f"eigenvalues moved by {change:.3g} (relative) under mesh doubling")
    return OscillatorModel(beta=beta, X=X_use, m=m_use, x=x, eigenvalues=lam, vectors=vec,
                           richardson_change=change)


def wkb_residual(model: OscillatorModel) -> np.ndarray:
    """``r_n = phase(lam_n) - (n + 1/2) pi``, ``n`` from 0."""
    n = np.arange(model.n_modes)
    phase = np.array([wkb_phase(float(l), model.beta) for l in model.eigenvalues])
    return phase - (n + 0.5) * math.pi


def predicted_gap_exponent(beta) -> float:
    return 2.0 * beta / (beta + 2.0) - 1.0


def _loglog_slope(n, y):
    slope, _ = np.polyfit(np.log(n), np.log(y), 1)
    return float(slope)


def gap_exponent_fit(model: OscillatorModel, tol=0.05, strict=True):
    """``(fitted, predicted)`` slope of ``log(lam_{n+1} - lam_n)`` against
    ``log n`` over the upper half of the retained modes."""
    N = model.n_modes
    if N < 20:
        raise InvalidInputError(f"need at least 20 modes, got {N}")
    lam = model.eigenvalues
    n = np.arange(N // 2, N - 1)
    gaps = lam[n + 1] - lam[n]
    fitted = _loglog_slope(n, gaps)
    predicted = predicted_gap_exponent(model.beta)
    if strict and not abs(fitted - predicted) < tol:
        raise VerificationFailure(f"gap exponent {fitted:.4f} vs predicted {predicted:.4f}")
    return fitted, predicted


def xi_exponent(beta, p, alpha_w) -> float:
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    first = (1.0 - beta + 3.0 * alpha_w + (beta - 1.0) * inv_p) / (3.0 * beta)
    second = (alpha_w - beta / 4.0 + 0.5 - inv_p) / beta
    return max(first, second)


def predicted_multiplier_exponent(beta, p, alpha_w) -> float:
    return 2.0 * beta * xi_exponent(beta, p, alpha_w) / (beta + 2.0)


def multiplier_norms(model: OscillatorModel, mult: MultiplierSpec, slack=0.1, strict=True):
    """``(norms, fitted, predicted)`` for ``|b phi_n|_2``.

    The exponent is fitted on ``log n`` over the upper half of the modes
    (``n >= 1``); at ``p = 4`` the norms are divided by ``log(n + 2)`` first.
    """
    x, dx = model.x, model.dx
    wn = mult.weighted_norm(x, dx)
    if not np.isfinite(wn):
        raise InvalidInputError("b (1+x^2)^(-alpha_w/2) has no finite grid norm")
    b = mult.values(x)
    norms = np.sqrt(np.sum((b[:, None] * model.vectors) ** 2, axis=0) * dx)
    N = model.n_modes
    n = np.arange(max(1, N // 2), N)
    y = norms[n]
    if mult.p == 4:
        y = y / np.log(n + 2.0)
    fitted = _loglog_slope(n, y) if n.size >= 2 and np.all(y > 0) else float("nan")
    predicted = predicted_multiplier_exponent(model.beta, mult.p, mult.alpha_w)
    if strict and not fitted <= predicted + slack:
        raise VerificationFailure(f"multiplier exponent {fitted:.4f} exceeds {predicted:.4f} + {slack}")
    return norms, fitted, predicted


def unconditional_basis_predicate(beta, p, alpha_w) -> bool:
    """Sufficient condition for the perturbed eigensystem to be an unconditional basis."""
    if not beta > 1:
        raise PreconditionError("beta must exceed 1")
    if not p >= 2:
        raise PreconditionError("p must be at least 2")
    if p < 4:
        return bool(beta - 1.0 < p * (-4.0 + 2.5 * beta - 3.0 * alpha_w))
    bracket = 3.0 - 1.5 * beta + 2.0 * alpha_w
    if math.isinf(p):
        return bool(bracket <= 0.0)
    return bool(2.0 > p * bracket)


def gram_defect(model: OscillatorModel) -> float:
    G = model.vectors.T @ model.vectors * model.dx
    return float(np.max(np.abs(G - np.eye(model.n_modes))))


def parity_defect(model: OscillatorModel) -> float:
    v = model.vectors
    sign = (-1.0) ** np.arange(model.n_modes)
    return float(np.max(np.sqrt(np.sum((v - sign * v[::-1, :]) ** 2, axis=0) * model.dx)))


def write_eigen_csv(model: OscillatorModel, values_path, vectors_path=None):
    """Eigenvalues as ``n,lambda``; optionally the grid functions as ``x,phi_0,...``."""
    with open(values_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "lambda"])
        for n, lam in enumerate(model.eigenvalues):
            w.writerow([n, repr(float(lam))])
    if vectors_path is not None:
        with open(vectors_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"phi_{n}" for n in range(model.n_modes)])
            for xi, row in zip(model.x, model.vectors):
                w.writerow([repr(float(xi))] + [repr(float(v)) for v in row])


def read_eigenvalues_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[1]) for r in rows[1:] if r])
