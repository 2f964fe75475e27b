"""Transfer matrices, pressure and equilibrium (Gibbs) cylinder measures.

Everything that depends on the inverse temperature ``c`` is carried in the
log domain: matrices hold log-weights (``-inf`` for missing edges) and are
combined with log-sum-exp, so ``c`` in the hundreds is harmless.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .exceptions import ConvergenceError, InadmissibleWordWarning, ZetathermError
from .potentials import LocallyConstantPotential
from .symbolic import BlockGraph, block_graph, format_word

SPECTRAL_TOL = 1e-12
MAX_ITER = 100_000


def logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    """Log-sum-exp that maps an all ``-inf`` slice to ``-inf`` quietly."""
    a = np.asarray(a, dtype=float)
    mx = np.max(a, axis=axis, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - mx), axis=axis, keepdims=True)) + mx
    if axis is None:
        return out.reshape(())[()]
    return np.squeeze(out, axis=axis)


def log_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``log(exp(A) @ exp(B))`` with broadcasting over leading axes."""
    return logsumexp(A[..., :, :, None] + B[..., None, :, :], axis=-2)


def log_matrix_power(L: np.ndarray, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("power must be >= 1")
    result = None
    base = L
    while n:
        if n & 1:
            result = base if result is None else log_matmul(result, base)
        n >>= 1
        if n:
            base = log_matmul(base, base)
    return result


class TransferMatrix:
    """Log-weight matrix of ``exp(c f)`` on the block graph of ``f``.

    ``log_weights[u, v] = c * f(window(u -> v))``; for range-one potentials the
    states are single symbols and the weight sits on the target symbol.
    """

    def __init__(self, f: LocallyConstantPotential, c: float = 1.0):
        if not math.isfinite(c):
            raise ValueError(f"c must be finite, got {c}")
        self.f = f
        self.c = float(c)
        self.graph: BlockGraph = block_graph(f.spec, f.m)
        win = self.graph.window
        L = np.full(win.shape, -np.inf)
        mask = win >= 0
        L[mask] = self.c * f.table[win[mask]]
        L.setflags(write=False)
        self.log_weights = L
        ncomp, _ = connected_components(mask.astype(np.int8), directed=True, connection="strong")
        if ncomp != 1:
            raise ZetathermError("transfer matrix is reducible")

    @property
    def states(self) -> tuple:
        return self.graph.states

    @property
    def r(self) -> int:
        return self.graph.r

    @property
    def m(self) -> int:
        return self.f.m

    def path_log_weight(self, w: Sequence[int]) -> float:
        """Sum of log-weights along the edges forced by ``[w]``."""
        codes = self.graph.path_windows(w)
        return self.c * math.fsum(self.f.table[codes]) if codes else 0.0

    def log_trace_power(self, n: int) -> float:
        """``log trace(M^n)``, which equals ``log sum_{Fix_n} exp(c f^n)``."""
        P = log_matrix_power(self.log_weights, n)
        return float(logsumexp(np.diagonal(P)))


@dataclass(frozen=True)
class PerronData:
    log_lambda: float
    log_left: np.ndarray
    log_right: np.ndarray
    residual: float
    iterations: int

    @property
    def left(self) -> np.ndarray:
        return np.exp(self.log_left)

    @property
    def right(self) -> np.ndarray:
        return np.exp(self.log_right)


def _perron_vector(L: np.ndarray, tol: float, max_iter: int):
    """Log of the Perron vector of ``exp(L)`` by shifted power iteration.

    Iterates ``M + sigma I`` with ``sigma`` the largest row sum, which leaves
    the eigenvectors alone but keeps the iteration contracting for periodic
    or nearly periodic matrices.  Stops once the Collatz-Wielandt bracket
    ``min_i (Mv)_i / v_i <= lambda <= max_i (Mv)_i / v_i`` is narrower than
    ``tol``.
    """
    log_sigma = float(logsumexp(L, axis=1).max())
    v = np.zeros(L.shape[0])
    spread = np.inf
    for it in range(1, max_iter + 1):
        u = logsumexp(L + v[None, :], axis=1)
        ratio = u - v
        spread = float(ratio.max() - ratio.min())
        if spread < tol:
            return v, it, spread
        w = np.logaddexp(u, log_sigma + v)
        v = w - w.max()
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations "
                           f"(bracket width {spread:.3e})", residual=spread)


def perron(tm: TransferMatrix, tol: float = SPECTRAL_TOL, max_iter: int = MAX_ITER) -> PerronData:
    L = tm.log_weights
    finite = L[np.isfinite(L)]
    # log-sum-exp rounding grows with the magnitude of the log-weights
    eff_tol = max(tol, 8 * np.finfo(float).eps * max(1.0, float(np.abs(finite).max())) * L.shape[0])
    log_r, it_r, _ = _perron_vector(L, eff_tol, max_iter)
    log_l, it_l, _ = _perron_vector(L.T, eff_tol, max_iter)
    log_r = log_r - logsumexp(log_r)
    log_l = log_l - logsumexp(log_l + log_r)
    log_lambda = float(logsumexp(log_l[:, None] + L + log_r[None, :]))
    residual = float(np.abs(logsumexp(L + log_r[None, :], axis=1) - log_lambda - log_r).max())
    return PerronData(log_lambda, log_l, log_r, residual, max(it_r, it_l))


def pressure(f: LocallyConstantPotential, c: float = 1.0, tol: float = SPECTRAL_TOL,
             max_iter: int = MAX_ITER) -> PerronData:
    """Pressure ``P(c f)`` with the Perron data of the transfer matrix.

    Parameters
    ----------
    f : LocallyConstantPotential
    c : float
        Inverse temperature; any finite real.
    tol : float
        Width of the eigenvalue bracket at which the iteration stops.

    Returns
    -------
    PerronData
        ``log_lambda`` is ``P(c f)``; left/right vectors satisfy
        ``sum(right) == 1`` and ``<left, right> == 1``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    return perron(TransferMatrix(f, c), tol, max_iter)


class GibbsState:
    """Equilibrium state of ``c f`` evaluated on cylinders."""

    def __init__(self, f: LocallyConstantPotential, c: float, tol: float = SPECTRAL_TOL):
        self.f = f
        self.c = float(c)
        self.tm = TransferMatrix(f, c)
        self.perron = perron(self.tm, tol)

    @property
    def log_pressure(self) -> float:
        return self.perron.log_lambda

    def log_measure(self, w: Sequence[int]) -> float:
        w = tuple(w)
        spec = self.f.spec
        if not spec.is_admissible(w):
            warnings.warn(f"cylinder [{format_word(w)}] is inadmissible; measure 0",
                          InadmissibleWordWarning, stacklevel=3)
            return -math.inf
        g = self.tm.graph
        pd = self.perron
        if len(w) < g.r:
            idx = g.states_with_prefix(w)
            return float(logsumexp(pd.log_left[idx] + pd.log_right[idx]))
        path = g.state_path(w)
        k = len(path) - 1
        return float(pd.log_left[path[0]] + self.tm.path_log_weight(w)
                     - k * pd.log_lambda + pd.log_right[path[-1]])

    def measure(self, w: Sequence[int]) -> float:
        return math.exp(self.log_measure(w))


def gibbs_cylinder(f: LocallyConstantPotential, c: float, w: Sequence[int]) -> float:
    """``mu_{cf}([w])`` for the equilibrium state of ``c f``."""
    return GibbsState(f, c).measure(w)


def pressure_derivative(f: LocallyConstantPotential, c: float, s: float, k: Sequence[int],
                        h: float = 1e-5) -> float:
    """Central difference of ``z -> P(c s f + z 1_[k])`` at ``z = 0``."""
    if h <= 0:
        raise ValueError("h must be positive")
    k = tuple(k)
    if not f.spec.is_admissible(k):
        raise ValueError(f"cylinder [{format_word(k)}] is inadmissible")
    base = f.scaled(c * s)
    up = pressure(base.add_cylinder(k, h)).log_lambda
    down = pressure(base.add_cylinder(k, -h)).log_lambda
    return (up - down) / (2 * h)


def epsilon_c(f: LocallyConstantPotential, c: float, beta_value: float = None) -> float:
    """``P(c f) - c beta(f)``, which decreases to the maximal entropy ``h_f``."""
    if beta_value is None:
        from .ergopt import beta
        beta_value = beta(f)
    return pressure(f, c).log_lambda - c * beta_value


def mean_potential(f: LocallyConstantPotential, measure) -> float:
    """``sum_w f(w) mu([w])`` over the admissible words of length ``m``."""
    return math.fsum(v * measure(w) for w, v in f.items())

