"""Brute-force references for tests.

Nothing here touches the transfer-matrix machinery: every quantity is a
direct sum over the enumerated periodic points, in plain floating point.
Keep ``c`` at most 5 and periods at most 14 so nothing overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .potentials import LocallyConstantPotential
from .symbolic import fix_array

PLAIN_C_MAX = 5.0
PLAIN_N_MAX = 14


def _sums(f: LocallyConstantPotential, words: np.ndarray) -> np.ndarray:
    """Birkhoff sums over the period, from ``f.value`` on every cyclic window."""
    d, m = f.spec.d, f.m
    lookup = np.full(d ** m, np.nan)
    for k, w in enumerate(product(range(1, d + 1), repeat=m)):
        if f.spec.is_admissible(w):
            lookup[k] = f.value(w)
    n = words.shape[1]
    idx = (np.arange(n)[:, None] + np.arange(m)[None, :]) % n
    windows = words[:, idx].astype(np.int64)          # (rows, n, m)
    codes = windows @ (d ** np.arange(m - 1, -1, -1))
    return lookup[codes].sum(axis=1)


def _hits(w: Sequence[int], words: np.ndarray) -> np.ndarray:
    """Number of ``i < n`` with ``sigma^i x`` in ``[w]``."""
    w0 = np.asarray(w) - 1
    n = words.shape[1]
    idx = (np.arange(n)[:, None] + np.arange(len(w0))[None, :]) % n
    return (words[:, idx] == w0).all(axis=2).sum(axis=1)


def _traces(f, c, n_max):
    return [float(np.exp(c * _sums(f, fix_array(f.spec, n))).sum()) for n in range(1, n_max + 1)]


def _aitken(x: Sequence[float]) -> float:
    x0, x1, x2 = x[-3:]
    den = x2 - 2 * x1 + x0
    if den == 0:
        return x2
    return x2 - (x2 - x1) ** 2 / den


def _prony_limit(traces: Sequence[float], order: int) -> float:
    """Largest root of the characteristic polynomial recovered from traces.

    Newton's identities turn the power sums ``tr M^k`` into the
    coefficients of ``det(t - M)``; the Perron root is the largest real
    root.  Traces are rescaled first so the recursion stays well conditioned.
    """
    order = min(order, len(traces))
    t = traces[-1] ** (1.0 / len(traces))
    p = [traces[k] / t ** (k + 1) for k in range(order)]
    e = [1.0]
    for k in range(1, order + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    coeffs = [(-1) ** k * e[k] for k in range(order + 1)]
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) < 1e-8].real
    return math.log(real.max() * t)


@dataclass(frozen=True)
class PressureSequence:
    """``(n, (1/n) log sum_{Fix_n} e^{c f^n})`` with two extrapolations.

    ``aitken`` accelerates the ratios ``tr_{n+1} / tr_n``; ``prony`` is the
    log of the Perron root recovered from the traces.  ``limit`` is the
    Prony value.
    """

    terms: tuple
    aitken: float
    prony: float

    @property
    def limit(self) -> float:
        return self.prony


def pressure_bruteforce(f: LocallyConstantPotential, c: float, n_max: int = 12) -> PressureSequence:
    f.spec.check_cap(n_max)
    traces = _traces(f, c, n_max)
    terms = tuple((n, math.log(t) / n) for n, t in enumerate(traces, start=1))
    ratios = [math.log(traces[k + 1] / traces[k]) for k in range(len(traces) - 1)]
    aitken = _aitken(ratios) if len(ratios) >= 3 else ratios[-1]
    order = f.spec.d ** max(f.m - 1, 1)
    prony = _prony_limit(traces, order) if n_max >= order else aitken
    return PressureSequence(terms, aitken, prony)


def max_mean_bruteforce(f: LocallyConstantPotential, cycle_cap: int) -> float:
    """Largest Birkhoff mean over every periodic orbit of period up to ``cycle_cap``."""
    f.spec.check_cap(cycle_cap)
    best = -math.inf
    for n in range(1, cycle_cap + 1):
        words = fix_array(f.spec, n)
        if words.shape[0]:
            best = max(best, float(_sums(f, words).max()) / n)
    return best


def measure_bruteforce(f: LocallyConstantPotential, c: float, w: Sequence[int], s: float = None,
                       N: int = None, kind: str = "pi", n_max: int = PLAIN_N_MAX) -> float:
    """Cylinder measure from the defining periodic-orbit sums.

    With ``s`` this is the zeta-measure ratio cut at ``n_max`` periods; with
    ``N`` it is ``pi_{c,N}`` (``kind="pi"``) or ``eta_{c,N}`` (``kind="eta"``).
    The pressure used for normalization comes from :func:`pressure_bruteforce`.
    """
    if c > PLAIN_C_MAX:
        raise ValueError(f"plain-domain sums need c <= {PLAIN_C_MAX}")
    if (s is None) == (N is None):
        raise ValueError("give exactly one of s and N")
    top = n_max if s is not None else N
    if top > PLAIN_N_MAX:
        raise ValueError(f"plain-domain sums need at most {PLAIN_N_MAX} periods")
    a = c * s if s is not None else c
    if s is None and kind == "eta":
        P = 0.0
    elif s is not None or kind == "pi":
        P = pressure_bruteforce(f, c, max(PLAIN_N_MAX, 2)).limit
    else:
        raise ValueError(f"unknown kind {kind!r}")
    num = den = 0.0
    for n in range(1, top + 1):
        words = fix_array(f.spec, n)
        weights = np.exp(a * _sums(f, words) - n * P)
        den += weights.sum()
        num += (weights * _hits(w, words)).sum() / n
    return float(num / den)
