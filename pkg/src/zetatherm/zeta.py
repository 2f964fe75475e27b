"""Zeta measures and their finite-period relatives.

Level sums over ``Fix_n`` are evaluated on the block graph: by rotation
invariance ``sum_{Fix_n} w(x) k^n(x)/n`` equals the sum of ``w`` over the
points of ``Fix_n`` that lie in the cylinder, and those are closed walks
through the cylinder's forced state path.  Periods shorter than the
cylinder are handled one point at a time.  An enumeration route over
``Fix_n`` is kept for cross-checks at small ``n``.

All sums are log-domain.  Matrix powers are produced in vectorized blocks,
so certified series with hundreds of thousands of levels (``s`` very close
to 1) stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .exceptions import ConvergenceError, InadmissibleWordError, NotPositiveError, ZetathermError
from .potentials import LocallyConstantPotential
from .symbolic import (PeriodicWord, birkhoff_sum, birkhoff_sums, block_graph,
                       cylinder_hits_array, fix_array, format_word)
from .thermo import TransferMatrix, log_matmul, log_matrix_power, logsumexp, perron, pressure

DEFAULT_REL_TOL = 1e-10
DEFAULT_N_CAP = 2_000_000
TAIL_SAFETY = 10.0
_BLOCK = 4096


@dataclass(frozen=True)
class ZetaParams:
    c: float
    s: float
    rel_tol: float = DEFAULT_REL_TOL
    n_cap: int = DEFAULT_N_CAP

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0 < self.s < 1:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not 0 < self.rel_tol <= 1e-3:
            raise ValueError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol}")
        if int(self.n_cap) < 1:
            raise ValueError("n_cap must be positive")


@dataclass(frozen=True)
class SeriesResult:
    """A truncated ratio of periodic-orbit series.

    ``tail_bound`` bounds the omitted tail of the denominator relative to the
    summed part; ``certified`` is False when ``n_cap`` stopped the summation
    before the bound dropped below the requested tolerance.
    """

    value: float
    n_used: int
    tail_bound: float
    certified: bool
    log_value: float


# -- level sums ----------------------------------------------------------------

class _Cylinder:
    """Precomputed pieces for the levels of one cylinder ``[w]``."""

    def __init__(self, f: LocallyConstantPotential, w: Sequence[int]):
        w = tuple(w)
        spec = f.spec
        if not spec.is_admissible(w):
            raise InadmissibleWordError(f"[{format_word(w)}] is not admissible")
        g = block_graph(spec, f.m)
        self.word = w
        self.j = len(w)
        self.r = g.r
        if self.j >= self.r:
            path = g.state_path(w)
            self.start, self.end = path[0], path[-1]
            self.lag = self.j - self.r
            self.forced_sum = math.fsum(f.table[g.path_windows(w)]) if self.lag else 0.0
            self.prefix_states = None
        else:
            self.lag = 0
            self.forced_sum = 0.0
            self.prefix_states = g.states_with_prefix(w)
        # points whose period is shorter than w: at most one per period
        self.short = {}
        for n in range(1, self.j):
            u = w[:n]
            if all(w[i] == u[i % n] for i in range(self.j)) and spec.is_cyclically_admissible(u):
                self.short[n] = birkhoff_sum(f, PeriodicWord(u))

    def short_level(self, n: int, a: float, shift: float) -> float:
        if n in self.short:
            return a * self.short[n] - n * shift
        return -math.inf

    def from_powers(self, logB: np.ndarray, a: float, shift: float) -> np.ndarray:
        """Levels ``n = p + lag`` for a stack of powers ``logB[k] = log B^p``."""
        if self.prefix_states is not None:
            idx = self.prefix_states
            return logsumexp(logB[:, idx, idx], axis=1)
        return a * self.forced_sum - self.lag * shift + logB[:, self.end, self.start]


def _log_power_blocks(L: np.ndarray, block: int = _BLOCK):
    """Yield ``(p0, stack)`` with ``stack[k] = log(exp(L)^(p0 + k))``, forever."""
    S = L.shape[0]
    K = int(max(64, min(block, 2 ** 22 // max(1, S ** 3))))
    base = L[None, :, :]
    while base.shape[0] < K:
        base = np.concatenate([base, log_matmul(base[-1], base)], axis=0)
    base = base[:K]
    p0 = 1
    stack = base
    while True:
        yield p0, stack
        p0 += K
        stack = log_matmul(stack[-1], base)


def _log_matrix(f: LocallyConstantPotential, a: float, shift: float) -> np.ndarray:
    return TransferMatrix(f, a).log_weights - shift


def zeta_level_sum(f: LocallyConstantPotential, c: float, s: float, n: int,
                   w: Sequence[int] = None, method: str = "transfer",
                   log_p: float = None) -> float:
    """Log of ``sum_{x in Fix_n} exp(c s f^n(x) - n P(cf)) k^n(x) / n``.

    ``k`` is the indicator of ``[w]``, or ``k = 1`` when ``w`` is None (then
    the ``1/n`` is dropped, as in the normalizing series).  ``log_p``
    overrides ``P(cf)``; pass 0 to get the unnormalized weights.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    shift = pressure(f, c).log_lambda if log_p is None else log_p
    a = c * s
    if method == "enumerate":
        words = fix_array(f.spec, n)
        logw = a * birkhoff_sums(f, words) - n * shift
        if w is None:
            return float(logsumexp(logw))
        hits = cylinder_hits_array(tuple(w), words)
        keep = hits > 0
        if not keep.any():
            return -math.inf
        return float(logsumexp(logw[keep] + np.log(hits[keep] / n)))
    if method != "transfer":
        raise ValueError(f"unknown method {method!r}")
    L = _log_matrix(f, a, shift)
    if w is None:
        return float(logsumexp(np.diagonal(log_matrix_power(L, n))))
    cyl = _Cylinder(f, w)
    if n < cyl.j:
        return cyl.short_level(n, a, shift)
    P = log_matrix_power(L, n - cyl.lag)
    return float(cyl.from_powers(P[None], a, shift)[0])


@dataclass
class _Levels:
    den: np.ndarray
    nums: list


def _collect_levels(f, a, shift, cylinders, n_stop):
    """Log levels ``1..n`` for the denominator and each cylinder.

    ``n_stop(den_levels)`` inspects the denominator levels computed so far and
    returns the number of levels to keep, or None to continue.
    """
    L = _log_matrix(f, a, shift)
    den_chunks, num_chunks = [], [[] for _ in cylinders]
    keep = None
    for _, stack in _log_power_blocks(L):
        den_chunks.append(logsumexp(np.diagonal(stack, axis1=1, axis2=2), axis=1))
        for cyl, chunks in zip(cylinders, num_chunks):
            chunks.append(cyl.from_powers(stack, a, shift))
        den = np.concatenate(den_chunks)
        keep = n_stop(den)
        if keep is not None:
            break
    den = den[:keep]
    nums = []
    for cyl, chunks in zip(cylinders, num_chunks):
        arr = np.concatenate(chunks)  # arr[k] is level n = k + 1 + lag
        levels = np.full(keep, -np.inf)
        lo = cyl.j  # first level read from matrix powers
        if lo <= keep:
            first = lo - 1 - cyl.lag  # index into arr for level lo
            levels[lo - 1:] = arr[first:first + keep - lo + 1]
        for n in range(1, min(cyl.j, keep + 1)):
            levels[n - 1] = cyl.short_level(n, a, shift)
        nums.append(levels)
    return _Levels(den, nums)


def _certify(log_rho: float, rel_tol: float, n_cap: int):
    """Stopping rule for the geometric tail certificate.

    With ``C_n = 10 max_{k<=n} level_k / rho^k`` the omitted tail after
    level ``n`` is bounded by ``C_n rho^(n+1) / (1 - rho)``; stop at the first
    ``n`` where that is below ``rel_tol`` times the partial sum.
    """
    log_one_minus = math.log1p(-math.exp(log_rho))
    state = {}

    def n_stop(den):
        n = np.arange(1, den.size + 1)
        logC = math.log(TAIL_SAFETY) + np.maximum.accumulate(den - n * log_rho)
        log_tail = logC + (n + 1) * log_rho - log_one_minus
        log_sum = np.logaddexp.accumulate(den)
        rel = log_tail - log_sum
        ok = np.flatnonzero(rel[: n_cap] < math.log(rel_tol))
        if ok.size:
            k = int(ok[0]) + 1
            state.update(n=k, rel=float(math.exp(rel[k - 1])), certified=True)
            return k
        if den.size >= n_cap:
            state.update(n=n_cap, rel=float(math.exp(rel[n_cap - 1])), certified=False)
            return n_cap
        return None

    return n_stop, state


def _zeta_prepare(f, c, s):
    # the series only need rho < 1, which holds for any f >= 0 that is not identically 0
    if f.min_value < 0 or f.max_value <= 0:
        raise NotPositiveError(f"zeta series need f >= 0 and f != 0 (range {f.min_value:g}..{f.max_value:g})")
    p_cf = pressure(f, c).log_lambda
    p_csf = pressure(f, c * s).log_lambda
    log_rho = p_csf - p_cf
    if not log_rho < 0:
        raise ZetathermError(f"series ratio exp(P(csf) - P(cf)) = {math.exp(log_rho):.6g} is not < 1")
    return p_cf, p_csf, log_rho


@dataclass(frozen=True)
class ZetaSums:
    """Certified log partial sums shared by several cylinders."""

    log_den: float
    log_nums: tuple
    n_used: int
    tail_bound: float
    certified: bool
    log_rho: float
    log_p_cf: float
    log_p_csf: float


def zeta_sums(f: LocallyConstantPotential, params: ZetaParams, words: Iterable[Sequence[int]] = (),
              n_levels: int = None) -> ZetaSums:
    """Numerator and denominator series of the zeta measure, log domain.

    With ``n_levels`` the sums are cut at exactly that many levels (no
    certification); otherwise the tail certificate decides.
    """
    c, s = params.c, params.s
    p_cf, p_csf, log_rho = _zeta_prepare(f, c, s)
    cyls = [_Cylinder(f, w) for w in words]
    if n_levels is not None:
        if n_levels < 1:
            raise ValueError("n_levels must be >= 1")
        levels = _collect_levels(f, c * s, p_cf, cyls,
                                 lambda den: n_levels if den.size >= n_levels else None)
        n_used, rel, certified = n_levels, math.nan, False
    else:
        n_stop, state = _certify(log_rho, params.rel_tol, int(params.n_cap))
        levels = _collect_levels(f, c * s, p_cf, cyls, n_stop)
        n_used, rel, certified = state["n"], state["rel"], state["certified"]
    log_den = float(logsumexp(levels.den))
    log_nums = tuple(float(logsumexp(x)) for x in levels.nums)
    return ZetaSums(log_den, log_nums, n_used, rel, certified, log_rho, p_cf, p_csf)


def zeta_measures(f: LocallyConstantPotential, params: ZetaParams,
                  words: Iterable[Sequence[int]]) -> list[SeriesResult]:
    words = [tuple(w) for w in words]
    sums = zeta_sums(f, params, words)
    out = []
    for ln in sums.log_nums:
        lv = ln - sums.log_den
        out.append(SeriesResult(min(1.0, math.exp(lv)), sums.n_used, sums.tail_bound,
                                sums.certified, lv))
    return out


def zeta_measure(f: LocallyConstantPotential, params: ZetaParams, w: Sequence[int]) -> SeriesResult:
    """``mu_{c,s}([w])`` with a certified truncation of both series.

    Parameters
    ----------
    f : LocallyConstantPotential
        Nonnegative and not identically zero.
    params : ZetaParams
    w : sequence of int
        Admissible cylinder word.

    Returns
    -------
    SeriesResult
        ``value`` in [0, 1]; ``log_value`` stays finite when ``value``
        underflows.
    """
    return zeta_measures(f, params, [w])[0]


def zeta_truncated(f: LocallyConstantPotential, c: float, s: float, n_levels: int,
                   w: Sequence[int]) -> float:
    """The zeta-measure ratio with both series cut at ``n_levels``."""
    sums = zeta_sums(f, ZetaParams(c, s), [w], n_levels=n_levels)
    return math.exp(sums.log_nums[0] - sums.log_den)


def zeta_mean(f: LocallyConstantPotential, params: ZetaParams) -> float:
    """``int f d mu_{c,s}`` from the measures of the length-``m`` cylinders."""
    words = f.words()
    res = zeta_measures(f, params, words)
    return math.fsum(f.value(w) * r.value for w, r in zip(words, res))


def log_partition(f: LocallyConstantPotential, params: ZetaParams) -> SeriesResult:
    """The normalizing series ``sum_n sum_{Fix_n} exp(c s f^n - n P(cf))``."""
    sums = zeta_sums(f, params)
    return SeriesResult(math.exp(sums.log_den), sums.n_used, sums.tail_bound,
                        sums.certified, sums.log_den)


def log_partition_rate(f: LocallyConstantPotential, c: float, s: float,
                       rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``(1/c) log`` of the normalizing series."""
    return log_partition(f, ZetaParams(c, s, rel_tol)).log_value / c


# -- finite-period measures ----------------------------------------------------

def _finite_log_sums(f, c, N, words, shift, method):
    if N < 1:
        raise ValueError("N must be >= 1")
    if method == "transfer":
        cyls = [_Cylinder(f, w) for w in words]
        levels = _collect_levels(f, c, shift, cyls, lambda den: N if den.size >= N else None)
        return float(logsumexp(levels.den)), [float(logsumexp(x)) for x in levels.nums]
    if method == "enumerate":
        f.spec.check_cap(N)
        den, nums = [], [[] for _ in words]
        for n in range(1, N + 1):
            arr = fix_array(f.spec, n)
            logw = c * birkhoff_sums(f, arr) - n * shift
            den.append(logsumexp(logw))
            for w, acc in zip(words, nums):
                hits = cylinder_hits_array(w, arr)
                keep = hits > 0
                acc.append(logsumexp(logw[keep] + np.log(hits[keep] / n)) if keep.any() else -math.inf)
        return float(logsumexp(np.array(den))), [float(logsumexp(np.array(a))) for a in nums]
    raise ValueError(f"unknown method {method!r}")


def pi_log_measures(f, c, N, words, method="transfer"):
    words = [tuple(w) for w in words]
    shift = pressure(f, c).log_lambda
    log_den, log_nums = _finite_log_sums(f, c, N, words, shift, method)
    return [ln - log_den for ln in log_nums]


def eta_log_measures(f, c, N, words, method="transfer"):
    words = [tuple(w) for w in words]
    log_den, log_nums = _finite_log_sums(f, c, N, words, 0.0, method)
    return [ln - log_den for ln in log_nums]


def pi_measure(f: LocallyConstantPotential, c: float, N: int, w: Sequence[int],
               method: str = "transfer") -> float:
    """``pi_{c,N}([w])``: periods up to ``N`` weighted by ``exp(c f^n - n P(cf))``."""
    return math.exp(pi_log_measures(f, c, N, [w], method)[0])


def eta_measure(f: LocallyConstantPotential, c: float, N: int, w: Sequence[int],
                method: str = "transfer") -> float:
    """``eta_{c,N}([w])``: periods up to ``N`` weighted by ``exp(c f^n)``."""
    return math.exp(eta_log_measures(f, c, N, [w], method)[0])


# -- large deviations ------------------------------------------------------------

def ldp_rate(kind: str, f: LocallyConstantPotential, w: Sequence[int], c: float,
             s: float = None, N: int = None, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``(1/c) log`` of the cylinder measure, never leaving the log domain.

    ``kind`` is ``"zeta"`` (needs ``s``), ``"pi"`` or ``"eta"`` (need ``N``).
    """
    if kind == "zeta":
        if s is None:
            raise ValueError("zeta rates need s")
        return zeta_measure(f, ZetaParams(c, s, rel_tol), w).log_value / c
    if kind in ("pi", "eta"):
        if N is None:
            raise ValueError(f"{kind} rates need N")
        fn = pi_log_measures if kind == "pi" else eta_log_measures
        return fn(f, c, N, [w])[0] / c
    raise ValueError(f"unknown kind {kind!r}")


def l_schedule(L: float, cs: Iterable[float]) -> list[tuple[float, float]]:
    """Pairs ``(c, 1 - L/c)``."""
    out = []
    for c in cs:
        s = 1.0 - L / c
        if not 0 < s < 1:
            raise ValueError(f"L={L} and c={c} give s={s} outside (0, 1)")
        out.append((c, s))
    return out


def table_schedule(table: dict) -> list[tuple[float, float]]:
    """User-supplied ``{c: s_c}`` pairs, sorted by ``c``."""
    return sorted((float(c), float(s)) for c, s in table.items())


def n_schedule(cs: Iterable[float], g: Callable[[float], int] = None) -> list[tuple[float, int]]:
    """Pairs ``(c, N)`` with ``N = g(c)``, by default ``ceil(sqrt(c))``."""
    g = (lambda c: math.ceil(math.sqrt(c))) if g is None else g
    return [(c, int(g(c))) for c in cs]


# -- decomposition near s = 1 ---------------------------------------------------

@dataclass(frozen=True)
class GibbsDecomposition:
    """Split of the cylinder series into a geometric Gibbs part and a remainder.

    ``zeta_side`` is the certified series, ``gibbs_side`` is
    ``rho/(1-rho) mu_{csf}([w])`` and ``alpha_remainder`` is their difference,
    summed level by level so it stays accurate when both sides blow up as
    ``s -> 1``.
    """

    zeta_side: float
    gibbs_side: float
    alpha_remainder: float
    rho: float
    gibbs: float
    series: ZetaSums


def _remainder(f, a, shift, log_rho, cyl, pd, tm, max_terms=100_000):
    """``sum_n (level_n - rho^n g)`` via the non-Perron part of the matrix.

    ``cyl`` None means the indicator of the whole space.
    """
    lam = pd.log_lambda
    B = np.exp(tm.log_weights - lam)          # spectral radius 1
    Pi = np.outer(pd.right, pd.left)
    R = B - Pi
    if not np.isfinite(R).all():
        raise ConvergenceError("transfer matrix entries overflow; use a smaller c")
    rho = math.exp(log_rho)
    terms = []
    if cyl is None:
        g = 1.0
        lag = 0
        first = 1
        scale = 1.0
    else:
        first = cyl.j
        lag = cyl.lag
        if cyl.prefix_states is not None:
            g = float(np.sum(pd.left[cyl.prefix_states] * pd.right[cyl.prefix_states]))
            scale = 1.0
        else:
            scale = math.exp(a * cyl.forced_sum - lag * lam)
            g = pd.left[cyl.start] * scale * pd.right[cyl.end]
        for n in range(1, cyl.j):
            lv = cyl.short_level(n, a, shift)
            terms.append((math.exp(lv) if lv > -math.inf else 0.0) - rho ** n * g)
    Rp = np.linalg.matrix_power(R, first - lag) if first - lag > 0 else np.eye(R.shape[0])
    n = first
    tiny = np.finfo(float).tiny
    while True:
        if cyl is None:
            t = np.trace(Rp)
        elif cyl.prefix_states is not None:
            idx = cyl.prefix_states
            t = float(np.sum(np.diagonal(Rp)[idx]))
        else:
            t = Rp[cyl.end, cyl.start]
        term = rho ** n * scale * t
        terms.append(term)
        size = rho ** n * scale * float(np.abs(Rp).max())
        if size < 1e-18 * max(tiny, abs(g)) or size == 0.0:
            break
        if n - first > max_terms:
            raise ConvergenceError("remainder series did not settle", residual=size)
        Rp = Rp @ R
        n += 1
    return math.fsum(terms), g


def series_gibbs_decomposition(f: LocallyConstantPotential, c: float, s: float, w: Sequence[int] = None,
                               rel_tol: float = DEFAULT_REL_TOL) -> GibbsDecomposition:
    """Zeta series of ``[w]`` (or of the whole space when ``w`` is None) split
    into ``rho/(1-rho) mu_{csf}([w])`` plus a remainder that stays finite at ``s = 1``."""
    params = ZetaParams(c, s, rel_tol)
    words = [] if w is None else [tuple(w)]
    sums = zeta_sums(f, params, words)
    log_zeta = sums.log_den if w is None else sums.log_nums[0]
    tm = TransferMatrix(f, c * s)
    pd = perron(tm)
    cyl = None if w is None else _Cylinder(f, w)
    rem, g = _remainder(f, c * s, sums.log_p_cf, sums.log_rho, cyl, pd, tm)
    rho = math.exp(sums.log_rho)
    gibbs_side = rho / (-math.expm1(sums.log_rho)) * g
    return GibbsDecomposition(math.exp(log_zeta), gibbs_side, rem, rho, g, sums)


def reconstruct_measure(cyl: GibbsDecomposition, whole: GibbsDecomposition) -> float:
    """Zeta measure of a cylinder from the two decompositions.

    ``[(1-rho)/rho * rem_k + mu_csf(k)] / [(1-rho)/rho * rem_1 + 1]``
    """
    q = (1.0 - cyl.rho) / cyl.rho
    return (q * cyl.alpha_remainder + cyl.gibbs) / (q * whole.alpha_remainder + 1.0)
