"""Ergodic optimization for locally constant potentials.

For a locally constant ``f`` the maximal ergodic average ``beta(f)`` is the
maximum cycle mean of the block graph weighted by ``f``, the maximizing
measures live on the critical subgraph, and infima of the deviation
function over cylinders reduce to shortest paths with weights
``beta(f) - f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .exceptions import InadmissibleWordError, ZetathermError
from .potentials import LocallyConstantPotential
from .symbolic import (BlockGraph, PeriodicWord, birkhoff_sum, birkhoff_sums, block_graph,
                       cylinder_hits_array, fix_array, format_word, minimal_periods)

TIGHT_TOL = 1e-9
BRUTE_PERIOD_CAP = 12


def _edge_weights(f: LocallyConstantPotential) -> tuple[BlockGraph, np.ndarray]:
    g = block_graph(f.spec, f.m)
    W = np.full(g.window.shape, -np.inf)
    mask = g.window >= 0
    W[mask] = f.table[g.window[mask]]
    return g, W


def _karp_max_mean(W: np.ndarray, nodes: np.ndarray) -> float:
    """Karp's maximum cycle mean of the strongly connected subgraph ``nodes``."""
    sub = W[np.ix_(nodes, nodes)]
    n = len(nodes)
    D = np.full((n + 1, n), -np.inf)
    D[0, 0] = 0.0
    for k in range(1, n + 1):
        D[k] = np.max(D[k - 1][:, None] + sub, axis=0)
    best = -np.inf
    with np.errstate(invalid="ignore"):
        for v in range(n):
            if not np.isfinite(D[n, v]):
                continue
            ks = np.arange(n)
            vals = (D[n, v] - D[:n, v]) / (n - ks)
            vals = vals[np.isfinite(D[:n, v])]
            best = max(best, float(vals.min()))
    return best


def _components(mask: np.ndarray) -> list[np.ndarray]:
    """Strongly connected components that contain at least one cycle."""
    ncomp, labels = connected_components(mask.astype(np.int8), directed=True, connection="strong")
    out = []
    for k in range(ncomp):
        nodes = np.flatnonzero(labels == k)
        if len(nodes) > 1 or mask[nodes[0], nodes[0]]:
            out.append(nodes)
    return out


def beta(f: LocallyConstantPotential) -> float:
    """``beta(f) = sup over invariant measures of the integral of f``."""
    g, W = _edge_weights(f)
    return max(_karp_max_mean(W, nodes) for nodes in _components(g.window >= 0))


def _bellman_ford(C: np.ndarray, source: int) -> np.ndarray:
    """Shortest path lengths from ``source`` under edge costs ``C`` (inf = no edge).

    Costs may be negative but cycles are assumed nonnegative, so ``n - 1``
    rounds of relaxation are exact; no negative-cycle detection is attempted
    because rounding can make a zero cycle look slightly negative.
    """
    n = C.shape[0]
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    for _ in range(n - 1):
        new = np.minimum(dist, np.min(dist[:, None] + C, axis=0))
        if np.array_equal(new, dist):
            break
        dist = new
    return dist


@dataclass(frozen=True)
class CriticalGraph:
    """Edges of the block graph lying on maximum-mean cycles.

    ``tight`` is the boolean adjacency of tight edges; ``components`` are the
    nontrivial strongly connected pieces of it, which carry every maximizing
    periodic orbit.
    """

    graph: BlockGraph
    beta: float
    potential: np.ndarray
    tight: np.ndarray
    components: tuple

    @property
    def vertices(self) -> list[int]:
        return sorted(int(v) for nodes in self.components for v in nodes)

    @property
    def tight_edges(self) -> list[tuple[int, int]]:
        inside = np.zeros_like(self.tight)
        for nodes in self.components:
            inside[np.ix_(nodes, nodes)] = True
        src, dst = np.nonzero(self.tight & inside)
        return list(zip(src.tolist(), dst.tolist()))

    def adjacency(self, nodes) -> np.ndarray:
        return self.tight[np.ix_(nodes, nodes)].astype(float)

    def contains_orbit(self, x: PeriodicWord) -> bool:
        """Whether every edge of the closed walk of ``x`` is a critical edge."""
        edges = set(self.tight_edges)
        word = x.word
        n = len(word)
        r = self.graph.r
        ext = tuple(word[i % n] for i in range(n + r))
        path = self.graph.state_path(ext)
        return all((a, b) in edges for a, b in zip(path[:n], path[1:n + 1]))

    def describe(self) -> str:
        parts = []
        for nodes in self.components:
            names = ",".join(format_word(self.graph.states[v]) for v in nodes)
            parts.append("{" + names + "}")
        return " ".join(parts)


def critical_graph(f: LocallyConstantPotential, tol: float = TIGHT_TOL) -> CriticalGraph:
    """Critical subgraph from longest-path potentials of ``f - beta(f)``."""
    g, W = _edge_weights(f)
    b = beta(f)
    cost = np.where(np.isfinite(W), b - W, np.inf)
    n = g.size
    # one root per strongly connected piece of the full graph
    phi = np.zeros(n)
    for nodes in _components(g.window >= 0):
        sub = cost[np.ix_(nodes, nodes)]
        phi[nodes] = -_bellman_ford(sub, 0)
    reduced = phi[:, None] + (W - b) - phi[None, :]
    tight = np.isfinite(W) & (reduced >= -tol)
    comps = tuple(_components(tight))
    return CriticalGraph(g, b, phi, tight, comps)


def h_max(f: LocallyConstantPotential, cg: CriticalGraph = None) -> float:
    """Maximal entropy among maximizing measures: log spectral radius of the critical graph."""
    cg = critical_graph(f) if cg is None else cg
    best = 0.0
    for nodes in cg.components:
        A = cg.adjacency(nodes)
        best = max(best, float(np.max(np.abs(np.linalg.eigvals(A)))))
    return math.log(best) if best > 0 else -math.inf


def _snap(value: float, scale: float) -> float:
    # beta is a float; tiny negative residues are rounding, not deviations
    if value < 0 and value > -1e-12 * max(1.0, scale):
        return 0.0
    return value


def deviation_I(f: LocallyConstantPotential, x: PeriodicWord | Sequence[int], beta_value: float = None) -> float:
    """``n_x beta(f) - f^{n_x}(x)`` with ``n_x`` the minimal period of ``x``."""
    if not isinstance(x, PeriodicWord):
        x = PeriodicWord(tuple(x))
    b = beta(f) if beta_value is None else beta_value
    p = PeriodicWord(x.primitive)
    s = birkhoff_sum(f, p)
    return _snap(p.n * b - s, p.n * f.sup_norm)


def periodic_deviation_table(f: LocallyConstantPotential, n: int, beta_value: float = None,
                             cap: int = None):
    """``(words, I)`` for all of ``Fix_n``, words as 0-based rows."""
    b = beta(f) if beta_value is None else beta_value
    words = fix_array(f.spec, n, cap)
    sums = birkhoff_sums(f, words)
    nmin = minimal_periods(words)
    dev = (n * b - sums) * nmin / n
    dev[(dev < 0) & (dev > -1e-12 * max(1.0, n * f.sup_norm))] = 0.0
    return words, dev


def min_deviation(f: LocallyConstantPotential, max_period: int, beta_value: float = None) -> float:
    """Smallest deviation over all periodic points of period at most ``max_period``."""
    b = beta(f) if beta_value is None else beta_value
    return min(float(periodic_deviation_table(f, n, b)[1].min()) for n in range(1, max_period + 1))


def _inf_brute(f, w, period_cap, b):
    best = math.inf
    for n in range(1, period_cap + 1):
        words, dev = periodic_deviation_table(f, n, b, cap=max(period_cap, f.spec.period_cap))
        hit = cylinder_hits_array(w, words) > 0
        if hit.any():
            best = min(best, float(dev[hit].min()))
    return best


def _inf_exact(f, w, b):
    g, W = _edge_weights(f)
    spec = f.spec
    j = len(w)
    r = g.r
    if j < r:
        exts = [e for e in spec.admissible_words(r) if e[:j] == tuple(w)]
        return min(_inf_exact(f, e, b) for e in exts)
    cost = np.where(np.isfinite(W), b - W, np.inf)
    path = g.state_path(w)
    forced = math.fsum(b - f.table[c] for c in g.path_windows(w))
    start, end = path[0], path[-1]
    dist = _bellman_ford(cost, end)
    if len(path) > 1:
        best = float(forced + dist[start])
    else:
        # need at least one edge to close the walk
        best = float(np.min(cost[start] + _dist_to(cost, start)))
    # periodic points whose minimal period is shorter than the forced path
    for p in range(1, j - r + 1):
        u = tuple(w[:p])
        if all(w[i] == u[i % p] for i in range(j)) and spec.is_cyclically_admissible(u):
            best = min(best, deviation_I(f, PeriodicWord(u), b))
    if not math.isfinite(best):
        raise ZetathermError(f"no periodic orbit returns to [{format_word(w)}]")
    return float(_snap(best, j * f.sup_norm))


def _dist_to(cost: np.ndarray, target: int) -> np.ndarray:
    return _bellman_ford(cost.T, target)


def inf_I_cylinder(f: LocallyConstantPotential, w: Sequence[int], method: str = "exact",
                   period_cap: int = BRUTE_PERIOD_CAP, beta_value: float = None) -> float:
    """Infimum of the deviation function over the periodic points of ``[w]``.

    ``method="exact"`` closes the forced state path of ``w`` with a shortest
    return path under costs ``beta - f``, and also checks the periodic points
    whose period is shorter than ``w``.  ``method="brute"`` scans every
    periodic orbit up to ``period_cap`` that enters ``[w]``; it is an upper
    bound that is non-increasing in the cap.
    """
    w = tuple(w)
    if not f.spec.is_admissible(w):
        raise InadmissibleWordError(f"[{format_word(w)}] is not admissible")
    b = beta(f) if beta_value is None else beta_value
    if method == "exact":
        return _inf_exact(f, w, b)
    if method == "brute":
        return _inf_brute(f, w, period_cap, b)
    raise ValueError(f"unknown method {method!r}")


def tilde_I(f: LocallyConstantPotential, prefix: Sequence[int], depth_schedule: Iterable[int]) -> list[float]:
    """Exact cylinder infima along the prefixes ``prefix[:j]``.

    The sequence is non-decreasing and converges to the lower semicontinuous
    extension of the deviation function at any point extending ``prefix``.
    The infimum includes the point itself, so at a periodic point it
    stabilizes at the point's own deviation.
    """
    prefix = tuple(prefix)
    b = beta(f)
    out = []
    for j in depth_schedule:
        if not 1 <= j <= len(prefix):
            raise ValueError(f"depth {j} outside 1..{len(prefix)}")
        out.append(_inf_exact(f, prefix[:j], b))
    return out
