"""Shift spaces, words, periodic points and Birkhoff sums.

Words are tuples of symbols in ``1..d``.  A periodic point is represented by
the word it repeats; the shift acts on it by cyclic rotation.  Array helpers
(``fix_array`` and friends) work with 0-based symbol codes in ``uint8``
arrays, one word per row, and exist because the stream API is too slow for
periods beyond a dozen or so.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .exceptions import InadmissibleWordError, InvalidShiftError, PeriodCapExceeded

Word = tuple[int, ...]

DEFAULT_PERIOD_CAPS = {2: 22, 3: 14}


def default_period_cap(d: int) -> int:
    if d in DEFAULT_PERIOD_CAPS:
        return DEFAULT_PERIOD_CAPS[d]
    # same enumeration budget as d=3
    return max(1, int(14 * math.log(3) / math.log(d)))


@dataclass(frozen=True)
class ShiftSpec:
    """A one-sided subshift of finite type on the symbols ``1..d``.

    ``transitions[a-1][b-1] == 1`` means symbol ``b`` may follow ``a``.
    ``theta`` only enters discretization error bounds.
    """

    d: int
    transitions: tuple[tuple[int, ...], ...] = None
    theta: float = 0.5
    period_cap: int = None
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = self.d
        if not isinstance(d, (int, np.integer)) or d < 2:
            raise InvalidShiftError(f"alphabet size must be an integer >= 2, got {d!r}")
        if self.transitions is None:
            trans = tuple((1,) * d for _ in range(d))
        else:
            trans = tuple(tuple(int(v) for v in row) for row in self.transitions)
        if len(trans) != d or any(len(row) != d for row in trans):
            raise InvalidShiftError(f"transition matrix must be {d}x{d}")
        if any(v not in (0, 1) for row in trans for v in row):
            raise InvalidShiftError("transition matrix entries must be 0 or 1")
        A = np.array(trans, dtype=np.int64)
        if (A.sum(axis=1) == 0).any() or (A.sum(axis=0) == 0).any():
            raise InvalidShiftError("every symbol needs a successor and a predecessor")
        ncomp, _ = connected_components(A, directed=True, connection="strong")
        if ncomp != 1:
            raise InvalidShiftError("transition graph is not irreducible")
        if not 0.0 < float(self.theta) < 1.0:
            raise InvalidShiftError(f"theta must lie in (0, 1), got {self.theta}")
        cap = default_period_cap(d) if self.period_cap is None else int(self.period_cap)
        if cap < 1:
            raise InvalidShiftError("period cap must be positive")
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "period_cap", cap)
        A.setflags(write=False)
        object.__setattr__(self, "_matrix", A)

    @classmethod
    def full(cls, d: int, theta: float = 0.5, period_cap: int = None) -> "ShiftSpec":
        return cls(d, None, theta, period_cap)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def is_full(self) -> bool:
        return bool(self._matrix.all())

    def allows(self, a: int, b: int) -> bool:
        return bool(self._matrix[a - 1, b - 1])

    def check_symbols(self, w: Sequence[int]) -> None:
        if len(w) == 0:
            raise InadmissibleWordError("words must be nonempty")
        for a in w:
            if not 1 <= a <= self.d:
                raise InadmissibleWordError(f"symbol {a} outside 1..{self.d}")

    def is_admissible(self, w: Sequence[int]) -> bool:
        if len(w) == 0 or any(not 1 <= a <= self.d for a in w):
            return False
        return all(self._matrix[a - 1, b - 1] for a, b in zip(w, w[1:]))

    def is_cyclically_admissible(self, w: Sequence[int]) -> bool:
        return self.is_admissible(w) and bool(self._matrix[w[-1] - 1, w[0] - 1])

    def admissible_words(self, length: int) -> Iterator[Word]:
        """Admissible words of the given length in lexicographic order."""
        if length < 1:
            raise ValueError("length must be >= 1")
        words: list[Word] = [(a,) for a in range(1, self.d + 1)]
        for _ in range(length - 1):
            words = [w + (b,) for w in words for b in range(1, self.d + 1)
                     if self._matrix[w[-1] - 1, b - 1]]
        yield from words

    def count_fix(self, n: int) -> int:
        """``trace(A^n)`` in exact integer arithmetic."""
        A = [[int(v) for v in row] for row in self.transitions]
        P = [[int(i == j) for j in range(self.d)] for i in range(self.d)]
        for _ in range(n):
            P = [[sum(P[i][k] * A[k][j] for k in range(self.d)) for j in range(self.d)]
                 for i in range(self.d)]
        return sum(P[i][i] for i in range(self.d))

    def check_cap(self, n: int, cap: int = None) -> None:
        cap = self.period_cap if cap is None else cap
        if n < 1:
            raise ValueError(f"period must be >= 1, got {n}")
        if n > cap:
            raise PeriodCapExceeded(f"period {n} exceeds the enumeration cap {cap} (d={self.d})")

    # serialization

    def to_dict(self) -> dict:
        return {"d": self.d, "transitions": [list(r) for r in self.transitions],
                "theta": self.theta}

    @classmethod
    def from_dict(cls, data: dict) -> "ShiftSpec":
        try:
            d = int(data["d"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidShiftError(f"malformed shift spec: {exc}") from None
        return cls(d, data.get("transitions"), data.get("theta", 0.5))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ShiftSpec":
        return cls.from_dict(json.loads(text))


def parse_word(text: str, d: int = None) -> Word:
    """Parse ``"1211"`` (d <= 9) or ``"1,12,3"`` into a word."""
    text = text.strip()
    if not text:
        raise InadmissibleWordError("empty word")
    try:
        if "," in text:
            w = tuple(int(t) for t in text.split(","))
        else:
            if d is not None and d > 9:
                raise InadmissibleWordError("words over more than 9 symbols must be comma separated")
            w = tuple(int(ch) for ch in text)
    except ValueError:
        raise InadmissibleWordError(f"cannot parse word {text!r}") from None
    if any(a < 1 or (d is not None and a > d) for a in w):
        raise InadmissibleWordError(f"word {text!r} has symbols outside 1..{d}")
    return w


def format_word(w: Sequence[int], d: int = None) -> str:
    if (d is not None and d > 9) or any(a > 9 for a in w):
        return ",".join(str(a) for a in w)
    return "".join(str(a) for a in w)


def word_code(w: Sequence[int], d: int) -> int:
    """Mixed-radix code of ``w``, first symbol most significant."""
    code = 0
    for a in w:
        code = code * d + (a - 1)
    return code


def minimal_period(w: Sequence[int]) -> int:
    """Smallest ``p`` dividing ``len(w)`` with ``w`` equal to ``w[:p]`` repeated."""
    n = len(w)
    if n == 0:
        raise InadmissibleWordError("words must be nonempty")
    w = tuple(w)
    for p in range(1, n + 1):
        if n % p == 0 and w == w[:p] * (n // p):
            return p
    return n  # unreachable


@dataclass(frozen=True)
class PeriodicWord:
    """The periodic point ``repeat(word)``; ``n`` is the presented period."""

    word: Word
    n_min: int = field(init=False)

    def __post_init__(self):
        w = tuple(int(a) for a in self.word)
        if not w:
            raise InadmissibleWordError("periodic words must be nonempty")
        object.__setattr__(self, "word", w)
        object.__setattr__(self, "n_min", minimal_period(w))

    @property
    def n(self) -> int:
        return len(self.word)

    @property
    def primitive(self) -> Word:
        return self.word[: self.n_min]

    def rotate(self, k: int = 1) -> "PeriodicWord":
        k %= self.n
        return PeriodicWord(self.word[k:] + self.word[:k])

    def window(self, i: int, length: int) -> Word:
        n = self.n
        return tuple(self.word[(i + t) % n] for t in range(length))

    def __str__(self):
        return format_word(self.word)


def periodic(word: Sequence[int] | str, spec: ShiftSpec = None) -> PeriodicWord:
    if isinstance(word, str):
        word = parse_word(word, None if spec is None else spec.d)
    x = PeriodicWord(tuple(word))
    if spec is not None and not spec.is_cyclically_admissible(x.word):
        raise InadmissibleWordError(f"{format_word(x.word)} is not cyclically admissible")
    return x


def enumerate_fix(spec: ShiftSpec, n: int, cap: int = None) -> Iterator[PeriodicWord]:
    """Yield every solution of ``sigma^n x = x`` once, as a length-``n`` word."""
    spec.check_cap(n, cap)
    A = spec.matrix
    for w in spec.admissible_words(n):
        if A[w[-1] - 1, w[0] - 1]:
            yield PeriodicWord(w)


def _necklaces(d: int, n: int) -> Iterator[Word]:
    # FKM algorithm: necklaces (least rotations) of length n over 1..d
    a = [0] * (n + 1)
    t, p = 1, 1

    def gen(t, p):
        if t > n:
            if n % p == 0:
                yield tuple(x + 1 for x in a[1:])
            return
        a[t] = a[t - p]
        yield from gen(t + 1, p)
        for j in range(a[t - p] + 1, d):
            a[t] = j
            yield from gen(t + 1, t)

    yield from gen(t, p)


def enumerate_necklaces(spec: ShiftSpec, n: int, cap: int = None) -> Iterator[tuple[PeriodicWord, int]]:
    """Yield one representative per shift orbit in ``Fix_n`` with its orbit size.

    The orbit size is the minimal period, so weighting each representative
    by it reproduces sums over ``Fix_n``.
    """
    spec.check_cap(n, cap)
    for w in _necklaces(spec.d, n):
        if spec.is_cyclically_admissible(w):
            x = PeriodicWord(w)
            yield x, x.n_min


def birkhoff_sum(f, x: PeriodicWord) -> float:
    """Exact ``f^n(x)`` over one presented period of ``x``.

    ``f`` is a locally constant potential (anything with ``m``, ``spec`` and
    ``value(word)``).
    """
    if not isinstance(x, PeriodicWord):
        x = PeriodicWord(tuple(x))
    if not f.spec.is_cyclically_admissible(x.word):
        raise InadmissibleWordError(f"{x} is not cyclically admissible")
    return math.fsum(f.value(x.window(i, f.m)) for i in range(x.n))


def cylinder_hits(w: Sequence[int], x: PeriodicWord) -> int:
    """Number of cyclic offsets of ``x`` whose window starts with ``w``."""
    if not isinstance(x, PeriodicWord):
        x = PeriodicWord(tuple(x))
    w = tuple(w)
    return sum(1 for i in range(x.n) if x.window(i, len(w)) == w)


# -- array helpers ---------------------------------------------------------

def all_words_array(d: int, n: int) -> np.ndarray:
    """All ``d**n`` words of length ``n`` as 0-based rows, lexicographic."""
    codes = np.arange(d ** n, dtype=np.int64)
    out = np.empty((codes.size, n), dtype=np.uint8)
    for i in range(n - 1, -1, -1):
        codes, out[:, i] = np.divmod(codes, d)
    return out


def fix_array(spec: ShiftSpec, n: int, cap: int = None) -> np.ndarray:
    """Rows are the 0-based words of ``Fix_n`` (same order as ``enumerate_fix``)."""
    spec.check_cap(n, cap)
    words = all_words_array(spec.d, n)
    A = spec.matrix.astype(bool)
    if not spec.is_full:
        ok = A[words, np.roll(words, -1, axis=1)].all(axis=1)
        words = words[ok]
    return words


def minimal_periods(words: np.ndarray) -> np.ndarray:
    n = words.shape[1]
    out = np.full(words.shape[0], n, dtype=np.int64)
    for p in sorted(p for p in range(1, n) if n % p == 0)[::-1]:
        same = (words == np.roll(words, -p, axis=1)).all(axis=1)
        out[same] = p
    return out


def window_codes(words: np.ndarray, m: int, d: int) -> np.ndarray:
    """Mixed-radix codes of the cyclic length-``m`` windows, shape ``(rows, n)``."""
    codes = np.zeros(words.shape, dtype=np.int64)
    for t in range(m):
        codes = codes * d + np.roll(words, -t, axis=1)
    return codes


def birkhoff_sums(f, words: np.ndarray) -> np.ndarray:
    """Vectorized ``birkhoff_sum`` over the rows of a 0-based word array."""
    return f.table[window_codes(words, f.m, f.spec.d)].sum(axis=1)


def cylinder_hits_array(w: Sequence[int], words: np.ndarray) -> np.ndarray:
    hit = np.ones(words.shape, dtype=bool)
    for t, a in enumerate(w):
        hit &= np.roll(words, -t, axis=1) == (a - 1)
    return hit.sum(axis=1)


def to_word(row: np.ndarray) -> Word:
    return tuple(int(a) + 1 for a in row)


# -- higher block presentation -------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockGraph:
    """Graph on admissible words of length ``r = max(m - 1, 1)``.

    Closed walks of length ``n`` correspond one-to-one to points of ``Fix_n``.
    Each edge carries the length-``m`` window it reads: ``u + v[-1:]`` when
    ``m >= 2``, and the target symbol ``v`` when ``m == 1``.
    ``window[u, v]`` holds the window code, or -1 when there is no edge.
    """

    spec: ShiftSpec
    m: int
    states: tuple
    index: dict
    window: np.ndarray

    @property
    def r(self) -> int:
        return max(self.m - 1, 1)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def adjacency(self) -> np.ndarray:
        return (self.window >= 0).astype(np.int64)

    def edges(self):
        src, dst = np.nonzero(self.window >= 0)
        return src, dst, self.window[src, dst]

    def state_path(self, w: Sequence[int]) -> list[int]:
        """States visited by a point of ``[w]``; needs ``len(w) >= r``."""
        r = self.r
        if len(w) < r:
            raise ValueError(f"word shorter than the state length {r}")
        try:
            return [self.index[tuple(w[i:i + r])] for i in range(len(w) - r + 1)]
        except KeyError:
            raise InadmissibleWordError(f"{format_word(w)} is not admissible") from None

    def path_windows(self, w: Sequence[int]) -> list[int]:
        """Window codes of the ``len(w) - r`` edges along ``state_path(w)``."""
        path = self.state_path(w)
        codes = [int(self.window[a, b]) for a, b in zip(path, path[1:])]
        if any(c < 0 for c in codes):
            raise InadmissibleWordError(f"{format_word(w)} is not admissible")
        return codes

    def states_with_prefix(self, w: Sequence[int]) -> list[int]:
        w = tuple(w)
        return [i for i, s in enumerate(self.states) if s[: len(w)] == w]


_BLOCK_CACHE: dict = {}


def block_graph(spec: ShiftSpec, m: int) -> BlockGraph:
    key = (spec, m)
    g = _BLOCK_CACHE.get(key)
    if g is not None:
        return g
    r = max(m - 1, 1)
    states = tuple(spec.admissible_words(r))
    index = {s: i for i, s in enumerate(states)}
    window = np.full((len(states), len(states)), -1, dtype=np.int64)
    d = spec.d
    for i, u in enumerate(states):
        for b in range(1, d + 1):
            if not spec.allows(u[-1], b):
                continue
            if m == 1:
                v, win = (b,), (b,)
            else:
                v, win = u[1:] + (b,), u + (b,)
            window[i, index[v]] = word_code(win, d)
    window.setflags(write=False)
    g = BlockGraph(spec, m, states, index, window)
    _BLOCK_CACHE[key] = g
    return g
