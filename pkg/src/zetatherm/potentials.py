"""Locally constant potentials and discretization of Lipschitz ones."""

from __future__ import annotations

import json
import math
from typing import Callable, Mapping, Sequence

import numpy as np

from .exceptions import InadmissibleWordError, NotPositiveError
from .symbolic import ShiftSpec, Word, format_word, parse_word, word_code


class LocallyConstantPotential:
    """A potential ``f(x) = table[x_1 ... x_m]``.

    Values are stored in a flat array indexed by the mixed-radix code of the
    length-``m`` word; entries for inadmissible words are NaN and never read.
    Instances are treated as immutable.
    """

    def __init__(self, spec: ShiftSpec, m: int, values: Mapping[Sequence[int], float] | np.ndarray):
        if int(m) < 1:
            raise ValueError(f"range m must be >= 1, got {m}")
        self.spec = spec
        self.m = int(m)
        d = spec.d
        table = np.full(d ** self.m, np.nan)
        if isinstance(values, np.ndarray):
            if values.shape != table.shape:
                raise ValueError(f"value array must have shape {table.shape}")
            table[:] = values
        else:
            for w, v in values.items():
                w = tuple(w)
                if len(w) != self.m or not spec.is_admissible(w):
                    raise InadmissibleWordError(f"{format_word(w)} is not an admissible word of length {m}")
                table[word_code(w, d)] = float(v)
        self._words = list(spec.admissible_words(self.m))
        codes = np.array([word_code(w, d) for w in self._words])
        mask = np.zeros(table.size, dtype=bool)
        mask[codes] = True
        if np.isnan(table[codes]).any():
            missing = [format_word(w) for w in self._words if np.isnan(table[word_code(w, d)])]
            raise ValueError(f"no value for admissible words {missing[:5]}")
        if not np.isfinite(table[codes]).all():
            raise ValueError("potential values must be finite")
        table[~mask] = np.nan
        table.setflags(write=False)
        self.table = table
        self._codes = codes

    @classmethod
    def from_function(cls, spec: ShiftSpec, m: int, fn: Callable[[Word], float]):
        return cls(spec, m, {w: fn(w) for w in spec.admissible_words(m)})

    @classmethod
    def range_one(cls, values: Sequence[float], spec: ShiftSpec = None):
        """``f(x) = values[x_1 - 1]``, on the full shift unless ``spec`` is given."""
        spec = ShiftSpec.full(len(values)) if spec is None else spec
        return cls(spec, 1, {(a + 1,): v for a, v in enumerate(values)})

    def words(self) -> list[Word]:
        return list(self._words)

    def items(self):
        for w in self._words:
            yield w, float(self.table[word_code(w, self.spec.d)])

    def value(self, w: Sequence[int]) -> float:
        """``f`` on the cylinder ``[w]`` for ``len(w) >= m``."""
        if len(w) < self.m:
            raise ValueError(f"need at least {self.m} symbols, got {len(w)}")
        v = self.table[word_code(w[: self.m], self.spec.d)]
        if math.isnan(v):
            raise InadmissibleWordError(f"{format_word(w[:self.m])} is not admissible")
        return float(v)

    __call__ = value

    @property
    def min_value(self) -> float:
        return float(self.table[self._codes].min())

    @property
    def max_value(self) -> float:
        return float(self.table[self._codes].max())

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.table[self._codes]).max())

    @property
    def positive(self) -> bool:
        return self.min_value > 0

    def require_positive(self) -> None:
        if not self.positive:
            raise NotPositiveError(
                f"operation needs a strictly positive potential (min value {self.min_value:g})")

    def lift(self, m: int) -> "LocallyConstantPotential":
        """The same function presented as a potential of range ``m``."""
        if m < self.m:
            raise ValueError("cannot lower the range of a potential")
        if m == self.m:
            return self
        return LocallyConstantPotential.from_function(self.spec, m, self.value)

    def scaled(self, c: float) -> "LocallyConstantPotential":
        return LocallyConstantPotential(self.spec, self.m, self.table * c)

    def add_cylinder(self, w: Sequence[int], h: float) -> "LocallyConstantPotential":
        """``f + h * 1_[w]`` as a potential of range ``max(m, len(w))``."""
        w = tuple(w)
        g = self.lift(max(self.m, len(w)))
        j = len(w)
        return LocallyConstantPotential.from_function(
            self.spec, g.m, lambda u: g.value(u) + (h if u[:j] == w else 0.0))

    def __repr__(self):
        return f"LocallyConstantPotential(d={self.spec.d}, m={self.m})"

    # serialization

    def to_dict(self, include_shift: bool = False) -> dict:
        d = self.spec.d
        data = {"m": self.m, "values": {format_word(w, d): v for w, v in self.items()}}
        if include_shift:
            data["shift"] = self.spec.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict, spec: ShiftSpec = None) -> "LocallyConstantPotential":
        try:
            m = int(data["m"])
            raw = data["values"]
            if spec is None and "shift" in data:
                spec = ShiftSpec.from_dict(data["shift"])
            values = {parse_word(k, None if spec is None else spec.d): float(v) for k, v in raw.items()}
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            if isinstance(exc, InadmissibleWordError):
                raise
            raise ValueError(f"malformed potential: {exc!r}") from None
        if spec is None:
            spec = ShiftSpec.full(max(max(w) for w in values))
        return cls(spec, m, values)

    def to_json(self, include_shift: bool = False) -> str:
        return json.dumps(self.to_dict(include_shift))

    @classmethod
    def from_json(cls, text: str, spec: ShiftSpec = None) -> "LocallyConstantPotential":
        return cls.from_dict(json.loads(text), spec)


def discretize(sampler: Callable[[Word], float], spec: ShiftSpec, m: int,
               lipschitz_C: float = None):
    """Sample ``sampler`` on the admissible length-``m`` words.

    Returns ``(potential, error_bound)``; the bound is the sup-norm distance
    ``C theta^m / (1 - theta)`` for a ``C``-Lipschitz function in ``d_theta``,
    or None when no constant is given.
    """
    f = LocallyConstantPotential.from_function(spec, m, sampler)
    if lipschitz_C is None:
        return f, None
    theta = spec.theta
    return f, lipschitz_C * theta ** m / (1.0 - theta)


def check_positive(f: LocallyConstantPotential) -> tuple[bool, float]:
    """``(f > 0 everywhere, min value)``."""
    lo = f.min_value
    return lo > 0, lo
