"""
Spherically homogeneous trees.

A tree is described by its spherical index ``n = (n_1, n_2, ...)``: every
vertex at level ``l - 1`` has ``n_l`` children. Vertices are finite words of
0-based digits, the root is the empty word, and a depth-L word doubles as the
truncation of a boundary point (its cylinder set).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Annotated, Iterator, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator

from cantor.errors import DepthExceeded, IndexMismatch, InvalidDigit, InvalidIndex, LevelCapExceeded

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
CylinderMeasure = Fraction


class _IndexBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    prefix: Tuple[int, ...] = ()

    def at(self, level: int) -> int:
        raise NotImplementedError

    def shifted(self, k: int) -> "SphericalIndex":
        raise NotImplementedError

    def canonical(self) -> "SphericalIndex":
        raise NotImplementedError

    def constant(self) -> Optional[int]:
        """The arity d when every level has the same number of children."""
        return None

    def level_size(self, level: int) -> int:
        """Number of vertices at ``level``: n_1 * ... * n_level."""
        size = 1
        for j in range(1, level + 1):
            size *= self.at(j)
        return size

    def relative_size(self, top: int, bottom: int) -> int:
        """Number of level-``bottom`` descendants of one level-``top`` vertex."""
        size = 1
        for j in range(top + 1, bottom + 1):
            size *= self.at(j)
        return size

    def entries(self, levels: int) -> List[int]:
        return [self.at(j) for j in range(1, levels + 1)]

    def check_word(self, word: Sequence[int]) -> Word:
        """Validate digit ranges and return the word as a tuple."""
        out = tuple(int(d) for d in word)
        for position, digit in enumerate(out, start=1):
            n = self.at(position)
            if not 0 <= digit < n:
                raise InvalidDigit(
                    f"digit {digit} out of range at level {position} (n = {n})",
                    level=position, digit=digit, arity=n,
                )
        return out


class EventuallyPeriodic(_IndexBase):
    """n = prefix followed by the cycle repeated forever."""

    mode: Literal["eventually_periodic"] = "eventually_periodic"
    cycle: Tuple[int, ...] = Field(..., min_length=1)

    @field_validator("prefix", "cycle")
    @classmethod
    def _at_least_two(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(n < 2 for n in value):
            raise ValueError("every entry of a spherical index must be >= 2")
        return value

    def at(self, level: int) -> int:
        if level < 1:
            raise InvalidIndex("levels start at 1", level=level)
        if level <= len(self.prefix):
            return self.prefix[level - 1]
        return self.cycle[(level - len(self.prefix) - 1) % len(self.cycle)]

    def shifted(self, k: int) -> "EventuallyPeriodic":
        if k <= len(self.prefix):
            return EventuallyPeriodic(prefix=self.prefix[k:], cycle=self.cycle)
        j = (k - len(self.prefix)) % len(self.cycle)
        return EventuallyPeriodic(prefix=(), cycle=self.cycle[j:] + self.cycle[:j])

    def constant(self) -> Optional[int]:
        values = set(self.prefix) | set(self.cycle)
        return values.pop() if len(values) == 1 else None

    def bound(self) -> int:
        """M = max n_l."""
        return max(self.prefix + self.cycle)

    def period(self) -> Tuple[int, int]:
        """(preperiod, period) of the sequence."""
        return len(self.prefix), len(self.cycle)

    def canonical(self) -> "EventuallyPeriodic":
        """Shortest prefix and primitive cycle describing the same sequence."""
        cycle = self.cycle
        for p in range(1, len(cycle) + 1):
            if len(cycle) % p == 0 and cycle[:p] * (len(cycle) // p) == cycle:
                cycle = cycle[:p]
                break
        prefix = self.prefix
        while prefix and prefix[-1] == cycle[-1]:
            cycle = (prefix[-1],) + cycle[:-1]
            prefix = prefix[:-1]
        return EventuallyPeriodic(prefix=prefix, cycle=cycle)


class Geometric(_IndexBase):
    """n = prefix, then n_{l+1} = ratio * n_l forever."""

    mode: Literal["geometric"] = "geometric"
    prefix: Tuple[int, ...] = Field(..., min_length=1)
    ratio: int = Field(..., ge=2)

    @field_validator("prefix")
    @classmethod
    def _at_least_two(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(n < 2 for n in value):
            raise ValueError("every entry of a spherical index must be >= 2")
        return value

    def at(self, level: int) -> int:
        if level < 1:
            raise InvalidIndex("levels start at 1", level=level)
        if level <= len(self.prefix):
            return self.prefix[level - 1]
        return self.prefix[-1] * self.ratio ** (level - len(self.prefix))

    def shifted(self, k: int) -> "Geometric":
        if k < len(self.prefix):
            return Geometric(prefix=self.prefix[k:], ratio=self.ratio)
        return Geometric(prefix=(self.at(k + 1),), ratio=self.ratio)

    def canonical(self) -> "Geometric":
        prefix = self.prefix
        while len(prefix) >= 2 and prefix[-1] == prefix[-2] * self.ratio:
            prefix = prefix[:-1]
        return Geometric(prefix=prefix, ratio=self.ratio)

    def tail_sum(self, level: int, weight: int = 2) -> Fraction:
        """Exact value of sum_{j > level} weight / n_j (level >= len(prefix))."""
        if level < len(self.prefix):
            head = sum(Fraction(weight, self.at(j)) for j in range(level + 1, len(self.prefix) + 1))
            return head + self.tail_sum(len(self.prefix), weight)
        return Fraction(weight, self.at(level + 1)) * Fraction(self.ratio, self.ratio - 1)


SphericalIndex = Annotated[Union[EventuallyPeriodic, Geometric], Field(discriminator="mode")]
_index_adapter = TypeAdapter(SphericalIndex)


def parse_index(data) -> SphericalIndex:
    """Build an index from its JSON object form."""
    if isinstance(data, _IndexBase):
        return data
    try:
        return _index_adapter.validate_python(data)
    except ValidationError as exc:
        raise InvalidIndex(f"invalid spherical index: {exc.errors()[0]['msg']}", data=str(data)) from exc


def index_to_dict(index: SphericalIndex) -> dict:
    data = index.model_dump(mode="json")
    if isinstance(index, EventuallyPeriodic):
        return {"mode": data["mode"], "prefix": data["prefix"], "cycle": data["cycle"]}
    return {"mode": data["mode"], "prefix": data["prefix"], "ratio": data["ratio"]}


def constant_index(d: int) -> EventuallyPeriodic:
    return EventuallyPeriodic(prefix=(), cycle=(d,))


def same_tree(left: SphericalIndex, right: SphericalIndex) -> bool:
    """True when both indices describe the same sequence."""
    return left.canonical() == right.canonical()


def check_same_tree(left: SphericalIndex, right: SphericalIndex) -> None:
    if not same_tree(left, right):
        raise IndexMismatch(
            "elements act on different trees",
            left=index_to_dict(left), right=index_to_dict(right),
        )


@dataclass(frozen=True, order=True)
class Vertex:
    """A vertex of T, i.e. a finite word; the root is the empty word."""

    word: Word = ()

    @property
    def level(self) -> int:
        return len(self.word)

    def parent(self) -> "Vertex":
        return Vertex(self.word[:-1])

    def child(self, digit: int) -> "Vertex":
        return Vertex(self.word + (digit,))

    def is_prefix_of(self, other: Sequence[int]) -> bool:
        return tuple(other[: len(self.word)]) == self.word


@dataclass(frozen=True, order=True)
class BoundaryPrefix:
    """Depth-L truncation of a boundary point; stands for the cylinder it determines."""

    word: Word = ()

    @property
    def depth(self) -> int:
        return len(self.word)

    def truncate(self, level: int) -> Vertex:
        return Vertex(self.word[:level])


def as_word(value: Union[Vertex, BoundaryPrefix, Sequence[int]]) -> Word:
    if isinstance(value, (Vertex, BoundaryPrefix)):
        return value.word
    return tuple(int(d) for d in value)


def index_at(index: SphericalIndex, level: int) -> int:
    return index.at(level)


def cylinder_measure(index: SphericalIndex, v: Union[Vertex, Sequence[int]]) -> CylinderMeasure:
    """Exact counting measure of the cylinder of ``v``: 1 / (n_1 ... n_l)."""
    word = index.check_word(as_word(v))
    return Fraction(1, index.level_size(len(word)))


@dataclass(frozen=True)
class Indistinguishable:
    """Two objects agree at every tested scale; ``bound`` caps their distance."""

    depth: int
    bound: Fraction

    def __str__(self) -> str:
        return f"indistinguishable at depth {self.depth} (<= {self.bound})"


def boundary_metric(
    x: Union[BoundaryPrefix, Sequence[int]],
    y: Union[BoundaryPrefix, Sequence[int]],
    index: Optional[SphericalIndex] = None,
) -> Union[Fraction, Indistinguishable]:
    """1/2^m for the first level m where the prefixes differ."""
    xw, yw = as_word(x), as_word(y)
    if len(xw) != len(yw):
        raise IndexMismatch("boundary prefixes have different depths", left=len(xw), right=len(yw))
    if index is not None:
        index.check_word(xw)
        index.check_word(yw)
    for level, (a, b) in enumerate(zip(xw, yw), start=1):
        if a != b:
            return Fraction(1, 2 ** level)
    return Indistinguishable(depth=len(xw), bound=Fraction(1, 2 ** len(xw)))


def ensure_level_within_cap(index: SphericalIndex, level: int, cap: int, top: int = 0) -> int:
    """Size of the level set under a level-``top`` vertex, or LevelCapExceeded."""
    size = index.relative_size(top, level)
    if size > cap:
        raise LevelCapExceeded(
            f"level {level} has {size} vertices, above the cap of {cap}",
            level=level, size=size, cap=cap,
        )
    return size


def level_words(index: SphericalIndex, level: int, cap: int, under: Sequence[int] = ()) -> Iterator[Word]:
    """All words of length ``level`` extending ``under``, in lexicographic order."""
    base = tuple(under)
    if len(base) > level:
        raise DepthExceeded("vertex lies below the requested level", level=level, vertex=base)
    ensure_level_within_cap(index, level, cap, top=len(base))
    ranges = [range(index.at(j)) for j in range(len(base) + 1, level + 1)]
    for tail in itertools.product(*ranges):
        yield base + tail


def shortlex_key(word: Sequence[int]) -> Tuple[int, Word]:
    return len(word), tuple(word)
