"""
Finitely generated subgroups of Aut(T) given by their generators.

Words are tuples of letters. A word ``(s1, ..., sk)`` denotes the element
``s1 o ... o sk`` (the last letter acts first). Each generator contributes
its own letter and, unless it is an involution, an inverse letter: the
swapped case for single-character names (``a`` -> ``A``), ``name^-1``
otherwise.
"""

from __future__ import annotations

import copy
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from cantor.config import Config, get_config
from cantor.core.automorphism import (
    FinitePortrait,
    MealyRecursion,
    TreeAutomorphism,
    compose,
    identity_element,
)
from cantor.core.probe import SignatureTable, SubtreeProbe
from cantor.core.schreier import SchreierGraph
from cantor.core.tree import (
    BoundaryPrefix,
    SphericalIndex,
    Vertex,
    Word,
    as_word,
    check_same_tree,
    ensure_level_within_cap,
)
from cantor.errors import InvalidElement, InvalidParameters, LevelCapExceeded

logger = logging.getLogger(__name__)

LetterWord = Tuple[str, ...]


def inverse_symbol(name: str) -> str:
    if len(name) == 1 and name.swapcase() != name:
        return name.swapcase()
    return f"{name}^-1"


class GeneratedAction:
    """G = <S> acting on T, with a symmetric letter set derived from S."""

    def __init__(
        self,
        index: SphericalIndex,
        generators: Mapping[str, TreeAutomorphism],
        working_depth: Optional[int] = None,
        config: Optional[Config] = None,
        name: Optional[str] = None,
    ):
        self.config = config or get_config()
        self.index = index
        self.name = name
        self.working_depth = working_depth if working_depth is not None else self.config.WORKING_DEPTH
        if not generators:
            raise InvalidElement("an action needs at least one generator")
        self.generators: Dict[str, TreeAutomorphism] = {}
        self.letters: List[str] = []
        self._elements: Dict[str, TreeAutomorphism] = {}
        self._inverse_letter: Dict[str, str] = {}
        for gen_name, element in generators.items():
            check_same_tree(index, element.index)
            self.generators[gen_name] = element
        for gen_name, element in self.generators.items():
            self.letters.append(gen_name)
            self._elements[gen_name] = element
            if self._is_involution(element):
                self._inverse_letter[gen_name] = gen_name
                continue
            symbol = inverse_symbol(gen_name)
            if symbol in self.generators:
                symbol = f"{gen_name}^-1"
            inverse = copy.copy(element.inverse())
            inverse.name = symbol
            self.letters.append(symbol)
            self._elements[symbol] = inverse
            self._inverse_letter[gen_name] = symbol
            self._inverse_letter[symbol] = gen_name
        self._order = {letter: i for i, letter in enumerate(self.letters)}

    @staticmethod
    def _is_involution(element: TreeAutomorphism) -> bool:
        known = element.is_involution
        if known is None and isinstance(element, FinitePortrait):
            return not compose(element, element).perms
        return bool(known)

    @property
    def exact(self) -> bool:
        """True when every generator is a Mealy recursion (exact equality available)."""
        return all(isinstance(g, MealyRecursion) for g in self.generators.values())

    def letter(self, symbol: str) -> TreeAutomorphism:
        try:
            return self._elements[symbol]
        except KeyError:
            raise InvalidElement(f"unknown letter {symbol!r}", letters=self.letters) from None

    def inverse_letter(self, symbol: str) -> str:
        return self._inverse_letter[symbol]

    def identity(self) -> TreeAutomorphism:
        if self.exact:
            d = self.index.constant()
            return MealyRecursion(d, ["id"], [list(range(d))], [[0] * d], 0, name="e", index=self.index)
        return identity_element(self.index)

    def element(self, word: Sequence[str]) -> TreeAutomorphism:
        result = self.identity()
        for symbol in word:
            result = compose(result, self.letter(symbol))
        return result

    def is_reduced(self, word: Sequence[str]) -> bool:
        return all(self._inverse_letter[a] != b for a, b in zip(word, word[1:]))

    def word_key(self, word: Sequence[str]) -> Tuple[int, Tuple[int, ...]]:
        """Shortlex order on words, letters ordered as in ``letters``."""
        return len(word), tuple(self._order[s] for s in word)

    def parse_word(self, text: str) -> LetterWord:
        text = text.strip()
        if text in ("", "e", "1") and "e" not in self._elements:
            return ()
        if any(sep in text for sep in ". *"):
            tokens = [t for t in text.replace("*", " ").replace(".", " ").split() if t]
        elif all(len(s) == 1 for s in self.letters):
            tokens = list(text)
        else:
            tokens = [text]
        for t in tokens:
            self.letter(t)
        return tuple(tokens)

    def format_word(self, word: Sequence[str]) -> str:
        if not word:
            return "e"
        if all(len(s) == 1 for s in word):
            return "".join(word)
        return ".".join(word)

    def act(self, symbol: str, word: Word) -> Word:
        return self._elements[symbol].descend(word)[0]

    def apply_word(self, word: Sequence[str], point: Word) -> Word:
        for symbol in reversed(word):
            point = self.act(symbol, point)
        return point

    def summary(self) -> dict:
        from cantor.core.tree import index_to_dict

        return {
            "name": self.name,
            "index": index_to_dict(self.index),
            "generators": list(self.generators),
            "letters": list(self.letters),
            "working_depth": self.working_depth,
        }


@dataclass
class BallEntry:
    word: LetterWord
    element: TreeAutomorphism


@dataclass
class WordBall:
    """Shortlex-minimal representatives of the elements of length <= radius."""

    radius: int
    entries: List[BallEntry]
    dedup_depth: Optional[int]
    exact: bool

    def words(self) -> List[LetterWord]:
        return [e.word for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def ball(
    action: GeneratedAction,
    radius: int,
    dedup_depth: Optional[int] = None,
    exact: Optional[bool] = None,
    cap: Optional[int] = None,
) -> WordBall:
    """Word ball of ``radius`` with one entry per element class.

    Classes are decided exactly for all-Mealy actions (unless ``exact`` is
    False) and by equality to ``dedup_depth`` otherwise. Only new classes are
    extended, which still reaches every element of length <= radius.
    """
    if radius < 0:
        raise InvalidParameters("radius must be non-negative", radius=radius)
    use_exact = action.exact if exact is None else (exact and action.exact)
    depth = dedup_depth if dedup_depth is not None else action.working_depth
    cap = cap if cap is not None else action.config.LEVEL_CAP
    table = SignatureTable(depth)

    def key(element: TreeAutomorphism) -> Hashable:
        if use_exact:
            return element.canonical_key()
        return SubtreeProbe(element, depth, cap, table).signature()

    identity = action.identity()
    entries = [BallEntry((), identity)]
    seen = {key(identity)}
    layer = entries[:]
    for length in range(1, radius + 1):
        nxt: List[BallEntry] = []
        for entry in layer:
            for symbol in action.letters:
                if entry.word and action.inverse_letter(entry.word[-1]) == symbol:
                    continue
                element = compose(entry.element, action.letter(symbol))
                k = key(element)
                if k in seen:
                    continue
                seen.add(k)
                nxt.append(BallEntry(entry.word + (symbol,), element))
        entries.extend(nxt)
        layer = nxt
        logger.debug(f"ball radius {length}: {len(nxt)} new classes")
        if not layer:
            break
    logger.info(f"word ball of radius {radius}: {len(entries)} classes ({'exact' if use_exact else f'depth {depth}'})")
    return WordBall(radius=radius, entries=entries, dedup_depth=None if use_exact else depth, exact=use_exact)


def level_orbit(action: GeneratedAction, v, cap: Optional[int] = None) -> List[Vertex]:
    """Orbit of a vertex under the group, sorted lexicographically."""
    word = action.index.check_word(as_word(v))
    cap = cap if cap is not None else action.config.LEVEL_CAP
    ensure_level_within_cap(action.index, len(word), cap)
    seen = {word}
    queue = deque([word])
    while queue:
        u = queue.popleft()
        for symbol in action.generators:
            w = action.act(symbol, u)
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return [Vertex(w) for w in sorted(seen)]


def level_transitive(action: GeneratedAction, level: int, cap: Optional[int] = None) -> bool:
    orbit = level_orbit(action, (0,) * level, cap)
    return len(orbit) == action.index.level_size(level)


def level_stabilizer(
    action: GeneratedAction,
    radius: int,
    dedup_depth: Optional[int],
    v,
    cap: Optional[int] = None,
) -> List[LetterWord]:
    """Ball words whose element fixes the vertex ``v``."""
    word = action.index.check_word(as_word(v))
    depth = dedup_depth if dedup_depth is not None else max(len(word), 1)
    the_ball = ball(action, radius, depth, cap=cap)
    return [e.word for e in the_ball if e.element.descend(word)[0] == word]


def point_stabilizer_ball(
    action: GeneratedAction,
    radius: int,
    x,
    dedup_depth: Optional[int] = None,
    cap: Optional[int] = None,
) -> List[LetterWord]:
    """Ball words fixing the whole prefix x; shrinks as x gets longer."""
    word = action.index.check_word(as_word(x))
    depth = dedup_depth if dedup_depth is not None else len(word)
    the_ball = ball(action, radius, depth, cap=cap)
    return [e.word for e in the_ball if e.element.descend(word)[0] == word]


def schreier_level_graph(action: GeneratedAction, level: int, cap: Optional[int] = None) -> SchreierGraph:
    """Orbit graph of the all-zeros vertex at ``level``."""
    base = (0,) * level
    orbit = [v.word for v in level_orbit(action, base, cap)]
    edges = [(u, symbol, action.act(symbol, u)) for u in orbit for symbol in action.generators]
    return SchreierGraph.from_edges(orbit, edges, base, list(action.generators), radius=None, depth=level)


def stabilizer_schreier_ball(
    action: GeneratedAction,
    x,
    radius: int,
    cap: Optional[int] = None,
) -> SchreierGraph:
    """Radius-r ball of the orbit graph of the prefix x, pointed at x."""
    word = action.index.check_word(as_word(x))
    limit = cap if cap is not None else action.config.ORBIT_LIMIT
    dist = {word: 0}
    order = [word]
    queue = deque([word])
    while queue:
        u = queue.popleft()
        if dist[u] == radius:
            continue
        for symbol in action.letters:
            w = action.act(symbol, u)
            if w not in dist:
                dist[w] = dist[u] + 1
                order.append(w)
                queue.append(w)
                if len(dist) > limit:
                    raise LevelCapExceeded(
                        f"Schreier ball exceeds {limit} vertices", radius=radius, limit=limit,
                    )
    edges = []
    for u in order:
        for symbol in action.generators:
            w = action.act(symbol, u)
            if w in dist and min(dist[u], dist[w]) < radius:
                edges.append((u, symbol, w))
    return SchreierGraph.from_edges(order, edges, word, list(action.generators), radius=radius, depth=len(word))


def orbit_search(
    action: GeneratedAction,
    start: Word,
    target_prefix: Sequence[int],
    limit: int,
) -> Optional[Word]:
    """Breadth-first orbit point of ``start`` whose prefix is ``target_prefix``."""
    target = tuple(target_prefix)
    k = len(target)
    if start[:k] == target:
        return start
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for symbol in action.letters:
            w = action.act(symbol, u)
            if w in seen:
                continue
            if w[:k] == target:
                return w
            seen.add(w)
            queue.append(w)
            if len(seen) > limit:
                logger.warning(f"orbit search gave up after {limit} points")
                return None
    return None


def as_prefix(value) -> BoundaryPrefix:
    return value if isinstance(value, BoundaryPrefix) else BoundaryPrefix(as_word(value))
