"""
Tree automorphisms in three representations.

All representations share one evaluation protocol: ``start()`` gives the
cursor at the root, ``step(cursor, digit, level)`` maps the digit read at
``level`` (1-based) to its image and returns the cursor of the section at the
child. A cursor for which ``is_identity_cursor`` holds certifies that the
section there is the identity.

Conventions: ``h(k s) = perm(k) h|_k(s)``, sections are indexed by the source
digit, and ``compose(g, h)`` applies ``h`` first, so
``compose(g, h)|_k = compose(g|_{h(k)}, h|_k)``.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from cantor.core.probe import SignatureTable, SubtreeProbe
from cantor.core.tree import (
    BoundaryPrefix,
    SphericalIndex,
    Vertex,
    Word,
    as_word,
    check_same_tree,
    constant_index,
)
from cantor.errors import DepthExceeded, InvalidElement, LevelCapExceeded

logger = logging.getLogger(__name__)

Cursor = Hashable
IDENTITY_STATE = "id"


def _is_identity_perm(perm: Sequence[int]) -> bool:
    return all(p == k for k, p in enumerate(perm))


def _check_perm(perm: Sequence[int], n: int, where: str) -> Tuple[int, ...]:
    out = tuple(int(p) for p in perm)
    if len(out) != n or sorted(out) != list(range(n)):
        raise InvalidElement(f"{where}: {list(out)} is not a permutation of 0..{n - 1}", perm=list(out), arity=n)
    return out


def _inverse_perm(perm: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * len(perm)
    for k, p in enumerate(perm):
        out[p] = k
    return tuple(out)


class TreeAutomorphism(ABC):
    """An element of Aut(T) acting on the tree described by ``index``."""

    kind: str = "abstract"
    depth: Optional[int] = None
    level_free: bool = False

    def __init__(self, index: SphericalIndex, name: Optional[str] = None):
        self.index = index
        self.name = name

    @abstractmethod
    def start(self) -> Cursor:
        ...

    @abstractmethod
    def step(self, cursor: Cursor, digit: int, level: int) -> Tuple[int, Cursor]:
        ...

    @abstractmethod
    def is_identity_cursor(self, cursor: Cursor) -> bool:
        ...

    @abstractmethod
    def inverse(self) -> "TreeAutomorphism":
        ...

    @abstractmethod
    def section(self, word: Sequence[int]) -> "TreeAutomorphism":
        ...

    @property
    def is_involution(self) -> Optional[bool]:
        """True/False when known in closed form, None otherwise."""
        return None

    def descend(self, word: Sequence[int], cursor: Cursor = None, offset: int = 0) -> Tuple[Word, Cursor]:
        """Image of ``word`` and the cursor reached at its end."""
        if cursor is None:
            cursor = self.start()
        image = []
        for position, digit in enumerate(word, start=offset + 1):
            out, cursor = self.step(cursor, digit, position)
            image.append(out)
        return tuple(image), cursor

    def perm_at(self, cursor: Cursor, level: int) -> Tuple[int, ...]:
        """Permutation of the digits at ``level`` performed at the cursor's vertex."""
        return tuple(self.step(cursor, k, level)[0] for k in range(self.index.at(level)))

    def root_perm(self) -> Tuple[int, ...]:
        return self.perm_at(self.start(), 1)

    def is_identity(self) -> bool:
        """Certified identity (exact only where the representation allows it)."""
        return self.is_identity_cursor(self.start())

    def apply(self, w):
        word = self.index.check_word(as_word(w))
        if self.depth is not None and len(word) > self.depth:
            raise DepthExceeded(
                f"word of length {len(word)} is below the portrait depth {self.depth}",
                requested=len(word), available=self.depth,
            )
        image, _ = self.descend(word)
        if isinstance(w, Vertex):
            return Vertex(image)
        if isinstance(w, BoundaryPrefix):
            return BoundaryPrefix(image)
        return image

    def __call__(self, w):
        return self.apply(w)

    def label(self) -> str:
        return self.name or f"<{self.kind}>"

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label()})"


class FinitePortrait(TreeAutomorphism):
    """Permutations at the vertices above depth L; claims nothing deeper."""

    kind = "portrait"

    def __init__(
        self,
        index: SphericalIndex,
        depth: int,
        perms: Mapping[Sequence[int], Sequence[int]] = None,
        name: Optional[str] = None,
    ):
        super().__init__(index, name)
        if depth < 0:
            raise InvalidElement("portrait depth must be non-negative", depth=depth)
        self.depth = depth
        cleaned: Dict[Word, Tuple[int, ...]] = {}
        for vertex, perm in (perms or {}).items():
            word = index.check_word(vertex)
            if len(word) >= depth:
                raise InvalidElement(
                    f"vertex {list(word)} is not above depth {depth}", vertex=list(word), depth=depth,
                )
            checked = _check_perm(perm, index.at(len(word) + 1), f"vertex {list(word)}")
            if not _is_identity_perm(checked):
                cleaned[word] = checked
        self.perms = cleaned
        self._active = {key[:i] for key in cleaned for i in range(len(key) + 1)}

    @classmethod
    def identity(cls, index: SphericalIndex, depth: int) -> "FinitePortrait":
        return cls(index, depth, {}, name="e")

    @classmethod
    def truncate(cls, element: TreeAutomorphism, depth: int, cap: Optional[int] = None) -> "FinitePortrait":
        """Portrait of ``element`` restricted to the top ``depth`` levels."""
        if element.depth is not None and depth > element.depth:
            raise DepthExceeded("cannot truncate below the element's depth", requested=depth, available=element.depth)
        perms: Dict[Word, Tuple[int, ...]] = {}
        stack: List[Tuple[Word, Cursor]] = [((), element.start())]
        visited = 0
        while stack:
            vertex, cursor = stack.pop()
            if len(vertex) >= depth or element.is_identity_cursor(cursor):
                continue
            visited += 1
            if cap is not None and visited > cap:
                raise LevelCapExceeded(f"portrait truncation visited more than {cap} vertices", cap=cap, depth=depth)
            level = len(vertex) + 1
            perm = []
            for k in range(element.index.at(level)):
                out, nxt = element.step(cursor, k, level)
                perm.append(out)
                stack.append((vertex + (k,), nxt))
            if not _is_identity_perm(perm):
                perms[vertex] = tuple(perm)
        return cls(element.index, depth, perms, name=element.name)

    def start(self) -> Cursor:
        return ()

    def step(self, cursor: Cursor, digit: int, level: int) -> Tuple[int, Cursor]:
        if level > self.depth:
            raise DepthExceeded(
                f"portrait is only defined to depth {self.depth}", requested=level, available=self.depth,
            )
        perm = self.perms.get(cursor)
        return (perm[digit] if perm is not None else digit), cursor + (digit,)

    def is_identity_cursor(self, cursor: Cursor) -> bool:
        return cursor not in self._active

    def inverse(self) -> "FinitePortrait":
        perms = {self.apply(vertex): _inverse_perm(perm) for vertex, perm in self.perms.items()}
        return FinitePortrait(self.index, self.depth, perms, name=_inverse_name(self.name))

    def section(self, word: Sequence[int]) -> "FinitePortrait":
        word = self.index.check_word(word)
        k = len(word)
        if k > self.depth:
            raise DepthExceeded("section below the portrait depth", requested=k, available=self.depth)
        perms = {v[k:]: p for v, p in self.perms.items() if v[:k] == word}
        return FinitePortrait(self.index.shifted(k), self.depth - k, perms)

    @property
    def is_involution(self) -> Optional[bool]:
        return None


class MealyRecursion(TreeAutomorphism):
    """Finite-state recursion on the constant d-ary tree.

    State ``id`` is reserved for the identity; it may be referenced as a
    transition target without being declared.
    """

    kind = "mealy"
    level_free = True

    def __init__(
        self,
        alphabet: int,
        names: Sequence[str],
        perms: Sequence[Sequence[int]],
        transitions: Sequence[Sequence[int]],
        initial: int,
        name: Optional[str] = None,
        index: Optional[SphericalIndex] = None,
        declared: Optional[Sequence[bool]] = None,
    ):
        if index is None:
            index = constant_index(alphabet)
        if index.constant() != alphabet:
            raise InvalidElement("Mealy recursions act only on constant-arity trees", alphabet=alphabet)
        super().__init__(index, name if name is not None else names[initial])
        self.alphabet = alphabet
        self.names = tuple(names)
        self.perms = tuple(_check_perm(p, alphabet, f"state {names[i]}") for i, p in enumerate(perms))
        self.transitions = tuple(tuple(int(t) for t in row) for row in transitions)
        self.initial = int(initial)
        self.declared = tuple(declared) if declared is not None else (True,) * len(self.names)
        for i, row in enumerate(self.transitions):
            if len(row) != alphabet or any(not 0 <= t < len(self.names) for t in row):
                raise InvalidElement(f"state {self.names[i]} has non-total transitions", state=self.names[i])
        if len(set(self.names)) != len(self.names):
            raise InvalidElement("state names must be unique", states=list(self.names))
        self._identity_states = self._find_identity_states()
        if IDENTITY_STATE in self.names and self.names.index(IDENTITY_STATE) not in self._identity_states:
            raise InvalidElement("state 'id' must act as the identity")
        self._key: Optional[tuple] = None

    @classmethod
    def from_table(
        cls,
        alphabet: int,
        table: Mapping[str, Tuple[Sequence[int], Sequence[str]]],
        initial: str,
        index: Optional[SphericalIndex] = None,
    ) -> "MealyRecursion":
        """Build from ``{state: (perm, [target per digit])}``; ``id`` is implicit."""
        names = list(table)
        declared = [True] * len(names)
        targets = {t for _, row in table.values() for t in row}
        if IDENTITY_STATE in targets and IDENTITY_STATE not in table:
            names.append(IDENTITY_STATE)
            declared.append(False)
        position = {n: i for i, n in enumerate(names)}
        perms, transitions = [], []
        for state in names:
            if state in table:
                perm, row = table[state]
            else:
                perm, row = list(range(alphabet)), [IDENTITY_STATE] * alphabet
            missing = [t for t in row if t not in position]
            if missing:
                raise InvalidElement(f"state {state} points to undefined states {missing}", state=state)
            perms.append(perm)
            transitions.append([position[t] for t in row])
        if initial not in position:
            raise InvalidElement(f"initial state {initial} is not defined", initial=initial)
        return cls(alphabet, names, perms, transitions, position[initial], index=index, declared=declared)

    def _find_identity_states(self) -> set:
        candidates = {i for i, p in enumerate(self.perms) if _is_identity_perm(p)}
        changed = True
        while changed:
            changed = False
            for i in list(candidates):
                if any(t not in candidates for t in self.transitions[i]):
                    candidates.discard(i)
                    changed = True
        return candidates

    def start(self) -> Cursor:
        return self.initial

    def step(self, cursor: Cursor, digit: int, level: int) -> Tuple[int, Cursor]:
        return self.perms[cursor][digit], self.transitions[cursor][digit]

    def is_identity_cursor(self, cursor: Cursor) -> bool:
        return cursor in self._identity_states

    def with_initial(self, state: int) -> "MealyRecursion":
        return MealyRecursion(
            self.alphabet, self.names, self.perms, self.transitions, state,
            name=self.names[state], index=self.index, declared=self.declared,
        )

    def state_element(self, name: str) -> "MealyRecursion":
        return self.with_initial(self.names.index(name))

    def reachable(self) -> List[int]:
        """States reachable from the initial one, in breadth-first digit order."""
        order, seen = [self.initial], {self.initial}
        queue = deque(order)
        while queue:
            s = queue.popleft()
            for t in self.transitions[s]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
                    queue.append(t)
        return order

    def minimized(self) -> "MealyRecursion":
        """Reachable part modulo equivalent states (Moore partition refinement)."""
        states = self.reachable()
        block = {s: self.perms[s] for s in states}
        while True:
            signature = {s: (block[s],) + tuple(block[t] for t in self.transitions[s]) for s in states}
            ids: Dict[tuple, int] = {}
            refined = {s: ids.setdefault(signature[s], len(ids)) for s in states}
            if len(set(refined.values())) == len(set(block.values())):
                block = refined
                break
            block = refined
        classes: Dict[int, List[int]] = {}
        for s in states:
            classes.setdefault(block[s], []).append(s)
        order: List[int] = []
        queue = deque([block[self.initial]])
        seen = {block[self.initial]}
        while queue:
            c = queue.popleft()
            order.append(c)
            rep = classes[c][0]
            for t in self.transitions[rep]:
                if block[t] not in seen:
                    seen.add(block[t])
                    queue.append(block[t])
        number = {c: i for i, c in enumerate(order)}
        names, perms, transitions = [], [], []
        for c in order:
            members = classes[c]
            rep = members[0]
            if any(m in self._identity_states for m in members):
                names.append(IDENTITY_STATE)
            else:
                names.append(min((self.names[m] for m in members), key=lambda n: (len(n), n)))
            perms.append(self.perms[rep])
            transitions.append([number[block[t]] for t in self.transitions[rep]])
        return MealyRecursion(self.alphabet, names, perms, transitions, 0, name=self.name, index=self.index)

    def canonical_key(self) -> tuple:
        """Exact equality key: the minimal machine numbered breadth-first."""
        if self._key is None:
            m = self.minimized()
            self._key = (m.alphabet, m.perms, m.transitions)
        return self._key

    def compose(self, other: "MealyRecursion") -> "MealyRecursion":
        """``self`` after ``other``, on state pairs, minimised."""
        check_same_tree(self.index, other.index)
        start = (self.initial, other.initial)
        order, position = [start], {start: 0}
        perms, transitions = [], []
        i = 0
        while i < len(order):
            p, q = order[i]
            i += 1
            perm, row = [], []
            for k in range(self.alphabet):
                mid = other.perms[q][k]
                perm.append(self.perms[p][mid])
                target = (self.transitions[p][mid], other.transitions[q][k])
                if target not in position:
                    position[target] = len(order)
                    order.append(target)
                row.append(position[target])
            perms.append(perm)
            transitions.append(row)
        names = [_pair_name(self.names[p], other.names[q]) for p, q in order]
        name = product_name(self.name, other.name)
        return MealyRecursion(self.alphabet, names, perms, transitions, 0, name=name, index=self.index).minimized()

    def inverse(self) -> "MealyRecursion":
        perms, transitions = [], []
        for s in range(len(self.names)):
            inv = _inverse_perm(self.perms[s])
            perms.append(inv)
            transitions.append([self.transitions[s][inv[k]] for k in range(self.alphabet)])
        names = [_inverse_name(n) for n in self.names]
        return MealyRecursion(
            self.alphabet, names, perms, transitions, self.initial,
            name=_inverse_name(self.name), index=self.index, declared=self.declared,
        )

    def section(self, word: Sequence[int]) -> "MealyRecursion":
        word = self.index.check_word(word)
        _, state = self.descend(word)
        return self.with_initial(state)

    @property
    def is_involution(self) -> Optional[bool]:
        return self.compose(self).is_identity()

    def to_table(self) -> Dict[str, Tuple[List[int], List[str]]]:
        return {
            self.names[s]: (list(self.perms[s]), [self.names[t] for t in self.transitions[s]])
            for s in range(len(self.names))
            if self.declared[s]
        }


def _pair_name(left: Optional[str], right: Optional[str]) -> str:
    left, right = left or "?", right or "?"
    if left == right == IDENTITY_STATE:
        return IDENTITY_STATE
    return f"{left}*{right}"


def product_name(left: Optional[str], right: Optional[str]) -> Optional[str]:
    if left is None or right is None:
        return None
    if left in (IDENTITY_STATE, "e"):
        return right
    if right in (IDENTITY_STATE, "e"):
        return left
    return f"{left}*{right}"


def _inverse_name(name: Optional[str]) -> Optional[str]:
    if name is None or name in (IDENTITY_STATE, "e"):
        return name
    if name.endswith("^-1"):
        return name[: -len("^-1")]
    return f"{name}^-1"


@dataclass
class SectionClosure:
    """Sections reachable from an element, with the bound that was used."""

    sections: List[TreeAutomorphism]
    bounded: Optional[bool]
    bound_used: int
    exact: bool = False
    words: List[Word] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sections)

    def names(self) -> List[str]:
        return [s.label() for s in self.sections]


def identity_element(index: SphericalIndex) -> TreeAutomorphism:
    from cantor.core.rules import RuleDefined

    return RuleDefined("identity", {}, index, name="e")


def apply(g: TreeAutomorphism, w):
    return g.apply(w)


def compose(g: TreeAutomorphism, h: TreeAutomorphism, cap: Optional[int] = None) -> TreeAutomorphism:
    """The element ``w -> g(h(w))``.

    Mealy with Mealy stays Mealy; anything involving a portrait is a portrait
    at the smaller depth; every other mix is an exact lazy product.
    """
    from cantor.core.rules import product

    check_same_tree(g.index, h.index)
    if isinstance(g, MealyRecursion) and isinstance(h, MealyRecursion):
        return g.compose(h)
    if isinstance(g, FinitePortrait) or isinstance(h, FinitePortrait):
        depth = min(d for d in (g.depth, h.depth) if d is not None)
        return FinitePortrait.truncate(product([g, h]), depth, cap=cap)
    return product([g, h])


def invert(g: TreeAutomorphism) -> TreeAutomorphism:
    return g.inverse()


def section(g: TreeAutomorphism, v) -> TreeAutomorphism:
    return g.section(g.index.check_word(as_word(v)))


def exact_equal(g: TreeAutomorphism, h: TreeAutomorphism) -> Optional[bool]:
    """Exact equality where decidable (both Mealy), otherwise None."""
    if isinstance(g, MealyRecursion) and isinstance(h, MealyRecursion):
        check_same_tree(g.index, h.index)
        return g.canonical_key() == h.canonical_key()
    return None


def equal_to_depth(
    g: TreeAutomorphism,
    h: TreeAutomorphism,
    depth: int,
    cap: Optional[int] = None,
    table: Optional[SignatureTable] = None,
) -> bool:
    """True iff g and h agree on every word of length ``depth``."""
    check_same_tree(g.index, h.index)
    if g is h:
        return True
    table = table if table is not None else SignatureTable(depth)
    return SubtreeProbe(g, depth, cap, table).signature() == SubtreeProbe(h, depth, cap, table).signature()


def section_closure(
    g: TreeAutomorphism,
    state_bound: int,
    depth_bound: Optional[int] = None,
) -> SectionClosure:
    """Breadth-first closure of ``g`` under taking sections.

    Mealy inputs are closed exactly over their minimal machine. Elements whose
    evaluation depends on the level only through the index are closed over
    (cursor, remaining index) pairs. Anything else is explored to
    ``depth_bound`` and reported with ``bounded = None``.
    """
    if isinstance(g, MealyRecursion):
        machine = g.minimized()
        states = list(range(len(machine.names)))
        sections = [machine.with_initial(s) for s in states[:state_bound]]
        return SectionClosure(
            sections=sections,
            bounded=len(states) <= state_bound,
            bound_used=state_bound,
            exact=True,
        )

    level_free = g.level_free and g.depth is None
    limit = depth_bound if depth_bound is not None else state_bound

    def key(cursor: Cursor, level: int):
        return (cursor, g.index.shifted(level).canonical()) if level_free else (cursor, level)

    start = g.start()
    seen = {key(start, 0)}
    words: List[Word] = [()]
    queue = deque([((), start)])
    bounded: Optional[bool] = True
    while queue:
        word, cursor = queue.popleft()
        level = len(word) + 1
        if not level_free and level > limit:
            bounded = None
            continue
        for k in range(g.index.at(level)):
            _, nxt = g.step(cursor, k, level)
            kk = key(nxt, level)
            if kk in seen:
                continue
            if len(seen) >= state_bound:
                bounded = False if level_free else None
                queue.clear()
                break
            seen.add(kk)
            words.append(word + (k,))
            queue.append((word + (k,), nxt))
    if not level_free and bounded:
        bounded = None
    sections = [g.section(w) if w else g for w in words]
    logger.debug(f"section closure of {g.label()}: {len(sections)} states, bounded={bounded}")
    return SectionClosure(sections=sections, bounded=bounded, bound_used=state_bound, exact=False, words=words)


def random_portrait(
    index: SphericalIndex,
    depth: int,
    rng: np.random.Generator,
    density: float = 0.5,
    name: Optional[str] = None,
) -> FinitePortrait:
    """Portrait with a uniformly random permutation at a random subset of vertices."""
    perms: Dict[Word, Tuple[int, ...]] = {}
    frontier: List[Word] = [()]
    for level in range(depth):
        n = index.at(level + 1)
        nxt: List[Word] = []
        for vertex in frontier:
            if rng.random() < density:
                perms[vertex] = tuple(int(p) for p in rng.permutation(n))
            nxt.extend(vertex + (k,) for k in range(n))
        frontier = nxt
    return FinitePortrait(index, depth, perms, name=name)
