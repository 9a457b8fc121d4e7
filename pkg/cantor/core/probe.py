"""
Memoised queries about an automorphism below a vertex, truncated at depth L.

Every element exposes a cursor (its state at the current vertex); all answers
below a vertex depend only on (cursor, level), which is what is cached here.
"""

from __future__ import annotations

import logging
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from cantor.errors import DepthExceeded, LevelCapExceeded, SearchExhausted

logger = logging.getLogger(__name__)

Cursor = Hashable


class SignatureTable:
    """Hash-consing table for depth-L portraits; equal ids mean equal to depth L."""

    def __init__(self, depth: int):
        self.depth = depth
        self._ids: Dict[tuple, int] = {}

    def _intern(self, key: tuple) -> int:
        found = self._ids.get(key)
        if found is None:
            found = len(self._ids)
            self._ids[key] = found
        return found

    def identity(self, level: int) -> int:
        return self._intern(("id", level))

    def node(self, level: int, perm: Sequence[int], children: Sequence[int]) -> int:
        if all(p == k for k, p in enumerate(perm)):
            below = self.identity(level + 1)
            if all(c == below for c in children):
                return self.identity(level)
        return self._intern((level, tuple(perm), tuple(children)))

    def __len__(self) -> int:
        return len(self._ids)


class SubtreeProbe:
    """Fixed-point counts, identity tests and signatures of one element to depth L."""

    def __init__(self, element, depth: int, cap: Optional[int] = None, table: Optional[SignatureTable] = None):
        limit = getattr(element, "depth", None)
        if limit is not None and depth > limit:
            raise DepthExceeded(
                f"portrait is only defined to depth {limit}", requested=depth, available=limit,
            )
        if table is not None and table.depth != depth:
            raise ValueError("signature table built for another depth")
        self.element = element
        self.index = element.index
        self.depth = depth
        self.cap = cap
        self.table = table if table is not None else SignatureTable(depth)
        self._fixed: Dict[Tuple[Cursor, int], Tuple[int, bool]] = {}
        self._identity: Dict[Tuple[Cursor, int], bool] = {}
        self._signature: Dict[Tuple[Cursor, int], int] = {}

    def _check_budget(self, memo: dict) -> None:
        if self.cap is not None and len(memo) > self.cap:
            raise LevelCapExceeded(
                f"probe visited more than {self.cap} (state, level) pairs",
                depth=self.depth, cap=self.cap,
            )

    def locate(self, word: Sequence[int]) -> Tuple[Tuple[int, ...], Cursor]:
        """Image of ``word`` and the cursor at that vertex."""
        return self.element.descend(word)

    def fixed_count(self, cursor: Cursor, level: int) -> Tuple[int, bool]:
        """Fixed depth-L words below a fixed vertex, and whether the count is final.

        A count is final ("resolved") when every fixed depth-L word already
        sits under an identity section, so deeper truncations cannot move it.
        """
        key = (cursor, level)
        cached = self._fixed.get(key)
        if cached is not None:
            return cached
        element = self.element
        if element.is_identity_cursor(cursor):
            result = (self.index.relative_size(level, self.depth), True)
        elif level == self.depth:
            result = (1, False)
        else:
            total, resolved = 0, True
            child_level = level + 1
            for k in range(self.index.at(child_level)):
                out, nxt = element.step(cursor, k, child_level)
                if out != k:
                    continue
                count, done = self.fixed_count(nxt, child_level)
                total += count
                resolved = resolved and done
            result = (total, resolved)
        self._fixed[key] = result
        self._check_budget(self._fixed)
        return result

    def is_identity_below(self, cursor: Cursor, level: int) -> bool:
        """True when the element fixes every word of length <= L below the vertex."""
        element = self.element
        if element.is_identity_cursor(cursor) or level == self.depth:
            return True
        key = (cursor, level)
        cached = self._identity.get(key)
        if cached is not None:
            return cached
        result = True
        child_level = level + 1
        for k in range(self.index.at(child_level)):
            out, nxt = element.step(cursor, k, child_level)
            if out != k or not self.is_identity_below(nxt, child_level):
                result = False
                break
        self._identity[key] = result
        self._check_budget(self._identity)
        return result

    def identity_on(self, word: Sequence[int]) -> bool:
        """True when the element fixes the cylinder of ``word`` pointwise to depth L."""
        image, cursor = self.locate(word)
        return tuple(image) == tuple(word) and self.is_identity_below(cursor, len(word))

    def signature(self, cursor: Cursor = None, level: int = 0) -> int:
        if cursor is None and level == 0:
            cursor = self.element.start()
        element = self.element
        if level == self.depth or element.is_identity_cursor(cursor):
            return self.table.identity(level)
        key = (cursor, level)
        cached = self._signature.get(key)
        if cached is not None:
            return cached
        perm: List[int] = []
        children: List[int] = []
        child_level = level + 1
        for k in range(self.index.at(child_level)):
            out, nxt = element.step(cursor, k, child_level)
            perm.append(out)
            children.append(self.signature(nxt, child_level))
        result = self.table.node(level, perm, children)
        self._signature[key] = result
        self._check_budget(self._signature)
        return result

    def first_moved_below(self, word: Sequence[int]) -> Optional[Tuple[int, ...]]:
        """Shortlex-first vertex below ``word`` (to depth L) that the element moves."""
        _, cursor = self.locate(word)
        frontier: Dict[Cursor, Tuple[int, ...]] = {cursor: tuple(word)}
        level = len(word)
        while frontier and level < self.depth:
            child_level = level + 1
            moved: List[Tuple[int, ...]] = []
            nxt_frontier: Dict[Cursor, Tuple[int, ...]] = {}
            for cur, vertex in frontier.items():
                if self.element.is_identity_cursor(cur):
                    continue
                for k in range(self.index.at(child_level)):
                    out, nxt = self.element.step(cur, k, child_level)
                    if out != k:
                        moved.append(vertex + (k,))
                    elif nxt not in nxt_frontier or vertex + (k,) < nxt_frontier[nxt]:
                        nxt_frontier[nxt] = vertex + (k,)
            if moved:
                return min(moved)
            frontier = nxt_frontier
            level = child_level
            self._check_budget(frontier)
        return None


def first_moved_level(element, state_bound: int, max_level: Optional[int] = None) -> Optional[int]:
    """Level of the first vertex the element moves, or None for the identity.

    Walks fixed vertices breadth-first, merging vertices whose section is the
    same (same cursor over the same remaining index). Raises SearchExhausted
    when more than ``state_bound`` states or ``max_level`` levels are needed.
    """
    level_free = getattr(element, "level_free", False)

    def tail(level: int):
        return element.index.shifted(level).canonical() if level_free else level

    start = element.start()
    seen = {(start, tail(0))}
    frontier = [start]
    level = 0
    while frontier:
        child_level = level + 1
        nxt_frontier = []
        for cursor in frontier:
            if element.is_identity_cursor(cursor):
                continue
            for k in range(element.index.at(child_level)):
                out, nxt = element.step(cursor, k, child_level)
                if out != k:
                    return child_level
                key = (nxt, tail(child_level))
                if key not in seen:
                    seen.add(key)
                    nxt_frontier.append(nxt)
        if len(seen) > state_bound:
            raise SearchExhausted("section states exceed the bound", bound=state_bound, level=child_level)
        if max_level is not None and child_level >= max_level and nxt_frontier:
            raise SearchExhausted("no moved vertex within the level bound", max_level=max_level)
        frontier = nxt_frontier
        level = child_level
    return None
