"""
Closed-form rules for automorphisms that are neither finite portraits nor
finite-state recursions: odometers on mixed-radix trees, the digit-swap
element, grafted degenerate elements, and lazy products, inverses and
sections of arbitrary elements.
"""

from __future__ import annotations

import functools
import logging
from abc import ABC, abstractmethod
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple, Type

from cantor.core.automorphism import Cursor, TreeAutomorphism, product_name, _inverse_name
from cantor.core.tree import Geometric, SphericalIndex, check_same_tree
from cantor.errors import InvalidElement, InvalidParameters

logger = logging.getLogger(__name__)


class RuleKernel(ABC):
    """Evaluation of one rule on one tree."""

    rule: ClassVar[str]
    level_free: ClassVar[bool] = False

    def __init__(self, index: SphericalIndex, params: Dict[str, Any]):
        self.index = index
        self.params = dict(params)

    @abstractmethod
    def start(self) -> Cursor:
        ...

    @abstractmethod
    def step(self, cursor: Cursor, digit: int, level: int) -> Tuple[int, Cursor]:
        ...

    @abstractmethod
    def is_identity(self, cursor: Cursor) -> bool:
        ...

    def inverse(self) -> Optional[Tuple[str, Dict[str, Any]]]:
        """(rule, params) of the inverse when it has a closed form."""
        return None

    @property
    def involution(self) -> Optional[bool]:
        return None

    def describe(self) -> Dict[str, Any]:
        """JSON-ready parameters."""
        return dict(self.params)


RULES: Dict[str, Type[RuleKernel]] = {}


def register(cls: Type[RuleKernel]) -> Type[RuleKernel]:
    RULES[cls.rule] = cls
    return cls


@register
class IdentityKernel(RuleKernel):
    rule = "identity"
    level_free = True

    def start(self) -> Cursor:
        return None

    def step(self, cursor, digit, level):
        return digit, None

    def is_identity(self, cursor) -> bool:
        return True

    def inverse(self):
        return "identity", {}

    @property
    def involution(self) -> bool:
        return True


@register
class OdometerKernel(RuleKernel):
    """Add ``step`` to the mixed-radix integer whose least significant digit is at level 1."""

    rule = "odometer"
    level_free = True

    def __init__(self, index, params):
        super().__init__(index, params)
        self.amount = int(params.get("step", 1))
        if self.amount == 0:
            raise InvalidParameters("odometer step must be non-zero")
        self.params = {"step": self.amount}

    def start(self) -> Cursor:
        return self.amount

    def step(self, carry, digit, level):
        n = self.index.at(level)
        total = digit + carry
        return total % n, total // n

    def is_identity(self, carry) -> bool:
        return carry == 0

    def inverse(self):
        return "odometer", {"step": -self.amount}

    @property
    def involution(self) -> bool:
        return False


@register
class SwapJumpKernel(RuleKernel):
    """Swap the first digit lying in {n_l - 2, n_l - 1}; copy the rest."""

    rule = "thm61_b"
    level_free = True

    def start(self) -> Cursor:
        return False

    def step(self, swapped, digit, level):
        if swapped:
            return digit, True
        n = self.index.at(level)
        if digit == n - 2:
            return n - 1, True
        if digit == n - 1:
            return n - 2, True
        return digit, False

    def is_identity(self, swapped) -> bool:
        return bool(swapped)

    def inverse(self):
        return self.rule, {}

    @property
    def involution(self) -> bool:
        return True


class GraftKernel(RuleKernel):
    """Identity except below the vertices z, where an odometer is grafted.

    The distinguished path is all zeros. Leaving it with digit 1 at a branch
    level opens a tail of zeros; the vertex at the end of the tail is z, and
    the subtree below z is rotated by the odometer.
    """

    level_free = False

    def __init__(self, index, params):
        super().__init__(index, params)
        self.amount = int(params.get("step", 1))
        if self.amount == 0:
            raise InvalidParameters("graft step must be non-zero")

    @abstractmethod
    def tail_length(self, level: int) -> Optional[int]:
        """Zeros between the branch vertex at ``level`` and z, or None off the branch levels."""

    def start(self) -> Cursor:
        return ("path",)

    def step(self, cursor, digit, level):
        phase = cursor[0]
        if phase == "path":
            if digit == 0:
                return 0, cursor
            if digit == 1:
                tail = self.tail_length(level)
                if tail is not None:
                    return 1, ("tail", tail)
            return digit, ("id",)
        if phase == "tail":
            if digit != 0:
                return digit, ("id",)
            remaining = cursor[1] - 1
            return 0, (("odometer", self.amount) if remaining == 0 else ("tail", remaining))
        if phase == "odometer":
            n = self.index.at(level)
            total = digit + cursor[1]
            carry = total // n
            return total % n, (("odometer", carry) if carry else ("id",))
        return digit, cursor

    def is_identity(self, cursor) -> bool:
        return cursor[0] == "id"

    def inverse(self):
        params = self.describe()
        params["step"] = -self.amount
        return self.rule, params

    @property
    def involution(self) -> bool:
        return False


@register
class PowerGraftKernel(GraftKernel):
    """Branch levels m_k = 2^k (k >= first_k), z at level m_{k+1}."""

    rule = "ex45_c"

    def __init__(self, index, params):
        super().__init__(index, params)
        self.first_k = int(params.get("first_k", 1))
        if self.first_k < 1:
            raise InvalidParameters("first_k must be >= 1", first_k=self.first_k)
        if index.constant() is None:
            raise InvalidParameters("ex45_c acts on a constant-arity tree")
        self.params = {"first_k": self.first_k, "step": self.amount}

    def tail_length(self, level: int) -> Optional[int]:
        if level >= 2 ** self.first_k and level & (level - 1) == 0:
            return level
        return None


@register
class ChildGraftKernel(GraftKernel):
    """Every level l + 1 >= first_level is a branch level, z is a child of w."""

    rule = "ex44_c"

    def __init__(self, index, params):
        super().__init__(index, params)
        self.first_level = int(params.get("first_level", 2))
        if self.first_level < 2:
            raise InvalidParameters("first_level must be >= 2", first_level=self.first_level)
        self.params = {"first_level": self.first_level, "step": self.amount}

    def tail_length(self, level: int) -> Optional[int]:
        return 1 if level >= self.first_level else None


@register
class ProductKernel(RuleKernel):
    """``factors[0] o factors[1] o ...``; the last factor acts first."""

    rule = "product"

    def __init__(self, index, params):
        super().__init__(index, params)
        self.factors: List[TreeAutomorphism] = list(params["factors"])
        if not self.factors:
            raise InvalidParameters("a product needs at least one factor")
        for f in self.factors:
            check_same_tree(index, f.index)
        self.level_free = all(f.level_free and f.depth is None for f in self.factors)

    def start(self) -> Cursor:
        return tuple(f.start() for f in self.factors)

    def step(self, cursor, digit, level):
        out = digit
        nxt = list(cursor)
        for i in range(len(self.factors) - 1, -1, -1):
            out, nxt[i] = self.factors[i].step(cursor[i], out, level)
        return out, tuple(nxt)

    def is_identity(self, cursor) -> bool:
        return all(f.is_identity_cursor(c) for f, c in zip(self.factors, cursor))

    def inverse(self):
        return self.rule, {"factors": [f.inverse() for f in reversed(self.factors)]}

    def describe(self):
        from cantor.data.serialization import element_to_dict

        return {"factors": [element_to_dict(f) for f in self.factors]}


@register
class InverseKernel(RuleKernel):
    """Inverse by digit search on the base element's cursor."""

    rule = "inverse"

    def __init__(self, index, params):
        super().__init__(index, params)
        self.base: TreeAutomorphism = params["of"]
        check_same_tree(index, self.base.index)
        self.level_free = self.base.level_free and self.base.depth is None

    def start(self) -> Cursor:
        return self.base.start()

    def step(self, cursor, digit, level):
        for source in range(self.index.at(level)):
            out, nxt = self.base.step(cursor, source, level)
            if out == digit:
                return source, nxt
        raise InvalidElement("base element is not a bijection on this level", level=level)

    def is_identity(self, cursor) -> bool:
        return self.base.is_identity_cursor(cursor)

    def describe(self):
        from cantor.data.serialization import element_to_dict

        return {"of": element_to_dict(self.base)}


@register
class SectionKernel(RuleKernel):
    """The section of ``of`` at ``vertex``, acting on the shifted tree."""

    rule = "section"

    def __init__(self, index, params):
        super().__init__(index, params)
        self.base: TreeAutomorphism = params["of"]
        self.vertex = self.base.index.check_word(params["vertex"])
        self.offset = len(self.vertex)
        self.level_free = self.base.level_free and self.base.depth is None
        self._start = self.base.descend(self.vertex)[1]

    def start(self) -> Cursor:
        return self._start

    def step(self, cursor, digit, level):
        return self.base.step(cursor, digit, level + self.offset)

    def is_identity(self, cursor) -> bool:
        return self.base.is_identity_cursor(cursor)

    def inverse(self):
        image = self.base.descend(self.vertex)[0]
        return self.rule, {"of": self.base.inverse(), "vertex": image}

    def describe(self):
        from cantor.data.serialization import element_to_dict

        return {"of": element_to_dict(self.base), "vertex": list(self.vertex)}


class RuleDefined(TreeAutomorphism):
    """An element given by a registered rule id and its parameters."""

    kind = "rule"

    def __init__(self, rule: str, params: Dict[str, Any], index: SphericalIndex, name: Optional[str] = None):
        super().__init__(index, name)
        if rule not in RULES:
            raise InvalidElement(f"unknown rule {rule!r}", rule=rule, known=sorted(RULES))
        self.rule = rule
        self.kernel = RULES[rule](index, params)
        self.level_free = self.kernel.level_free

    @property
    def params(self) -> Dict[str, Any]:
        return self.kernel.params

    def start(self) -> Cursor:
        return self.kernel.start()

    def step(self, cursor, digit, level):
        return self.kernel.step(cursor, digit, level)

    def is_identity_cursor(self, cursor) -> bool:
        return self.kernel.is_identity(cursor)

    def inverse(self) -> TreeAutomorphism:
        if self.rule == "inverse":
            return self.kernel.base
        closed = self.kernel.inverse()
        name = _inverse_name(self.name)
        if self.kernel.involution:
            return self
        if closed is None:
            return RuleDefined("inverse", {"of": self}, self.index, name=name)
        rule, params = closed
        return RuleDefined(rule, params, self.index, name=name)

    def section(self, word: Sequence[int]) -> TreeAutomorphism:
        word = self.index.check_word(word)
        if not word:
            return self
        _, cursor = self.descend(word)
        shifted = self.index.shifted(len(word))
        if self.kernel.is_identity(cursor):
            return RuleDefined("identity", {}, shifted, name="e")
        if self.rule == "section":
            return RuleDefined("section", {"of": self.kernel.base, "vertex": self.kernel.vertex + word}, shifted)
        return RuleDefined("section", {"of": self, "vertex": word}, shifted)

    @property
    def is_involution(self) -> Optional[bool]:
        return self.kernel.involution


def product(factors: Sequence[TreeAutomorphism], name: Optional[str] = None) -> TreeAutomorphism:
    """Lazy exact composition; nested products are flattened and identities dropped."""
    flat: List[TreeAutomorphism] = []
    for f in factors:
        if isinstance(f, RuleDefined) and f.rule == "product":
            flat.extend(f.kernel.factors)
        elif isinstance(f, RuleDefined) and f.rule == "identity":
            continue
        else:
            flat.append(f)
    if name is None:
        name = functools.reduce(product_name, [f.name for f in factors])
    if not flat:
        return RuleDefined("identity", {}, factors[0].index, name=name or "e")
    if len(flat) == 1:
        return flat[0]
    return RuleDefined("product", {"factors": flat}, flat[0].index, name=name)


def odometer(index: SphericalIndex, step: int = 1, name: str = "a") -> RuleDefined:
    return RuleDefined("odometer", {"step": step}, index, name=name)


def swap_jump(index: SphericalIndex, name: str = "b") -> RuleDefined:
    if not isinstance(index, Geometric):
        logger.warning("thm61_b is meant for geometric indices; evaluating anyway")
    return RuleDefined("thm61_b", {}, index, name=name)
