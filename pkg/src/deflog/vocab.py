"""Typed symbols, vocabularies and domain atoms.

The simple type system distinguishes the domain type, booleans, first
order predicates of arity n, first order constants (0-ary functions),
and second order predicates whose argument types are first order
predicate types or the domain type.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import CapExceeded, TypeError_
from .limits import DEFAULT_LIMITS, Limits


@dataclass(frozen=True)
class Type:
    kind: str  # 'domain' | 'bool' | 'pred' | 'const' | 'so-pred'
    arity: int = 0
    args: tuple["Type", ...] = ()

    def __post_init__(self):
        if self.kind == "so-pred":
            for a in self.args:
                if a.kind not in ("pred", "domain"):
                    raise TypeError_(
                        "second order argument types must be first order "
                        f"predicate types or the domain type, got {a}"
                    )
        object.__setattr__(
            self, "_hash", hash((self.kind, self.arity, self.args))
        )

    def __hash__(self) -> int:  # cached: types are hashed in hot loops
        return self._hash

    @property
    def is_predicate(self) -> bool:
        return self.kind in ("pred", "so-pred")

    def __str__(self) -> str:
        if self.kind == "pred":
            return f"pred/{self.arity}"
        if self.kind == "so-pred":
            return "so-pred(" + ", ".join(str(a) for a in self.args) + ")"
        return self.kind


DOMAIN = Type("domain")
BOOL = Type("bool")
CONST = Type("const")


def pred(arity: int) -> Type:
    return Type("pred", arity=arity)


def so_pred(*args: Type) -> Type:
    return Type("so-pred", arity=len(args), args=tuple(args))


@dataclass(frozen=True)
class Symbol:
    """A named, typed symbol.

    kind is 'user', 'interpreted' or 'template'; the latter two make up
    the template vocabulary.
    """

    name: str
    type: Type
    kind: str = "user"

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.name, self.type, self.kind)))

    def __hash__(self) -> int:  # cached: symbols key every interpretation dict
        return self._hash

    def __str__(self) -> str:
        return self.name

    @property
    def in_template_vocab(self) -> bool:
        return self.kind in ("interpreted", "template")


@dataclass(frozen=True)
class Vocabulary:
    symbols: tuple[Symbol, ...] = ()
    _by_name: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        by_name: dict[str, Symbol] = {}
        for s in self.symbols:
            if s.name in by_name and by_name[s.name] != s:
                raise TypeError_(f"duplicate symbol name {s.name!r}")
            by_name[s.name] = s
        object.__setattr__(self, "_by_name", by_name)

    @staticmethod
    def of(symbols: Iterable[Symbol]) -> "Vocabulary":
        seen: dict[str, Symbol] = {}
        for s in symbols:
            if s.name in seen and seen[s.name] != s:
                raise TypeError_(f"duplicate symbol name {s.name!r}")
            seen[s.name] = s
        return Vocabulary(tuple(sorted(seen.values(), key=lambda s: s.name)))

    def __contains__(self, sym: Symbol) -> bool:
        return self._by_name.get(sym.name) == sym

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def get(self, name: str) -> Symbol | None:
        return self._by_name.get(name)

    def issubset(self, other: "Vocabulary") -> bool:
        return all(s in other for s in self.symbols)

    def union(self, other: "Vocabulary") -> "Vocabulary":
        return Vocabulary.of(self.symbols + other.symbols)

    def without(self, drop: Iterable[Symbol]) -> "Vocabulary":
        dropped = set(drop)
        return Vocabulary.of(s for s in self.symbols if s not in dropped)


@dataclass(frozen=True)
class DomainAtom:
    """A predicate symbol applied to a tuple of ground argument values."""

    predicate: Symbol
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.predicate, self.args)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        if not self.args:
            return self.predicate.name
        return f"{self.predicate.name}({', '.join(map(repr, self.args))})"


def arg_value_space(
    t: Type, domain: Sequence, limits: Limits = DEFAULT_LIMITS
) -> list:
    """All exact values a symbol/argument of type t can take over `domain`.

    For a predicate type the values are frozensets of tuples.  The
    second-order-argument cap guards the 2^(|D|^n) blowup.
    """
    if t.kind == "domain":
        return list(domain)
    if t.kind in ("pred",):
        base = len(domain) ** t.arity
        if base > limits.max_so_arg_base:
            raise CapExceeded(
                f"|D|^{t.arity} = {base} exceeds second order argument cap "
                f"{limits.max_so_arg_base}"
            )
        tuples = list(itertools.product(domain, repeat=t.arity))
        return [
            frozenset(itertools.compress(tuples, mask))
            for mask in itertools.product((0, 1), repeat=len(tuples))
        ]
    raise TypeError_(f"type {t} has no enumerable first order value space")


def predicate_carrier(
    t: Type, domain: Sequence, limits: Limits = DEFAULT_LIMITS
) -> list[tuple]:
    """The set of argument tuples (domain atom keys) of a predicate type."""
    if t.kind == "pred":
        return list(itertools.product(domain, repeat=t.arity))
    if t.kind == "so-pred":
        spaces = [arg_value_space(a, domain, limits) for a in t.args]
        return list(itertools.product(*spaces))
    raise TypeError_(f"{t} is not a predicate type")
