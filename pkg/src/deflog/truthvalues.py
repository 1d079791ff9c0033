"""Three-valued truth values, partial sets, and ultimate approximations.

The value space is THREE = {t, u, f} with two partial orders:

* the truth order:      f <= u <= t
* the precision order:  u <=p f, u <=p t  (t and f incomparable)

Exact values are t and f.  A two-valued boolean function F is lifted to
partial inputs by its *ultimate approximation*: the greatest lower bound
under <=p of F over all exact completions of the input.  The Kleene
connectives, the three-valued quantifiers and the three-valued aggregate
tests below all coincide with that construction; tests check this
against an independent brute-force oracle.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import CapExceeded, EvaluationError
from .limits import DEFAULT_LIMITS, Limits


class TV(enum.Enum):
    """A three-valued truth value."""

    TRUE = "t"
    UNKNOWN = "u"
    FALSE = "f"

    def __repr__(self) -> str:
        return self.value

    def __str__(self) -> str:
        return self.value

    @property
    def is_exact(self) -> bool:
        return self is not TV.UNKNOWN

    @staticmethod
    def of(b: bool) -> "TV":
        return TV.TRUE if b else TV.FALSE


T, U, F = TV.TRUE, TV.UNKNOWN, TV.FALSE

# rank in the truth order f < u < t
_TRUTH_RANK = {F: 0, U: 1, T: 2}


def leq_truth(a: TV, b: TV) -> bool:
    """True iff a <= b in the truth order f <= u <= t."""
    return _TRUTH_RANK[a] <= _TRUTH_RANK[b]


def leq_prec(a: TV, b: TV) -> bool:
    """True iff a <=p b: u is below both exact values, t and f incomparable."""
    return a is b or a is U


def min_truth(values: Iterable[TV], empty: TV = T) -> TV:
    """Minimum under the truth order; `empty` for an empty iterable."""
    out = empty
    first = True
    for v in values:
        out = v if first or _TRUTH_RANK[v] < _TRUTH_RANK[out] else out
        first = False
    return out


def max_truth(values: Iterable[TV], empty: TV = F) -> TV:
    """Maximum under the truth order; `empty` for an empty iterable."""
    out = empty
    first = True
    for v in values:
        out = v if first or _TRUTH_RANK[v] > _TRUTH_RANK[out] else out
        first = False
    return out


def glb_prec(values: Iterable[TV]) -> TV:
    """Greatest lower bound under <=p of a nonempty collection.

    Returns v when every input equals the exact value v, and u otherwise.
    """
    it = iter(values)
    try:
        out = next(it)
    except StopIteration:
        raise EvaluationError("glb_prec of an empty collection") from None
    for v in it:
        if v is not out:
            return U
    return out


# ---------------------------------------------------------------------------
# Connectives


def neg(a: TV) -> TV:
    if a is U:
        return U
    return T if a is F else F


def conj(a: TV, b: TV) -> TV:
    return min_truth((a, b))


def disj(a: TV, b: TV) -> TV:
    return max_truth((a, b))


def implies(a: TV, b: TV) -> TV:
    # Kleene material implication; equals the ultimate approximation of
    # the classical table (u => u is u, not t).
    return max_truth((neg(a), b))


def iff(a: TV, b: TV) -> TV:
    if a is U or b is U:
        return U
    return TV.of(a is b)


_CONNECTIVES: dict[str, tuple[int, Callable[..., TV]]] = {
    "~": (1, neg),
    "&": (2, conj),
    "|": (2, disj),
    "=>": (2, implies),
    "<=>": (2, iff),
}


def kleene_connective(c: str, args: Sequence[TV]) -> TV:
    """Apply the Kleene table of connective c in {~, &, |, =>, <=>}."""
    try:
        arity, fn = _CONNECTIVES[c]
    except KeyError:
        raise EvaluationError(f"unknown connective {c!r}") from None
    if len(args) != arity:
        raise EvaluationError(f"connective {c!r} expects {arity} args, got {len(args)}")
    return fn(*args)


# ---------------------------------------------------------------------------
# Partial sets


def canon_order(key: Hashable):
    """A total-order sort key for carrier elements.

    Handles domain elements (ints, strings), tuples of them, and
    frozensets of tuples (exact relation values used as second order
    arguments).
    """
    if isinstance(key, tuple):
        return (2, tuple(canon_order(k) for k in key))
    if isinstance(key, frozenset):
        return (3, tuple(sorted(canon_order(k) for k in key)))
    if isinstance(key, bool):
        return (0, int(key))
    if isinstance(key, int):
        return (0, key)
    return (1, str(key))


@dataclass(frozen=True)
class PartialSet:
    """A total map from a finite ordered carrier to THREE."""

    carrier: tuple
    values: tuple

    def __post_init__(self):
        if len(self.carrier) != len(self.values):
            raise EvaluationError("carrier/value length mismatch")
        object.__setattr__(
            self, "_index", {k: n for n, k in enumerate(self.carrier)}
        )

    @staticmethod
    def from_map(mapping: Mapping[Hashable, TV]) -> "PartialSet":
        keys = tuple(sorted(mapping, key=canon_order))
        return PartialSet(keys, tuple(mapping[k] for k in keys))

    @staticmethod
    def constant(carrier: Iterable[Hashable], v: TV) -> "PartialSet":
        keys = tuple(sorted(carrier, key=canon_order))
        return PartialSet(keys, (v,) * len(keys))

    def value(self, key: Hashable) -> TV:
        try:
            return self.values[self._index[key]]
        except KeyError:
            raise EvaluationError(f"key {key!r} not in carrier") from None

    def __contains__(self, key: Hashable) -> bool:
        return key in self._index

    def items(self) -> Iterator[tuple[Hashable, TV]]:
        return zip(self.carrier, self.values)

    def with_values(self, updates: Mapping[Hashable, TV]) -> "PartialSet":
        vals = list(self.values)
        for key, v in updates.items():
            try:
                vals[self._index[key]] = v
            except KeyError:
                raise EvaluationError(f"key {key!r} not in carrier") from None
        return PartialSet(self.carrier, tuple(vals))

    @property
    def is_exact(self) -> bool:
        return U not in self.values

    def keys_with(self, v: TV) -> tuple:
        return tuple(k for k, w in self.items() if w is v)

    def true_keys(self) -> frozenset:
        return frozenset(self.keys_with(T))

    def leq_prec(self, other: "PartialSet") -> bool:
        return self.carrier == other.carrier and all(
            leq_prec(a, b) for a, b in zip(self.values, other.values)
        )

    def leq_truth(self, other: "PartialSet") -> bool:
        return self.carrier == other.carrier and all(
            leq_truth(a, b) for a, b in zip(self.values, other.values)
        )

    def completions(self, limits: Limits = DEFAULT_LIMITS) -> Iterator["PartialSet"]:
        """All exact refinements; 2^u of them for u unknown elements."""
        unknown = [i for i, v in enumerate(self.values) if v is U]
        if len(unknown) > limits.max_unknowns:
            raise CapExceeded(
                f"{len(unknown)} unknown elements exceed cap {limits.max_unknowns}"
            )
        base = list(self.values)
        for choice in itertools.product((T, F), repeat=len(unknown)):
            vals = list(base)
            for i, v in zip(unknown, choice):
                vals[i] = v
            yield PartialSet(self.carrier, tuple(vals))


def exact_set(carrier: Iterable[Hashable], members: Iterable[Hashable]) -> PartialSet:
    member_set = set(members)
    return PartialSet.from_map(
        {k: TV.of(k in member_set) for k in carrier}
    )


# ---------------------------------------------------------------------------
# Ultimate approximation of boolean functions


@dataclass(frozen=True)
class BoolFn:
    """A two-valued function, total on exact inputs.

    `fn` receives either a tuple of exact TVs or an exact PartialSet,
    matching what gets passed to `ultimate_approx`.
    """

    name: str
    fn: Callable[..., TV]

    def __call__(self, x) -> TV:
        out = self.fn(x)
        if out is U:
            raise EvaluationError(f"boolean function {self.name} returned u")
        return out


def ultimate_approx(fn: BoolFn, x, limits: Limits = DEFAULT_LIMITS) -> TV:
    """glb under <=p of fn over all exact completions of x.

    x is a tuple of TVs or a PartialSet.  Raises CapExceeded when the
    completion count would exceed 2^limits.max_unknowns.
    """
    if isinstance(x, PartialSet):
        return glb_prec(fn(c) for c in x.completions(limits))
    unknown = [i for i, v in enumerate(x) if v is U]
    if len(unknown) > limits.max_unknowns:
        raise CapExceeded(
            f"{len(unknown)} unknown positions exceed cap {limits.max_unknowns}"
        )
    results = []
    for choice in itertools.product((T, F), repeat=len(unknown)):
        args = list(x)
        for i, v in zip(unknown, choice):
            args[i] = v
        results.append(fn(tuple(args)))
    return glb_prec(results)


# ---------------------------------------------------------------------------
# Quantifiers and aggregates


def approx_quantifier(q: str, s: PartialSet) -> TV:
    """Three-valued universal/existential over the range of s.

    Coincides with the ultimate approximation of the classical
    quantifier; empty carriers are vacuously t for "forall" and f for
    "exists".
    """
    if q == "forall":
        return min_truth(s.values, empty=T)
    if q == "exists":
        return max_truth(s.values, empty=F)
    raise EvaluationError(f"unknown quantifier {q!r}")


_CMP = {"=": lambda a, b: a == b, "<": lambda a, b: a < b, ">": lambda a, b: a > b}


def _as_tuple(key) -> tuple:
    return key if isinstance(key, tuple) else (key,)


def approx_aggregate(
    agg: str, cmp: str, s: PartialSet, n: int, limits: Limits = DEFAULT_LIMITS
) -> TV:
    """Ultimate approximation of the test  agg(S) cmp n  over completions of s.

    agg is "card" or "sum"; for "sum" the first component of every
    carrier key must be an integer.
    """
    if cmp not in _CMP:
        raise EvaluationError(f"unknown comparison {cmp!r}")
    test = _CMP[cmp]
    if agg == "card":
        # interval shortcut: achievable cardinalities are exactly [lo, hi]
        lo = sum(1 for v in s.values if v is T)
        hi = lo + sum(1 for v in s.values if v is U)
        if cmp == "=":
            can_true = lo <= n <= hi
            can_false = not (lo == hi == n)
        elif cmp == "<":
            can_true, can_false = lo < n, hi >= n
        else:
            can_true, can_false = hi > n, lo <= n
        if can_true and can_false:
            return U
        return TV.of(can_true)
    if agg == "sum":
        weights = []
        for key in s.carrier:
            first = _as_tuple(key)[0]
            if not isinstance(first, int) or isinstance(first, bool):
                raise EvaluationError(
                    f"sum aggregate needs integer-keyed tuples, got {key!r}"
                )
            weights.append(first)
        base = sum(w for w, v in zip(weights, s.values) if v is T)
        unknown = [w for w, v in zip(weights, s.values) if v is U]
        if len(unknown) > limits.max_unknowns:
            raise CapExceeded(
                f"{len(unknown)} unknown elements exceed cap {limits.max_unknowns}"
            )
        outcomes = set()
        for picks in itertools.product((0, 1), repeat=len(unknown)):
            total = base + sum(w for w, p in zip(unknown, picks) if p)
            outcomes.add(test(total, n))
            if len(outcomes) == 2:
                return U
        return TV.of(outcomes == {True})
    raise EvaluationError(f"unknown aggregate {agg!r}")
