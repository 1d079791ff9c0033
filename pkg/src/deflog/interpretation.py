"""Partial interpretations over finite domains, and the structure text format.

A partial interpretation assigns every symbol of a vocabulary a
well-typed value: domain elements for constants, partial sets over
argument tuples for (first and second order) predicates.  Precision and
truth orders lift pointwise over predicate values; all operations are
pure and return new interpretations.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import CapExceeded, EvaluationError, ParseError, TypeError_
from .limits import DEFAULT_LIMITS, Limits
from .truthvalues import F, T, TV, U, PartialSet, canon_order, leq_prec, leq_truth
from .vocab import DomainAtom, Symbol, Vocabulary, predicate_carrier


def _check_value(sym: Symbol, value, domain: tuple) -> None:
    t = sym.type
    if t.kind == "const":
        if value not in domain:
            raise TypeError_(f"constant {sym.name} assigned {value!r}, not a domain element")
        return
    if not t.is_predicate:
        raise TypeError_(f"symbol {sym.name} of type {t} cannot be interpreted directly")
    if not isinstance(value, PartialSet):
        raise TypeError_(f"predicate {sym.name} needs a PartialSet value")
    dom = set(domain)
    for key in value.carrier:
        if not isinstance(key, tuple) or len(key) != t.arity:
            raise TypeError_(f"{sym.name}: key {key!r} has wrong arity for {t}")
        if t.kind == "pred":
            if any(k not in dom for k in key):
                raise TypeError_(f"{sym.name}: key {key!r} not over the domain")
        else:
            for k, at in zip(key, t.args):
                if at.kind == "domain":
                    if k not in dom:
                        raise TypeError_(f"{sym.name}: {k!r} not a domain element")
                elif not isinstance(k, frozenset):
                    raise TypeError_(
                        f"{sym.name}: second order argument {k!r} is not an exact relation"
                    )


@dataclass(frozen=True)
class PartialInterpretation:
    domain: tuple
    assignments: tuple  # sorted tuple of (Symbol, value)
    _by_symbol: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_symbol", dict(self.assignments))

    @staticmethod
    def make(domain: Iterable, valuation: dict) -> "PartialInterpretation":
        dom = tuple(sorted(set(domain), key=canon_order))
        for sym, value in valuation.items():
            _check_value(sym, value, dom)
        items = tuple(sorted(valuation.items(), key=lambda kv: kv[0].name))
        return PartialInterpretation(dom, items)

    @staticmethod
    def _unchecked(domain: tuple, valuation: dict) -> "PartialInterpretation":
        # for internal revisions that cannot introduce ill-typed values
        items = tuple(sorted(valuation.items(), key=lambda kv: kv[0].name))
        return PartialInterpretation(domain, items)

    @staticmethod
    def empty(domain: Iterable) -> "PartialInterpretation":
        return PartialInterpretation.make(domain, {})

    # -- lookup ------------------------------------------------------------

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary.of(s for s, _ in self.assignments)

    def interprets(self, sym: Symbol) -> bool:
        return sym in self._by_symbol

    def value(self, sym: Symbol):
        try:
            return self._by_symbol[sym]
        except KeyError:
            raise EvaluationError(f"symbol {sym.name} not interpreted") from None

    def atom_value(self, atom: DomainAtom) -> TV:
        return self.value(atom.predicate).value(atom.args)

    def predicate_symbols(self) -> list[Symbol]:
        return [s for s, _ in self.assignments if s.type.is_predicate]

    # -- algebra -----------------------------------------------------------

    def restrict(self, sub) -> "PartialInterpretation":
        syms = set(sub)
        for s in syms:
            if s not in self._by_symbol:
                raise EvaluationError(f"cannot restrict to uninterpreted {s.name}")
        return PartialInterpretation._unchecked(
            self.domain, {s: v for s, v in self.assignments if s in syms}
        )

    def expand(self, sym: Symbol, value) -> "PartialInterpretation":
        _check_value(sym, value, self.domain)
        return self._expand(sym, value)

    def _expand(self, sym: Symbol, value) -> "PartialInterpretation":
        # unvalidated variant for evaluator-internal variable binding
        valuation = dict(self.assignments)
        valuation[sym] = value
        return PartialInterpretation._unchecked(self.domain, valuation)

    def expand_unknown(
        self, syms: Iterable[Symbol], limits: Limits = DEFAULT_LIMITS
    ) -> "PartialInterpretation":
        """Expand with all-unknown values for the given predicate symbols."""
        valuation = dict(self.assignments)
        for s in syms:
            carrier = predicate_carrier(s.type, self.domain, limits)
            valuation[s] = PartialSet.constant(carrier, U)
        return PartialInterpretation.make(self.domain, valuation)

    def revise(self, atoms: Iterable[DomainAtom], v: TV) -> "PartialInterpretation":
        by_pred: dict[Symbol, dict] = {}
        for a in atoms:
            if a.predicate not in self._by_symbol:
                raise EvaluationError(f"unknown predicate {a.predicate.name}")
            by_pred.setdefault(a.predicate, {})[a.args] = v
        valuation = dict(self.assignments)
        for sym, updates in by_pred.items():
            valuation[sym] = valuation[sym].with_values(updates)
        return PartialInterpretation._unchecked(self.domain, valuation)

    # -- orders ------------------------------------------------------------

    def _pointwise(self, other: "PartialInterpretation", rel) -> bool:
        if self.domain != other.domain:
            return False
        mine = dict(self.assignments)
        theirs = dict(other.assignments)
        if set(mine) != set(theirs):
            return False
        for sym, v in mine.items():
            w = theirs[sym]
            if sym.type.is_predicate:
                if v.carrier != w.carrier or not all(
                    rel(a, b) for a, b in zip(v.values, w.values)
                ):
                    return False
            elif v != w:
                return False
        return True

    def leq_prec(self, other: "PartialInterpretation") -> bool:
        return self._pointwise(other, leq_prec)

    def leq_truth(self, other: "PartialInterpretation") -> bool:
        return self._pointwise(other, leq_truth)

    @property
    def is_exact(self) -> bool:
        return all(
            v.is_exact for s, v in self.assignments if s.type.is_predicate
        )

    def exact_on(self, syms: Iterable[Symbol]) -> bool:
        return all(
            self.value(s).is_exact for s in syms if s.type.is_predicate
        )

    # -- atoms -------------------------------------------------------------

    def atoms_with_value(
        self, preds: Iterable[Symbol], v: TV
    ) -> set[DomainAtom]:
        out = set()
        for p in preds:
            if not p.type.is_predicate:
                continue
            for key in self.value(p).keys_with(v):
                out.add(DomainAtom(p, key))
        return out

    def u_atoms(self, preds: Iterable[Symbol]) -> list[DomainAtom]:
        out = []
        for p in sorted(set(preds), key=lambda s: s.name):
            if not p.type.is_predicate or p not in self._by_symbol:
                continue
            for key in self.value(p).keys_with(U):
                out.append(DomainAtom(p, key))
        return out

    def completions(
        self, over: Iterable[Symbol], limits: Limits = DEFAULT_LIMITS
    ) -> Iterator["PartialInterpretation"]:
        """All interpretations exact on `over`, refining this one, identical
        elsewhere; 2^u of them for u unknown atoms over those symbols."""
        unknown = self.u_atoms(over)
        if len(unknown) > limits.max_unknowns:
            raise CapExceeded(
                f"{len(unknown)} unknown atoms exceed cap {limits.max_unknowns}"
            )
        for choice in itertools.product((T, F), repeat=len(unknown)):
            by_pred: dict[Symbol, dict] = {}
            for atom, v in zip(unknown, choice):
                by_pred.setdefault(atom.predicate, {})[atom.args] = v
            valuation = dict(self.assignments)
            for sym, updates in by_pred.items():
                valuation[sym] = valuation[sym].with_values(updates)
            yield PartialInterpretation._unchecked(self.domain, valuation)


# ---------------------------------------------------------------------------
# Structure text format
#
#   domain = {a, b, c}
#   p = {(a, b): t, (b, c): u, *: f}
#   c = a
#
# `*` gives the value of unlisted tuples; integer ranges may be written
# {1..3} on input.  Second order predicate entries use relation literals
# such as {(a,b), (b,c)} as key components; when `*` is absent the listed
# keys define the carrier.


def _fmt_elem(e) -> str:
    if isinstance(e, frozenset):
        inner = sorted(e, key=canon_order)
        return "{" + ", ".join(_fmt_key(k) for k in inner) + "}"
    return str(e)


def _fmt_key(key: tuple) -> str:
    return "(" + ", ".join(_fmt_elem(k) for k in key) + ")"


_DEFAULT_ORDER = {F: 0, U: 1, T: 2}


def write_structure(i: PartialInterpretation) -> str:
    lines = ["domain = {" + ", ".join(_fmt_elem(e) for e in i.domain) + "}"]
    for sym, value in i.assignments:
        if not sym.type.is_predicate:
            lines.append(f"{sym.name} = {_fmt_elem(value)}")
            continue
        counts = {F: 0, U: 0, T: 0}
        for v in value.values:
            counts[v] += 1
        default = max(counts, key=lambda v: (counts[v], -_DEFAULT_ORDER[v]))
        entries = [
            f"{_fmt_key(k)}: {v.value}" for k, v in value.items() if v is not default
        ]
        if sym.type.kind == "pred":
            entries.append(f"*: {default.value}")
        else:
            # second order carriers are explicit: list every entry
            entries = [f"{_fmt_key(k)}: {v.value}" for k, v in value.items()]
        lines.append(f"{sym.name} = {{" + ", ".join(entries) + "}")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(
    r"\s*(?:(?P<int>-?\d+\.\.-?\d+|-?\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[{}(),:=*]))"
)


def _tokenize_structure(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("//", 1)[0]
        pos = 0
        while pos < len(line):
            m = _TOKEN.match(line, pos)
            if not m:
                if line[pos:].strip():
                    raise ParseError(f"bad character {line[pos]!r}", lineno, pos + 1)
                break
            pos = m.end()
            for kind in ("int", "name", "punct"):
                if m.group(kind) is not None:
                    tokens.append((kind, m.group(kind), lineno))
                    break
        tokens.append(("newline", "", lineno))
    return tokens


class _StructReader:
    def __init__(self, text: str, vocab: Vocabulary, limits: Limits):
        self.tokens = _tokenize_structure(text)
        self.pos = 0
        self.vocab = vocab
        self.limits = limits

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ("eof", "", 0)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, text, line = self.next()
        if text != value:
            raise ParseError(f"expected {value!r}, got {text or kind!r}", line)
        return text

    def skip_newlines(self):
        while self.peek()[0] == "newline":
            self.next()

    def element(self):
        kind, text, line = self.next()
        if kind == "int":
            return int(text)
        if kind == "name":
            return text
        raise ParseError(f"expected a domain element, got {text!r}", line)

    def elem_or_relation(self):
        if self.peek()[1] == "{":
            self.next()
            rel = set()
            while self.peek()[1] != "}":
                rel.add(self.key_tuple())
                if self.peek()[1] == ",":
                    self.next()
            self.expect("}")
            return frozenset(rel)
        return self.element()

    def key_tuple(self) -> tuple:
        self.expect("(")
        parts = []
        while self.peek()[1] != ")":
            parts.append(self.elem_or_relation())
            if self.peek()[1] == ",":
                self.next()
        self.expect(")")
        return tuple(parts)

    def truth(self) -> TV:
        kind, text, line = self.next()
        if text in ("t", "u", "f"):
            return TV(text)
        raise ParseError(f"expected t, u or f, got {text!r}", line)

    def read(self) -> PartialInterpretation:
        domain: list = []
        valuation: dict = {}
        seen_domain = False
        self.skip_newlines()
        while self.peek()[0] != "eof":
            kind, name, line = self.next()
            if kind != "name":
                raise ParseError(f"expected a symbol name, got {name!r}", line)
            self.expect("=")
            if name == "domain":
                if seen_domain:
                    raise ParseError("duplicate domain block", line)
                seen_domain = True
                domain = self.read_domain()
            else:
                sym = self.vocab.get(name)
                if sym is None:
                    raise ParseError(f"symbol {name!r} not in vocabulary", line)
                if sym in valuation:
                    raise ParseError(f"duplicate assignment to {name!r}", line)
                if not seen_domain:
                    raise ParseError("domain must be declared first", line)
                valuation[sym] = self.read_value(sym, domain, line)
            self.skip_newlines()
        if not seen_domain:
            raise ParseError("structure has no domain block")
        # unmentioned predicates default to all-unknown
        i = PartialInterpretation.make(domain, valuation)
        missing = [
            s
            for s in self.vocab
            if s.type.is_predicate and s not in {k for k in valuation}
        ]
        return i.expand_unknown(missing, self.limits)

    def read_domain(self) -> list:
        self.expect("{")
        out: list = []
        while self.peek()[1] != "}":
            kind, text, line = self.next()
            if kind == "int" and ".." in text:
                lo, hi = (int(p) for p in text.split(".."))
                out.extend(range(lo, hi + 1))
            elif kind == "int":
                out.append(int(text))
            elif kind == "name":
                out.append(text)
            else:
                raise ParseError(f"bad domain element {text!r}", line)
            if self.peek()[1] == ",":
                self.next()
        self.expect("}")
        return out

    def read_value(self, sym: Symbol, domain: list, line: int):
        if not sym.type.is_predicate:
            return self.elem_or_relation()
        self.expect("{")
        entries: dict[tuple, TV] = {}
        default: TV | None = None
        while self.peek()[1] != "}":
            if self.peek()[1] == "*":
                self.next()
                self.expect(":")
                default = self.truth()
            else:
                key = self.key_tuple()
                self.expect(":")
                entries[key] = self.truth()
            if self.peek()[1] == ",":
                self.next()
        self.expect("}")
        if default is not None:
            carrier = predicate_carrier(sym.type, domain, self.limits)
            full = {tuple(k): default for k in carrier}
            for key, v in entries.items():
                if key not in full:
                    raise ParseError(f"{sym.name}: key {key} outside carrier", line)
                full[key] = v
            entries = full
        elif sym.type.kind == "pred":
            carrier = set(map(tuple, predicate_carrier(sym.type, domain, self.limits)))
            if set(entries) != carrier:
                raise ParseError(
                    f"{sym.name}: entries do not cover the carrier and no '*' default given",
                    line,
                )
        return PartialSet.from_map(entries)


def read_structure(
    text: str, vocab: Vocabulary, limits: Limits = DEFAULT_LIMITS
) -> PartialInterpretation:
    return _StructReader(text, vocab, limits).read()
