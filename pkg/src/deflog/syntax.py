"""Abstract syntax for the second order logic with nested definitions.

Expressions cover first/second order atoms, the five connectives, first
and second order quantifiers, cardinality/sum aggregates, interpreted
integer comparisons, rule sets used as formulas (definitions), and
let-blocks.  This module also provides free-symbol computation, the
type checker, capture-avoiding substitution, the fragment classifier
and the canonical unparser.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

from .vocab import CONST, DOMAIN, Symbol, Type, pred

# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class SymTerm:
    symbol: Symbol


@dataclass(frozen=True)
class IntTerm:
    value: int


@dataclass(frozen=True)
class AddTerm:
    left: "Term"
    right: "Term"


Term = Union[SymTerm, IntTerm, AddTerm]


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Atom1:
    """First order predicate application p(t1, ..., tn)."""

    predicate: Symbol
    args: tuple


@dataclass(frozen=True)
class Atom2:
    """Second order predicate application P(a1, ..., an)."""

    predicate: Symbol
    args: tuple


@dataclass(frozen=True)
class Cmp:
    """Interpreted comparison over integer domain elements."""

    op: str  # '=', '<', '>'
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Implies:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Iff:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class ForallFO:
    var: Symbol
    body: "Expr"


@dataclass(frozen=True)
class ExistsFO:
    var: Symbol
    body: "Expr"


@dataclass(frozen=True)
class ForallSO:
    var: Symbol
    body: "Expr"


@dataclass(frozen=True)
class ExistsSO:
    var: Symbol
    body: "Expr"


@dataclass(frozen=True)
class Aggregate:
    agg: str  # 'card' | 'sum'
    cmp: str  # '=', '<', '>'
    vars: tuple  # tuple[Symbol, ...]
    body: "Expr"
    bound: Term


@dataclass(frozen=True)
class Rule:
    """A rule  forall xs (head(xs) <- body)."""

    head: Symbol
    head_vars: tuple  # tuple[Symbol, ...]
    body: "Expr"


@dataclass(frozen=True)
class RuleSet:
    rules: tuple  # tuple[Rule, ...]

    def __post_init__(self):
        # a rule set is a set: canonicalize order, drop duplicates
        unique = tuple(dict.fromkeys(self.rules))
        object.__setattr__(self, "rules", tuple(sorted(unique, key=repr)))

    @property
    def defined_symbols(self) -> frozenset:
        return frozenset(r.head for r in self.rules)

    @property
    def parameters(self) -> frozenset:
        occurring = set()
        for r in self.rules:
            occurring |= free_symbols(r.body) - set(r.head_vars)
        return frozenset(occurring - self.defined_symbols)

    @property
    def free(self) -> frozenset:
        return self.defined_symbols | self.parameters


@dataclass(frozen=True)
class DefinitionExpr:
    """A rule set used as a formula (well-founded truth assignment)."""

    ruleset: RuleSet


@dataclass(frozen=True)
class Let:
    """let Delta in body: the defined symbols are scoped to body."""

    ruleset: RuleSet
    body: "Expr"


Expr = Union[
    Atom1, Atom2, Cmp, Not, And, Or, Implies, Iff,
    ForallFO, ExistsFO, ForallSO, ExistsSO, Aggregate, DefinitionExpr, Let,
]

_BINARY = {And: "&", Or: "|", Implies: "=>", Iff: "<=>"}


# ---------------------------------------------------------------------------
# Free symbols


def term_symbols(t: Term) -> frozenset:
    if isinstance(t, SymTerm):
        return frozenset((t.symbol,))
    if isinstance(t, IntTerm):
        return frozenset()
    return term_symbols(t.left) | term_symbols(t.right)


def free_symbols(e) -> frozenset:
    """Free symbols of an expression or rule set."""
    if isinstance(e, RuleSet):
        return e.free
    if isinstance(e, (Atom1, Atom2)):
        out = frozenset((e.predicate,))
        for a in e.args:
            out |= term_symbols(a)
        return out
    if isinstance(e, Cmp):
        return term_symbols(e.left) | term_symbols(e.right)
    if isinstance(e, Not):
        return free_symbols(e.body)
    if type(e) in _BINARY:
        return free_symbols(e.left) | free_symbols(e.right)
    if isinstance(e, (ForallFO, ExistsFO, ForallSO, ExistsSO)):
        return free_symbols(e.body) - {e.var}
    if isinstance(e, Aggregate):
        return (free_symbols(e.body) - set(e.vars)) | term_symbols(e.bound)
    if isinstance(e, DefinitionExpr):
        return e.ruleset.free
    if isinstance(e, Let):
        return (e.ruleset.free | free_symbols(e.body)) - e.ruleset.defined_symbols
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Type checking


def _term_type(t: Term, scope: dict, errors: list):
    """Return the Type of a term within `scope` (name -> Symbol)."""
    if isinstance(t, IntTerm):
        return DOMAIN
    if isinstance(t, AddTerm):
        for side in (t.left, t.right):
            st = _term_type(side, scope, errors)
            if st is not None and st.kind not in ("const", "domain"):
                errors.append(f"arithmetic over non-domain term of type {st}")
        return DOMAIN
    sym = t.symbol
    if scope.get(sym.name) != sym:
        errors.append(f"symbol {sym.name} not in scope")
        return None
    return sym.type


def _is_domain_typed(t: Type | None) -> bool:
    return t is None or t.kind in ("const", "domain")


def _check_expr(e, scope: dict, errors: list) -> None:
    if isinstance(e, Atom1):
        pt = _term_type(SymTerm(e.predicate), scope, errors)
        if pt is not None and pt.kind != "pred":
            errors.append(f"{e.predicate.name} used as a first order predicate but has type {pt}")
            return
        if pt is not None and pt.arity != len(e.args):
            errors.append(
                f"{e.predicate.name}/{pt.arity} applied to {len(e.args)} arguments"
            )
        for a in e.args:
            if not _is_domain_typed(_term_type(a, scope, errors)):
                errors.append(f"non-domain argument in {e.predicate.name}(...)")
    elif isinstance(e, Atom2):
        pt = _term_type(SymTerm(e.predicate), scope, errors)
        if pt is not None and pt.kind != "so-pred":
            errors.append(f"{e.predicate.name} used as a second order predicate but has type {pt}")
            return
        if pt is not None and len(pt.args) != len(e.args):
            errors.append(
                f"{e.predicate.name} expects {len(pt.args)} arguments, got {len(e.args)}"
            )
            return
        for a, at in zip(e.args, pt.args if pt else ()):
            got = _term_type(a, scope, errors)
            if got is None:
                continue
            if at.kind == "domain":
                if not _is_domain_typed(got):
                    errors.append(
                        f"{e.predicate.name}: expected a domain argument, got {got}"
                    )
            elif got != at:
                errors.append(f"{e.predicate.name}: expected {at}, got {got}")
    elif isinstance(e, Cmp):
        for side in (e.left, e.right):
            if not _is_domain_typed(_term_type(side, scope, errors)):
                errors.append(f"comparison over a non-domain term")
    elif isinstance(e, Not):
        _check_expr(e.body, scope, errors)
    elif type(e) in _BINARY:
        _check_expr(e.left, scope, errors)
        _check_expr(e.right, scope, errors)
    elif isinstance(e, (ForallFO, ExistsFO)):
        if e.var.type != CONST:
            errors.append(f"first order variable {e.var.name} must be domain-valued")
        _check_expr(e.body, {**scope, e.var.name: e.var}, errors)
    elif isinstance(e, (ForallSO, ExistsSO)):
        if e.var.type.kind != "pred":
            errors.append(
                f"second order variable {e.var.name} must have a first order predicate type"
            )
        _check_expr(e.body, {**scope, e.var.name: e.var}, errors)
    elif isinstance(e, Aggregate):
        inner = dict(scope)
        for v in e.vars:
            if v.type != CONST:
                errors.append(f"aggregate variable {v.name} must be domain-valued")
            inner[v.name] = v
        _check_expr(e.body, inner, errors)
        if not _is_domain_typed(_term_type(e.bound, scope, errors)):
            errors.append("aggregate bound must be a domain term")
    elif isinstance(e, DefinitionExpr):
        _check_ruleset(e.ruleset, scope, errors)
    elif isinstance(e, Let):
        inner = dict(scope)
        for d in e.ruleset.defined_symbols:
            inner[d.name] = d
        _check_ruleset(e.ruleset, scope, errors)
        _check_expr(e.body, inner, errors)
    else:
        errors.append(f"not an expression: {e!r}")


def head_var_types(head: Symbol) -> list[Type]:
    """The types rule head variables take, per the head's predicate type."""
    if head.type.kind == "pred":
        return [CONST] * head.type.arity
    if head.type.kind == "so-pred":
        return [CONST if a.kind == "domain" else a for a in head.type.args]
    return []


def _check_ruleset(rs: RuleSet, scope: dict, errors: list) -> None:
    inner = dict(scope)
    for d in rs.defined_symbols:
        inner[d.name] = d
    for r in rs.rules:
        if not r.head.type.is_predicate:
            errors.append(f"rule head {r.head.name} is not a predicate")
            continue
        expected = head_var_types(r.head)
        if len(expected) != len(r.head_vars):
            errors.append(
                f"rule for {r.head.name} has {len(r.head_vars)} head variables, "
                f"expected {len(expected)}"
            )
            continue
        body_scope = dict(inner)
        for v, t in zip(r.head_vars, expected):
            if v.type != t:
                errors.append(
                    f"head variable {v.name} of {r.head.name} has type {v.type}, expected {t}"
                )
            body_scope[v.name] = v
        _check_expr(r.body, body_scope, errors)


def typecheck(e, sigma) -> list[str]:
    """Check an expression or rule set against vocabulary `sigma`.

    Returns a list of diagnostics; empty means well-typed.
    """
    errors: list[str] = []
    scope = {s.name: s for s in sigma}
    if isinstance(e, RuleSet):
        _check_ruleset(e, scope, errors)
    else:
        _check_expr(e, scope, errors)
    return errors


# ---------------------------------------------------------------------------
# Substitution and renaming


class NameGen:
    """Deterministic fresh-name source for capture avoidance."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)
        self.counter = itertools.count(1)

    def fresh(self, base: Symbol) -> Symbol:
        name = base.name
        while name in self.taken:
            name = f"{base.name}_{next(self.counter)}"
        self.taken.add(name)
        return Symbol(name, base.type, base.kind)


def _subst_term(t: Term, mapping: dict) -> Term:
    if isinstance(t, SymTerm):
        repl = mapping.get(t.symbol)
        if repl is None:
            return t
        return repl if not isinstance(repl, Symbol) else SymTerm(repl)
    if isinstance(t, AddTerm):
        return AddTerm(_subst_term(t.left, mapping), _subst_term(t.right, mapping))
    return t


def _subst_pred(p: Symbol, mapping: dict) -> Symbol:
    repl = mapping.get(p)
    if repl is None:
        return p
    if isinstance(repl, SymTerm):
        repl = repl.symbol
    if not isinstance(repl, Symbol):
        raise TypeError(f"cannot substitute term {repl!r} in predicate position")
    return repl


def _mapping_symbols(mapping: dict) -> set:
    out = set()
    for v in mapping.values():
        out |= term_symbols(v) if not isinstance(v, Symbol) else {v}
    return out


def _enter_binders(binders, mapping, gen):
    """Drop shadowed entries and freshen binders that would capture."""
    mapping = {k: v for k, v in mapping.items() if k not in binders}
    clash = _mapping_symbols(mapping)
    renames = {}
    out = []
    for b in binders:
        if b in clash:
            nb = gen.fresh(b)
            renames[b] = nb
            out.append(nb)
        else:
            gen.taken.add(b.name)
            out.append(nb := b)
    if renames:
        mapping = {**mapping, **renames}
    return tuple(out), mapping


def substitute(e, mapping: dict, gen: NameGen | None = None):
    """Replace free symbol occurrences, capture-avoidingly.

    mapping: Symbol -> Symbol or Term.  Predicate positions require the
    replacement to be a symbol.
    """
    if gen is None:
        gen = NameGen({s.name for s in free_symbols(e) | _mapping_symbols(mapping)})
    if not mapping:
        return e
    if isinstance(e, Atom1):
        p = _subst_pred(e.predicate, mapping)
        atom_cls = Atom2 if p.type.kind == "so-pred" else Atom1
        return atom_cls(p, tuple(_subst_term(a, mapping) for a in e.args))
    if isinstance(e, Atom2):
        return Atom2(
            _subst_pred(e.predicate, mapping),
            tuple(_subst_term(a, mapping) for a in e.args),
        )
    if isinstance(e, Cmp):
        return Cmp(e.op, _subst_term(e.left, mapping), _subst_term(e.right, mapping))
    if isinstance(e, Not):
        return Not(substitute(e.body, mapping, gen))
    if type(e) in _BINARY:
        return type(e)(substitute(e.left, mapping, gen), substitute(e.right, mapping, gen))
    if isinstance(e, (ForallFO, ExistsFO, ForallSO, ExistsSO)):
        (var,), inner = _enter_binders((e.var,), mapping, gen)
        return type(e)(var, substitute(e.body, inner, gen))
    if isinstance(e, Aggregate):
        vars_, inner = _enter_binders(e.vars, mapping, gen)
        return Aggregate(
            e.agg, e.cmp, vars_, substitute(e.body, inner, gen),
            _subst_term(e.bound, mapping),
        )
    if isinstance(e, DefinitionExpr):
        return DefinitionExpr(subst_ruleset(e.ruleset, mapping, gen))
    if isinstance(e, Let):
        defined = tuple(sorted(e.ruleset.defined_symbols, key=lambda s: s.name))
        renamed, inner = _enter_binders(defined, mapping, gen)
        rs = e.ruleset
        if renamed != defined:
            rs = subst_ruleset(rs, dict(zip(defined, renamed)), gen)
        rs = subst_ruleset(rs, {k: v for k, v in inner.items() if k not in renamed}, gen)
        return Let(rs, substitute(e.body, inner, gen))
    raise TypeError(f"not an expression: {e!r}")


def subst_ruleset(rs: RuleSet, mapping: dict, gen: NameGen | None = None) -> RuleSet:
    """Substitute parameters of a rule set (defined symbols via mapping too)."""
    if gen is None:
        gen = NameGen({s.name for s in rs.free | _mapping_symbols(mapping)})
    rules = []
    for r in rs.rules:
        head = _subst_pred(r.head, mapping)
        head_vars, inner = _enter_binders(r.head_vars, mapping, gen)
        rules.append(Rule(head, head_vars, substitute(r.body, inner, gen)))
    return RuleSet(tuple(rules))


# ---------------------------------------------------------------------------
# Fragment classification (smallest of FO(ID*) / ESO(ID*) / ASO(ID*))

FRAGMENT_FO = "FO(ID*)"
FRAGMENT_ESO = "ESO(ID*)"
FRAGMENT_ASO = "ASO(ID*)"
FRAGMENT_SO = "SO(ID*)-only"


def desugar(e):
    """Rewrite |, =>, <=> and first order forall into ~, & and exists.

    Used for classification only; evaluation keeps the primitive nodes.
    """
    if isinstance(e, (Atom1, Atom2, Cmp)):
        return e
    if isinstance(e, Not):
        return Not(desugar(e.body))
    if isinstance(e, And):
        return And(desugar(e.left), desugar(e.right))
    if isinstance(e, Or):
        return Not(And(Not(desugar(e.left)), Not(desugar(e.right))))
    if isinstance(e, Implies):
        return Not(And(desugar(e.left), Not(desugar(e.right))))
    if isinstance(e, Iff):
        a, b = desugar(e.left), desugar(e.right)
        return And(Not(And(a, Not(b))), Not(And(b, Not(a))))
    if isinstance(e, ForallFO):
        return Not(ExistsFO(e.var, Not(desugar(e.body))))
    if isinstance(e, ExistsFO):
        return ExistsFO(e.var, desugar(e.body))
    if isinstance(e, (ForallSO, ExistsSO)):
        return type(e)(e.var, desugar(e.body))
    if isinstance(e, Aggregate):
        return Aggregate(e.agg, e.cmp, e.vars, desugar(e.body), e.bound)
    if isinstance(e, DefinitionExpr):
        return DefinitionExpr(_desugar_rs(e.ruleset))
    if isinstance(e, Let):
        return Let(_desugar_rs(e.ruleset), desugar(e.body))
    raise TypeError(f"not an expression: {e!r}")


def _desugar_rs(rs: RuleSet) -> RuleSet:
    return RuleSet(tuple(Rule(r.head, r.head_vars, desugar(r.body)) for r in rs.rules))


@lru_cache(maxsize=None)
def _fo_ruleset(rs: RuleSet) -> bool:
    # rule and let bodies of first order definitions stay in FO(ID*)
    return all(
        r.head.type.kind == "pred" and _is_fo(r.body) for r in rs.rules
    )


@lru_cache(maxsize=None)
def _is_fo(e) -> bool:
    if isinstance(e, (Atom1, Cmp)):
        return True
    if isinstance(e, Not):
        return _is_fo(e.body)
    if isinstance(e, And):
        return _is_fo(e.left) and _is_fo(e.right)
    if isinstance(e, ExistsFO):
        return _is_fo(e.body)
    if isinstance(e, Aggregate):
        return _is_fo(e.body)
    if isinstance(e, DefinitionExpr):
        return _fo_ruleset(e.ruleset)
    if isinstance(e, Let):
        return _fo_ruleset(e.ruleset) and _is_fo(e.body)
    return False


@lru_cache(maxsize=None)
def _is_eso(e) -> bool:
    if _is_fo(e):
        return True
    if isinstance(e, Atom2):
        return True
    if isinstance(e, Not):
        return _is_aso(e.body)
    if isinstance(e, And):
        return _is_eso(e.left) and _is_eso(e.right)
    if isinstance(e, (ExistsFO, ExistsSO)):
        return _is_eso(e.body)
    if isinstance(e, Aggregate):
        return _is_eso(e.body)
    if isinstance(e, Let):
        return _fo_ruleset(e.ruleset) and _is_eso(e.body)
    return False


@lru_cache(maxsize=None)
def _is_aso(e) -> bool:
    if _is_fo(e):
        return True
    if isinstance(e, Atom2):
        return True
    if isinstance(e, Not):
        return _is_eso(e.body)
    if isinstance(e, And):
        return _is_aso(e.left) and _is_aso(e.right)
    if isinstance(e, ExistsFO):
        return _is_aso(e.body)
    if isinstance(e, ForallSO):
        return _is_aso(e.body)
    if isinstance(e, Aggregate):
        return _is_aso(e.body)
    if isinstance(e, Let):
        return _fo_ruleset(e.ruleset) and _is_aso(e.body)
    return False


def classify(e) -> str:
    """The smallest fragment containing e (ESO preferred on ties)."""
    if isinstance(e, RuleSet):
        e = DefinitionExpr(e)
    d = desugar(e)
    if _is_fo(d):
        return FRAGMENT_FO
    if _is_eso(d):
        return FRAGMENT_ESO
    if _is_aso(d):
        return FRAGMENT_ASO
    return FRAGMENT_SO


# ---------------------------------------------------------------------------
# Unparsing


def _unparse_type(t: Type) -> str:
    return str(t)


def unparse_term(t: Term) -> str:
    if isinstance(t, SymTerm):
        return t.symbol.name
    if isinstance(t, IntTerm):
        return str(t.value)
    # flat: + is left associative in the grammar, which has no term parens
    return f"{unparse_term(t.left)} + {unparse_term(t.right)}"


def unparse(e) -> str:
    """Canonical ASCII form; parse(unparse(e)) reproduces e."""
    if isinstance(e, RuleSet):
        return unparse_ruleset(e)
    if isinstance(e, Atom1) or isinstance(e, Atom2):
        if not e.args:
            return e.predicate.name
        return f"{e.predicate.name}({', '.join(unparse_term(a) for a in e.args)})"
    if isinstance(e, Cmp):
        return f"{unparse_term(e.left)} {e.op} {unparse_term(e.right)}"
    if isinstance(e, Not):
        body = unparse(e.body)
        if isinstance(e.body, (Atom1, Atom2, Not)):
            return f"~{body}"
        return f"~({body})"
    if type(e) in _BINARY:
        left = unparse(e.left)
        if isinstance(e.left, (ForallFO, ExistsFO, ForallSO, ExistsSO, Let)):
            # a quantifier/let scope extends to the end of the formula;
            # as a left operand it must be closed off explicitly
            left = f"({left})"
        return f"({left} {_BINARY[type(e)]} {unparse(e.right)})"
    if isinstance(e, ForallFO):
        return f"!{e.var.name}: {unparse(e.body)}"
    if isinstance(e, ExistsFO):
        return f"?{e.var.name}: {unparse(e.body)}"
    if isinstance(e, ForallSO):
        return f"!! {e.var.name}[{_unparse_type(e.var.type)}]: {unparse(e.body)}"
    if isinstance(e, ExistsSO):
        return f"?? {e.var.name}[{_unparse_type(e.var.type)}]: {unparse(e.body)}"
    if isinstance(e, Aggregate):
        head = "#" if e.agg == "card" else "sum"
        vars_ = ", ".join(v.name for v in e.vars)
        return f"{head}{{{vars_} : {unparse(e.body)}}} {e.cmp} {unparse_term(e.bound)}"
    if isinstance(e, DefinitionExpr):
        return unparse_ruleset(e.ruleset)
    if isinstance(e, Let):
        return f"let {unparse_ruleset(e.ruleset)} in {unparse(e.body)}"
    raise TypeError(f"not an expression: {e!r}")


def unparse_ruleset(rs: RuleSet) -> str:
    parts = []
    for r in rs.rules:
        head = r.head.name
        if r.head_vars:
            head += "(" + ", ".join(v.name for v in r.head_vars) + ")"
        parts.append(f"{head} <- {unparse(r.body)}.")
    return "{" + " ".join(parts) + "}"
