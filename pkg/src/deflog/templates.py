"""Templates: second order definitions of reusable template symbols.

A template defines template symbols in terms of interpreted and
template symbols only, making it a domain-independent building block.
Libraries of templates are validated (unique definitions, vocabulary
purity, stratification, paradox-freeness on test domains) and applied
to interpretations stratum by stratum, each template symbol receiving
the well-founded value of its definition.

The module also houses the rewriting toolbox: templification (turning a
user definition with open first order predicate symbols into a
template), macro expansion of simple non-recursive template libraries,
and elimination of existential second order quantifiers by switching
them past first order universals and skolemizing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from . import definitions
from .errors import CapExceeded, EvaluationError, NonTotalDefinitionError, TypeError_
from .evaluator import evaluate_exact
from .interpretation import PartialInterpretation
from .limits import DEFAULT_LIMITS, Limits
from .syntax import (
    Aggregate, And, Atom1, Atom2, Cmp, DefinitionExpr, ExistsFO, ExistsSO,
    ForallFO, ForallSO, Iff, Implies, Let, NameGen, Not, Or, Rule, RuleSet,
    SymTerm, classify, FRAGMENT_ESO, FRAGMENT_FO, free_symbols, substitute,
    term_symbols, unparse,
)
from .truthvalues import F, T, TV, U, PartialSet, exact_set
from .vocab import DOMAIN, Symbol, Type, arg_value_space, pred, predicate_carrier, so_pred

_BINARY = (And, Or, Implies, Iff)


@dataclass(frozen=True)
class Template:
    """A named second order definition of template symbols."""

    name: str
    ruleset: RuleSet

    @property
    def defined(self) -> frozenset:
        return self.ruleset.defined_symbols

    @property
    def parameters(self) -> frozenset:
        return self.ruleset.parameters


@dataclass
class TemplateLibrary:
    templates: tuple

    def template_symbols(self) -> list[Symbol]:
        out: set[Symbol] = set()
        for t in self.templates:
            out |= t.defined
        return sorted(out, key=lambda s: s.name)

    def defining(self, sym: Symbol) -> Template | None:
        for t in self.templates:
            if sym in t.defined:
                return t
        return None


@dataclass
class LibraryReport:
    problems: list = field(default_factory=list)
    order: list = field(default_factory=list)  # topologically sorted templates
    skipped_contexts: int = 0

    @property
    def ok(self) -> bool:
        return not self.problems


def _stratify(lib: TemplateLibrary) -> tuple[list[Template], list[str]]:
    """Topological order of templates under the uses-relation; cycles
    across distinct templates violate stratification (self-recursion
    inside one template is fine)."""
    problems: list[str] = []
    by_symbol: dict[Symbol, Template] = {}
    for t in lib.templates:
        for d in t.defined:
            if d in by_symbol:
                problems.append(
                    f"template symbol {d.name} defined in both "
                    f"{by_symbol[d].name!r} and {t.name!r}"
                )
            else:
                by_symbol[d] = t
    uses: dict[str, set[str]] = {t.name: set() for t in lib.templates}
    for t in lib.templates:
        for q in t.parameters:
            owner = by_symbol.get(q)
            if owner is not None and owner.name != t.name:
                uses[t.name].add(owner.name)
    order: list[Template] = []
    placed: set[str] = set()
    remaining = {t.name: t for t in lib.templates}
    while remaining:
        ready = sorted(
            name for name, t in remaining.items() if uses[name] <= placed
        )
        if not ready:
            problems.append(
                "stratification cycle among templates: "
                + ", ".join(sorted(remaining))
            )
            break
        for name in ready:
            order.append(remaining.pop(name))
            placed.add(name)
    return order, problems


def validate_library(
    lib: TemplateLibrary,
    test_domains: Sequence[Sequence] = ((), ("a", "b")),
    limits: Limits = DEFAULT_LIMITS,
    so_instances: Optional[Mapping[Symbol, Iterable[tuple]]] = None,
) -> LibraryReport:
    """Check unique definitions, vocabulary purity, stratification, and
    paradox-freeness of every template on every test domain."""
    report = LibraryReport()
    for t in lib.templates:
        for d in sorted(t.defined, key=lambda s: s.name):
            if d.kind != "template" or d.type.kind != "so-pred":
                report.problems.append(
                    f"{t.name}: defined symbol {d.name} is not a second order "
                    "template symbol"
                )
        for q in sorted(t.parameters, key=lambda s: s.name):
            if not q.in_template_vocab:
                report.problems.append(
                    f"{t.name}: parameter {q.name} is outside the template vocabulary"
                )
    order, strat_problems = _stratify(lib)
    report.problems.extend(strat_problems)
    report.order = order
    if report.problems:
        return report

    for domain in test_domains:
        try:
            expanded = apply_library(
                PartialInterpretation.empty(domain), lib, limits,
                so_instances=so_instances, _report=report,
            )
        except CapExceeded:
            report.skipped_contexts += 1
            continue
        except NonTotalDefinitionError as exc:
            report.problems.append(f"|D|={len(tuple(domain))}: {exc}")
            continue
        del expanded
    return report


def apply_library(
    i: PartialInterpretation,
    lib: TemplateLibrary,
    limits: Limits = DEFAULT_LIMITS,
    so_instances: Optional[Mapping[Symbol, Iterable[tuple]]] = None,
    _report: LibraryReport | None = None,
) -> PartialInterpretation:
    """The unique exact expansion of i with every template symbol's value.

    Template symbols are filled in by induction on the stratification
    order, each receiving the well-founded model of its template in the
    already-expanded interpretation.  `so_instances` optionally
    restricts a template symbol's carrier to the listed argument
    tuples, for instances whose full second order argument space is out
    of cap range.
    """
    for s in lib.template_symbols():
        if i.interprets(s):
            raise EvaluationError(f"interpretation already covers template symbol {s.name}")
    order, problems = _stratify(lib)
    if problems:
        raise EvaluationError("; ".join(problems))
    out = i
    for t in order:
        carriers = None
        if so_instances:
            carriers = {
                d: tuple(so_instances[d]) for d in t.defined if d in so_instances
            }
        wfm = definitions.well_founded_model(t.ruleset, out, limits, carriers)
        defined = sorted(t.defined, key=lambda s: s.name)
        if wfm is None or not all(wfm.value(d).is_exact for d in defined):
            msg = f"template {t.name!r} is not total on this domain"
            if _report is not None:
                _report.problems.append(msg)
            raise NonTotalDefinitionError(msg)
        for d in defined:
            out = out.expand(d, wfm.value(d))
    return out


# ---------------------------------------------------------------------------
# Templification


def _extended_symbol(p: Symbol, opens: tuple) -> Symbol:
    if p.type.kind == "pred":
        base = (DOMAIN,) * p.type.arity
    elif p.type.kind == "so-pred":
        base = p.type.args
    else:
        raise TypeError_(f"cannot templify non-predicate {p.name}")
    return Symbol(
        p.name + "'", so_pred(*base, *(o.type for o in opens)), "template"
    )


def _extend_atoms(e, mapping: dict, opens: tuple):
    """Replace every atom P(t̄) with P ∈ mapping by P'(t̄, ō)."""
    extra = tuple(SymTerm(o) for o in opens)
    if isinstance(e, (Atom1, Atom2)):
        p2 = mapping.get(e.predicate)
        if p2 is None:
            return e
        return Atom2(p2, e.args + extra)
    if isinstance(e, Cmp):
        return e
    if isinstance(e, Not):
        return Not(_extend_atoms(e.body, mapping, opens))
    if isinstance(e, _BINARY):
        return type(e)(
            _extend_atoms(e.left, mapping, opens),
            _extend_atoms(e.right, mapping, opens),
        )
    if isinstance(e, (ForallFO, ExistsFO, ForallSO, ExistsSO)):
        return type(e)(e.var, _extend_atoms(e.body, mapping, opens))
    if isinstance(e, Aggregate):
        return Aggregate(
            e.agg, e.cmp, e.vars, _extend_atoms(e.body, mapping, opens), e.bound
        )
    if isinstance(e, DefinitionExpr):
        return DefinitionExpr(_extend_ruleset(e.ruleset, mapping, opens))
    if isinstance(e, Let):
        return Let(
            _extend_ruleset(e.ruleset, mapping, opens),
            _extend_atoms(e.body, mapping, opens),
        )
    raise TypeError_(f"not an expression: {e!r}")


def _extend_ruleset(rs: RuleSet, mapping: dict, opens: tuple) -> RuleSet:
    rules = []
    for r in rs.rules:
        head, head_vars = r.head, r.head_vars
        if r.head in mapping:
            head = mapping[r.head]
            head_vars = r.head_vars + opens
        rules.append(Rule(head, head_vars, _extend_atoms(r.body, mapping, opens)))
    return RuleSet(tuple(rules))


def templify(d: RuleSet, open_symbols: tuple) -> tuple[RuleSet, dict]:
    """Rewrite a user definition into a template over the open symbols.

    Every defined P gets a fresh P' extended with argument positions
    for the open symbols; every rule is universally closed over them
    (they become extra head variables).  Returns the templified rule
    set and the P -> P' map.
    """
    for o in open_symbols:
        if o.type.kind != "pred":
            raise TypeError_(
                f"open symbol {o.name} must be a first order predicate, has {o.type}"
            )
    expected = {s for s in d.parameters if not s.in_template_vocab and s.type.is_predicate}
    if set(open_symbols) != expected:
        raise TypeError_(
            "open symbols must be exactly the non-template predicate parameters"
        )
    for p in d.defined_symbols:
        if p.in_template_vocab:
            raise TypeError_(f"{p.name} is already a template symbol")
    mapping = {
        p: _extended_symbol(p, open_symbols)
        for p in sorted(d.defined_symbols, key=lambda s: s.name)
    }
    return _extend_ruleset(d, mapping, tuple(open_symbols)), mapping


def check_correspondence(
    d: RuleSet,
    dt: RuleSet,
    mapping: dict,
    i: PartialInterpretation,
    it: PartialInterpretation,
    open_symbols: tuple,
) -> bool:
    """P^i = {d̄ | (d̄, ō^i) ∈ P'^it} for every defined P."""
    o_value = tuple(i.value(o).true_keys() for o in open_symbols)
    for p, p2 in mapping.items():
        narrow = p.type.arity
        projected = frozenset(
            key[:narrow]
            for key in it.value(p2).true_keys()
            if key[narrow:] == o_value
        )
        if i.value(p).true_keys() != projected:
            return False
    return True


# ---------------------------------------------------------------------------
# Simple templates as macros


def is_simple(t: Template) -> bool:
    """One rule, second order head, FO(ID*) body."""
    if len(t.ruleset.rules) != 1:
        return False
    rule = t.ruleset.rules[0]
    if rule.head.type.kind != "so-pred":
        return False
    return classify(rule.body) == FRAGMENT_FO


def _template_atoms(e, template_syms: set) -> bool:
    return any(s in template_syms for s in free_symbols(e))


def macro_expand(phi, lib: TemplateLibrary, limits: Limits = DEFAULT_LIMITS):
    """Substitute template atoms by their defining bodies until none remain.

    Requires a library of non-recursive simple templates; termination
    comes from stratification.  Fresh names are drawn deterministically
    so output is reproducible.
    """
    order, problems = _stratify(lib)
    if problems:
        raise EvaluationError("; ".join(problems))
    rules: dict[Symbol, Rule] = {}
    for t in order:
        if not is_simple(t):
            raise EvaluationError(f"template {t.name!r} is not simple")
        rule = t.ruleset.rules[0]
        if rule.head in free_symbols(rule.body):
            raise EvaluationError(f"template {t.name!r} is recursive")
        rules[rule.head] = rule

    taken = {s.name for s in free_symbols(phi)}
    for rule in rules.values():
        taken |= {s.name for s in free_symbols(rule.body) | set(rule.head_vars)}
    gen = NameGen(taken)

    def expand(e):
        if isinstance(e, Atom2) and e.predicate in rules:
            rule = rules[e.predicate]
            mapping = {}
            for var, arg in zip(rule.head_vars, e.args):
                mapping[var] = arg.symbol if (
                    isinstance(arg, SymTerm) and var.type.kind == "pred"
                ) else arg
            return expand(substitute(rule.body, mapping, gen))
        if isinstance(e, (Atom1, Atom2, Cmp)):
            return e
        if isinstance(e, Not):
            return Not(expand(e.body))
        if isinstance(e, _BINARY):
            return type(e)(expand(e.left), expand(e.right))
        if isinstance(e, (ForallFO, ExistsFO, ForallSO, ExistsSO)):
            return type(e)(e.var, expand(e.body))
        if isinstance(e, Aggregate):
            return Aggregate(e.agg, e.cmp, e.vars, expand(e.body), e.bound)
        if isinstance(e, DefinitionExpr):
            return DefinitionExpr(expand_rs(e.ruleset))
        if isinstance(e, Let):
            return Let(expand_rs(e.ruleset), expand(e.body))
        raise TypeError_(f"not an expression: {e!r}")

    def expand_rs(rs: RuleSet) -> RuleSet:
        return RuleSet(
            tuple(Rule(r.head, r.head_vars, expand(r.body)) for r in rs.rules)
        )

    return expand(phi)


# ---------------------------------------------------------------------------
# Second order quantifier elimination


def _rewrite_connectives(e):
    """Remove => and <=> so negation push-down only sees ~ & |."""
    if isinstance(e, (Atom1, Atom2, Cmp, DefinitionExpr)):
        return e
    if isinstance(e, Not):
        return Not(_rewrite_connectives(e.body))
    if isinstance(e, Implies):
        return Or(Not(_rewrite_connectives(e.left)), _rewrite_connectives(e.right))
    if isinstance(e, Iff):
        a, b = _rewrite_connectives(e.left), _rewrite_connectives(e.right)
        return Or(And(a, b), And(Not(a), Not(b)))
    if isinstance(e, (And, Or)):
        return type(e)(_rewrite_connectives(e.left), _rewrite_connectives(e.right))
    if isinstance(e, (ForallFO, ExistsFO, ForallSO, ExistsSO)):
        return type(e)(e.var, _rewrite_connectives(e.body))
    if isinstance(e, Aggregate):
        return Aggregate(e.agg, e.cmp, e.vars, _rewrite_connectives(e.body), e.bound)
    if isinstance(e, Let):
        return Let(e.ruleset, _rewrite_connectives(e.body))
    raise TypeError_(f"not an expression: {e!r}")


def _nnf(e, positive: bool = True):
    """Push negations down to atoms, definitions and aggregates."""
    if isinstance(e, (Atom1, Atom2, Cmp, DefinitionExpr, Aggregate)):
        return e if positive else Not(e)
    if isinstance(e, Not):
        return _nnf(e.body, not positive)
    if isinstance(e, And):
        cls = And if positive else Or
        return cls(_nnf(e.left, positive), _nnf(e.right, positive))
    if isinstance(e, Or):
        cls = Or if positive else And
        return cls(_nnf(e.left, positive), _nnf(e.right, positive))
    if isinstance(e, ForallFO):
        cls = ForallFO if positive else ExistsFO
        return cls(e.var, _nnf(e.body, positive))
    if isinstance(e, ExistsFO):
        cls = ExistsFO if positive else ForallFO
        return cls(e.var, _nnf(e.body, positive))
    if isinstance(e, ExistsSO):
        if not positive:
            raise EvaluationError(
                "negated existential second order quantifier is not in ESO(ID*)"
            )
        return ExistsSO(e.var, _nnf(e.body, True))
    if isinstance(e, ForallSO):
        if positive:
            raise EvaluationError(
                "universal second order quantifier is not in ESO(ID*)"
            )
        return ExistsSO(e.var, _nnf(e.body, False))
    if isinstance(e, Let):
        # the defined symbols stay fixed; negation moves into the body
        return Let(e.ruleset, _nnf(e.body, positive))
    raise TypeError_(f"not an expression: {e!r}")


def _switch_var(e, old: Symbol, new: Symbol, x: Symbol):
    """Replace every atom old(t̄) by new(t̄, x) (the switching rule)."""
    if isinstance(e, (Atom1, Atom2)):
        if e.predicate == old:
            node = Atom2 if new.type.kind == "so-pred" else Atom1
            return node(new, e.args + (SymTerm(x),))
        return e
    if isinstance(e, Cmp):
        return e
    if isinstance(e, Not):
        return Not(_switch_var(e.body, old, new, x))
    if isinstance(e, _BINARY):
        return type(e)(
            _switch_var(e.left, old, new, x), _switch_var(e.right, old, new, x)
        )
    if isinstance(e, (ForallFO, ExistsFO, ForallSO, ExistsSO)):
        return type(e)(e.var, _switch_var(e.body, old, new, x))
    if isinstance(e, Aggregate):
        return Aggregate(e.agg, e.cmp, e.vars, _switch_var(e.body, old, new, x), e.bound)
    if isinstance(e, DefinitionExpr):
        return DefinitionExpr(_switch_rs(e.ruleset, old, new, x))
    if isinstance(e, Let):
        return Let(_switch_rs(e.ruleset, old, new, x), _switch_var(e.body, old, new, x))
    raise TypeError_(f"not an expression: {e!r}")


def _switch_rs(rs: RuleSet, old: Symbol, new: Symbol, x: Symbol) -> RuleSet:
    return RuleSet(
        tuple(
            Rule(r.head, r.head_vars, _switch_var(r.body, old, new, x))
            for r in rs.rules
        )
    )


def _hoist(e, gen: NameGen):
    """Pull existential SO quantifiers to the front; returns (vars, matrix)."""
    if isinstance(e, ExistsSO):
        var = e.var
        if var.name in gen.taken:
            fresh = gen.fresh(var)
            body = substitute(e.body, {var: fresh}, gen)
            var = fresh
        else:
            gen.taken.add(var.name)
            body = e.body
        inner_vars, matrix = _hoist(body, gen)
        return [var] + inner_vars, matrix
    if isinstance(e, (And, Or)):
        lv, lm = _hoist(e.left, gen)
        rv, rm = _hoist(e.right, gen)
        return lv + rv, type(e)(lm, rm)
    if isinstance(e, ExistsFO):
        vars_, matrix = _hoist(e.body, gen)
        return vars_, ExistsFO(e.var, matrix)
    if isinstance(e, ForallFO):
        vars_, matrix = _hoist(e.body, gen)
        # switching rule: each P jumps the universal by gaining an
        # argument position for the quantified variable
        switched = []
        for p in vars_:
            p2 = gen.fresh(Symbol(p.name, pred(p.type.arity + 1)))
            matrix = _switch_var(matrix, p, p2, e.var)
            switched.append(p2)
        return switched, ForallFO(e.var, matrix)
    if isinstance(e, Let):
        vars_, matrix = _hoist(e.body, gen)
        return vars_, Let(e.ruleset, matrix)
    if isinstance(e, Not):
        if _so_quantifier_inside(e.body):
            raise EvaluationError(
                "second order quantifier under negation is not in ESO(ID*)"
            )
        return [], e
    if isinstance(e, (Atom1, Atom2, Cmp, DefinitionExpr)):
        return [], e
    if isinstance(e, Aggregate):
        if _so_quantifier_inside(e.body):
            raise EvaluationError(
                "cannot hoist a second order quantifier out of an aggregate"
            )
        return [], e
    raise TypeError_(f"not an expression: {e!r}")


def _so_quantifier_inside(e) -> bool:
    if isinstance(e, (ExistsSO, ForallSO)):
        return True
    if isinstance(e, (Atom1, Atom2, Cmp, DefinitionExpr)):
        return False
    if isinstance(e, Not):
        return _so_quantifier_inside(e.body)
    if isinstance(e, _BINARY):
        return _so_quantifier_inside(e.left) or _so_quantifier_inside(e.right)
    if isinstance(e, (ForallFO, ExistsFO)):
        return _so_quantifier_inside(e.body)
    if isinstance(e, Aggregate):
        return _so_quantifier_inside(e.body)
    if isinstance(e, Let):
        return _so_quantifier_inside(e.body)
    raise TypeError_(f"not an expression: {e!r}")


def eliminate_so(phi) -> tuple:
    """Rewrite an ESO(ID*) formula into FO(ID*) over an extended vocabulary.

    Negations are pushed down, existential SO quantifiers hoisted to
    the front (switching past first order universals by extending the
    quantified predicate with the universal's variable), and the
    leading quantifiers skolemized into fresh free predicate symbols.
    Returns (formula, skolem symbols).
    """
    e = _nnf(_rewrite_connectives(phi))
    gen = NameGen({s.name for s in free_symbols(phi)})
    vars_, matrix = _hoist(e, gen)
    if _so_quantifier_inside(matrix):
        raise EvaluationError("residual second order quantifier after hoisting")
    return matrix, tuple(vars_)


# ---------------------------------------------------------------------------
# Σ-equivalence by model enumeration


def _exact_interpretations(
    symbols: Sequence[Symbol], domain: Sequence, limits: Limits
):
    """All exact interpretations of `symbols` over `domain`."""
    symbols = sorted(set(symbols), key=lambda s: s.name)
    spaces = []
    for s in symbols:
        if s.type.kind == "const":
            spaces.append(list(domain))
        elif s.type.is_predicate:
            carrier = predicate_carrier(s.type, domain, limits)
            if len(carrier) > limits.max_unknowns:
                raise CapExceeded(
                    f"{len(carrier)} atoms of {s.name} exceed cap {limits.max_unknowns}"
                )
            spaces.append(
                [exact_set(carrier, members)
                 for r in range(len(carrier) + 1)
                 for members in itertools.combinations(carrier, r)]
            )
        else:
            raise TypeError_(f"cannot enumerate values of {s.name}: {s.type}")
    for combo in itertools.product(*spaces):
        yield PartialInterpretation.make(domain, dict(zip(symbols, combo)))


def _expandable(phi, base: PartialInterpretation, limits: Limits) -> bool:
    extra = sorted(
        (s for s in free_symbols(phi) if not base.interprets(s)),
        key=lambda s: s.name,
    )
    for ext in _exact_interpretations(extra, base.domain, limits):
        j = base
        for s in extra:
            j = j.expand(s, ext.value(s))
        if evaluate_exact(phi, j, limits) is T:
            return True
    return False


def sigma_equivalent(
    phi1,
    phi2,
    sigma: Sequence[Symbol],
    domain: Sequence,
    limits: Limits = DEFAULT_LIMITS,
) -> bool:
    """Same Σ-restricted model class: every exact Σ-interpretation over
    the domain is expandable to a model of phi1 iff of phi2."""
    for base in _exact_interpretations(sigma, domain, limits):
        if _expandable(phi1, base, limits) != _expandable(phi2, base, limits):
            return False
    return True
