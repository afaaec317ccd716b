"""Grammar normalization for table-driven parsing.

Three rewrites bring a grammar into normal form:

* ``remove_star`` replaces each repetition ``X*`` by a call to a fresh rule
  with a cons-recursive definition and a Nil base case, so repetition values
  become Cons/Nil chains;
* ``lift_element_guards`` turns element branches into single rule calls
  (branches that are already one call, or that contain no calls,
  alternations, or repetitions, are left alone — the table construction
  never needs to look inside those);
* ``lift_disjunction`` hoists every alternation to top level.  An
  alternation that is an entire rule body simply splits into two
  definitions of the same rule; anywhere else it becomes a call to a fresh
  rule with one definition per operand.

Lifted bodies keep their variable context by passing free variables as
arguments.  When a lifted body binds variables that the surrounding scope
can rely on (for an alternation, names bound by both operands; for an
element, names bound by every branch), the fresh rule returns a tuple of
the body's own value followed by those bindings; the call site unpacks the
tuple and restores the value with a synthesized variable, so both the
bindings and the value survive the rewrite exactly.  When nothing is
exported the rewrite degenerates to a bare call.  Fresh rule names are
``<root>$k`` with a single counter per run, so output is deterministic;
``$`` cannot appear in user names.

``normalize_grammar`` applies the rewrites in the order star, guards,
disjunction, repeating until nothing changes, and asserts the normal-form
predicate on the result.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from .ast import (
    CONS,
    NIL,
    Actions,
    Bind,
    Body,
    BodySeq,
    Call,
    Clause,
    Construct,
    ElementSpec,
    Grammar,
    Or,
    Star,
    VarRef,
)
from .wellformed import bound_vars_seq, free_vars_seq


class FreshNameSource:
    """Deterministic generator of rule/variable names that cannot collide
    with user-written names (user identifiers may not contain '$')."""

    def __init__(self, grammar: Grammar):
        self.taken = {c.name for c in grammar.clauses}
        self.counter = 0

    def fresh(self, base: str) -> str:
        root = base.split("$", 1)[0]
        while True:
            self.counter += 1
            name = f"{root}${self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def fresh_var(self, base: str, avoid) -> str:
        if base not in avoid and "$" not in base:
            return base
        while True:
            self.counter += 1
            name = f"{base}${self.counter}"
            if name not in avoid:
                return name

    def internal_var(self, base: str) -> str:
        """A variable no user scope can contain or collide with."""
        self.counter += 1
        return f"{base}${self.counter}"


def _var_refs(names) -> Tuple[VarRef, ...]:
    return tuple(VarRef(n) for n in names)


def _lift_body(
    seq: BodySeq, origin: str, exported: Tuple[str, ...], fresh: FreshNameSource, acc: List[Clause]
) -> Call:
    """Move a body into a fresh rule, preserving value and exports.

    With no exports the new rule is the body itself.  Otherwise the rule
    returns ``(value, exports...)`` via a synthesized binding of the body's
    value, ready for ``_call_site`` to unpack.
    """
    params = tuple(sorted(free_vars_seq(seq)))
    name = fresh.fresh(origin)
    if not exported:
        acc.append(Clause(name, params, seq))
    else:
        result = fresh.internal_var("v")
        body = (
            Bind((result,), seq),
            Actions(_var_refs((result,) + exported)),
        )
        acc.append(Clause(name, params, body))
    return Call(name, _var_refs(params))


def _call_site(item: Body, exported: Tuple[str, ...], fresh: FreshNameSource) -> BodySeq:
    """Items replacing a lifted body at its original position.

    ``item`` produces the fresh rule's ``(value, exports...)`` tuple (it is
    the call itself, or an element whose branches are such calls); the
    binding unpacks it and the trailing action restores the plain value.
    """
    if not exported:
        return (item,)
    result = fresh.internal_var("v")
    return (
        Bind((result,) + exported, (item,)),
        Actions((VarRef(result),)),
    )


def _contains(seq: BodySeq, kinds) -> bool:
    for item in seq:
        if isinstance(item, kinds):
            return True
        if isinstance(item, Or):
            if _contains(item.left, kinds) or _contains(item.right, kinds):
                return True
        elif isinstance(item, (Bind, Star)):
            if _contains(item.body, kinds):
                return True
        elif isinstance(item, ElementSpec):
            for _, body in item.guarded:
                if _contains(body, kinds):
                    return True
            if _contains(item.else_body, kinds):
                return True
    return False


# --------------------------------------------------------------------------
# Star removal
# --------------------------------------------------------------------------


def remove_star(grammar: Grammar) -> Grammar:
    """Replace every repetition with a call to a fresh cons/nil rule pair."""
    fresh = FreshNameSource(grammar)
    out: List[Clause] = []
    for clause in grammar.clauses:
        new_clauses: List[Clause] = []
        body = _remove_star_seq(clause.body, clause.name, fresh, new_clauses)
        out.append(Clause(clause.name, clause.params, body, span=clause.span))
        out.extend(new_clauses)
    return Grammar(grammar.name, tuple(out))


def _remove_star_seq(seq: BodySeq, origin: str, fresh, acc: List[Clause]) -> BodySeq:
    items: List[Body] = []
    for item in seq:
        items.append(_remove_star_item(item, origin, fresh, acc))
    return tuple(items)


def _remove_star_item(item: Body, origin: str, fresh, acc: List[Clause]) -> Body:
    if isinstance(item, Star):
        body = _remove_star_seq(item.body, origin, fresh, acc)
        params = tuple(sorted(free_vars_seq(body)))
        name = fresh.fresh(origin)
        avoid = set(params)
        x = fresh.fresh_var("x", avoid)
        xs = fresh.fresh_var("xs", avoid | {x})
        args = _var_refs(params)
        cons_body: BodySeq = (
            Bind((x,), body),
            Bind((xs,), (Call(name, args),)),
            Actions((Construct(CONS, (VarRef(x), VarRef(xs))),)),
        )
        acc.append(Clause(name, params, cons_body))
        acc.append(Clause(name, params, (Actions((Construct(NIL, ()),)),)))
        return Call(name, args)
    if isinstance(item, Or):
        return Or(
            _remove_star_seq(item.left, origin, fresh, acc),
            _remove_star_seq(item.right, origin, fresh, acc),
            span=item.span,
        )
    if isinstance(item, Bind):
        return Bind(item.names, _remove_star_seq(item.body, origin, fresh, acc), span=item.span)
    if isinstance(item, ElementSpec):
        return ElementSpec(
            item.tag,
            item.attrs,
            tuple((g, _remove_star_seq(b, origin, fresh, acc)) for g, b in item.guarded),
            _remove_star_seq(item.else_body, origin, fresh, acc),
            span=item.span,
        )
    return item


# --------------------------------------------------------------------------
# Element branch lifting
# --------------------------------------------------------------------------


def _branch_is_normal(branch: BodySeq) -> bool:
    if len(branch) == 1 and isinstance(branch[0], Call):
        return True
    return not _contains(branch, (Call, Or, Star))


def lift_element_guards(grammar: Grammar) -> Grammar:
    fresh = FreshNameSource(grammar)
    out: List[Clause] = []
    for clause in grammar.clauses:
        new_clauses: List[Clause] = []
        body = _lift_el_seq(clause.body, clause.name, fresh, new_clauses)
        out.append(Clause(clause.name, clause.params, body, span=clause.span))
        out.extend(new_clauses)
    return Grammar(grammar.name, tuple(out))


def _lift_el_seq(seq: BodySeq, origin: str, fresh, acc: List[Clause]) -> BodySeq:
    items: List[Body] = []
    for item in seq:
        items.extend(_lift_el_item(item, origin, fresh, acc))
    return tuple(items)


def _lift_el_item(item: Body, origin: str, fresh, acc: List[Clause]) -> BodySeq:
    if isinstance(item, Or):
        return (
            Or(
                _lift_el_seq(item.left, origin, fresh, acc),
                _lift_el_seq(item.right, origin, fresh, acc),
                span=item.span,
            ),
        )
    if isinstance(item, (Bind, Star)):
        body = _lift_el_seq(item.body, origin, fresh, acc)
        if isinstance(item, Bind):
            return (Bind(item.names, body, span=item.span),)
        return (Star(body, span=item.span),)
    if not isinstance(item, ElementSpec):
        return (item,)

    guarded = tuple(
        (g, _lift_el_seq(b, origin, fresh, acc)) for g, b in item.guarded
    )
    else_body = _lift_el_seq(item.else_body, origin, fresh, acc)
    el = ElementSpec(item.tag, item.attrs, guarded, else_body, span=item.span)

    if all(_branch_is_normal(b) for _, b in el.guarded) and _branch_is_normal(el.else_body):
        return (el,)

    # A lone `names = Call(...)` branch hoists its binding onto the element
    # instead of spending a fresh rule on an eta-expansion.
    if (
        not el.guarded
        and len(el.else_body) == 1
        and isinstance(el.else_body[0], Bind)
        and len(el.else_body[0].body) == 1
        and isinstance(el.else_body[0].body[0], Call)
    ):
        bind = el.else_body[0]
        hoisted = ElementSpec(el.tag, el.attrs, (), bind.body, span=el.span)
        return (Bind(bind.names, (hoisted,), span=bind.span),)

    branches = [b for _, b in el.guarded] + [el.else_body]
    exported = bound_vars_seq(branches[0])
    for branch in branches[1:]:
        exported &= bound_vars_seq(branch)
    common = tuple(sorted(exported))

    def lift_branch(branch: BodySeq) -> BodySeq:
        # With exports, every branch must yield the same tuple shape, so
        # even already-normal branches get lifted.
        if not common and _branch_is_normal(branch):
            return branch
        return (_lift_body(branch, origin, common, fresh, acc),)

    lifted = ElementSpec(
        el.tag,
        el.attrs,
        tuple((g, lift_branch(b)) for g, b in el.guarded),
        lift_branch(el.else_body),
        span=el.span,
    )
    return _call_site(lifted, common, fresh)


# --------------------------------------------------------------------------
# Disjunction lifting
# --------------------------------------------------------------------------


def lift_disjunction(grammar: Grammar) -> Grammar:
    fresh = FreshNameSource(grammar)
    out: List[Clause] = []
    pending: List[Clause] = list(grammar.clauses)
    for clause in pending:
        # A body that is exactly an alternation splits into one definition
        # per alternative, with no fresh rule.
        work = [clause]
        split: List[Clause] = []
        while work:
            c = work.pop(0)
            if len(c.body) == 1 and isinstance(c.body[0], Or):
                node = c.body[0]
                work.insert(0, Clause(c.name, c.params, node.right, span=c.span))
                work.insert(0, Clause(c.name, c.params, node.left, span=c.span))
            else:
                split.append(c)
        for c in split:
            new_clauses: List[Clause] = []
            body = _lift_or_seq(c.body, c.name, fresh, new_clauses)
            out.append(Clause(c.name, c.params, body, span=c.span))
            out.extend(new_clauses)
    return Grammar(grammar.name, tuple(out))


def _lift_or_seq(seq: BodySeq, origin: str, fresh, acc: List[Clause]) -> BodySeq:
    items: List[Body] = []
    for item in seq:
        items.extend(_lift_or_item(item, origin, fresh, acc))
    return tuple(items)


def _lift_or_item(item: Body, origin: str, fresh, acc: List[Clause]) -> BodySeq:
    if isinstance(item, Or):
        left = _lift_or_seq(item.left, origin, fresh, acc)
        right = _lift_or_seq(item.right, origin, fresh, acc)
        bound = tuple(sorted(bound_vars_seq(left) & bound_vars_seq(right)))
        free = tuple(sorted(free_vars_seq(left) | free_vars_seq(right)))
        name = fresh.fresh(origin)
        params = tuple(free)
        if not bound:
            acc.append(Clause(name, params, left))
            acc.append(Clause(name, params, right))
        else:
            for operand in (left, right):
                result = fresh.internal_var("v")
                acc.append(
                    Clause(
                        name,
                        params,
                        (Bind((result,), operand), Actions(_var_refs((result,) + bound))),
                    )
                )
        call = Call(name, _var_refs(free), span=item.span)
        return _call_site(call, bound, fresh)
    if isinstance(item, Bind):
        return (Bind(item.names, _lift_or_seq(item.body, origin, fresh, acc), span=item.span),)
    if isinstance(item, Star):
        return (Star(_lift_or_seq(item.body, origin, fresh, acc), span=item.span),)
    if isinstance(item, ElementSpec):
        return (
            ElementSpec(
                item.tag,
                item.attrs,
                tuple((g, _lift_or_seq(b, origin, fresh, acc)) for g, b in item.guarded),
                _lift_or_seq(item.else_body, origin, fresh, acc),
                span=item.span,
            ),
        )
    return (item,)


# --------------------------------------------------------------------------
# Normal form
# --------------------------------------------------------------------------


def is_normal_form(grammar: Grammar) -> bool:
    for clause in grammar.clauses:
        if not _seq_normal(clause.body):
            return False
    return True


def _seq_normal(seq: BodySeq) -> bool:
    for item in seq:
        if isinstance(item, (Or, Star)):
            return False
        if isinstance(item, Bind):
            if not _seq_normal(item.body):
                return False
        elif isinstance(item, ElementSpec):
            for _, body in item.guarded:
                if not (_branch_is_normal(body) and _seq_normal(body)):
                    return False
            if not (_branch_is_normal(item.else_body) and _seq_normal(item.else_body)):
                return False
    return True


def normalize_grammar(grammar: Grammar, max_rounds: int = 20) -> Grammar:
    """Rewrite to normal form; the result has no Or or Star and all element
    branches are single calls or call-free."""
    current = grammar
    for _ in range(max_rounds):
        step = lift_disjunction(lift_element_guards(remove_star(current)))
        if step == current:
            break
        current = step
    if not is_normal_form(current):
        raise AssertionError("normalization did not reach normal form")
    return current
