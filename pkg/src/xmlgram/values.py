"""Synthesized values and variable environments.

Values are immutable and hashable, and equality is structural.  Wrapper
classes (rather than raw ``str``/``int``) keep the kinds distinct:
``BoolVal(True) != IntVal(1)`` even though ``True == 1`` in Python.

Environments are plain ``dict[str, Value]`` used immutably by convention:
every extension builds a new dict (``env_merge``), nothing mutates in place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple, Union


@dataclass(frozen=True)
class StrVal:
    value: str


@dataclass(frozen=True)
class IntVal:
    value: int


@dataclass(frozen=True)
class BoolVal:
    value: bool


@dataclass(frozen=True)
class NullVal:
    pass


@dataclass(frozen=True, eq=False)
class TermVal:
    ctor: str
    args: Tuple["Value", ...] = ()

    # Structural equality, iterative along the last argument so that long
    # Cons/Nil chains (repetition results) do not hit the recursion limit.
    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        a, b = self, other
        while True:
            if not isinstance(b, TermVal):
                return NotImplemented if b.__class__ not in _VALUE_TYPES else False
            if a.ctor != b.ctor or len(a.args) != len(b.args):
                return False
            if not a.args:
                return True
            if a.args[:-1] != b.args[:-1]:
                return False
            last_a, last_b = a.args[-1], b.args[-1]
            if isinstance(last_a, TermVal) and isinstance(last_b, TermVal):
                if last_a is last_b:
                    return True
                a, b = last_a, last_b
                continue
            return last_a == last_b

    def __hash__(self) -> int:
        # Shallow on purpose: deep chains would recurse. Fine as a hash.
        return hash((self.ctor, len(self.args)))


@dataclass(frozen=True)
class ListVal:
    items: Tuple["Value", ...] = ()


@dataclass(frozen=True)
class TupleVal:
    """Result of an action with more than one expression."""

    items: Tuple["Value", ...]


Value = Union[StrVal, IntVal, BoolVal, NullVal, TermVal, ListVal, TupleVal]

_VALUE_TYPES = (StrVal, IntVal, BoolVal, NullVal, TermVal, ListVal, TupleVal)

NULL = NullVal()

Env = Dict[str, Value]


def env_merge(a: Env, b: Env) -> Env:
    """Union of two environments; names in both take ``b``'s value."""
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    merged = dict(a)
    merged.update(b)
    return merged


def env_restrict(env: Env, names: Iterable[str]) -> Env:
    return {n: v for n, v in env.items() if n in set(names)}


def render_term(value: Value) -> str:
    """Canonical textual form: ``Ctor(arg,...)``, ``[a,b]``, ``(a,b)``, ``null``.

    Iterative with an explicit work stack so arbitrarily deep terms render.
    """
    out = []
    stack: list = [value]
    while stack:
        v = stack.pop()
        if type(v) is str:
            out.append(v)
        elif isinstance(v, StrVal):
            out.append(json.dumps(v.value))
        elif isinstance(v, IntVal):
            out.append(str(v.value))
        elif isinstance(v, BoolVal):
            out.append("true" if v.value else "false")
        elif isinstance(v, NullVal):
            out.append("null")
        elif isinstance(v, TermVal):
            if not v.args:
                out.append(v.ctor)
            else:
                out.append(v.ctor + "(")
                _stack_args(stack, v.args, ")")
        elif isinstance(v, ListVal):
            out.append("[")
            _stack_args(stack, v.items, "]")
        elif isinstance(v, TupleVal):
            out.append("(")
            _stack_args(stack, v.items, ")")
        else:
            raise TypeError(f"not a value: {v!r}")
    return "".join(out)


def _stack_args(stack: list, args: Tuple[Value, ...], close: str) -> None:
    stack.append(close)
    for i, arg in enumerate(reversed(args)):
        stack.append(arg)
        if i != len(args) - 1:
            stack.append(",")


def to_jsonable(value: Value) -> object:
    """JSON-friendly rendering: terms become {"ctor":..., "args":[...]}."""
    if isinstance(value, StrVal):
        return value.value
    if isinstance(value, IntVal):
        return value.value
    if isinstance(value, BoolVal):
        return value.value
    if isinstance(value, NullVal):
        return None
    if isinstance(value, TermVal):
        return {"ctor": value.ctor, "args": [to_jsonable(a) for a in value.args]}
    if isinstance(value, ListVal):
        return [to_jsonable(v) for v in value.items]
    if isinstance(value, TupleVal):
        return {"tuple": [to_jsonable(v) for v in value.items]}
    raise TypeError(f"not a value: {value!r}")


def render_json(value: Value) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True)
