"""The table-driven parsing machine.

The machine runs a program (a stack of grammar body items and machine
instructions) against a stream of SAX events, consulting the predict table
whenever a rule call meets the next event's token.  Values are synthesized
onto a value stack as parsing proceeds; when the machine halts the parse
result is the single remaining value.

Value discipline: every program item contributes exactly one value.  The
items of a materialized body are interleaved with ``PopValue`` so that all
but the last component's value is discarded, and an empty body materializes
as ``PushNull``; ``OK``/``EMPTY`` push null.  This keeps bindings and the
terminal state exact: a ``BindInstr`` always finds its body's value on top,
and success leaves exactly one value.

Environments grow monotonically inside a rule activation (attribute and
binding names stay visible for the rest of the clause body) and are
restored when the activation ends.  A call whose continuation still needs
input saves it as a dump frame; a call in tail position modulo value
plumbing (the continuation consumes no events — the recursive clauses
produced by repetition removal always end up in this shape) instead leaves
the continuation in the program behind an ``EnvRestore`` mark.  That keeps
the dump bounded by element nesting rather than by sibling count, which is
what makes long flat documents stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .ast import (
    Actions,
    Any,
    Bind,
    Body,
    BodySeq,
    Call,
    ElementSpec,
    Empty,
    Ok,
    Or,
    Star,
    Text,
)
from .analysis import PredictTable
from .evaluate import NonBooleanGuard, eval_actions, eval_expr, eval_guard
from .events import EndTag, SaxEvent, StartTag, TextEvt, token_of_event
from .values import NULL, Env, StrVal, TupleVal, Value

# Failure reasons
NO_PREDICT_ENTRY = "NoPredictEntry"
TAG_MISMATCH = "TagMismatch"
GUARD_NON_BOOLEAN = "GuardNonBoolean"
UNEXPECTED_END_OF_EVENTS = "UnexpectedEndOfEvents"
UNEXPECTED_EVENT = "UnexpectedEvent"
MISSING_ATTRIBUTE = "MissingAttribute"
BIND_ARITY_MISMATCH = "BindArityMismatch"
CALL_ARITY = "CallArityMismatch"
INCOMPLETE_PARSE = "IncompleteParse"


class ParseFailure(Exception):
    def __init__(self, reason: str, message: str, position: int):
        super().__init__(f"{reason} at event {position}: {message}")
        self.reason = reason
        self.message = message
        self.position = position


class IncompleteParse(ParseFailure):
    def __init__(self, message: str, position: int):
        super().__init__(INCOMPLETE_PARSE, message, position)


class MachineInvariantError(AssertionError):
    """The machine reached a state its invariants forbid; a bug, not input error."""


# -- machine instructions ----------------------------------------------------


@dataclass(frozen=True)
class TagEnd:
    tag: str


@dataclass(frozen=True)
class AnyEnd:
    tag: str


@dataclass(frozen=True)
class BindInstr:
    names: Tuple[str, ...]


@dataclass(frozen=True)
class PopValue:
    pass


@dataclass(frozen=True)
class PushNull:
    pass


@dataclass(frozen=True)
class EnvRestore:
    env: Env


_POP = PopValue()
_PUSH_NULL = PushNull()

# Items that can never consume an event; a pending program made only of
# these lets a call reuse the current activation instead of a dump frame.
_ADMIN_TYPES = frozenset({BindInstr, PopValue, PushNull, EnvRestore, Actions, Ok, Empty})


def materialize(seq: BodySeq) -> List[object]:
    """Program items for a body, in execution order."""
    if not seq:
        return [_PUSH_NULL]
    items: List[object] = []
    for i, item in enumerate(seq):
        if i:
            items.append(_POP)
        items.append(item)
    return items


@dataclass
class Frame:
    program: List[object]
    env: Env
    consuming: int


class _EventSource:
    """Single-consumer event cursor with one-event lookahead."""

    def __init__(self, events: Iterable[SaxEvent]):
        self._it: Iterator[SaxEvent] = iter(events)
        self._peeked: Optional[SaxEvent] = None
        self._has_peeked = False
        self.position = 0

    def peek(self) -> Optional[SaxEvent]:
        if not self._has_peeked:
            self._peeked = next(self._it, None)
            self._has_peeked = True
        return self._peeked

    def take(self) -> Optional[SaxEvent]:
        event = self.peek()
        self._has_peeked = False
        self._peeked = None
        if event is not None:
            self.position += 1
        return event


class Machine:
    """One parse in progress; construct, then ``run()`` (or ``step()`` manually)."""

    def __init__(
        self,
        table: PredictTable,
        start_rule: str,
        events: Iterable[SaxEvent],
        args: Tuple[Value, ...] = (),
    ):
        self.table = table
        self.events = _EventSource(events)
        self.program: List[object] = []
        self.env: Env = {}
        self.values: List[Value] = []
        self.dump: List[Frame] = []
        self.consuming = 0
        self.max_dump_depth = 0
        self.steps = 0
        # handler plus "can this item consume an event" per item type
        self._handlers = {
            Call: (self._step_call, 1),
            ElementSpec: (self._step_element, 1),
            Actions: (self._step_actions, 0),
            Empty: (self._step_empty, 0),
            Any: (self._step_any, 1),
            Ok: (self._step_ok, 0),
            Text: (self._step_text, 1),
            Bind: (self._step_bind, 1),
            TagEnd: (self._step_tag_end, 1),
            AnyEnd: (self._step_any_end, 1),
            BindInstr: (self._step_bind_instr, 0),
            PopValue: (self._step_pop, 0),
            PushNull: (self._step_push_null, 0),
            EnvRestore: (self._step_env_restore, 0),
        }
        self._mat_cache: Dict[int, Tuple[BodySeq, List[object], int]] = {}
        self._enter(start_rule, args)

    # -- plumbing -------------------------------------------------------------

    def fail(self, reason: str, message: str) -> ParseFailure:
        return ParseFailure(reason, message, self.events.position)

    def _push(self, item: object) -> None:
        self.program.append(item)
        if type(item) not in _ADMIN_TYPES:
            self.consuming += 1

    def _push_body(self, seq: BodySeq) -> None:
        # Materialized programs are cached per body object; the id key is
        # guarded by an identity check in case an id is ever reused.
        entry = self._mat_cache.get(id(seq))
        if entry is None or entry[0] is not seq:
            items = materialize(seq)
            items.reverse()
            delta = sum(1 for item in items if type(item) not in _ADMIN_TYPES)
            entry = (seq, items, delta)
            self._mat_cache[id(seq)] = entry
        self.program.extend(entry[1])
        self.consuming += entry[2]

    def _predict(self, name: str):
        token = token_of_event(self.events.peek())
        clause = self.table.lookup(name, token)
        if clause is None:
            raise self.fail(NO_PREDICT_ENTRY, f"no prediction for rule {name} on {token}")
        return clause

    def _enter(self, name: str, args: Tuple[Value, ...]) -> None:
        clause = self._predict(name)
        if len(clause.params) != len(args):
            raise self.fail(
                CALL_ARITY,
                f"rule {name} takes {len(clause.params)} argument(s), got {len(args)}",
            )
        callee_env: Env = dict(zip(clause.params, args)) if args else {}
        if self.consuming == 0:
            self._push(EnvRestore(self.env))
        else:
            self.dump.append(Frame(self.program, self.env, self.consuming))
            if len(self.dump) > self.max_dump_depth:
                self.max_dump_depth = len(self.dump)
            self.program = []
            self.consuming = 0
        self._push_body(clause.body)
        self.env = callee_env

    # -- transitions ------------------------------------------------------------

    def step(self) -> bool:
        """Perform one transition; False when the machine has halted."""
        self.steps += 1
        if not self.program:
            if not self.dump:
                return False
            frame = self.dump.pop()
            self.program = frame.program
            self.env = frame.env
            self.consuming = frame.consuming
            return True
        item = self.program.pop()
        entry = self._handlers.get(type(item))
        if entry is None:
            raise MachineInvariantError(f"unexpected program item {item!r}")
        handler, consumes = entry
        self.consuming -= consumes
        handler(item)
        return True

    def _step_call(self, item: Call) -> None:
        args = tuple(eval_expr(a, self.env) for a in item.args)
        self._enter(item.name, args)

    def _step_element(self, el: ElementSpec) -> None:
        event = self.events.peek()
        if event is None:
            raise self.fail(UNEXPECTED_END_OF_EVENTS, f"expected <{el.tag}>")
        if not isinstance(event, StartTag) or event.tag != el.tag:
            raise self.fail(TAG_MISMATCH, f"expected <{el.tag}>, found {_describe(event)}")
        extended = dict(self.env)
        for var, attr in el.attrs:
            if attr not in event.attrs:
                raise self.fail(
                    MISSING_ATTRIBUTE, f"element <{el.tag}> lacks attribute {attr!r}"
                )
            extended[var] = StrVal(event.attrs[attr])
        branch = el.else_body
        for guard, body in el.guarded:
            try:
                satisfied = eval_guard(guard, extended)
            except NonBooleanGuard as exc:
                raise self.fail(GUARD_NON_BOOLEAN, str(exc)) from exc
            if satisfied:
                branch = body
                break
        self._push(TagEnd(el.tag))
        self._push_body(branch)
        self.env = extended
        self.events.take()

    def _step_actions(self, item: Actions) -> None:
        self.values.append(eval_actions(item.exprs, self.env))

    def _step_empty(self, item: Empty) -> None:
        event = self.events.peek()
        if event is None or isinstance(event, EndTag):
            self.values.append(NULL)
            return
        raise self.fail(UNEXPECTED_EVENT, f"expected no more content, found {_describe(event)}")

    def _step_any(self, item: Any) -> None:
        event = self.events.peek()
        if event is None:
            raise self.fail(UNEXPECTED_END_OF_EVENTS, "expected an element or text")
        if isinstance(event, TextEvt):
            self.events.take()
            self.values.append(NULL)
            return
        if isinstance(event, StartTag):
            self.events.take()
            self._push(AnyEnd(event.tag))
            return
        raise self.fail(UNEXPECTED_EVENT, f"expected an element or text, found {_describe(event)}")

    def _step_ok(self, item: Ok) -> None:
        self.values.append(NULL)

    def _step_text(self, item: Text) -> None:
        event = self.events.peek()
        if event is None:
            raise self.fail(UNEXPECTED_END_OF_EVENTS, "expected text")
        if not isinstance(event, TextEvt):
            raise self.fail(UNEXPECTED_EVENT, f"expected text, found {_describe(event)}")
        self.events.take()
        self.values.append(StrVal(event.text))

    def _step_bind(self, item: Bind) -> None:
        self._push(BindInstr(item.names))
        self._push_body(item.body)

    def _step_tag_end(self, item: TagEnd) -> None:
        event = self.events.peek()
        if event is None:
            raise self.fail(UNEXPECTED_END_OF_EVENTS, f"expected </{item.tag}>")
        if not isinstance(event, EndTag) or event.tag != item.tag:
            raise self.fail(TAG_MISMATCH, f"expected </{item.tag}>, found {_describe(event)}")
        self.events.take()

    def _step_any_end(self, item: AnyEnd) -> None:
        event = self.events.peek()
        if event is None:
            raise self.fail(UNEXPECTED_END_OF_EVENTS, f"expected </{item.tag}>")
        if isinstance(event, TextEvt):
            self.events.take()
            self._push(item)
            return
        if isinstance(event, StartTag):
            self.events.take()
            self._push(item)
            self._push(AnyEnd(event.tag))
            return
        if event.tag != item.tag:
            raise self.fail(TAG_MISMATCH, f"expected </{item.tag}>, found {_describe(event)}")
        self.events.take()
        # The skipped subtree yields a single null once the outermost
        # AnyEnd closes; inner closings are still part of the skip.
        if not (self.program and isinstance(self.program[-1], AnyEnd)):
            self.values.append(NULL)

    def _step_bind_instr(self, item: BindInstr) -> None:
        if not self.values:
            raise MachineInvariantError("binding with empty value stack")
        value = self.values[-1]
        if len(item.names) == 1:
            self.env = {**self.env, item.names[0]: value}
            return
        if isinstance(value, TupleVal) and len(value.items) == len(item.names):
            self.env = {**self.env, **dict(zip(item.names, value.items))}
            return
        raise self.fail(
            BIND_ARITY_MISMATCH,
            f"cannot bind {len(item.names)} names to {type(value).__name__}",
        )

    def _step_pop(self, item: PopValue) -> None:
        self.values.pop()

    def _step_push_null(self, item: PushNull) -> None:
        self.values.append(NULL)

    def _step_env_restore(self, item: EnvRestore) -> None:
        self.env = item.env

    # -- driving ---------------------------------------------------------------

    def run_stepwise(self) -> Value:
        """Drive the machine one ``step()`` at a time (reference path)."""
        while self.step():
            pass
        return self._finish()

    def run(self) -> Value:
        """Drive the machine to completion.

        Behaviorally identical to ``run_stepwise``; the frequent instruction
        kinds are inlined here because a parse performs millions of
        transitions on large documents.
        """
        values = self.values
        dump = self.dump
        steps = 0
        program = self.program
        while True:
            if not program:
                if not dump:
                    break
                frame = dump.pop()
                program = self.program = frame.program
                self.env = frame.env
                self.consuming = frame.consuming
                steps += 1
                continue
            item = program.pop()
            steps += 1
            kind = type(item)
            if kind is PopValue:
                values.pop()
            elif kind is EnvRestore:
                self.env = item.env
            elif kind is BindInstr:
                self._step_bind_instr(item)
            elif kind is PushNull:
                values.append(NULL)
            elif kind is Actions:
                exprs = item.exprs
                if len(exprs) == 1:
                    values.append(eval_expr(exprs[0], self.env))
                else:
                    values.append(eval_actions(exprs, self.env))
            elif kind is Ok:
                values.append(NULL)
            elif kind is TagEnd:
                self.consuming -= 1
                self._step_tag_end(item)
            else:
                entry = self._handlers.get(kind)
                if entry is None:
                    raise MachineInvariantError(f"unexpected program item {item!r}")
                handler, consumes = entry
                self.consuming -= consumes
                handler(item)
                program = self.program  # calls may swap the active program
        self.steps += steps
        return self._finish()

    def _finish(self) -> Value:
        if self.events.peek() is not None:
            raise IncompleteParse(
                f"parse finished with input remaining ({_describe(self.events.peek())})",
                self.events.position,
            )
        if len(self.values) != 1:
            raise MachineInvariantError(
                f"terminal state with {len(self.values)} values on the stack"
            )
        return self.values[0]


def _describe(event: Optional[SaxEvent]) -> str:
    if event is None:
        return "end of input"
    if isinstance(event, StartTag):
        return f"<{event.tag}>"
    if isinstance(event, EndTag):
        return f"</{event.tag}>"
    return f"text {event.text!r}"


def run(
    table: PredictTable,
    start_rule: str,
    events: Iterable[SaxEvent],
    args: Tuple[Value, ...] = (),
) -> Value:
    """Parse an event stream, returning the synthesized value."""
    return Machine(table, start_rule, events, args).run()
