"""XML trees, SAX events, and lookahead tokens.

``flatten_tree`` linearizes a tree into events (the bridge between the
tree-based reference interpreter and the event-based engine); ``build_tree``
is its inverse.  ``Token`` is the lookahead alphabet of the predict tables:
start tags, end tags, text, and a wildcard for ``ANY`` patterns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Tuple, Union


@dataclass(frozen=True)
class Element:
    tag: str
    attrs: Dict[str, str] = field(default_factory=dict)
    children: Tuple["XmlTree", ...] = ()


@dataclass(frozen=True)
class TextNode:
    text: str


XmlTree = Union[Element, TextNode]


@dataclass(frozen=True)
class StartTag:
    tag: str
    attrs: Dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class EndTag:
    tag: str


@dataclass(frozen=True)
class TextEvt:
    text: str


SaxEvent = Union[StartTag, EndTag, TextEvt]


@dataclass(frozen=True)
class TagTok:
    tag: str

    def __str__(self) -> str:
        return self.tag


@dataclass(frozen=True)
class EndTagTok:
    tag: str

    def __str__(self) -> str:
        return "/" + self.tag


@dataclass(frozen=True)
class TextTok:
    def __str__(self) -> str:
        return "TEXT"


@dataclass(frozen=True)
class WildcardTok:
    def __str__(self) -> str:
        return "ANY"


Token = Union[TagTok, EndTagTok, TextTok, WildcardTok]

# Reserved tag wrapped around every document so end-of-input is just another
# end tag; '$' cannot occur in an XML name or a grammar identifier.
END_SENTINEL = "$"
END_OF_INPUT = EndTagTok(END_SENTINEL)


_TEXT_TOK = TextTok()
_TAG_TOKS: Dict[str, TagTok] = {}
_END_TOKS: Dict[str, EndTagTok] = {}


def token_of_event(event: SaxEvent | None) -> Token:
    """Lookahead token for the next event; exhausted input reads as /$ ."""
    if event is None:
        return END_OF_INPUT
    if isinstance(event, StartTag):
        tok = _TAG_TOKS.get(event.tag)
        if tok is None:
            tok = _TAG_TOKS[event.tag] = TagTok(event.tag)
        return tok
    if isinstance(event, EndTag):
        tok = _END_TOKS.get(event.tag)
        if tok is None:
            tok = _END_TOKS[event.tag] = EndTagTok(event.tag)
        return tok
    return _TEXT_TOK


def flatten_tree(tree: XmlTree) -> List[SaxEvent]:
    """Pre-order event linearization of a tree."""
    out: List[SaxEvent] = []
    _flatten_into(tree, out)
    return out


def _flatten_into(tree: XmlTree, out: List[SaxEvent]) -> None:
    if isinstance(tree, TextNode):
        out.append(TextEvt(tree.text))
        return
    out.append(StartTag(tree.tag, dict(tree.attrs)))
    for child in tree.children:
        _flatten_into(child, out)
    out.append(EndTag(tree.tag))


def build_tree(events: Iterable[SaxEvent]) -> XmlTree:
    """Reconstruct the tree a well-nested event sequence came from."""
    it = iter(events)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("empty event stream") from None
    tree, _ = _build_one(first, it)
    leftover = next(it, None)
    if leftover is not None:
        raise ValueError(f"trailing event after document: {leftover!r}")
    return tree


def _build_one(event: SaxEvent, it: Iterator[SaxEvent]) -> Tuple[XmlTree, None]:
    if isinstance(event, TextEvt):
        return TextNode(event.text), None
    if isinstance(event, EndTag):
        raise ValueError(f"unexpected end tag {event.tag}")
    children: List[XmlTree] = []
    while True:
        try:
            nxt = next(it)
        except StopIteration:
            raise ValueError(f"unterminated element {event.tag}") from None
        if isinstance(nxt, EndTag):
            if nxt.tag != event.tag:
                raise ValueError(f"mismatched end tag /{nxt.tag} inside {event.tag}")
            return Element(event.tag, dict(event.attrs), tuple(children)), None
        child, _ = _build_one(nxt, it)
        children.append(child)


_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;"}


def _escape(text: str, quote: bool = False) -> str:
    out = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    if quote:
        out = out.replace('"', "&quot;")
    return out


def serialize_tree(tree: XmlTree) -> str:
    """Render a tree as XML text that the streaming reader parses back."""
    if isinstance(tree, TextNode):
        return _escape(tree.text)
    attrs = "".join(f' {k}="{_escape(v, quote=True)}"' for k, v in tree.attrs.items())
    if not tree.children:
        return f"<{tree.tag}{attrs}/>"
    inner = "".join(serialize_tree(c) for c in tree.children)
    return f"<{tree.tag}{attrs}>{inner}</{tree.tag}>"
