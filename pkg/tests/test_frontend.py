"""Grammar language: lexing, parsing, diagnostics, printing round trips."""

import pytest

from helpers import MODELS_GRAMMAR, TEST_GRAMMAR, TEST_GRAMMAR_NORMALIZED
from xmlgram.ast import (
    Actions,
    Any,
    Bind,
    Call,
    Compare,
    Construct,
    ElementSpec,
    Empty,
    Fold,
    Grammar,
    IntLit,
    ListLit,
    Ok,
    Or,
    Star,
    StrLit,
    Text,
    VarRef,
)
from xmlgram.frontend import GrammarParseError, parse_grammar, try_parse_grammar
from xmlgram.pretty import pretty_grammar


def test_empty_grammar():
    assert parse_grammar("@Grammar E end") == Grammar("E", ())


def test_test_grammar_structure():
    g = parse_grammar(TEST_GRAMMAR)
    assert [c.name for c in g.clauses] == ["A", "B", "C"]
    a = g.clauses[0]
    assert a.params == ()
    expected_element = ElementSpec(
        "A",
        (),
        (),
        (Bind(("b",), (Star((Or((Call("B", ()),), (Call("C", ()),)),)),)),),
    )
    assert a.body == (expected_element, Actions((VarRef("b"),)))


def test_self_closing_element_means_ok_body():
    g = parse_grammar("@Grammar G R ::= <B n=name/> {n}. end")
    explicit = parse_grammar("@Grammar G R ::= <B n = name> OK </B> {n}. end")
    assert g.clauses[0].body == explicit.clauses[0].body
    el = g.clauses[0].body[0]
    assert el == ElementSpec("B", (("n", "name"),), (), (Ok(),))


def test_bare_attribute_is_var_equals_attr():
    g = parse_grammar("@Grammar G R ::= <Attribute name type/>. end")
    el = g.clauses[0].body[0]
    assert el.attrs == (("name", "name"), ("type", "type"))


def test_models_grammar_parses_clean():
    g, diagnostics = try_parse_grammar(MODELS_GRAMMAR)
    assert g is not None
    assert diagnostics == []
    assert [c.name for c in g.clauses] == [
        "Attribute",
        "Class",
        "ClassElement",
        "Operation",
        "Package",
        "PackageElement",
        "Assoc",
    ]
    # the iterate action parses to a fold with an addChild step
    class_clause = g.clauses[1]
    action = class_clause.body[-1]
    fold = action.exprs[0]
    assert isinstance(fold, Fold)
    assert fold.over == VarRef("elements")
    assert fold.step == Construct("addChild", (VarRef(fold.acc_var), VarRef(fold.elem_var)))


def test_missing_rule_dot_reports_at_end_token():
    g, diagnostics = try_parse_grammar("@Grammar X A ::= <A/> end")
    assert g is None
    assert len(diagnostics) == 1
    assert "'.'" in diagnostics[0].message
    # the offending token is `end` on line 1
    assert diagnostics[0].span.line == 1
    assert diagnostics[0].span.length == len("end")


def test_resynchronization_reports_later_errors_too():
    source = """@Grammar X
      A ::= <A/ > .
      B ::= <B> </C>.
    end"""
    g, diagnostics = try_parse_grammar(source)
    assert g is None
    assert len(diagnostics) >= 2
    assert any("mismatched closing tag" in d.message for d in diagnostics)


def test_duplicate_parameters_rejected():
    g, diagnostics = try_parse_grammar("@Grammar X A(p, p) ::= OK. end")
    assert g is None
    assert any("duplicate parameter" in d.message for d in diagnostics)


def test_duplicate_attribute_vars_rejected():
    g, diagnostics = try_parse_grammar("@Grammar X A ::= <T n=a n=b/>. end")
    assert g is None
    assert any("duplicate attribute variable" in d.message for d in diagnostics)


def test_unterminated_grammar():
    g, diagnostics = try_parse_grammar("@Grammar X A ::= OK.")
    assert g is None
    assert any("unterminated grammar" in d.message for d in diagnostics)


def test_unknown_character():
    g, diagnostics = try_parse_grammar("@Grammar X A ::= OK ; . end")
    assert g is None
    assert any("unknown character" in d.message for d in diagnostics)


def test_internal_names_rejected_by_default():
    source = "@Grammar X A$1 ::= OK. end"
    g, diagnostics = try_parse_grammar(source)
    assert g is None
    assert any("reserved character" in d.message for d in diagnostics)
    g2, diagnostics2 = try_parse_grammar(source, allow_internal_names=True)
    assert g2 is not None and diagnostics2 == []


def test_parse_grammar_raises_with_diagnostics():
    with pytest.raises(GrammarParseError) as exc:
        parse_grammar("@Grammar X A ::= <A/> end")
    assert exc.value.diagnostics


def test_keywords_and_literals():
    g = parse_grammar(
        '@Grammar K R ::= EMPTY | ANY | TEXT | OK { true, false, null, 7, "s", Seq{1,2} }. end'
    )
    body = g.clauses[0].body
    assert len(body) == 1 and isinstance(body[0], Or)


def test_guard_syntax():
    src = '@Grammar G R ::= <T k when k = "a" > OK when k <> "a" > ANY else TEXT </T>. end'
    g = parse_grammar(src)
    el = g.clauses[0].body[0]
    assert len(el.guarded) == 2
    (g1, b1), (g2, b2) = el.guarded
    assert g1 == Compare("=", VarRef("k"), StrLit("a"))
    assert g2 == Compare("<>", VarRef("k"), StrLit("a"))
    assert b1 == (Ok(),)
    assert b2 == (Any(),)
    assert el.else_body == (Text(),)


def test_multi_name_binding():
    g = parse_grammar("@Grammar G R ::= [v, w] = S {v}. S ::= {1, 2}. end")
    bind = g.clauses[0].body[0]
    assert bind == Bind(("v", "w"), (Call("S", ()),))


def test_call_with_arguments():
    g = parse_grammar('@Grammar G R(p) ::= S(p, "x", 3). S(a, b, c) ::= OK. end')
    call = g.clauses[0].body[0]
    assert call == Call("S", (VarRef("p"), StrLit("x"), IntLit(3)))


def test_uppercase_bare_name_in_action_is_constructor():
    g = parse_grammar("@Grammar G R ::= { Nil, nil }. end")
    action = g.clauses[0].body[0]
    assert action.exprs[0] == Construct("Nil", ())
    assert action.exprs[1] == VarRef("nil")


def test_cons_and_list_expressions():
    g = parse_grammar("@Grammar G R ::= x = S { x : Seq{} }. S ::= {1}. end")
    action = g.clauses[0].body[1]
    cons = action.exprs[0]
    assert cons.head == VarRef("x")
    assert cons.tail == ListLit(())


def test_comments_ignored():
    g = parse_grammar("@Grammar G // comment\n R ::= OK. // more\n end")
    assert len(g.clauses) == 1


def test_empty_body_clause():
    g = parse_grammar("@Grammar G R ::= . end")
    assert g.clauses[0].body == ()


ROUND_TRIP_SOURCES = [
    TEST_GRAMMAR,
    TEST_GRAMMAR_NORMALIZED,
    MODELS_GRAMMAR,
    "@Grammar E end",
    "@Grammar G R ::= . end",
    '@Grammar G R ::= <T a b=c when a = "1" > OK else x = TEXT {x} </T>. end',
    "@Grammar G R ::= (S T)* | EMPTY. S ::= ANY. T ::= {null}. end",
    "@Grammar G R ::= [a, b] = S { a : b, Seq{a, 1}, P(a).add(b) }. S ::= {1, 2}. end",
    '@Grammar G R(p) ::= S(p) { l->iterate(i a = Nil | Cons(i, a)) }. S(x) ::= { x = "y" }. end',
]


@pytest.mark.parametrize("source", ROUND_TRIP_SOURCES)
def test_pretty_print_round_trip(source):
    g = parse_grammar(source)
    printed = pretty_grammar(g)
    assert parse_grammar(printed) == g
    # printing is stable once canonical
    assert pretty_grammar(parse_grammar(printed)) == printed


def test_round_trip_of_generated_grammars():
    from helpers import random_grammar

    for seed in range(30):
        g = random_grammar(seed)
        printed = pretty_grammar(g)
        assert parse_grammar(printed) == g, f"seed {seed}:\n{printed}"
