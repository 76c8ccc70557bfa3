import pytest

from obda_rewrite.core import (
    FALSE,
    TRUE,
    TGD,
    And,
    Atom,
    ConjunctiveQuery,
    DataInstance,
    Eq,
    Exists,
    Generator,
    Ontology,
    atom,
    conj,
    const,
    disj,
    generators_for,
    is_positive_existential,
    pe_size,
    validate,
    var,
)
from obda_rewrite.errors import (
    AnswerVarNotInBody,
    ArityMismatch,
    ConstantInRule,
    EmptyQuery,
    TooManyTgdVariables,
    ValidationError,
)
from obda_rewrite.textio import parse_formula, parse_tgd

x, y, z = var("x"), var("y"), var("z")


def test_example1_tgd_is_valid():
    t = parse_tgd("A(x) -> exists y. R(x,y), Q(x,y)")
    validate(t)
    assert t.existential == y and len(t.head) == 2


def test_three_variable_tgd_rejected():
    t = TGD(Atom("R", (x, y)), z, (Atom("S", (y, z)),))
    with pytest.raises(TooManyTgdVariables):
        validate(t)


def test_constant_in_query_rejected():
    q = ConjunctiveQuery((), (Atom("P", (const("a"), y)),))
    with pytest.raises(ConstantInRule):
        validate(q)


def test_constant_in_tgd_rejected():
    with pytest.raises(ConstantInRule):
        validate(TGD(Atom("A", (const("a"),)), None, (Atom("B", (x,)),)))


def test_empty_query_rejected():
    with pytest.raises(EmptyQuery):
        validate(ConjunctiveQuery((), ()))


def test_answer_var_must_occur():
    with pytest.raises(AnswerVarNotInBody):
        validate(ConjunctiveQuery((z,), (Atom("A", (y,)),)))


def test_arity_clash_in_ontology():
    T = Ontology((TGD(Atom("A", (x,)), None, (Atom("B", (x,)),)), TGD(Atom("B", (x, y)), None, (Atom("A", (x,)),))))
    with pytest.raises(ArityMismatch):
        validate(T)


def test_existential_in_body_rejected():
    with pytest.raises(ValidationError):
        validate(TGD(Atom("R", (x, y)), y, (Atom("S", (x, y)),)))


def test_nonground_data_rejected():
    with pytest.raises(ValidationError):
        validate(DataInstance(frozenset({Atom("A", (x,))})))


def test_ontology_size_counts_predicate_occurrences():
    T = Ontology((parse_tgd("A(x) -> exists y. R(x,y), Q(x,y)"), parse_tgd("A(x) -> B(x)")))
    assert T.size == 5


def test_query_atoms_are_a_set():
    a = Atom("A", (x,))
    q = ConjunctiveQuery((), (a, a))
    assert q.size == 1


def test_pe_size_single_atom():
    assert pe_size(Atom("R", (x, y))) == 1


def test_pe_size_empty_conjunction():
    assert pe_size(And(())) == 0


def test_pe_size_example1_rewriting():
    # the displayed rewriting: 3 query atoms, then R2 + tw(A1, 2 eqs), then R1 + tw(A2, 2 eqs)
    f = parse_formula(
        "(exists (y1 y2) (or (and (atom R1 x1 y1) (atom Q y2 y1) (atom R2 x2 y2))"
        " (and (atom R2 x2 y2) (exists (z) (and (atom A1 z) (eq x1 z) (eq y2 z))))"
        " (and (atom R1 x1 y1) (exists (z) (and (atom A2 z) (eq x2 z) (eq y1 z))))))"
    )
    assert pe_size(f) == 11


def test_conj_disj_units():
    a = Atom("A", (x,))
    assert conj([]) == TRUE
    assert disj([]) == FALSE
    assert conj([a, TRUE]) == a
    assert disj([a, FALSE]) == a
    assert conj([a, FALSE]) == FALSE


def test_positive_existential_fragment():
    assert is_positive_existential(Exists((y,), And((Atom("R", (x, y)), Eq(x, y)))))
    assert not is_positive_existential(parse_formula("(not (atom A x))"))


def test_generators_for_signature():
    gens = generators_for({"A": 1, "R": 2})
    assert [g.shape for g in gens] == ["unary", "reflexive", "out", "in"]
    assert str(Generator("out", "R")) == "exists y. R(x,y)"


def test_atom_helper_builds_constants():
    a = atom("R", "a", "b", constants=True)
    assert not any(t.is_var for t in a.args)
