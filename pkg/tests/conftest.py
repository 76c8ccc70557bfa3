import pytest

from obda_rewrite.textio import parse_data, parse_ontology, parse_query

EX1_ONTOLOGY = """\
A1(x) -> exists y. R1(x,y), Q(x,y)
A2(x) -> exists y. R2(x,y), Q(y,x)
"""
EX1_QUERY = "q(x1,x2) <- R1(x1,y1), Q(y2,y1), R2(x2,y2)"

PATH4_ONTOLOGY = """\
A1(x) -> exists y. R1(x,y), R2(y,x)
A2(x) -> exists y. R2(x,y), R3(y,x)
A3(x) -> exists y. R3(x,y), R4(y,x)
"""
PATH4_QUERY = "q() <- R1(y1,y2), R2(y2,y3), R3(y3,y4), R4(y4,y5)"


@pytest.fixture
def ex1():
    return parse_ontology(EX1_ONTOLOGY), parse_query(EX1_QUERY)


@pytest.fixture
def ex1_data():
    return parse_data("A1(a)\nR2(b,a)\n")


@pytest.fixture
def path4():
    return parse_ontology(PATH4_ONTOLOGY), parse_query(PATH4_QUERY)


ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
