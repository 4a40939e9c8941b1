"""
    Shared fixtures: the two-rule example where coverability and reachability differ, and the
    subset-sum automaton.
"""
import pytest

from tbpp.model import parse_document

EXAMPLE = """
clocks x;
nonterminals X Y Z;
rule X [x = 0] -> Y Z;
rule Z [x > 0] -> ;
init X;
targets Y;
query cover;
"""

SUBSET_SUM = """
clocks x;
nonterminals X0 X1 X2;
rule X0 [x = 0] -> X1;
rule X0 [x = 1] {x := 0} -> X1;
rule X1 [x = 0] -> X2;
rule X1 [x = 2] {x := 0} -> X2;
init X0;
targets X2;
query ternary 3;
"""


@pytest.fixture
def example_text():
    return EXAMPLE


@pytest.fixture
def example():
    model, _ = parse_document(EXAMPLE)
    return model


@pytest.fixture
def example_file(tmp_path):
    url = tmp_path / 'example.tbpp'
    url.write_text(EXAMPLE)
    return url


@pytest.fixture
def subset_sum():
    """The chain automaton for S = {1, 2}."""
    model, _ = parse_document(SUBSET_SUM)
    return model
