"""Boolean computation models and the translations between them."""

from .models import (
    NBP,
    BAnd,
    BConst,
    BNot,
    BOr,
    BoolNode,
    BooleanCircuit,
    BVar,
    CircuitBuilder,
    Hypergraph,
    HypergraphProgram,
    NondetCircuit,
    bool_size,
    evaluate,
    from_lines,
    model_variables,
    parse_bool,
    print_bool,
    to_lines,
)
from .tables import truth_table
from .translations import (
    circuit_dualize,
    hgp2_to_nbp,
    hgp_from_hypergraph,
    hgp_monotone_circuit,
    hgp_to_nbc,
    hypergraph_function,
    implication_dual_circuit,
    implication_graph,
    nbc_to_hgp3,
    nbp_to_hgp2,
    nbp_to_monotone_circuit,
    normalize_degree2,
    normalize_fanin2,
)

__all__ = [
    "NBP",
    "BAnd",
    "BConst",
    "BNot",
    "BOr",
    "BoolNode",
    "BooleanCircuit",
    "BVar",
    "CircuitBuilder",
    "Hypergraph",
    "HypergraphProgram",
    "NondetCircuit",
    "bool_size",
    "circuit_dualize",
    "evaluate",
    "from_lines",
    "hgp2_to_nbp",
    "hgp_from_hypergraph",
    "hgp_monotone_circuit",
    "hgp_to_nbc",
    "hypergraph_function",
    "implication_dual_circuit",
    "implication_graph",
    "model_variables",
    "nbc_to_hgp3",
    "nbp_to_hgp2",
    "nbp_to_monotone_circuit",
    "normalize_degree2",
    "normalize_fanin2",
    "parse_bool",
    "print_bool",
    "to_lines",
    "truth_table",
]
