"""Query rewriting over ontologies with tree witnesses.

Rewritings into positive-existential formulas and nonrecursive datalog,
the certain-answer oracle they are checked against, and the Boolean
models (hypergraph programs, branching programs, circuits) that govern
their size.
"""

from .chase import build_chase, ontology_depth, saturate
from .core import TGD, Atom, ConjunctiveQuery, DataInstance, Ontology, const, var
from .evaluate import certain_answers, eval_fo, eval_ndl
from .rewrite_ndl import NDLProgram, depth1_ndl_pipeline, ndl_to_arbitrary_data
from .rewrite_pe import compact_tw_rewrite, split_rewrite, to_arbitrary_data, tw_rewrite
from .textio import dumps, load, parse_data, parse_ontology, parse_query
from .treewitness import enumerate_tree_witnesses, tw_hypergraph

__version__ = "0.1.0"

__all__ = [
    "TGD",
    "Atom",
    "ConjunctiveQuery",
    "DataInstance",
    "NDLProgram",
    "Ontology",
    "build_chase",
    "certain_answers",
    "compact_tw_rewrite",
    "const",
    "depth1_ndl_pipeline",
    "dumps",
    "enumerate_tree_witnesses",
    "eval_fo",
    "eval_ndl",
    "load",
    "ndl_to_arbitrary_data",
    "ontology_depth",
    "parse_data",
    "parse_ontology",
    "parse_query",
    "saturate",
    "split_rewrite",
    "to_arbitrary_data",
    "tw_hypergraph",
    "tw_rewrite",
    "var",
]
