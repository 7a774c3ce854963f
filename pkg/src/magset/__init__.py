"""magset: imsets, Markov properties and equivalence classes of maximal ancestral graphs."""

from .graph_core import Admg, CITriple, parse_graph

__version__ = "0.1.0"
__all__ = ["Admg", "CITriple", "parse_graph"]
