"""graphatlas: multi-resolution exploration of large graphs.

Build a communities-within-communities hierarchy with a balanced multilevel
partitioner, persist it in a single seekable file with on-demand leaf
loading, navigate it through bounded display contexts, and mine small
connection subgraphs between query nodes with random walks with restart.
"""

from .consub import (ConnectionSubgraph, GoodnessField, RwrVector, extract,
                     goodness, rwr)
from .errors import (ContractError, ExtractionTimeout, FormatError,
                     GraphAtlasError, InfeasibleError,
                     InsufficientBudgetError, NotFoundError)
from .graph import (DegreeHistogram, Graph, HopPlot, IngestReport,
                    degree_distribution, hop_plot, load_edge_list,
                    load_labels, pagerank, parse_edge_list, strong_components,
                    weak_components)
from .gtree import (GTree, GTreeHandle, GTreeNode, LeafSubgraph, build_gtree,
                    connectivity_between, open_gtree, serialize)
from .navigator import (ContextSet, LeafMetrics, NodeLocation, find_node,
                        leaf_metrics, tomahawk_context)
from .partition import (PartitionAssignment, WeightedGraph, coarsen, edge_cut,
                        partition_kway, refine_boundary)

__version__ = "0.1.0"

__all__ = [
    "ConnectionSubgraph", "ContextSet", "ContractError", "DegreeHistogram",
    "ExtractionTimeout", "FormatError", "GTree", "GTreeHandle", "GTreeNode",
    "GoodnessField", "Graph", "GraphAtlasError", "HopPlot", "InfeasibleError",
    "IngestReport", "InsufficientBudgetError", "LeafMetrics", "LeafSubgraph",
    "NodeLocation", "NotFoundError", "PartitionAssignment", "RwrVector",
    "WeightedGraph", "build_gtree", "coarsen", "connectivity_between",
    "degree_distribution", "edge_cut", "extract", "find_node", "goodness",
    "hop_plot", "leaf_metrics", "load_edge_list", "load_labels",
    "open_gtree", "pagerank", "parse_edge_list", "partition_kway",
    "refine_boundary", "rwr", "serialize", "strong_components",
    "tomahawk_context", "weak_components",
]
