"""Bipartite matching helpers on top of networkx.

Graph nodes are plain integers: networkx converts node collections to sets
in places, and integer hashing keeps the iteration order, and with it the
chosen matching, identical from run to run.
"""
import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms import bipartite

_LOGGER = logging.getLogger(__name__)


def _integral_weights(costs: Mapping[Tuple, Fraction]) -> Dict:
    """Scale rational costs by the lcm of their denominators."""
    scale = 1
    for c in costs.values():
        denominator = Fraction(c).denominator
        scale = scale * denominator // math.gcd(scale, denominator)
    return {edge: int(Fraction(c) * scale) for edge, c in costs.items()}


def min_cost_matching(
    left: Sequence, right: Sequence, costs: Mapping[Tuple, Fraction]
) -> Optional[Dict]:
    """Find a minimum cost matching that covers every left node.

    :param left: left node labels
    :param right: right node labels
    :param costs: cost per admissible (left, right) edge
    :return: map left -> right, or None when no left-saturating matching exists
    """
    if not left:
        return {}
    left_id = {u: 2 + k for k, u in enumerate(left)}
    right_id = {v: 2 + len(left) + k for k, v in enumerate(right)}
    source, sink = 0, 1

    graph = nx.DiGraph()
    graph.add_nodes_from([source, sink])
    for u in left:
        graph.add_edge(source, left_id[u], capacity=1, weight=0)
    for (u, v), w in _integral_weights(costs).items():
        graph.add_edge(left_id[u], right_id[v], capacity=1, weight=w)
    for v in right:
        graph.add_edge(right_id[v], sink, capacity=1, weight=0)

    flow = nx.max_flow_min_cost(graph, source, sink)
    if sum(flow[source].values()) < len(left):
        _LOGGER.debug("no matching covers all %s left nodes", len(left))
        return None

    right_label = {node: v for v, node in right_id.items()}
    matched = {}
    for u in left:
        for node, amount in flow[left_id[u]].items():
            if amount:
                matched[u] = right_label[node]
    return matched


def min_cost_perfect_matching(costs: Sequence[Sequence[Fraction]]) -> Dict[int, int]:
    """Perfect matching of a complete square cost matrix, row -> column."""
    size = len(costs)
    matched = min_cost_matching(
        list(range(size)),
        list(range(size)),
        {(r, c): costs[r][c] for r in range(size) for c in range(size)},
    )
    if matched is None or len(matched) != size:  # pragma: no cover
        raise ValueError("complete bipartite graph without perfect matching")
    return matched


def maximum_matching(
    left: Sequence[int], adjacency: Mapping[int, Iterable[int]]
) -> Dict[int, int]:
    """Hopcroft–Karp maximum matching, left -> right.

    Left and right labels are integers and may overlap; the two sides are
    kept apart internally.
    """
    right = sorted({v for u in left for v in adjacency.get(u, ())})
    offset = max(list(left) + right, default=0) + 1
    graph = nx.Graph()
    graph.add_nodes_from(left)
    graph.add_nodes_from(offset + v for v in right)
    for u in left:
        for v in adjacency.get(u, ()):
            graph.add_edge(u, offset + v)
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=list(left))
    return {u: matching[u] - offset for u in left if u in matching}
