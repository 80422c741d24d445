"""Graph balancing by dynamic programming over a tree decomposition.

Vertices are machines and weighted edges are jobs that may run on either
endpoint; a loop is a job with a single machine. Orienting an edge toward a
vertex puts its weight on that vertex, and the goal is the orientation with
the smallest maximum weighted in-degree.

Every edge is oriented at its highest bag, the one nearest the root holding
both endpoints. A bag table keeps one row per vector of partial loads on the
bag vertices, with the largest load among the subtree vertices already left
behind; rows beaten on every load are dropped. Children are merged into their
parent leaves first.
"""
import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from .instance import (
    BudgetExceeded,
    Instance,
    InvalidInstance,
    KindMismatch,
    SchedulingException,
)

_LOGGER = logging.getLogger(__name__)

DEFAULT_TABLE_CAP = 2 ** 24

Bits = Tuple[int, ...]
Loads = Tuple[int, ...]
# (largest forgotten load, bits of the owned edges, child bag -> child row)
Row = Tuple[int, Bits, Dict[int, Loads]]


class InvalidDecomposition(SchedulingException):
    """Raised when a tree decomposition does not fit its graph."""


class GraphBalancingInstance:
    """Edge-weighted multigraph; edges[e] = (u, v, weight), u == v is a loop."""

    def __init__(self, vertices: int, edges: Sequence[Tuple[int, int, int]]) -> None:
        self.vertices = vertices
        self.edges = tuple(tuple(e) for e in edges)
        for index, (u, v, weight) in enumerate(self.edges):
            if not (0 <= u < vertices and 0 <= v < vertices):
                raise InvalidInstance("edge %s has an unknown endpoint" % index)
            if not isinstance(weight, int) or weight <= 0:
                raise InvalidInstance(
                    "edge %s needs a positive integer weight, got %r" % (index, weight)
                )

    @classmethod
    def from_restricted(cls, inst: Instance) -> "GraphBalancingInstance":
        """Convert a restricted instance whose jobs have one or two machines."""
        edges = []
        for j in range(inst.n):
            machines = inst.machines_for(j)
            if len(machines) > 2:
                raise KindMismatch("job %s can run on %s machines" % (j, len(machines)))
            u, v = machines[0], machines[-1]
            edges.append((u, v, inst.p[u][j]))
        return cls(inst.m, edges)

    def is_loop(self, e: int) -> bool:
        return self.edges[e][0] == self.edges[e][1]

    def reference_head(self, e: int) -> int:
        u, v, _ = self.edges[e]
        return max(u, v)

    def head(self, e: int, bit: int) -> int:
        """Vertex receiving edge e; bit 1 reverses the reference orientation."""
        u, v, _ = self.edges[e]
        if u == v:
            return u
        return min(u, v) if bit else max(u, v)

    @property
    def max_degree(self) -> int:
        neighbours = {v: set() for v in range(self.vertices)}
        for u, v, _ in self.edges:
            if u != v:
                neighbours[u].add(v)
                neighbours[v].add(u)
        return max((len(n) for n in neighbours.values()), default=0)

    def loads(self, heads: Sequence[int]) -> List[int]:
        """Weighted in-degrees for an orientation given as one head per edge."""
        load = [0] * self.vertices
        for (_, _, weight), head in zip(self.edges, heads):
            load[head] += weight
        return load

    def __repr__(self):
        return "<GraphBalancingInstance V=%s E=%s>" % (self.vertices, len(self.edges))


class TreeDecomposition:
    def __init__(
        self,
        bags: Sequence[Sequence[int]],
        tree_edges: Sequence[Tuple[int, int]],
        width: Optional[int] = None,
    ) -> None:
        self.bags = tuple(frozenset(bag) for bag in bags)
        self.tree_edges = tuple(tuple(e) for e in tree_edges)
        self.declared_width = width

    @property
    def width(self) -> int:
        return max((len(bag) for bag in self.bags), default=0) - 1

    def tree(self) -> nx.Graph:
        tree = nx.Graph()
        tree.add_nodes_from(range(len(self.bags)))
        tree.add_edges_from(self.tree_edges)
        return tree

    def __repr__(self):
        return "<TreeDecomposition bags=%s width=%s>" % (len(self.bags), self.width)


class DecompositionViolation:
    """First violated property of a tree decomposition and a witness."""

    def __init__(self, prop: str, witness) -> None:
        self.property = prop
        self.witness = witness

    def __str__(self):
        return "%s violated by %s" % (self.property, self.witness)

    def __repr__(self):
        return "<DecompositionViolation %s>" % self


def validate_decomposition(
    g: GraphBalancingInstance, td: TreeDecomposition
) -> Optional[DecompositionViolation]:
    """Check vertex coverage, edge coverage, tree shape and connectivity.

    :return: None when td is valid, else the first violation found
    """
    for index, bag in enumerate(td.bags):
        stray = sorted(v for v in bag if not 0 <= v < g.vertices)
        if stray:
            return DecompositionViolation("vertex range", (index, stray[0]))
    covered = set().union(*td.bags) if td.bags else set()
    for v in range(g.vertices):
        if v not in covered:
            return DecompositionViolation("vertex coverage", v)
    for e, (u, v, _) in enumerate(g.edges):
        if not any(u in bag and v in bag for bag in td.bags):
            return DecompositionViolation("edge coverage", e)

    if td.bags:
        for i, j in td.tree_edges:
            if not (0 <= i < len(td.bags) and 0 <= j < len(td.bags)):
                return DecompositionViolation("tree", (i, j))
        tree = td.tree()
        if not nx.is_tree(tree):
            return DecompositionViolation("tree", td.tree_edges)
        for v in range(g.vertices):
            holding = [i for i, bag in enumerate(td.bags) if v in bag]
            if not nx.is_connected(tree.subgraph(holding)):
                return DecompositionViolation("connectivity", v)
    elif td.tree_edges:
        return DecompositionViolation("tree", td.tree_edges)

    if td.declared_width is not None and td.width > td.declared_width:
        return DecompositionViolation("width", td.width)
    return None


class BagTable:
    """Rows of one bag: loads of the bag vertices -> (value, bits, picks).

    A row covers every edge oriented so far in the subtree of the bag. Its
    value is the largest load on a forgotten vertex, a subtree vertex outside
    the bag whose load can no longer change. bits orients the edges owned by
    the bag and picks maps each child bag to the row it was merged from.
    """

    def __init__(self, bag: int, vertices, edges: List[int], loops: List[int]):
        self.bag = bag
        self.vertices = sorted(vertices)
        self.index = {v: k for k, v in enumerate(self.vertices)}
        #: non-loop edges and loops whose highest bag is this one
        self.edges = edges
        self.loops = loops
        self.rows = {
            (0,) * len(self.vertices): (0, (), {})
        }  # type: Dict[Loads, Row]

    def makespan(self, loads: Loads) -> int:
        return max((self.rows[loads][0],) + loads)

    def orient(self, g: GraphBalancingInstance, table_cap: int) -> None:
        """Extend every row by each orientation of the owned edges."""
        rows = {}  # type: Dict[Loads, Row]
        for key in sorted(self.rows):
            value, _, picks = self.rows[key]
            for bits in itertools.product((0, 1), repeat=len(self.edges)):
                loads = list(key)
                for e in self.loops:
                    loads[self.index[g.edges[e][0]]] += g.edges[e][2]
                for e, bit in zip(self.edges, bits):
                    loads[self.index[g.head(e, bit)]] += g.edges[e][2]
                _keep(rows, tuple(loads), (value, bits, picks))
        self._replace(rows, table_cap)

    def merge(self, child: "BagTable", table_cap: int) -> None:
        """Fold a finished child table into this one."""
        shared = [v for v in child.vertices if v in self.index]
        forgotten = [child.index[v] for v in child.vertices if v not in self.index]

        # shared loads -> (smallest forgotten maximum, child row)
        projected = {}  # type: Dict[Loads, Tuple[int, Loads]]
        for key in sorted(child.rows):
            value = max([child.rows[key][0]] + [key[k] for k in forgotten])
            part = tuple(key[child.index[v]] for v in shared)
            if part not in projected or value < projected[part][0]:
                projected[part] = (value, key)

        rows = {}  # type: Dict[Loads, Row]
        for key in sorted(self.rows):
            value, bits, picks = self.rows[key]
            for part in sorted(projected):
                child_value, child_key = projected[part]
                loads = list(key)
                for v, load in zip(shared, part):
                    loads[self.index[v]] += load
                row = (max(value, child_value), bits, {**picks, child.bag: child_key})
                _keep(rows, tuple(loads), row)
        self._replace(rows, table_cap)

    def _replace(self, rows: Dict[Loads, Row], table_cap: int) -> None:
        self.rows = _undominated(rows)
        if len(self.rows) > table_cap:
            raise BudgetExceeded(
                "bag %s needs %s rows, more than %s"
                % (self.bag, len(self.rows), table_cap)
            )

    def __repr__(self):
        return "<BagTable bag=%s rows=%s>" % (self.bag, len(self.rows))


def _keep(rows: Dict[Loads, Row], loads: Loads, row: Row) -> None:
    if loads not in rows or row[0] < rows[loads][0]:
        rows[loads] = row


def _undominated(rows: Dict[Loads, Row]) -> Dict[Loads, Row]:
    """Drop rows another row beats on every bag load and on the value."""
    keys = sorted(rows)

    def dominated(key):
        return any(
            other != key
            and rows[other][0] <= rows[key][0]
            and all(a <= b for a, b in zip(other, key))
            for other in keys
        )

    return {key: rows[key] for key in keys if not dominated(key)}


def _owners(
    g: GraphBalancingInstance, td: TreeDecomposition, depth: Dict[int, int]
) -> List[int]:
    """Highest bag holding both endpoints, per edge."""
    owners = []
    for u, v, _ in g.edges:
        holding = [i for i, bag in enumerate(td.bags) if u in bag and v in bag]
        owners.append(min(holding, key=lambda i: (depth[i], i)))
    return owners


def balance(
    g: GraphBalancingInstance,
    td: TreeDecomposition,
    table_cap: int = DEFAULT_TABLE_CAP,
) -> Tuple[List[int], int]:
    """Optimal orientation of g by dynamic programming over td.

    :param table_cap: largest number of rows allowed in one bag table
    :return: (head vertex per edge, makespan)
    :raises InvalidDecomposition: if td is not a tree decomposition of g
    :raises BudgetExceeded: if a bag table would exceed table_cap rows
    """
    violation = validate_decomposition(g, td)
    if violation is not None:
        raise InvalidDecomposition(str(violation))
    if not td.bags:
        return [], 0

    tree = td.tree()
    root = 0
    depth = nx.single_source_shortest_path_length(tree, root)
    owners = _owners(g, td, depth)

    tables = {}  # type: Dict[int, BagTable]
    for i, bag in enumerate(td.bags):
        owned = [e for e, owner in enumerate(owners) if owner == i]
        edges = [e for e in owned if not g.is_loop(e)]
        if 2 ** len(edges) > table_cap:
            raise BudgetExceeded(
                "bag %s holds %s edges, 2^%s rows exceed %s"
                % (i, len(edges), len(edges), table_cap)
            )
        tables[i] = BagTable(i, bag, edges, [e for e in owned if g.is_loop(e)])

    children = {i: [] for i in tables}  # type: Dict[int, List[int]]
    for child, parent in nx.bfs_predecessors(tree, root):
        children[parent].append(child)

    for i in nx.dfs_postorder_nodes(tree, root):
        for child in sorted(children[i]):
            tables[i].merge(tables[child], table_cap)
        tables[i].orient(g, table_cap)
        _LOGGER.debug("bag %s done: %s", i, tables[i])

    root_table = tables[root]
    best = min(sorted(root_table.rows), key=root_table.makespan)
    makespan = root_table.makespan(best)

    heads = [g.reference_head(e) for e in range(len(g.edges))]
    stack = [(root, best)]
    while stack:
        i, key = stack.pop()
        table = tables[i]
        _, bits, picks = table.rows[key]
        for e, bit in zip(table.edges, bits):
            heads[e] = g.head(e, bit)
        stack.extend(picks.items())

    recomputed = max(g.loads(heads), default=0)
    if recomputed != makespan:
        raise SchedulingException(
            "orientation has makespan %s, table reported %s" % (recomputed, makespan)
        )
    return heads, makespan


def path_decomposition(g: GraphBalancingInstance) -> TreeDecomposition:
    """Path decomposition from the vertex order.

    Bag t holds vertex t and every earlier vertex with a neighbour at t or
    later.
    """
    last_neighbour = {v: v for v in range(g.vertices)}
    for u, v, _ in g.edges:
        a, b = min(u, v), max(u, v)
        last_neighbour[a] = max(last_neighbour[a], b)
    bags = [
        [u for u in range(t) if last_neighbour[u] >= t] + [t]
        for t in range(g.vertices)
    ]
    return TreeDecomposition(bags, [(t, t + 1) for t in range(g.vertices - 1)])
