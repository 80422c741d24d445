"""Reoptimization on uniform machines with a bounded speed ratio.

Machines become bins of capacity s_i / s_max and job j becomes a piece of
size P_j / (s_max T). A size x lies in interval k when eps^(k+1) < x <= eps^k;
pieces are rounded down to multiples of eps^(k+2) within their interval.

Bins are processed in stages, one per bin interval k. For a bin of interval k
a piece is large in interval k, medium in interval k+1 and small below that.
A layered graph walks over the bins of every stage, each pack edge choosing
the large and medium pieces of one bin; the state vector (L, M, V1, V2, V)
tracks the large and medium pieces still to place and the slack left for
small pieces in the bins of earlier stages (V1), of the previous stage (V2)
and of the current stage (V). Update arcs carry the state into the next
stage. Every pack edge costs the old pieces of its bin it does not repack.

For every choice of update arcs the lightest path is decoded, small pieces
are packed greedily and the cheapest schedule is kept.
"""
import logging
import math
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from .instance import (
    Assignment,
    BudgetExceeded,
    Instance,
    InstanceKind,
    InvalidInstance,
    SchedulingException,
    load_profile,
    require_kind,
)
from .oracle import exact_makespan, within_cap
from .reopt import ReoptInput, transition_cost

_LOGGER = logging.getLogger(__name__)

DEFAULT_STATE_CAP = 200000
ORACLE_TARGET_JOBS = 10

INITIAL = "initial"
SUCCESS = "success"

Counts = Tuple[int, ...]
State = Tuple[Counts, Counts, int, int, int]


class NoPath(SchedulingException):
    """Raised when no relaxed packing exists for the makespan guess."""


class StateBudgetExceeded(BudgetExceeded):
    """Raised when the layered graph or the arc choices exceed the cap."""


class SmallPackFailed(SchedulingException):
    """Raised when a small piece fits no eligible bin."""


def interval(x: Fraction, eps: Fraction) -> int:
    """k with eps^(k+1) < x <= eps^k, for 0 < x <= 1."""
    k, bound = 0, eps
    while x <= bound:
        k += 1
        bound *= eps
    return k


class ScaledUniformInstance:
    """Bins and pieces of a uniform instance for the makespan guess T."""

    def __init__(self, inst: Instance, T, eps) -> None:
        require_kind(inst, InstanceKind.Uniform)
        self.inst = inst
        self.T = Fraction(T)
        self.eps = Fraction(eps)
        s_max = max(inst.speeds)
        #: machine of every bin, fastest first
        self.order = sorted(range(inst.m), key=lambda i: (-inst.speeds[i], i))
        self.bin_of = {i: b for b, i in enumerate(self.order)}
        self.caps = [inst.speeds[i] / s_max for i in self.order]
        self.bin_interval = [interval(c, self.eps) for c in self.caps]
        self.K = max(self.bin_interval)

        self.pieces = [Fraction(t) / (s_max * self.T) for t in inst.base_times]
        if any(p > 1 for p in self.pieces):
            raise InvalidInstance("T=%s is below the largest job" % self.T)
        self.piece_interval = [interval(p, self.eps) for p in self.pieces]
        self.rounded = [
            math.floor(p / self.grid(q + 2)) * self.grid(q + 2)
            for p, q in zip(self.pieces, self.piece_interval)
        ]
        self._classes = {}  # type: Dict[int, List[Fraction]]

    def grid(self, k: int) -> Fraction:
        return self.eps ** k

    def stage_bins(self, k: int) -> List[int]:
        return [b for b, q in enumerate(self.bin_interval) if q == k]

    def classes(self, q: int) -> List[Fraction]:
        """Distinct rounded sizes in interval q, largest first."""
        if q not in self._classes:
            self._classes[q] = sorted(
                {r for r, k in zip(self.rounded, self.piece_interval) if k == q},
                reverse=True,
            )
        return self._classes[q]

    def counts(self, q: int, pieces: Sequence[int]) -> Counts:
        classes = self.classes(q)
        counts = [0] * len(classes)
        for j in pieces:
            if self.piece_interval[j] == q:
                counts[classes.index(self.rounded[j])] += 1
        return tuple(counts)

    def volume(self, q: int, counts: Counts) -> Fraction:
        return sum(
            (c * size for c, size in zip(counts, self.classes(q))), Fraction(0)
        )

    def is_small_for(self, j: int, b: int) -> bool:
        return self.piece_interval[j] >= self.bin_interval[b] + 2

    def __repr__(self):
        return "<ScaledUniformInstance T=%s eps=%s bins=%s stages=%s>" % (
            self.T,
            self.eps,
            len(self.caps),
            self.K + 1,
        )


class CostedEdge:
    """Large and medium pieces one pack edge puts into bin `bin`."""

    def __init__(self, stage: int, bin: int, large: Counts, medium: Counts, cost):
        self.stage = stage
        self.bin = bin
        self.large = large
        self.medium = medium
        self.cost = cost

    def __repr__(self):
        return "<CostedEdge bin=%s large=%s medium=%s cost=%s>" % (
            self.bin,
            self.large,
            self.medium,
            self.cost,
        )


class LayeredGraph:
    """Layered state graph; nodes are (stage, layer, state) plus two sentinels."""

    def __init__(self, scaled: ScaledUniformInstance) -> None:
        self.scaled = scaled
        self.graph = nx.DiGraph()
        self.graph.add_node(INITIAL)
        self.graph.add_node(SUCCESS)
        self.stage_nodes = {
            k: [] for k in range(scaled.K + 1)
        }  # type: Dict[int, List]
        self.stage_ends = {k: [] for k in range(scaled.K + 1)}  # type: Dict

    def add_node(self, node) -> None:
        if node not in self.graph:
            self.graph.add_node(node)
            self.stage_nodes[node[0]].append(node)

    def stage_graph(self, k: int) -> nx.DiGraph:
        return self.graph.subgraph(self.stage_nodes[k])

    def start(self):
        return next(iter(self.graph.successors(INITIAL)))

    def pack_edges(self, path: Sequence) -> List[CostedEdge]:
        edges = []
        for u, v in zip(path, path[1:]):
            pack = self.graph.edges[u, v].get("pack")
            if pack is not None:
                edges.append(pack)
        return edges

    def __repr__(self):
        return "<LayeredGraph nodes=%s edges=%s>" % (
            self.graph.number_of_nodes(),
            self.graph.number_of_edges(),
        )


def _packings(sizes: Sequence[Fraction], limits: Counts, capacity) -> Iterator:
    """Count vectors <= limits whose total size stays within capacity."""

    def extend(prefix, used):
        s = len(prefix)
        if s == len(sizes):
            yield tuple(prefix), used
            return
        for c in range(limits[s] + 1):
            if used + c * sizes[s] > capacity:
                break
            yield from extend(prefix + [c], used + c * sizes[s])

    yield from extend([], Fraction(0))


def _old_pieces(scaled: ScaledUniformInstance, reopt: ReoptInput) -> Dict:
    """Pieces grouped by the bin of their old machine."""
    old = {b: [] for b in range(len(scaled.caps))}  # type: Dict[int, List[int]]
    for j, i in enumerate(reopt.old_machine):
        if i is not None and i in scaled.bin_of:
            old[scaled.bin_of[i]].append(j)
    return old


def _update(scaled: ScaledUniformInstance, k: int, state: State) -> Optional[State]:
    """Carry a stage-k end state into stage k+1, None if L does not fit."""
    L, M, V1, V2, V = state
    rest = V1 * scaled.grid(k + 2) - scaled.volume(k, L)
    if rest < 0:
        return None
    every = list(range(len(scaled.pieces)))
    V1_next = math.floor((rest + V2 * scaled.grid(k + 3)) / scaled.grid(k + 3))
    return M, scaled.counts(k + 2, every), V1_next, V, 0


def _succeeds(scaled: ScaledUniformInstance, state: State) -> bool:
    """Remaining large, medium and deeper pieces fit the recorded slack."""
    K = scaled.K
    L, M, V1, V2, V = state
    rest = V1 * scaled.grid(K + 2) - scaled.volume(K, L)
    if rest < 0:
        return False
    rest += V2 * scaled.grid(K + 3) - scaled.volume(K + 1, M)
    if rest < 0:
        return False
    deeper = sum(
        (r for r, q in zip(scaled.rounded, scaled.piece_interval) if q >= K + 2),
        Fraction(0),
    )
    return deeper <= rest + V * scaled.grid(K + 4)


def build_layered_graph(
    scaled: ScaledUniformInstance,
    reopt: ReoptInput,
    state_cap: int = DEFAULT_STATE_CAP,
) -> LayeredGraph:
    """Build the layered graph of relaxed packings with transition costs.

    :raises StateBudgetExceeded: if the graph grows beyond state_cap nodes
    """
    lg = LayeredGraph(scaled)
    graph = lg.graph
    every = list(range(len(scaled.pieces)))
    old = _old_pieces(scaled, reopt)

    start = (0, 0, (scaled.counts(0, every), scaled.counts(1, every), 0, 0, 0))
    lg.add_node(start)
    graph.add_edge(INITIAL, start, weight=0)
    frontier = [start]

    for k in range(scaled.K + 1):
        large_sizes, medium_sizes = scaled.classes(k), scaled.classes(k + 1)
        for layer, b in enumerate(scaled.stage_bins(k)):
            cap = scaled.caps[b]
            own_large = scaled.counts(k, old[b])
            own_medium = scaled.counts(k + 1, old[b])
            following = []
            for node in frontier:
                L, M, V1, V2, V = node[2]
                for a, used in _packings(large_sizes, L, cap):
                    for m_vec, packed in _packings(medium_sizes, M, cap - used):
                        slack = math.ceil((cap - used - packed) / scaled.grid(k + 4))
                        state = (
                            tuple(x - y for x, y in zip(L, a)),
                            tuple(x - y for x, y in zip(M, m_vec)),
                            V1,
                            V2,
                            V + slack,
                        )
                        target = (k, layer + 1, state)
                        cost = sum(max(0, o - c) for o, c in zip(own_large, a))
                        cost += sum(max(0, o - c) for o, c in zip(own_medium, m_vec))
                        if target not in graph:
                            lg.add_node(target)
                            following.append(target)
                        elif graph.has_edge(node, target):
                            if graph.edges[node, target]["weight"] <= cost:
                                continue
                        graph.add_edge(
                            node,
                            target,
                            weight=cost,
                            pack=CostedEdge(k, b, a, m_vec, cost),
                        )
            frontier = following
            if graph.number_of_nodes() > state_cap:
                raise StateBudgetExceeded(
                    "layered graph passed %s nodes in stage %s" % (state_cap, k)
                )
        lg.stage_ends[k] = list(frontier)

        if k < scaled.K:
            following = []
            for node in frontier:
                state = _update(scaled, k, node[2])
                if state is None:
                    continue
                target = (k + 1, 0, state)
                if target not in graph:
                    lg.add_node(target)
                    following.append(target)
                graph.add_edge(node, target, weight=0)
            frontier = following
        else:
            for node in frontier:
                if _succeeds(scaled, node[2]):
                    graph.add_edge(node, SUCCESS, weight=0)

    _LOGGER.debug("%s for %s", lg, scaled)
    return lg


class _Candidate:
    def __init__(self, assignment: Assignment, cost: int, makespan) -> None:
        self.assignment = assignment
        self.cost = cost
        self.makespan = makespan

    def key(self):
        return self.cost, self.makespan, self.assignment.sigma


def _claim(scaled, old, packs: Sequence[CostedEdge]) -> Dict[int, int]:
    """Piece -> bin for the large and medium pieces of a path.

    Each bin first takes back its own old pieces of every packed class; the
    free slots are then filled from the unclaimed pieces in index order.
    """
    placed = {}  # type: Dict[int, int]
    free = []
    for edge in packs:
        for q, counts in ((edge.stage, edge.large), (edge.stage + 1, edge.medium)):
            for size, wanted in zip(scaled.classes(q), counts):
                own = [
                    j
                    for j in sorted(old[edge.bin])
                    if scaled.piece_interval[j] == q and scaled.rounded[j] == size
                ]
                for j in own[:wanted]:
                    placed[j] = edge.bin
                free.append((edge.bin, q, size, max(0, wanted - len(own))))
    for b, q, size, count in free:
        pool = [
            j
            for j in range(len(scaled.pieces))
            if j not in placed
            and scaled.piece_interval[j] == q
            and scaled.rounded[j] == size
        ]
        if len(pool) < count:  # pragma: no cover
            raise SchedulingException("path packs more pieces of size %s" % size)
        for j in pool[:count]:
            placed[j] = b
    return placed


def _pack_small(scaled, old, placed: Dict[int, int], own_phase: bool) -> None:
    """Place every remaining piece as a small piece, updating placed."""
    loads = [Fraction(0)] * len(scaled.caps)
    for j, b in placed.items():
        loads[b] += scaled.rounded[j]
    if own_phase:
        for b in range(len(scaled.caps)):
            own = sorted(
                (j for j in old[b] if j not in placed and scaled.is_small_for(j, b)),
                key=lambda j: (scaled.rounded[j], j),
            )
            for j in own:
                if loads[b] > scaled.caps[b]:
                    break
                placed[j] = b
                loads[b] += scaled.rounded[j]
    rest = sorted(
        (j for j in range(len(scaled.pieces)) if j not in placed),
        key=lambda j: (-scaled.rounded[j], j),
    )
    for j in rest:
        for b, cap in enumerate(scaled.caps):
            limit = cap + scaled.grid(scaled.bin_interval[b] + 4)
            if scaled.is_small_for(j, b) and loads[b] <= limit:
                placed[j] = b
                loads[b] += scaled.rounded[j]
                break
        else:
            raise SmallPackFailed("piece %s fits no eligible bin" % j)


def _check_loads(scaled: ScaledUniformInstance, placed: Dict[int, int]) -> None:
    eps = scaled.eps
    relaxed = 1 + eps + eps ** 3
    loads = [Fraction(0)] * len(scaled.caps)
    for j, b in placed.items():
        loads[b] += scaled.rounded[j]
    for b, (load, cap) in enumerate(zip(loads, scaled.caps)):
        if load > cap * relaxed:
            raise SchedulingException(
                "bin %s holds %s above %s * %s" % (b, load, relaxed, cap)
            )


def _decode(scaled, reopt, old, packs) -> _Candidate:
    placed = _claim(scaled, old, packs)
    claimed = dict(placed)
    try:
        _pack_small(scaled, old, placed, own_phase=True)
    except SmallPackFailed:
        _LOGGER.warning("own small pieces crowd out others, packing without them")
        placed = claimed
        _pack_small(scaled, old, placed, own_phase=False)
    _check_loads(scaled, placed)

    inst = reopt.new
    a = Assignment(scaled.order[placed[j]] for j in range(inst.n))
    makespan = load_profile(inst, a).makespan
    eps = scaled.eps
    bound = (1 + 2 * eps + eps ** 2) * (1 + eps + eps ** 3) * scaled.T
    if makespan > bound:
        raise SchedulingException("makespan %s above %s" % (makespan, bound))
    return _Candidate(a, transition_cost(reopt, a), makespan)


def reoptimize_at(
    reopt: ReoptInput, eps, T, state_cap: int = DEFAULT_STATE_CAP
) -> Tuple[Assignment, int]:
    """Cheapest decoded schedule for the makespan guess T.

    :param eps: internal accuracy, 1/eps an integer
    :raises NoPath: if no relaxed packing exists for T
    :raises StateBudgetExceeded: if the graph or the arc choices exceed state_cap
    """
    scaled = ScaledUniformInstance(reopt.new, T, eps)
    lg = build_layered_graph(scaled, reopt, state_cap)
    old = _old_pieces(scaled, reopt)
    stage_graphs = {k: lg.stage_graph(k) for k in range(scaled.K + 1)}
    shortest = {}  # type: Dict
    best = [None]  # type: List[Optional[_Candidate]]
    choices = [0]

    def lightest(k, node):
        if node not in shortest:
            shortest[node] = nx.single_source_dijkstra(stage_graphs[k], node)
        return shortest[node]

    def descend(k, node, prefix):
        distances, paths = lightest(k, node)
        for end in lg.stage_ends[k]:
            if end not in distances:
                continue
            path = prefix + paths[end]
            if k < scaled.K:
                for following in lg.graph.successors(end):
                    descend(k + 1, following, path)
            elif lg.graph.has_edge(end, SUCCESS):
                choices[0] += 1
                if choices[0] > state_cap:
                    raise StateBudgetExceeded(
                        "more than %s update arc choices" % state_cap
                    )
                candidate = _decode(scaled, reopt, old, lg.pack_edges(path))
                if best[0] is None or candidate.key() < best[0].key():
                    best[0] = candidate

    descend(0, lg.start(), [])
    if best[0] is None:
        raise NoPath("no relaxed packing for T=%s" % T)
    _LOGGER.debug(
        "T=%s: %s arc choices, best cost %s", T, choices[0], best[0].cost
    )
    return best[0].assignment, best[0].cost


def list_schedule(inst: Instance) -> Assignment:
    """Longest job first onto the machine that finishes it earliest."""
    loads = [Fraction(0)] * inst.m
    sigma = [0] * inst.n
    for j in sorted(range(inst.n), key=lambda j: (-inst.base_times[j], j)):
        i = min(range(inst.m), key=lambda i: (loads[i] + inst.p[i][j], i))
        sigma[j] = i
        loads[i] += inst.p[i][j]
    return Assignment(sigma)


def reoptimize_uniform(
    reopt: ReoptInput, eps, b=None, state_cap: int = DEFAULT_STATE_CAP
) -> Tuple[Assignment, int]:
    """Cheapest schedule of makespan <= (1 + eps) C*max.

    :param eps: target accuracy in (0, 2] with 8/eps an integer
    :param b: bound on the speed ratio, defaults to the input's bound
    :return: (assignment, transition cost)
    :raises InvalidInstance: if the speeds exceed the ratio bound
    """
    inst = reopt.new
    require_kind(inst, InstanceKind.Uniform)
    eps = Fraction(eps)
    if not 0 < eps <= 2 or (8 / eps).denominator != 1:
        raise ValueError("eps must lie in (0, 2] with 8/eps integral, got %s" % eps)
    b = b if b is not None else reopt.speed_ratio_bound
    if b is not None and max(inst.speeds) > Fraction(b) * min(inst.speeds):
        raise InvalidInstance("speed ratio exceeds the bound %s" % b)
    if inst.n == 0:
        return Assignment([]), 0

    inner = eps / 8
    if inst.n <= ORACLE_TARGET_JOBS and within_cap(inst):
        T = exact_makespan(inst).T_opt
        a, cost = reoptimize_at(reopt, inner, T, state_cap)
        lower = T
    else:
        lower = max(
            Fraction(sum(inst.base_times)) / sum(inst.speeds),
            Fraction(max(inst.base_times)) / max(inst.speeds),
        )
        upper = load_profile(inst, list_schedule(inst)).makespan * (1 + inner)
        T = lower
        while True:
            try:
                a, cost = reoptimize_at(reopt, inner, T, state_cap)
                break
            except NoPath:
                lower = T
                T = T * (1 + inner)
                if T > upper:
                    raise
    makespan = load_profile(inst, a).makespan
    if makespan > (1 + eps) * lower:
        raise SchedulingException(
            "makespan %s above (1+%s)*%s" % (makespan, eps, lower)
        )
    return a, cost
