"""Weighted decoding graph construction and matching-based decoding.

Every enumerated fault whose syndrome flips exactly two checks of a sector
contributes its probability to that pair's edge (probabilities of distinct
mechanisms are summed, following the increment rule; an exact XOR
combination is available behind a flag for sensitivity studies).  Edge
weights are ``-log(p)``; matching weights between arbitrary defect pairs
are shortest-path sums over these local weights, cached for all node pairs
together with the XOR of edge logical-flip bits along one minimizing path.

Faults flipping zero or more than two checks of a sector contribute no
edge there - the decoder handles them suboptimally by design.  Faults that
flip exactly two checks in each sector contribute an edge to both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .lattice import DUAL, PRIMAL, Lattice
from .matching import min_weight_perfect_matching
from .noise import FaultEvent, NoiseParams, enumerate_events
from .propagation import EventEffects, FlipFrame, Syndrome, compute_event_effects, logical_flips

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


class InvariantViolationError(RuntimeError):
    """A structural invariant failed (signals a propagation/decoder bug)."""


@dataclass
class GraphEdge:
    a: int                   # global check ids, a < b
    b: int
    probability: float
    weight: float
    logical_mask: int        # membrane bits restricted to the edge's sector
    rep_event: int           # index of the dominant contributing event
    rep_probability: float


@dataclass
class SectorGraph:
    """One sector's decoding graph plus cached shortest-path machinery."""

    sector: str
    node_offset: int          # global check id of local node 0
    n_nodes: int
    edges: list[GraphEdge]
    dist: np.ndarray          # (n, n) shortest-path weights, inf = unreachable
    predecessors: np.ndarray  # (n, n) int32, scipy convention (-9999 = none)
    pair_mask: np.ndarray     # (n, n) uint8 logical bits along one min path
    component: np.ndarray     # (n,) component label per node
    n_components: int


@dataclass
class DecodingGraph:
    lattice: Lattice
    params: NoiseParams
    sectors: dict[str, SectorGraph]
    xor_accumulate: bool = False
    events: list[FaultEvent] | None = field(default=None, repr=False)

    def sector_of_check(self, check_id: int) -> str:
        return self.lattice.check_sector(check_id)


@dataclass
class MatchingResult:
    pairs: list[tuple[int, int]]          # global check ids
    total_weight: float
    correction_logical_bits: tuple[int, ...]


def shortest_path_matrix(n_nodes: int, edges: list[tuple[int, int, float]]
                         ) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs shortest paths by Dijkstra from every node.

    Returns (dist, predecessors); unreachable pairs get inf.  Backed by
    scipy's compiled Dijkstra; exactness is checked against a Floyd-
    Warshall oracle in the tests.
    """
    # parallel edges keep only their lightest copy (COO construction would
    # otherwise sum duplicates)
    lightest: dict[tuple[int, int], float] = {}
    for a, b, w in edges:
        key = (min(a, b), max(a, b))
        if key not in lightest or w < lightest[key]:
            lightest[key] = w
    rows = [a for a, _b in lightest] + [b for _a, b in lightest]
    cols = [b for _a, b in lightest] + [a for a, _b in lightest]
    vals = list(lightest.values()) * 2
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))
    dist, preds = csgraph.dijkstra(mat, directed=False, return_predecessors=True)
    return dist, preds


@njit(cache=True)
def _pair_masks_kernel(dist, preds, edge_mask):
    """XOR of edge logical bits along each source's shortest-path tree."""
    n = dist.shape[0]
    out = np.zeros((n, n), dtype=np.uint8)
    for i in range(n):
        order = np.argsort(dist[i])
        for oi in range(n):
            j = order[oi]
            if j == i or not np.isfinite(dist[i, j]):
                continue
            p = preds[i, j]
            if p < 0:
                continue
            out[i, j] = out[i, p] ^ edge_mask[p, j]
    return out


def _sector_bits(sector: str) -> int:
    # membrane ids: 0,1 primal; 2,3 dual (lattice builder ordering)
    return 0b0011 if sector == PRIMAL else 0b1100


def build_graph(lattice: Lattice, params: NoiseParams, *,
                events: list[FaultEvent] | None = None,
                effects: EventEffects | None = None,
                xor_accumulate: bool = False) -> DecodingGraph:
    """Accumulate every two-flip fault mechanism into weighted sector edges.

    ``xor_accumulate`` switches the probability combination from the plain
    sum to the exact p1 + p2 - 2*p1*p2 rule (default off).
    """
    if params.base_rate <= 0.0:
        raise ValueError("decoding graph requires base_rate > 0 (no fault events)")
    if events is None:
        events = enumerate_events(lattice, params)
    if effects is None:
        effects = compute_event_effects(lattice, events)

    n_primal = lattice.n_primal
    acc: dict[tuple[int, int], list] = {}
    for i in range(effects.n_events):
        checks = effects.checks_of(i)
        if len(checks) == 0:
            continue
        primal = checks[checks < n_primal]
        dual = checks[checks >= n_primal]
        prob = float(effects.probabilities[i])
        mask = int(effects.logical_mask[i])
        for side in (primal, dual):
            if len(side) != 2:
                continue
            key = (int(side[0]), int(side[1]))
            sector_mask = mask & _sector_bits(PRIMAL if side is primal else DUAL)
            entry = acc.get(key)
            if entry is None:
                acc[key] = [prob, prob, i, sector_mask]
            else:
                if xor_accumulate:
                    entry[0] = entry[0] + prob - 2.0 * entry[0] * prob
                else:
                    entry[0] += prob
                # dominant-event convention for the edge's logical bits;
                # ties break toward the earlier enumeration index
                if prob > entry[1]:
                    entry[1], entry[2], entry[3] = prob, i, sector_mask

    sectors = {}
    for sector, offset, count in ((PRIMAL, 0, n_primal),
                                  (DUAL, n_primal, lattice.n_checks - n_primal)):
        edges = []
        for (a, b), (p, rep_p, rep_i, mask) in sorted(acc.items()):
            if (a >= n_primal) != (sector == DUAL):
                continue
            if p >= 1.0:
                raise InvariantViolationError(
                    f"edge probability {p} >= 1 for checks ({a}, {b})")
            edges.append(GraphEdge(a=a, b=b, probability=p, weight=-math.log(p),
                                   logical_mask=mask, rep_event=rep_i,
                                   rep_probability=rep_p))
        local_edges = [(e.a - offset, e.b - offset, e.weight) for e in edges]
        dist, preds = shortest_path_matrix(count, local_edges)
        edge_mask = np.zeros((count, count), dtype=np.uint8)
        wmat = sp.csr_matrix(
            ([e.weight for e in edges] * 2,
             ([e.a - offset for e in edges] + [e.b - offset for e in edges],
              [e.b - offset for e in edges] + [e.a - offset for e in edges])),
            shape=(count, count))
        for e in edges:
            edge_mask[e.a - offset, e.b - offset] = e.logical_mask
            edge_mask[e.b - offset, e.a - offset] = e.logical_mask
        pair_mask = _pair_masks_kernel(dist, preds.astype(np.int32), edge_mask)
        n_comp, comp = csgraph.connected_components(wmat, directed=False)
        sectors[sector] = SectorGraph(sector=sector, node_offset=offset,
                                      n_nodes=count, edges=edges, dist=dist,
                                      predecessors=preds.astype(np.int32),
                                      pair_mask=pair_mask, component=comp,
                                      n_components=n_comp)
    return DecodingGraph(lattice=lattice, params=params, sectors=sectors,
                         xor_accumulate=xor_accumulate, events=events)


@dataclass
class PathRecovery:
    """Predecessor rows for the terminals, enough to rebuild any min path."""

    terminals: np.ndarray
    predecessors: np.ndarray   # (n_terminals, n_nodes)

    def path(self, i: int, j: int) -> list[int]:
        """Node sequence of a minimizing path terminal i -> terminal j
        (local node ids)."""
        src = self.terminals[i]
        preds = self.predecessors[i]
        node = self.terminals[j]
        out = [int(node)]
        while node != src:
            node = preds[node]
            if node < 0:
                raise InvariantViolationError("no path between terminals")
            out.append(int(node))
        return out[::-1]


def pair_weights(graph: DecodingGraph, terminals: list[int]
                 ) -> tuple[np.ndarray, PathRecovery]:
    """Matching weight matrix between flipped checks of one sector.

    Weights are shortest-path sums of local edge weights; unreachable pairs
    (possible only across eta=inf planes) come back infinite.
    """
    if not terminals:
        return np.zeros((0, 0)), PathRecovery(np.empty(0, dtype=int),
                                              np.empty((0, 0), dtype=np.int32))
    sectors = {graph.sector_of_check(t) for t in terminals}
    if len(sectors) != 1:
        raise ValueError("terminals must belong to a single sector")
    sg = graph.sectors[sectors.pop()]
    local = np.asarray(sorted(t - sg.node_offset for t in terminals), dtype=int)
    w = sg.dist[np.ix_(local, local)]
    return w, PathRecovery(terminals=local, predecessors=sg.predecessors[local])


def match_local(sg: SectorGraph, defects: np.ndarray
                ) -> tuple[list[tuple[int, int]], float, int]:
    """Match local defect node ids within one sector.

    Defects are grouped by connected component (at eta=inf the XZZX graph
    splits into planes; pairing across components is impossible) and each
    group is matched exactly on its complete path-weight graph.  Returns
    (local pairs, total weight, XORed logical mask).
    """
    pairs: list[tuple[int, int]] = []
    total = 0.0
    mask = 0
    if len(defects) == 0:
        return pairs, total, mask
    labels = sg.component[defects]
    for lab in np.unique(labels):
        group = defects[labels == lab]
        if len(group) % 2 == 1:
            raise InvariantViolationError(
                f"odd defect count {len(group)} in one {sg.sector} component")
        w = sg.dist[np.ix_(group, group)]
        for i, j in min_weight_perfect_matching(w):
            gi, gj = int(group[i]), int(group[j])
            pairs.append((gi, gj))
            total += float(sg.dist[gi, gj])
            mask ^= int(sg.pair_mask[gi, gj])
    return pairs, total, mask


def match(graph: DecodingGraph, syndrome: Syndrome) -> MatchingResult:
    """Exact minimum-weight perfect matching of the flipped checks.

    Each sector is matched independently on the complete graph of its
    flipped checks with cached shortest-path weights.
    """
    pairs: list[tuple[int, int]] = []
    total = 0.0
    mask = 0
    for sector in (PRIMAL, DUAL):
        sg = graph.sectors[sector]
        local = np.asarray(sorted(c - sg.node_offset for c in syndrome
                                  if graph.sector_of_check(c) == sector), dtype=int)
        sector_pairs, sector_total, sector_mask = match_local(sg, local)
        pairs.extend((a + sg.node_offset, b + sg.node_offset)
                     for a, b in sector_pairs)
        total += sector_total
        mask ^= sector_mask
    bits = tuple((mask >> m) & 1 for m in range(len(graph.lattice.logicals)))
    return MatchingResult(pairs=pairs, total_weight=total,
                          correction_logical_bits=bits)


def decode_trial(graph: DecodingGraph, lattice: Lattice,
                 frame: FlipFrame) -> tuple[int, ...]:
    """Failure bit per membrane: actual logical flips XOR matching correction."""
    from .propagation import syndrome as syndrome_of

    result = match(graph, syndrome_of(lattice, frame))
    actual = logical_flips(lattice, frame)
    return tuple(a ^ c for a, c in zip(actual, result.correction_logical_bits))


def export_text(graph: DecodingGraph) -> str:
    """Structured text dump: nodes, local edges with probability, weight and
    logical bits, per-sector component counts."""
    lat = graph.lattice
    lines = [f"decoding-graph lattice {lat.kind} dims {lat.dims[0]} {lat.dims[1]} "
             f"{lat.dims[2]} model {graph.params.model} eta {graph.params.eta} "
             f"base_rate {graph.params.base_rate!r}"]
    for sector in (PRIMAL, DUAL):
        sg = graph.sectors[sector]
        lines.append(f"sector {sector} nodes {sg.n_nodes} components {sg.n_components}")
        for e in sg.edges:
            rep = ""
            if graph.events is not None:
                ev = graph.events[e.rep_event]
                paulis = ",".join(f"{q}:{s}" for q, s in sorted(ev.pauli.support.items()))
                rep = f" rep {ev.location}[{paulis}]"
            bits = "".join(str((e.logical_mask >> m) & 1)
                           for m in range(len(lat.logicals)))
            lines.append(f"edge {e.a} {e.b} p {e.probability:.12e} "
                         f"w {e.weight:.12f} logical {bits}{rep}")
    return "\n".join(lines) + "\n"
