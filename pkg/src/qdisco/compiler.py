"""Noise-aware multi-sampling compilation.

Three stages: threshold-filter the calibration graph, enumerate and rank
connected sampling regions by fidelity, then embed the problem's
interaction graph into a chosen region with deterministic swap routing.

Fidelity of a region is the product of per-element success probabilities,
prod(1 - e_i) * prod(1 - e_ij); regions are ranked descending.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import _graphs
from ._seeds import rng_from
from .errors import ConfigError, DimensionError, NoRegionError, PlacementError
from .hardware import QpuModel
from .problem import SpinPolynomial

EXACT_ENUMERATION_LIMIT = 20  # |Q'| above this switches to stochastic growth
EXACT_SELECTION_LIMIT = 12  # candidate count up to which selection is exact
ISOMORPHISM_FAST_PATH_LIMIT = 12


class OpCounter:
    """Counts threshold-predicate evaluations (complexity instrumentation)."""

    def __init__(self) -> None:
        self.count = 0

    def tick(self) -> None:
        self.count += 1


@dataclass(frozen=True)
class FilteredGraph:
    """Survivors of threshold filtering: G' = (Q', E')."""

    qpu: QpuModel
    eta: float
    qubits: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def adjacency(self) -> dict[int, set[int]]:
        return _graphs.adjacency(self.qubits, self.edges)

    def largest_component_size(self) -> int:
        comps = _graphs.connected_components(self.adjacency())
        return max((len(c) for c in comps), default=0)


def filter_by_threshold(
    qpu: QpuModel, eta: float, counter: OpCounter | None = None
) -> FilteredGraph:
    """Keep qubits with e_i < eta and edges with e_ij < eta between survivors.

    Exactly one predicate evaluation per qubit and per edge (Theta(N + E)).
    """
    if not 0.0 < eta <= 1.0:
        raise ConfigError(f"eta must be in (0, 1], got {eta}")
    qubits = set()
    for q in range(qpu.num_qubits):
        if counter is not None:
            counter.tick()
        if qpu.readout_error[q] < eta:
            qubits.add(q)
    edges = set()
    for edge, err in qpu.gate_error.items():
        if counter is not None:
            counter.tick()
        if err < eta and edge[0] in qubits and edge[1] in qubits:
            edges.add(edge)
    return FilteredGraph(qpu, eta, frozenset(qubits), frozenset(edges))


@dataclass(frozen=True)
class SamplingRegion:
    """Connected physical subgraph hosting one circuit copy."""

    qpu_name: str
    qubits: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    fidelity: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(sorted(self.qubits)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        if not _graphs.is_connected(_graphs.adjacency(self.qubits, self.edges)):
            raise PlacementError(f"region {self.qubits} is not connected")

    @property
    def size(self) -> int:
        return len(self.qubits)

    def overlaps(self, other: "SamplingRegion") -> bool:
        return bool(set(self.qubits) & set(other.qubits))

    def sort_key(self) -> tuple:
        return (-self.fidelity, self.qubits)


def region_fidelity(
    qubits: tuple[int, ...] | frozenset[int],
    edges,
    qpu: QpuModel,
) -> float:
    """prod(1 - e_i) over qubits times prod(1 - e_ij) over internal edges."""
    fid = 1.0
    for q in qubits:
        fid *= 1.0 - qpu.readout_error[q]
    for u, v in edges:
        fid *= 1.0 - qpu.gate_error[_graphs.norm_edge(u, v)]
    return fid


def _make_region(fg: FilteredGraph, qubit_set: frozenset[int]) -> SamplingRegion:
    edges = tuple(e for e in fg.edges if e[0] in qubit_set and e[1] in qubit_set)
    return SamplingRegion(
        qpu_name=fg.qpu.name,
        qubits=tuple(sorted(qubit_set)),
        edges=edges,
        fidelity=region_fidelity(qubit_set, edges, fg.qpu),
    )


def enumerate_regions(
    fg: FilteredGraph,
    n: int,
    seed: int = 0,
    max_candidates: int = 256,
) -> list[SamplingRegion]:
    """Candidate sampling regions of exactly n qubits, best fidelity first.

    Exact connected-induced-subgraph enumeration while |Q'| stays at or
    below EXACT_ENUMERATION_LIMIT; beyond that, seeded random region
    growth collects up to ``max_candidates`` distinct candidates.
    """
    if n < 1:
        raise ConfigError(f"region size must be >= 1, got {n}")
    if n > len(fg.qubits):
        raise NoRegionError(
            f"requested {n}-qubit regions but only {len(fg.qubits)} qubits "
            f"survived filtering at eta={fg.eta}"
        )
    adj = fg.adjacency()
    if len(fg.qubits) <= EXACT_ENUMERATION_LIMIT:
        subsets = _connected_subsets_exact(adj, n)
    else:
        subsets = _connected_subsets_sampled(adj, n, seed, max_candidates)
    regions = [_make_region(fg, s) for s in subsets]
    regions.sort(key=SamplingRegion.sort_key)
    return regions


def _connected_subsets_exact(adj: dict[int, set[int]], n: int) -> list[frozenset[int]]:
    """All connected induced subgraphs with n vertices, each exactly once.

    Root-anchored extension: grow only with vertices larger than the root
    and outside the current exclusive neighbourhood, which makes every
    subgraph reachable by a unique call path.
    """
    out: list[frozenset[int]] = []

    def extend(sub: set[int], ext: list[int], root: int, closed: set[int]) -> None:
        if len(sub) == n:
            out.append(frozenset(sub))
            return
        ext = list(ext)
        while ext:
            w = ext.pop(0)
            new_closed = closed | adj[w]
            new_ext = ext + sorted(u for u in adj[w] if u > root and u not in closed)
            extend(sub | {w}, new_ext, root, new_closed)

    for root in sorted(adj):
        if n == 1:
            out.append(frozenset({root}))
            continue
        ext0 = sorted(u for u in adj[root] if u > root)
        extend({root}, ext0, root, {root} | adj[root])
    return out


def _connected_subsets_sampled(
    adj: dict[int, set[int]], n: int, seed: int, max_candidates: int
) -> list[frozenset[int]]:
    """Seeded random growth; deduplicated, bounded attempts."""
    rng = rng_from(seed, "region-growth", n)
    nodes = sorted(adj)
    found: set[frozenset[int]] = set()
    attempts = 0
    budget = max(50 * max_candidates, 1000)
    while len(found) < max_candidates and attempts < budget:
        attempts += 1
        start = nodes[int(rng.integers(len(nodes)))]
        sub = {start}
        frontier = sorted(adj[start])
        while len(sub) < n and frontier:
            nxt = frontier[int(rng.integers(len(frontier)))]
            sub.add(nxt)
            frontier = sorted((set(frontier) | adj[nxt]) - sub)
        if len(sub) == n:
            found.add(frozenset(sub))
    return sorted(found, key=sorted)


def select_regions(
    candidates: list[SamplingRegion], k: int, isomorphic: bool = False
) -> list[SamplingRegion]:
    """Pick up to k pairwise-disjoint regions maximizing fidelity.

    Exact (exhaustive over subsets, maximizing region count first and then
    the fidelity product) while the candidate list stays at or below
    EXACT_SELECTION_LIMIT; greedy by descending fidelity beyond that.
    Deterministic: ties fall back to the lowest qubit tuple.  With
    ``isomorphic`` the returned regions must be mutually isomorphic.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if not candidates:
        raise NoRegionError("empty candidate list")
    if len(candidates) <= EXACT_SELECTION_LIMIT:
        chosen = _select_exact(candidates, k, isomorphic)
    else:
        chosen = _select_greedy(candidates, k, isomorphic)
    return sorted(chosen, key=SamplingRegion.sort_key)


def _select_exact(
    candidates: list[SamplingRegion], k: int, isomorphic: bool
) -> list[SamplingRegion]:
    masks = []
    for reg in candidates:
        m = 0
        for q in reg.qubits:
            m |= 1 << q
        masks.append(m)
    order = sorted(range(len(candidates)), key=lambda i: candidates[i].sort_key())
    best: tuple[int, float, tuple, list[int]] | None = None

    def compatible(i: int, picked: list[int]) -> bool:
        if not isomorphic or not picked:
            return True
        return _isomorphic(candidates[picked[0]], candidates[i])

    def search(pos: int, used_mask: int, picked: list[int], product: float) -> None:
        nonlocal best
        if len(picked) == k or pos == len(order):
            key_regions = tuple(candidates[i].sort_key() for i in picked)
            cand = (len(picked), product, key_regions, list(picked))
            if best is None or (cand[0], cand[1]) > (best[0], best[1]) or (
                (cand[0], cand[1]) == (best[0], best[1]) and cand[2] < best[2]
            ):
                best = cand
            return
        # upper-bound prune: even taking every remaining region cannot beat
        # the best count, and fidelities are <= 1 so product only shrinks
        if best is not None and len(picked) + (len(order) - pos) < best[0]:
            return
        i = order[pos]
        if not masks[i] & used_mask and compatible(i, picked):
            search(pos + 1, used_mask | masks[i], picked + [i], product * candidates[i].fidelity)
        search(pos + 1, used_mask, picked, product)

    search(0, 0, [], 1.0)
    assert best is not None
    return [candidates[i] for i in best[3]]


def _select_greedy(
    candidates: list[SamplingRegion], k: int, isomorphic: bool
) -> list[SamplingRegion]:
    chosen: list[SamplingRegion] = []
    used: set[int] = set()
    for reg in sorted(candidates, key=SamplingRegion.sort_key):
        if len(chosen) == k:
            break
        if used & set(reg.qubits):
            continue
        if isomorphic and chosen and not _isomorphic(chosen[0], reg):
            continue
        chosen.append(reg)
        used |= set(reg.qubits)
    return chosen


def mutually_isomorphic(regions: list[SamplingRegion]) -> bool:
    """True when all regions are pairwise isomorphic as graphs."""
    if len(regions) < 2:
        return True
    first = regions[0]
    for other in regions[1:]:
        if other.size != first.size or len(other.edges) != len(first.edges):
            return False
    return all(_isomorphic(first, other) for other in regions[1:])


def _isomorphic(a: SamplingRegion, b: SamplingRegion) -> bool:
    if a.size != b.size or len(a.edges) != len(b.edges):
        return False
    la = {q: i for i, q in enumerate(a.qubits)}
    lb = {q: i for i, q in enumerate(b.qubits)}
    ea = {(min(la[u], la[v]), max(la[u], la[v])) for u, v in a.edges}
    eb = {(min(lb[u], lb[v]), max(lb[u], lb[v])) for u, v in b.edges}
    n = a.size
    adj_a = _graphs.adjacency(range(n), ea)
    adj_b = _graphs.adjacency(range(n), eb)
    assign = _find_monomorphism(adj_a, adj_b, n, require_all_edges=True)
    return assign is not None


@dataclass(frozen=True)
class ScheduleEntry:
    """One cost-term application inside a phase layer.

    ``swaps`` lists physical edges exchanged before the interaction (degree-2
    routing only).  ``interaction_edges`` carry the two-qubit channel: the
    final edge for degree-2 terms, the routing tree for higher degree.
    ``placed`` records the physical slot of each support qubit at apply time.
    ``noise_points`` expands every channel application in order as
    (physical edge, logical pair): three per swap, one per interaction edge.
    """

    support: tuple[int, ...]
    weight: float
    swaps: tuple[tuple[int, int], ...] = ()
    interaction_edges: tuple[tuple[int, int], ...] = ()
    placed: tuple[int, ...] = ()
    noise_points: tuple[tuple[tuple[int, int], tuple[int, int]], ...] = ()


@dataclass(frozen=True)
class Placement:
    """Logical-to-physical embedding plus a one-layer interaction schedule."""

    region: SamplingRegion
    initial_map: tuple[int, ...]  # logical qubit i sits on physical initial_map[i]
    schedule: tuple[ScheduleEntry, ...]
    final_map: tuple[int, ...]
    swap_count: int

    def to_json_dict(self) -> dict:
        return {
            "qpu": self.region.qpu_name,
            "region": {
                "qubits": list(self.region.qubits),
                "edges": [list(e) for e in self.region.edges],
                "fidelity": self.region.fidelity,
            },
            "logical_to_physical": list(self.initial_map),
            "final_map": list(self.final_map),
            "swap_count": self.swap_count,
            "schedule": [
                {
                    "support": list(e.support),
                    "weight": e.weight,
                    "swaps": [list(s) for s in e.swaps],
                    "interaction_edges": [list(x) for x in e.interaction_edges],
                    "placed": list(e.placed),
                }
                for e in self.schedule
            ],
        }


def _ordered_terms(poly: SpinPolynomial) -> list[tuple[float, tuple[int, ...]]]:
    return sorted(poly.terms, key=lambda t: (-abs(t[0]), t[1]))


def _pair_weights(poly: SpinPolynomial) -> dict[tuple[int, int], float]:
    weights: dict[tuple[int, int], float] = {}
    for w, support in poly.terms:
        if len(support) < 2:
            continue
        for a, b in itertools.combinations(support, 2):
            weights[(a, b)] = weights.get((a, b), 0.0) + abs(w)
    return weights


def _find_monomorphism(
    adj_logical: dict[int, set[int]],
    adj_phys: dict[int, set[int]],
    n: int,
    require_all_edges: bool = False,
) -> dict[int, int] | None:
    """Injective map sending every logical edge onto a physical edge.

    Deterministic backtracking, most-constrained logical vertex first.
    With ``require_all_edges`` the edge counts must match both ways
    (graph isomorphism instead of subgraph embedding).
    """
    logical_order = sorted(adj_logical, key=lambda v: (-len(adj_logical[v]), v))
    phys_nodes = sorted(adj_phys)
    assign: dict[int, int] = {}
    used: set[int] = set()

    def backtrack(idx: int) -> bool:
        if idx == len(logical_order):
            return True
        v = logical_order[idx]
        placed_nbs = [u for u in adj_logical[v] if u in assign]
        for cand in phys_nodes:
            if cand in used:
                continue
            if len(adj_phys[cand]) < len(adj_logical[v]):
                continue
            if any(assign[u] not in adj_phys[cand] for u in placed_nbs):
                continue
            if require_all_edges:
                # non-neighbours must not become neighbours
                non_nbs = [u for u in assign if u not in adj_logical[v]]
                if any(assign[u] in adj_phys[cand] for u in non_nbs):
                    continue
            assign[v] = cand
            used.add(cand)
            if backtrack(idx + 1):
                return True
            del assign[v]
            used.discard(cand)
        return False

    return dict(assign) if backtrack(0) else None


def _greedy_assignment(
    poly: SpinPolynomial, region: SamplingRegion
) -> dict[int, int]:
    """Weighted-interaction-to-edge matching: heavy pairs land on edges."""
    n = poly.num_spins
    pair_w = _pair_weights(poly)
    strength = {v: 0.0 for v in range(n)}
    for (a, b), w in pair_w.items():
        strength[a] += w
        strength[b] += w
    adj_phys = _graphs.adjacency(region.qubits, region.edges)
    dist = {q: _graphs.bfs_distances(adj_phys, q) for q in region.qubits}

    unplaced = sorted(range(n), key=lambda v: (-strength[v], v))
    free = list(region.qubits)
    assign: dict[int, int] = {}

    first = unplaced.pop(0)
    anchor = max(free, key=lambda q: (len(adj_phys[q]), -q))
    assign[first] = anchor
    free.remove(anchor)

    while unplaced:
        # logical qubit most attached to the placed set goes next
        def attachment(v: int) -> float:
            return sum(
                pair_w.get((min(v, u), max(v, u)), 0.0) for u in assign
            )

        unplaced.sort(key=lambda v: (-attachment(v), -strength[v], v))
        v = unplaced.pop(0)

        def cost(q: int) -> float:
            total = 0.0
            for u, pos in assign.items():
                w = pair_w.get((min(v, u), max(v, u)), 0.0)
                if w:
                    total += w * dist[q][pos]
            return total

        spot = min(free, key=lambda q: (cost(q), q))
        assign[v] = spot
        free.remove(spot)
    return assign


def route_phase_layer(
    region: SamplingRegion,
    mapping: tuple[int, ...],
    terms: list[tuple[float, tuple[int, ...]]],
) -> tuple[tuple[ScheduleEntry, ...], tuple[int, ...]]:
    """Schedule one phase layer's interactions from the given layout.

    Degree-2 terms with non-adjacent endpoints get a shortest-path swap
    route (the lower-indexed endpoint walks); swaps permanently update the
    layout.  Degree>2 terms attach noise to an approximate Steiner tree of
    their current positions without moving anything.  Returns the entries
    plus the evolved layout.
    """
    adj = _graphs.adjacency(region.qubits, region.edges)
    pos = list(mapping)  # logical -> physical
    inv = {p: l for l, p in enumerate(pos)}
    entries: list[ScheduleEntry] = []

    for weight, support in terms:
        if len(support) == 0:
            continue
        if len(support) == 1:
            entries.append(
                ScheduleEntry(support, weight, placed=(pos[support[0]],))
            )
            continue
        if len(support) == 2:
            a, b = support
            swaps: list[tuple[int, int]] = []
            noise: list[tuple[tuple[int, int], tuple[int, int]]] = []
            if pos[b] not in adj[pos[a]]:
                path = _graphs.shortest_path(adj, pos[a], pos[b])
                if path is None:
                    raise PlacementError(
                        f"region {region.qubits} cannot route pair {support}"
                    )
                for step in range(len(path) - 2):
                    here, there = path[step], path[step + 1]
                    other = inv[there]
                    edge = _graphs.norm_edge(here, there)
                    swaps.append(edge)
                    pair = (min(a, other), max(a, other))
                    noise.extend([(edge, pair)] * 3)  # swap = 3 two-qubit gates
                    pos[a], pos[other] = there, here
                    inv[there], inv[here] = a, other
            edge = _graphs.norm_edge(pos[a], pos[b])
            noise.append((edge, (a, b)))
            entries.append(
                ScheduleEntry(
                    support,
                    weight,
                    swaps=tuple(swaps),
                    interaction_edges=(edge,),
                    placed=(pos[a], pos[b]),
                    noise_points=tuple(noise),
                )
            )
            continue
        # degree > 2: approximate Steiner tree over current positions
        terminals = [pos[l] for l in support]
        tree_edges = _steiner_tree_edges(adj, terminals)
        noise = []
        for edge in tree_edges:
            pair = (inv[edge[0]], inv[edge[1]])
            noise.append((edge, (min(pair), max(pair))))
        entries.append(
            ScheduleEntry(
                support,
                weight,
                interaction_edges=tuple(tree_edges),
                placed=tuple(pos[l] for l in support),
                noise_points=tuple(noise),
            )
        )
    return tuple(entries), tuple(pos)


def _steiner_tree_edges(
    adj: dict[int, set[int]], terminals: list[int]
) -> list[tuple[int, int]]:
    """Greedy Steiner approximation: connect nearest terminals one by one."""
    tree_nodes = {terminals[0]}
    edges: list[tuple[int, int]] = []
    remaining = sorted(set(terminals) - tree_nodes)
    while remaining:
        best_path: list[int] | None = None
        best_t = None
        for t in remaining:
            path = _multi_source_path(adj, tree_nodes, t)
            if path is None:
                raise PlacementError("region disconnected during tree routing")
            if best_path is None or len(path) < len(best_path):
                best_path, best_t = path, t
        assert best_path is not None
        for u, v in zip(best_path, best_path[1:]):
            e = _graphs.norm_edge(u, v)
            if e not in edges:
                edges.append(e)
        tree_nodes.update(best_path)
        remaining = sorted(set(remaining) - {best_t} - tree_nodes)
    return sorted(edges)


def _multi_source_path(
    adj: dict[int, set[int]], sources: set[int], target: int
) -> list[int] | None:
    """Shortest path from any source to target (deterministic BFS)."""
    if target in sources:
        return [target]
    prev: dict[int, int] = {s: s for s in sorted(sources)}
    queue = list(sorted(sources))
    while queue:
        node = queue.pop(0)
        for nb in sorted(adj[node]):
            if nb in prev:
                continue
            prev[nb] = node
            if nb == target:
                path = [nb]
                while path[-1] not in sources:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(nb)
    return None


def map_circuit(poly: SpinPolynomial, region: SamplingRegion) -> Placement:
    """Embed the problem in the region and schedule one phase layer."""
    n = poly.num_spins
    if n != region.size:
        raise DimensionError(
            f"problem needs {n} qubits but region has {region.size}"
        )
    assign: dict[int, int] | None = None
    if n <= ISOMORPHISM_FAST_PATH_LIMIT:
        pair_w = _pair_weights(poly)
        adj_logical = _graphs.adjacency(range(n), pair_w)
        adj_phys = _graphs.adjacency(region.qubits, region.edges)
        assign = _find_monomorphism(adj_logical, adj_phys, n)
    if assign is None:
        assign = _greedy_assignment(poly, region)
    initial_map = tuple(assign[l] for l in range(n))
    schedule, final_map = route_phase_layer(region, initial_map, _ordered_terms(poly))
    swap_count = sum(len(e.swaps) for e in schedule)
    return Placement(
        region=region,
        initial_map=initial_map,
        schedule=schedule,
        final_map=final_map,
        swap_count=swap_count,
    )


def ordered_terms(poly: SpinPolynomial) -> list[tuple[float, tuple[int, ...]]]:
    """Public alias for the deterministic term order used in routing."""
    return _ordered_terms(poly)
