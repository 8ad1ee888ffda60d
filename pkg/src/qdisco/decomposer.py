"""Balanced MinCut partitioning and flip-variable solution merging.

Oversized problems are split into capacity-bounded parts that minimize the
weight crossing parts.  After the parts are solved independently, a small
MaxCut over per-part flip variables recombines them: flipping every spin
in a part leaves its internal cost unchanged, so only the cross edges care,
and the identity flip (keep everything) is always in the search space.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._seeds import rng_from
from .errors import PartitionError
from .problem import (
    ProblemGraph,
    SpinAssignment,
    maxcut_to_spin_polynomial,
    minimum_cost_indices,
)

MERGE_BRUTE_FORCE_LIMIT = 20
MERGE_PART_LIMIT = 24
RECURSION_LIMIT = 8
DEFAULT_RESTARTS = 8


@dataclass(frozen=True)
class Partition:
    """Vertex-to-part assignment with its crossing edges."""

    assignment: tuple[int, ...]
    num_parts: int
    capacities: tuple[int, ...]
    cut_edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        sizes = self.part_sizes
        for part, size in enumerate(sizes):
            if size > self.capacities[part]:
                raise PartitionError(
                    f"part {part} holds {size} vertices, capacity {self.capacities[part]}"
                )

    @property
    def part_sizes(self) -> tuple[int, ...]:
        sizes = [0] * self.num_parts
        for part in self.assignment:
            sizes[part] += 1
        return tuple(sizes)

    def part_vertices(self, part: int) -> tuple[int, ...]:
        return tuple(v for v, a in enumerate(self.assignment) if a == part)

    @property
    def cut_weight(self) -> float:
        return sum(w for _, _, w in self.cut_edges)

    def to_json_dict(self) -> dict:
        return {
            "assignment": list(self.assignment),
            "num_parts": self.num_parts,
            "capacities": list(self.capacities),
            "part_sizes": list(self.part_sizes),
            "cut_edges": [[u, v, w] for u, v, w in self.cut_edges],
            "cut_weight": self.cut_weight,
        }


def _cut_edges(g: ProblemGraph, assignment: list[int] | tuple[int, ...]):
    return tuple(
        (u, v, w) for u, v, w in g.edges if assignment[u] != assignment[v]
    )


def _cut_weight(g: ProblemGraph, assignment) -> float:
    return sum(w for u, v, w in g.edges if assignment[u] != assignment[v])


def balanced_mincut(
    g: ProblemGraph,
    capacities: list[int] | tuple[int, ...],
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> Partition:
    """Capacity-bounded partition minimizing total crossing weight.

    Multi-start greedy growth refined by Kernighan-Lin passes (tentative
    swap/move chains with best-prefix rollback).  Part sizes are pinned to
    the capacities when they sum exactly to |V|; with slack, parts fill in
    capacity order.  Deterministic under ``seed``.
    """
    caps = [int(c) for c in capacities]
    if any(c < 1 for c in caps):
        raise PartitionError(f"capacities must be >= 1, got {caps}")
    n = g.num_vertices
    if sum(caps) < n:
        raise PartitionError(
            f"capacities sum to {sum(caps)} but the graph has {n} vertices"
        )
    num_parts = len(caps)

    # fixed target sizes keep the refinement size-preserving
    targets = []
    remaining = n
    for c in caps:
        take = min(c, remaining)
        targets.append(take)
        remaining -= take

    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    for u, v, w in g.edges:
        adj[u][v] = adj[u].get(v, 0.0) + w
        adj[v][u] = adj[v].get(u, 0.0) + w

    best_assign: list[int] | None = None
    best_cut = float("inf")
    for restart in range(max(1, restarts)):
        rng = rng_from(seed, "mincut", restart)
        assign = _greedy_seed(n, targets, adj, rng, deterministic=restart == 0)
        assign = _kl_refine(n, caps, adj, assign)
        cut = _cut_weight(g, assign)
        if cut < best_cut - 1e-12 or (
            abs(cut - best_cut) <= 1e-12
            and (best_assign is None or assign < best_assign)
        ):
            best_cut, best_assign = cut, assign

    assert best_assign is not None
    return Partition(
        assignment=tuple(best_assign),
        num_parts=num_parts,
        capacities=tuple(caps),
        cut_edges=_cut_edges(g, best_assign),
    )


def _greedy_seed(
    n: int,
    targets: list[int],
    adj: list[dict[int, float]],
    rng,
    deterministic: bool,
) -> list[int]:
    """Grow parts one at a time by heaviest attachment to the part so far."""
    assign = [-1] * n
    unassigned = set(range(n))
    order = sorted(range(len(targets)), key=lambda i: (-targets[i], i))
    for part in order:
        size = targets[part]
        if size == 0 or not unassigned:
            continue
        if deterministic:
            start = max(unassigned, key=lambda v: (sum(adj[v].values()), -v))
        else:
            pool = sorted(unassigned)
            start = pool[int(rng.integers(len(pool)))]
        assign[start] = part
        unassigned.discard(start)
        members = {start}
        while len(members) < size and unassigned:
            best_v, best_w = None, -1.0
            for v in sorted(unassigned):
                w = sum(wt for u, wt in adj[v].items() if u in members)
                if w > best_w:
                    best_v, best_w = v, w
            assign[best_v] = part
            unassigned.discard(best_v)
            members.add(best_v)
    return assign


def _kl_refine(
    n: int,
    capacities: list[int],
    adj: list[dict[int, float]],
    assign: list[int],
) -> list[int]:
    """Kernighan-Lin refinement generalized to multiway swaps and moves.

    Each pass builds a chain of tentative best (possibly negative) gain
    operations with vertex locking, then rolls back to the best prefix.
    Swaps preserve part sizes; moves may rebalance within the capacities.
    """
    assign = list(assign)
    sizes = [0] * len(capacities)
    for part in assign:
        sizes[part] += 1

    def gain_move(v: int, dst: int) -> float:
        src = assign[v]
        internal = sum(w for u, w in adj[v].items() if assign[u] == src)
        external = sum(w for u, w in adj[v].items() if assign[u] == dst)
        return external - internal

    def gain_swap(u: int, v: int) -> float:
        return gain_move(u, assign[v]) + gain_move(v, assign[u]) - 2.0 * adj[u].get(v, 0.0)

    for _ in range(n):
        locked = [False] * n
        chain: list[tuple[str, int, int, int]] = []
        gains: list[float] = []
        snapshot = list(assign)

        while True:
            best_op = None
            best_gain = -float("inf")
            for v in range(n):
                if locked[v]:
                    continue
                src = assign[v]
                for dst in range(len(capacities)):
                    if dst == src:
                        continue
                    if sizes[dst] < capacities[dst] and sizes[src] > 1:
                        gv = gain_move(v, dst)
                        if gv > best_gain + 1e-12:
                            best_gain, best_op = gv, ("move", v, src, dst)
                for u in range(v + 1, n):
                    if locked[u] or assign[u] == src:
                        continue
                    gs = gain_swap(v, u)
                    if gs > best_gain + 1e-12:
                        best_gain, best_op = gs, ("swap", v, u, 0)
            if best_op is None:
                break
            kind, a, b, dst = best_op
            if kind == "move":
                sizes[assign[a]] -= 1
                assign[a] = dst
                sizes[dst] += 1
                locked[a] = True
            else:
                assign[a], assign[b] = assign[b], assign[a]
                locked[a] = locked[b] = True
            chain.append(best_op)
            gains.append(best_gain)

        if not gains:
            break
        prefix = list(_running_sums(gains))
        best_idx = max(range(len(prefix)), key=lambda i: (prefix[i], -i))
        if prefix[best_idx] <= 1e-12:
            assign = snapshot
            break
        # roll back operations after the best prefix
        assign = snapshot
        sizes = [0] * len(capacities)
        for part in assign:
            sizes[part] += 1
        for op in chain[: best_idx + 1]:
            kind, a, b, dst = op
            if kind == "move":
                sizes[assign[a]] -= 1
                assign[a] = dst
                sizes[dst] += 1
            else:
                assign[a], assign[b] = assign[b], assign[a]
    return assign


def _running_sums(values: list[float]):
    total = 0.0
    for v in values:
        total += v
        yield total


@dataclass(frozen=True)
class Subproblem:
    """One part's induced subgraph with its back-reference to the parent."""

    graph: ProblemGraph
    vertices: tuple[int, ...]  # parent vertex id for each local index


def extract_subproblems(g: ProblemGraph, partition: Partition) -> list[Subproblem]:
    """Induced subgraph per part, densely re-indexed in ascending order."""
    if len(partition.assignment) != g.num_vertices:
        raise PartitionError("partition does not match the graph")
    out = []
    for part in range(partition.num_parts):
        verts = partition.part_vertices(part)
        index = {v: i for i, v in enumerate(verts)}
        edges = tuple(
            (index[u], index[v], w)
            for u, v, w in g.edges
            if u in index and v in index
        )
        out.append(Subproblem(ProblemGraph(len(verts), edges), verts))
    return out


def merge_solutions(
    g: ProblemGraph,
    partition: Partition,
    local_solutions: list[SpinAssignment],
    seed: int = 0,
) -> SpinAssignment:
    """Compose part solutions, choosing optimal per-part global flips.

    The flip problem reduces to MaxCut over super-vertices whose edge
    weight aggregates cross-part couplings under the local solutions; it is
    solved exactly by brute force up to MERGE_BRUTE_FORCE_LIMIT parts and
    by a noiseless QAOA sweep beyond that.
    """
    P = partition.num_parts
    if len(local_solutions) != P:
        raise PartitionError(
            f"{len(local_solutions)} local solutions for {P} parts"
        )
    if P > MERGE_PART_LIMIT:
        raise PartitionError(f"merge supports at most {MERGE_PART_LIMIT} parts")

    subs = extract_subproblems(g, partition)
    for part, (sub, sol) in enumerate(zip(subs, local_solutions)):
        if len(sol) != sub.graph.num_vertices:
            raise PartitionError(
                f"part {part} solution has {len(sol)} spins, expected "
                f"{sub.graph.num_vertices}"
            )

    # global spin values before flipping
    spins = [0] * g.num_vertices
    for sub, sol in zip(subs, local_solutions):
        for local, parent in enumerate(sub.vertices):
            spins[parent] = sol[local]

    if P == 1:
        return SpinAssignment(tuple(spins))

    coupling: dict[tuple[int, int], float] = {}
    for u, v, w in partition.cut_edges:
        a, b = partition.assignment[u], partition.assignment[v]
        if a == b:
            raise PartitionError("cut edge inside a single part")
        key = (min(a, b), max(a, b))
        coupling[key] = coupling.get(key, 0.0) + w * spins[u] * spins[v]

    merge_graph = ProblemGraph(
        P, tuple((a, b, w) for (a, b), w in coupling.items() if w != 0.0)
    )
    flips = _solve_flips(merge_graph, seed)

    merged = tuple(
        spins[v] * flips[partition.assignment[v]] for v in range(g.num_vertices)
    )
    return SpinAssignment(merged)


def _solve_flips(merge_graph: ProblemGraph, seed: int) -> tuple[int, ...]:
    """Minimize the flip polynomial; exact for small part counts."""
    P = merge_graph.num_vertices
    poly = maxcut_to_spin_polynomial(merge_graph)
    if not poly.terms:
        return tuple(1 for _ in range(P))
    if P <= MERGE_BRUTE_FORCE_LIMIT:
        _, indices = minimum_cost_indices(poly)
        best = int(indices[0])
        return tuple(1 - 2 * ((best >> i) & 1) for i in range(P))
    # recursive QAOA on the merge problem (rare: > 20 parts)
    from .optimizer import OptimizerConfig, optimize
    from .simulator import build_qaoa_state, sample

    trace = optimize(poly, p=2, evaluator=None, cfg=OptimizerConfig(), seed=seed)
    state = build_qaoa_state(poly, trace.best_params)
    counts = sample(state, shots=4096, seed=seed)
    from .problem import evaluate_cost

    best_key = min(
        counts.counts,
        key=lambda k: (
            evaluate_cost(poly, SpinAssignment.from_bits(k)),
            -counts.counts[k],
            k,
        ),
    )
    candidate = SpinAssignment.from_bits(best_key)
    identity = SpinAssignment(tuple(1 for _ in range(P)))
    if evaluate_cost(poly, candidate) <= evaluate_cost(poly, identity):
        return candidate.values
    return identity.values
