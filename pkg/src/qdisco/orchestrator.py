"""Fleet-level planning and execution of distributed QAOA workloads.

A problem that fits the largest usable (threshold-filtered) region of some
QPU runs directly with multi-sampling across the whole fleet; anything
larger is split by balanced MinCut into capacity-bounded subproblems,
recursively, and recombined by the flip-variable merge.  Larger
subproblems land on QPUs with higher prior H-Scores.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._seeds import derive_seed
from .compiler import (
    SamplingRegion,
    enumerate_regions,
    filter_by_threshold,
    map_circuit,
    select_regions,
)
from .decomposer import (
    RECURSION_LIMIT,
    balanced_mincut,
    extract_subproblems,
    merge_solutions,
)
from .errors import CapacityError, ConfigError, NoRegionError
from .hardware import Fleet, QpuModel
from .hscore import HScoreReport, ReferenceDistribution, accuracy, build_reference, h_score
from .optimizer import OptimizerConfig, optimize
from .problem import (
    ProblemGraph,
    SpinAssignment,
    SpinPolynomial,
    evaluate_cost,
    maxcut_to_spin_polynomial,
)
from .simulator import NoiseSpec, ShotCounts, noisy_sample


@dataclass(frozen=True)
class RegionAssignment:
    """Sampling regions of one QPU serving one plan leaf."""

    qpu_name: str
    regions: tuple[SamplingRegion, ...]
    shots_per_region: tuple[int, ...]


@dataclass(frozen=True)
class PlanNode:
    """Subproblem node; leaves carry hardware assignments."""

    vertices: tuple[int, ...]  # root-problem vertex ids
    polynomial: SpinPolynomial
    graph: ProblemGraph | None = None
    children: tuple["PlanNode", ...] = ()
    partition: Partition | None = None
    assignments: tuple[RegionAssignment, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def size(self) -> int:
        return self.polynomial.num_spins

    def leaves(self) -> list["PlanNode"]:
        if self.is_leaf:
            return [self]
        out: list[PlanNode] = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def to_json_dict(self) -> dict:
        doc: dict = {"vertices": list(self.vertices), "size": self.size}
        if self.is_leaf:
            doc["assignments"] = [
                {
                    "qpu": a.qpu_name,
                    "regions": [list(r.qubits) for r in a.regions],
                    "fidelities": [r.fidelity for r in a.regions],
                    "shots_per_region": list(a.shots_per_region),
                }
                for a in self.assignments
            ]
        else:
            doc["partition"] = self.partition.to_json_dict() if self.partition else None
            doc["children"] = [c.to_json_dict() for c in self.children]
        return doc


@dataclass(frozen=True)
class ExecutionPlan:
    root: PlanNode
    eta: float
    p: int
    shots_per_leaf: int
    qpu_names: tuple[str, ...]

    @property
    def num_leaves(self) -> int:
        return len(self.root.leaves())

    @property
    def total_shots(self) -> int:
        return self.shots_per_leaf * self.num_leaves

    @property
    def num_regions(self) -> int:
        return sum(
            len(a.regions) for leaf in self.root.leaves() for a in leaf.assignments
        )

    def regions_on(self, qpu_name: str) -> list[SamplingRegion]:
        out = []
        for leaf in self.root.leaves():
            for a in leaf.assignments:
                if a.qpu_name == qpu_name:
                    out.extend(a.regions)
        return out

    def to_json_dict(self) -> dict:
        return {
            "eta": self.eta,
            "p": self.p,
            "shots_per_leaf": self.shots_per_leaf,
            "total_shots": self.total_shots,
            "num_leaves": self.num_leaves,
            "num_regions": self.num_regions,
            "qpus": list(self.qpu_names),
            "tree": self.root.to_json_dict(),
        }


def usable_region_size(qpu: QpuModel, eta: float) -> int:
    """Largest connected component of the threshold-filtered graph."""
    return filter_by_threshold(qpu, eta).largest_component_size()


def _qpu_priority(fleet: Fleet, usable: dict[str, int]) -> list[QpuModel]:
    return sorted(
        fleet,
        key=lambda q: (-fleet.prior(q.name), -usable[q.name], q.name),
    )


def _split_evenly(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _covering_prefix(caps: list[int], n: int) -> list[int]:
    """Shortest prefix of the capacity list that covers n vertices."""
    total = 0
    for i, c in enumerate(caps):
        total += c
        if total >= n:
            return caps[: i + 1]
    return list(caps)


def _qpu_region_set(
    qpu: QpuModel, eta: float, n: int, seed: int
) -> tuple[SamplingRegion, ...]:
    """As many disjoint n-qubit regions as fit on this QPU."""
    fg = filter_by_threshold(qpu, eta)
    if n > len(fg.qubits):
        return ()
    try:
        candidates = enumerate_regions(fg, n, seed=seed)
    except NoRegionError:
        return ()
    if not candidates:
        return ()
    k_max = max(1, len(fg.qubits) // n)
    return tuple(select_regions(candidates, k_max))


def plan(
    problem: ProblemGraph,
    fleet: Fleet,
    eta: float,
    p: int,
    shots: int,
    capacities: list[int] | None = None,
    seed: int = 0,
) -> ExecutionPlan:
    """Decide decomposition vs direct execution and assign hardware.

    With explicit ``capacities`` the root is always partitioned to those
    sizes; otherwise the problem decomposes only while it exceeds every
    QPU's largest usable region.  Shots are divided evenly across each
    leaf's regions.
    """
    if len(fleet) == 0:
        raise ConfigError("fleet must contain at least one QPU")
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    poly = maxcut_to_spin_polynomial(problem)
    return _plan_common(problem, poly, fleet, eta, p, shots, capacities, seed)


def plan_polynomial(
    poly: SpinPolynomial,
    fleet: Fleet,
    eta: float,
    p: int,
    shots: int,
    seed: int = 0,
) -> ExecutionPlan:
    """Direct-only plan for problems without graph structure (e.g. LABS)."""
    if len(fleet) == 0:
        raise ConfigError("fleet must contain at least one QPU")
    usable = {q.name: usable_region_size(q, eta) for q in fleet}
    if poly.num_spins > max(usable.values()):
        raise CapacityError(
            f"problem needs {poly.num_spins} qubits but the largest usable "
            f"region at eta={eta} has {max(usable.values())}; this problem "
            "kind cannot be decomposed"
        )
    root = PlanNode(vertices=tuple(range(poly.num_spins)), polynomial=poly)
    root = _assign_leaves(root, fleet, usable, eta, shots, seed)
    return ExecutionPlan(
        root=root,
        eta=eta,
        p=p,
        shots_per_leaf=shots,
        qpu_names=tuple(q.name for q in fleet),
    )


def _plan_common(problem, poly, fleet, eta, p, shots, capacities, seed) -> ExecutionPlan:
    usable = {q.name: usable_region_size(q, eta) for q in fleet}
    max_usable = max(usable.values())
    if max_usable < 1:
        raise CapacityError(
            f"no QPU has a usable qubit at eta={eta}; tightest bottleneck is "
            f"the threshold filter"
        )

    def derived_capacities() -> list[int]:
        return [usable[q.name] for q in _qpu_priority(fleet, usable) if usable[q.name] >= 1]

    def build(vertices: tuple[int, ...], graph: ProblemGraph, depth: int, force: bool) -> PlanNode:
        n = graph.num_vertices
        if not force and n <= max_usable:
            return PlanNode(
                vertices=vertices,
                polynomial=maxcut_to_spin_polynomial(graph),
                graph=graph,
            )
        if depth >= RECURSION_LIMIT:
            raise CapacityError(
                f"recursion limit {RECURSION_LIMIT} hit; bottleneck: subproblem "
                f"of {n} vertices exceeds largest usable region ({max_usable})"
            )
        if force and capacities is not None:
            caps = list(capacities)
        else:
            caps = derived_capacities()
            if sum(caps) < n:
                # fleet cannot cover this level in one round: split evenly
                # into max_usable-sized chunks and let batches serialize
                parts = -(-n // max_usable)
                caps = [max_usable] * parts
        if sum(caps) < n:
            raise CapacityError(
                f"capacities {caps} cannot cover {n} vertices; bottleneck: "
                "declared capacities"
            )
        caps = _covering_prefix(caps, n)  # surplus capacities would leave empty parts
        part = balanced_mincut(graph, caps, seed=derive_seed(seed, "mincut", depth, *vertices))
        children = []
        for sub in extract_subproblems(graph, part):
            if sub.graph.num_vertices == 0:
                continue
            child_vertices = tuple(vertices[v] for v in sub.vertices)
            children.append(build(child_vertices, sub.graph, depth + 1, False))
        return PlanNode(
            vertices=vertices,
            polynomial=maxcut_to_spin_polynomial(graph),
            graph=graph,
            children=tuple(children),
            partition=part,
        )

    root = build(
        tuple(range(problem.num_vertices)),
        problem,
        0,
        force=capacities is not None,
    )
    root = _assign_leaves(root, fleet, usable, eta, shots, seed)
    return ExecutionPlan(
        root=root,
        eta=eta,
        p=p,
        shots_per_leaf=shots,
        qpu_names=tuple(q.name for q in fleet),
    )


def _assign_leaves(
    root: PlanNode,
    fleet: Fleet,
    usable: dict[str, int],
    eta: float,
    shots: int,
    seed: int,
) -> PlanNode:
    """Attach QPU regions to every leaf and split shots evenly."""
    leaves = root.leaves()
    priority = _qpu_priority(fleet, usable)
    load = {q.name: 0 for q in fleet}
    assignments_by_id: dict[int, tuple[RegionAssignment, ...]] = {}

    if len(leaves) == 1 and leaves[0] is root:
        # direct plan: multi-sample across every QPU that can host the problem
        leaf = leaves[0]
        n = leaf.size
        entries = []
        all_regions: list[tuple[str, SamplingRegion]] = []
        for qpu in priority:
            if usable[qpu.name] < n:
                continue
            regions = _qpu_region_set(qpu, eta, n, seed)
            if regions:
                all_regions.extend((qpu.name, r) for r in regions)
        if not all_regions:
            raise CapacityError(
                f"no QPU can host a {n}-qubit region at eta={eta}; bottleneck: "
                f"largest usable region is {max(usable.values())}"
            )
        split = _split_evenly(shots, len(all_regions))
        idx = 0
        for qpu in priority:
            mine = [r for name, r in all_regions if name == qpu.name]
            if not mine:
                continue
            counts = split[idx : idx + len(mine)]
            idx += len(mine)
            entries.append(
                RegionAssignment(qpu.name, tuple(mine), tuple(counts))
            )
        assignments_by_id[id(leaf)] = tuple(entries)
    else:
        for leaf in sorted(leaves, key=lambda l: (-l.size, l.vertices)):
            n = leaf.size
            hosts = [q for q in priority if usable[q.name] >= n]
            if not hosts:
                raise CapacityError(
                    f"no QPU can host a {n}-qubit leaf at eta={eta}; bottleneck: "
                    f"largest usable region is {max(usable.values())}"
                )
            qpu = min(
                hosts,
                key=lambda q: (
                    load[q.name],
                    -fleet.prior(q.name),
                    -usable[q.name],
                    q.name,
                ),
            )
            load[qpu.name] += 1
            regions = _qpu_region_set(qpu, eta, n, seed)
            if not regions:
                raise CapacityError(
                    f"QPU '{qpu.name}' has no connected {n}-qubit region at eta={eta}"
                )
            split = _split_evenly(shots, len(regions))
            assignments_by_id[id(leaf)] = (
                RegionAssignment(qpu.name, tuple(regions), tuple(split)),
            )

    def rebuild(node: PlanNode) -> PlanNode:
        if node.is_leaf:
            return PlanNode(
                vertices=node.vertices,
                polynomial=node.polynomial,
                graph=node.graph,
                assignments=assignments_by_id[id(node)],
            )
        return PlanNode(
            vertices=node.vertices,
            polynomial=node.polynomial,
            graph=node.graph,
            children=tuple(rebuild(c) for c in node.children),
            partition=node.partition,
        )

    return rebuild(root)


@dataclass(frozen=True)
class SpeedupReport:
    """Shot-batch wall model: regions run in parallel, leaves on one QPU queue."""

    sequential_units: float
    parallel_units: float
    speedup: float
    num_regions: int
    per_qpu_chain: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "sequential_units": self.sequential_units,
            "parallel_units": self.parallel_units,
            "speedup": self.speedup,
            "num_regions": self.num_regions,
            "per_qpu_chain": dict(sorted(self.per_qpu_chain.items())),
        }


def speedup_report(plan_: ExecutionPlan) -> SpeedupReport:
    """Sequential = all shots one after another; parallel = max QPU chain."""
    sequential = 0.0
    chains: dict[str, float] = {}
    for leaf in plan_.root.leaves():
        for a in leaf.assignments:
            if not a.regions:
                continue
            sequential += sum(a.shots_per_region)
            batch = max(a.shots_per_region)
            chains[a.qpu_name] = chains.get(a.qpu_name, 0.0) + batch
    parallel = max(chains.values()) if chains else 0.0
    speedup = sequential / parallel if parallel else 1.0
    return SpeedupReport(
        sequential_units=sequential,
        parallel_units=parallel,
        speedup=speedup,
        num_regions=plan_.num_regions,
        per_qpu_chain=chains,
    )


@dataclass(frozen=True)
class LeafOutcome:
    vertices: tuple[int, ...]
    qpus: tuple[str, ...]
    num_regions: int
    solution_bits: str
    cost: float
    hscore: HScoreReport | None = None


@dataclass(frozen=True)
class RunResult:
    assignment: SpinAssignment
    cost: float
    cut_value: float | None
    leaf_outcomes: tuple[LeafOutcome, ...]
    wall_units: float
    speedup: float

    def to_json_dict(self) -> dict:
        doc = {
            "assignment": list(self.assignment.values),
            "bits": self.assignment.to_bits(),
            "cost": self.cost,
            "cut_value": self.cut_value,
            "wall_units": self.wall_units,
            "speedup": self.speedup,
            "leaves": [
                {
                    "vertices": list(o.vertices),
                    "qpus": list(o.qpus),
                    "num_regions": o.num_regions,
                    "solution_bits": o.solution_bits,
                    "cost": o.cost,
                    **(
                        {"h_score": o.hscore.to_json_dict()}
                        if o.hscore is not None
                        else {}
                    ),
                }
                for o in self.leaf_outcomes
            ],
        }
        return doc


def _best_bitstring(counts: ShotCounts, poly: SpinPolynomial) -> str:
    """Lowest-cost measured outcome; ties favour higher count, then lex."""
    return min(
        counts.counts,
        key=lambda k: (
            evaluate_cost(poly, SpinAssignment.from_bits(k)),
            -counts.counts[k],
            k,
        ),
    )


def _leaf_answer(
    region_bests: list[str],
    aggregate: dict[str, int],
    poly: SpinPolynomial,
) -> str:
    """Majority over region-best candidates; ties go to aggregate count."""
    votes: dict[str, int] = {}
    for bits in region_bests:
        votes[bits] = votes.get(bits, 0) + 1
    return min(
        votes,
        key=lambda k: (
            -votes[k],
            -aggregate.get(k, 0),
            evaluate_cost(poly, SpinAssignment.from_bits(k)),
            k,
        ),
    )


def execute(
    plan_: ExecutionPlan,
    fleet: Fleet,
    noise: bool,
    seed: int,
    optimizer_cfg: OptimizerConfig | None = None,
    trajectories: int = 16,
    with_hscore: bool = False,
    hscore_m_ref: int = 100,
) -> RunResult:
    """Run every leaf (optimize noiselessly, sample on hardware), then merge.

    Per leaf, each region nominates its best measured bitstring and the
    majority rule picks the leaf solution.  Internal nodes recombine child
    solutions via flip-variable merging; the root result is additionally
    guarded against plain concatenation of the leaf solutions so merge
    dominance holds end to end.
    """
    cfg = optimizer_cfg or OptimizerConfig()
    leaves = plan_.root.leaves()
    leaf_index = {id(leaf): i for i, leaf in enumerate(leaves)}
    outcomes: dict[int, LeafOutcome] = {}
    solutions: dict[int, SpinAssignment] = {}
    references: dict[tuple[str, int], ReferenceDistribution] = {}

    for leaf in leaves:
        i = leaf_index[id(leaf)]
        poly = leaf.polynomial
        trace = optimize(poly, plan_.p, None, cfg, seed=derive_seed(seed, "leaf", i, "opt"))
        region_bests: list[str] = []
        aggregate: dict[str, int] = {}
        accs: list[float] = []
        for a in leaf.assignments:
            qpu = fleet.get(a.qpu_name)
            spec = (
                NoiseSpec.from_qpu(qpu, trajectories)
                if noise
                else NoiseSpec.zero(qpu, trajectories=1)
            )
            for j, (region, region_shots) in enumerate(
                zip(a.regions, a.shots_per_region)
            ):
                if region_shots == 0:
                    continue
                placement = map_circuit(poly, region)
                counts = noisy_sample(
                    poly,
                    trace.best_params,
                    placement,
                    qpu,
                    spec,
                    region_shots,
                    seed=derive_seed(seed, "leaf", i, "qpu", a.qpu_name, "region", j),
                )
                region_bests.append(_best_bitstring(counts, poly))
                for key, c in counts.counts.items():
                    aggregate[key] = aggregate.get(key, 0) + c
                if with_hscore:
                    accs.append(accuracy(counts, poly))
        bits = _leaf_answer(region_bests, aggregate, poly)
        solution = SpinAssignment.from_bits(bits)
        report = None
        if with_hscore and accs:
            key = (poly.canonical_key(), plan_.p)
            if key not in references:
                references[key] = build_reference(
                    poly,
                    plan_.p,
                    cfg,
                    hscore_m_ref,
                    derive_seed(seed, "leaf-ref", i),
                )
            report = h_score(accs, references[key])
        outcomes[id(leaf)] = LeafOutcome(
            vertices=leaf.vertices,
            qpus=tuple(a.qpu_name for a in leaf.assignments),
            num_regions=sum(len(a.regions) for a in leaf.assignments),
            solution_bits=bits,
            cost=evaluate_cost(poly, solution),
            hscore=report,
        )
        solutions[id(leaf)] = solution

    def resolve(node: PlanNode) -> SpinAssignment:
        if node.is_leaf:
            return solutions[id(node)]
        child_solutions = [resolve(c) for c in node.children]
        assert node.partition is not None and node.graph is not None
        return merge_solutions(
            node.graph,
            node.partition,
            child_solutions,
            seed=derive_seed(seed, "merge", *node.vertices),
        )

    merged = resolve(plan_.root)

    # end-to-end dominance guard: plain concatenation must never win
    if not plan_.root.is_leaf:
        concat = [0] * plan_.root.polynomial.num_spins
        for leaf in leaves:
            sol = solutions[id(leaf)]
            for local, parent in enumerate(leaf.vertices):
                concat[parent] = sol[local]
        concat_assignment = SpinAssignment(tuple(concat))
        root_poly = plan_.root.polynomial
        if evaluate_cost(root_poly, concat_assignment) < evaluate_cost(root_poly, merged):
            merged = concat_assignment

    root_poly = plan_.root.polynomial
    cost = evaluate_cost(root_poly, merged)
    cut = (
        plan_.root.graph.cut_value(merged.values)
        if plan_.root.graph is not None
        else None
    )
    report = speedup_report(plan_)
    return RunResult(
        assignment=merged,
        cost=cost,
        cut_value=cut,
        leaf_outcomes=tuple(outcomes[id(leaf)] for leaf in leaves),
        wall_units=report.parallel_units,
        speedup=report.speedup,
    )
