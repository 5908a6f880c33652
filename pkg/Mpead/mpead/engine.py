"""Execution of flat diagrams.

`compile` turns a flat graph and a run configuration into an
`ExecutionPlan`: populations with their sizes, genomes and algorithms,
computation clusters with a binding plan derived from edge labels, and
migration routes from inset edges. `run` then executes synchronous
generations:

    EA steps (from the second generation on)
    -> snapshot -> cluster evaluation against the snapshot
    -> writes (evaluative, phenotypic, then genetic composition)
    -> statistics -> migration on the configured interval

Every random draw comes from a stream named after what draws it, so the
outcome does not depend on how many worker threads evaluate clusters.
"""
import csv
import io
import itertools
import json
import logging
import zlib
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Mapping, Optional, Tuple

import networkx as nx
import numpy as np

from . import config as settings
from .errors import (
    CyclicComputation,
    InvalidDiagram,
    MissingExecutionAttribute,
    MissingFitness,
    SizeMismatch,
    UnsupportedConstruct,
)
from .expander import expand
from .functions import DEFAULT_REGISTRY, FunctionRegistry, RegisteredFunction
from .kernel import (
    AlgoConfig,
    Individual,
    Population,
    diversity,
    ea_step,
    init_population,
    resolve_algorithm,
)
from .runconfig import RunConfig
from .schemas import (
    AllBinding,
    Attachment,
    Count,
    Diagram,
    Edge,
    FlatGraph,
    GenomeSpec,
    IndexVar,
    InfoKind,
    is_genetic,
)
from .selectors import Selector, resolve_selector
from .validator import has_errors, validate

logger = logging.getLogger(__name__)


def stream(seed: int, name: str, generation: int = 0) -> np.random.Generator:
    """Deterministic generator for one named consumer in one generation."""
    sequence = np.random.SeedSequence([seed & 0xFFFFFFFF, zlib.crc32(name.encode()), generation])
    return np.random.default_rng(sequence)


# Plan

@dataclass(frozen=True)
class PopulationPlan:
    id: str
    size: int
    genome: GenomeSpec
    algo: AlgoConfig
    evaluated: bool


@dataclass(frozen=True)
class Access:
    """How one population-side endpoint picks individuals.

    mode: "var" (bound index variable), "all", "count", "join" (the
    population's single driving variable) or "draw" (one individual per call
    by selector).
    """

    edge_id: str
    population: str
    kind: InfoKind
    mode: Literal["var", "all", "count", "join", "draw"]
    var: Optional[str] = None
    selector: Optional[str] = None
    lo: int = 1
    hi: int = 1


@dataclass
class ClusterPlan:
    id: str
    computations: List[str]
    driving: List[Tuple[str, Tuple[str, ...]]] = field(default_factory=list)
    partners: List[Tuple[str, Tuple[str, ...], str]] = field(default_factory=list)
    inputs: List[Access] = field(default_factory=list)
    outputs: List[Access] = field(default_factory=list)
    # per computation: incoming edge ids in order, output slots of edge ids
    arguments: Dict[str, List[str]] = field(default_factory=dict)
    slots: Dict[str, List[List[str]]] = field(default_factory=dict)

    @property
    def factors(self) -> List[Access]:
        return [a for a in self.inputs if a.mode in ("all", "count")]

    @property
    def passthrough(self) -> bool:
        return not self.computations


@dataclass(frozen=True)
class MigrationRoute:
    edge_id: str
    source: str
    target: str
    count: int
    selector: str


@dataclass
class ExecutionPlan:
    name: str
    config: RunConfig
    populations: Dict[str, PopulationPlan]
    clusters: List[ClusterPlan]
    migrations: List[MigrationRoute]
    functions: Dict[str, RegisteredFunction]
    selectors: Dict[str, Selector]
    computation_ids: List[str]
    # compile inputs, kept so a plan can be rebuilt for another RunConfig
    flat: Optional[FlatGraph] = None
    registry: Optional[FunctionRegistry] = None
    selector_overrides: Optional[Mapping[str, Selector]] = None

    def with_config(self, config: RunConfig) -> "ExecutionPlan":
        if config == self.config:
            return self
        return compile(self.flat, config, self.registry, self.selector_overrides)


@dataclass
class RunState:
    generation: int
    populations: Dict[str, Population]


@dataclass(frozen=True)
class StatsRow:
    generation: int
    population_id: str
    best_fitness: Optional[float]
    mean_fitness: Optional[float]
    diversity: float
    evals_cumulative: int


@dataclass
class RunStats:
    rows: List[StatsRow] = field(default_factory=list)
    evaluations: Dict[str, int] = field(default_factory=dict)
    generation_evaluations: List[Dict[str, int]] = field(default_factory=list)
    migration_events: int = 0
    migrations_by_generation: Dict[int, int] = field(default_factory=dict)

    @property
    def total_evaluations(self) -> int:
        return sum(self.evaluations.values())

    def best_by_generation(self, population_id: str) -> List[Optional[float]]:
        return [row.best_fitness for row in self.rows if row.population_id == population_id]


# Compilation

def _population_plans(flat: Diagram, config: RunConfig, evaluated: set) -> Dict[str, PopulationPlan]:
    plans = {}
    for pop in flat.populations:
        override = config.populations.get(pop.id)
        size = (override and override.size) or pop.size or config.default_size
        genome = (override and override.genome) or pop.genome or config.default_genome
        algo_name = (override and override.algo) or pop.algo or settings.DEFAULT_ALGO
        if size is None:
            raise MissingExecutionAttribute(f"population {pop.id!r} has no size")
        if genome is None:
            raise MissingExecutionAttribute(f"population {pop.id!r} has no genome")
        plans[pop.id] = PopulationPlan(
            id=pop.id, size=size, genome=genome,
            algo=resolve_algorithm(algo_name, config.algos),
            evaluated=pop.id in evaluated,
        )
    return plans


def _migration_routes(flat: Diagram, config: RunConfig) -> List[MigrationRoute]:
    default = "best" if config.migration.emigrant == "best" else "rand"
    routes = []
    for edge in flat.edges:
        if not edge.is_inset:
            continue
        if not flat.is_population(edge.source.node):
            raise UnsupportedConstruct(
                f"inset edge {edge.id} starts at computation {edge.source.node!r}; "
                f"only population-to-population migration runs"
            )
        count, selector = config.migration.count, default
        label = edge.source.label
        if label is not None:
            if isinstance(label.binding, Count):
                count = label.binding.lo
            selector = label.selector or selector
        routes.append(MigrationRoute(edge.id, edge.source.node, edge.target.node, count, selector))
    return routes


def _clusters(flat: Diagram) -> List[Tuple[List[str], List[Edge]]]:
    """Connected groups of computation nodes, each with its edges."""
    graph = nx.DiGraph()
    graph.add_nodes_from(c.id for c in flat.computations)
    for edge in flat.edges:
        if flat.is_computation(edge.source.node) and flat.is_computation(edge.target.node):
            graph.add_edge(edge.source.node, edge.target.node)
    if not nx.is_directed_acyclic_graph(graph):
        cycle = [u for u, _ in nx.find_cycle(graph)]
        raise CyclicComputation(f"computation nodes form a cycle: {' -> '.join(cycle)}")

    order = {c.id: i for i, c in enumerate(flat.computations)}
    groups = sorted(nx.weakly_connected_components(graph), key=lambda c: min(order[n] for n in c))
    clusters = []
    for members in groups:
        sub = graph.subgraph(members)
        ordered = list(nx.lexicographical_topological_sort(sub, key=order.__getitem__))
        edges = [e for e in flat.edges if not e.is_inset and
                 (e.source.node in members or e.target.node in members)]
        clusters.append((ordered, edges))
    for edge in flat.edges:
        if not edge.is_inset and flat.is_population(edge.source.node) and \
                flat.is_population(edge.target.node):
            clusters.append(([], [edge]))
    return clusters


def _output_slots(comp_id: str, edges: List[Edge]) -> List[List[str]]:
    slots: List[List[str]] = []
    grouped: Dict[str, List[str]] = {}
    for edge in edges:
        if edge.source.node != comp_id:
            continue
        if edge.divergence_group is None:
            slots.append([edge.id])
        elif edge.divergence_group in grouped:
            grouped[edge.divergence_group].append(edge.id)
        else:
            grouped[edge.divergence_group] = [edge.id]
            slots.append(grouped[edge.divergence_group])
    return slots


def _binding_plan(cluster: ClusterPlan, flat: Diagram, edges: List[Edge],
                  pops: Dict[str, PopulationPlan], default_selector: str) -> None:
    sides = []
    for edge in edges:
        if flat.is_population(edge.target.node):
            sides.append(("out", edge, edge.target))
        if flat.is_population(edge.source.node):
            sides.append(("in", edge, edge.source))

    driving: Dict[str, List[str]] = {}
    for direction, _, endpoint in sides:
        label = endpoint.label
        if direction == "out" and label is not None and isinstance(label.binding, IndexVar):
            members = driving.setdefault(label.binding.letter, [])
            if endpoint.node not in members:
                members.append(endpoint.node)
    for direction, _, endpoint in sides:
        label = endpoint.label
        if label is not None and isinstance(label.binding, IndexVar) and \
                label.binding.letter in driving and endpoint.node not in driving[label.binding.letter]:
            driving[label.binding.letter].append(endpoint.node)

    partners: Dict[str, Tuple[List[str], str]] = {}
    for direction, _, endpoint in sides:
        label = endpoint.label
        if label is not None and isinstance(label.binding, IndexVar) and \
                label.binding.letter not in driving:
            members, selector = partners.setdefault(
                label.binding.letter, ([], label.selector or default_selector))
            if endpoint.node not in members:
                members.append(endpoint.node)

    for letter, members in [*driving.items(), *((k, v[0]) for k, v in partners.items())]:
        sizes = {pops[m].size for m in members}
        if len(sizes) > 1:
            detail = ", ".join(f"{m}={pops[m].size}" for m in members)
            raise SizeMismatch(f"index {letter!r} iterates in lockstep over populations of "
                               f"different sizes ({detail})")

    def driving_of(population: str) -> List[str]:
        return [letter for letter, members in driving.items() if population in members]

    for direction, edge, endpoint in sides:
        label = endpoint.label
        binding = label.binding if label is not None else None
        selector = (label.selector if label is not None else None) or default_selector
        if isinstance(binding, IndexVar):
            access = Access(edge.id, endpoint.node, edge.kind, "var", var=binding.letter)
        elif isinstance(binding, AllBinding):
            access = Access(edge.id, endpoint.node, edge.kind, "all")
        elif isinstance(binding, Count):
            access = Access(edge.id, endpoint.node, edge.kind, "count",
                            selector=selector, lo=binding.lo, hi=binding.hi)
        elif len(driving_of(endpoint.node)) == 1:
            access = Access(edge.id, endpoint.node, edge.kind, "join",
                            var=driving_of(endpoint.node)[0])
        else:
            access = Access(edge.id, endpoint.node, edge.kind, "draw", selector=selector)
        (cluster.outputs if direction == "out" else cluster.inputs).append(access)

    cluster.driving = [(letter, tuple(members)) for letter, members in driving.items()]
    cluster.partners = [(letter, tuple(members), selector)
                        for letter, (members, selector) in partners.items()]


def compile(flat: Diagram, config: Optional[RunConfig] = None,
            registry: Optional[FunctionRegistry] = None,
            selectors: Optional[Mapping[str, Selector]] = None) -> ExecutionPlan:
    """Resolve functions, selectors, sizes and binding plans."""
    config = config or RunConfig()
    registry = registry or DEFAULT_REGISTRY
    if not isinstance(flat, FlatGraph):
        flat = expand(flat)
    diagnostics = validate(flat)
    if has_errors(diagnostics):
        first = next(d for d in diagnostics if d.is_error)
        raise InvalidDiagram(f"{flat.name} does not validate: [{first.code}] {first.message}")

    evaluated = {e.target.node for e in flat.edges
                 if e.kind == InfoKind.EVALUATIVE and flat.is_population(e.target.node)}
    pops = _population_plans(flat, config, evaluated)
    migrations = _migration_routes(flat, config)

    functions = {c.id: registry.resolve(c.fn_ref) for c in flat.computations}
    resolved: Dict[str, Selector] = {}

    def need(name: str) -> None:
        if name not in resolved:
            resolved[name] = resolve_selector(name, config.selectors, selectors)

    need(config.default_selector)
    for route in migrations:
        need(route.selector)

    clusters = []
    for computations, edges in _clusters(flat):
        name = computations[0] if computations else f"pass:{edges[0].id}"
        cluster = ClusterPlan(id=name, computations=computations)
        for comp_id in computations:
            incoming = [e for e in edges if e.target.node == comp_id]
            cluster.arguments[comp_id] = [e.id for e in incoming]
            cluster.slots[comp_id] = _output_slots(comp_id, edges)
            by_id = {e.id: e for e in edges}
            functions[comp_id].check(
                comp_id,
                [e.kind for e in incoming],
                [by_id[slot[0]].kind for slot in cluster.slots[comp_id]],
            )
        _binding_plan(cluster, flat, edges, pops, config.default_selector)
        for access in [*cluster.inputs, *cluster.outputs]:
            if access.selector is not None:
                need(access.selector)
        for _, _, selector in cluster.partners:
            need(selector)
        logger.debug("cluster %s: driving %s, partners %s, %d input(s), %d output(s)",
                     cluster.id, [d for d, _ in cluster.driving],
                     [p for p, _, _ in cluster.partners], len(cluster.inputs), len(cluster.outputs))
        clusters.append(cluster)

    return ExecutionPlan(
        name=flat.name, config=config, populations=pops, clusters=clusters,
        migrations=migrations, functions=functions, selectors=resolved,
        computation_ids=[c.id for c in flat.computations],
        flat=flat, registry=registry, selector_overrides=selectors,
    )


# Evaluation

@dataclass(frozen=True)
class Snapshot:
    genomes: Dict[str, np.ndarray]
    fitness: Dict[str, np.ndarray]
    phenotypes: Dict[str, List[Any]]

    @classmethod
    def take(cls, populations: Dict[str, Population]) -> "Snapshot":
        genomes, fitness, phenotypes = {}, {}, {}
        for pop_id, pop in populations.items():
            block = pop.genomes()
            block.flags.writeable = False
            genomes[pop_id] = block
            fitness[pop_id] = pop.fitness()
            phenotypes[pop_id] = [ind.phenotype for ind in pop.individuals]
        return cls(genomes, fitness, phenotypes)

    def read(self, population: str, index: int, kind: InfoKind):
        if kind == InfoKind.GENOTYPIC:
            return self.genomes[population][index]
        if kind == InfoKind.PHENOTYPIC:
            value = self.phenotypes[population][index]
            return self.genomes[population][index] if value is None else value
        value = self.fitness[population][index]
        if np.isnan(value):
            raise MissingFitness(f"individual {index} of {population!r} has no fitness to read")
        return float(value)


@dataclass(frozen=True)
class Write:
    population: str
    index: int
    kind: InfoKind
    value: Any


@dataclass
class ClusterResult:
    writes: List[Write] = field(default_factory=list)
    calls: Counter = field(default_factory=Counter)


class ClusterRunner:
    def __init__(self, plan: ExecutionPlan, cluster: ClusterPlan, snapshot: Snapshot,
                 rng: np.random.Generator):
        self.plan = plan
        self.cluster = cluster
        self.snapshot = snapshot
        self.rng = rng
        self.result = ClusterResult()

    def pick(self, population: str, selector: str, k: int) -> List[int]:
        procedure = self.plan.selectors[selector]
        chosen = procedure(self.snapshot.fitness[population], k, self.rng)
        return [int(i) for i in chosen]

    def count(self, access: Access) -> int:
        if access.lo == access.hi:
            return access.lo
        return int(self.rng.integers(access.lo, access.hi + 1))

    def indices(self, access: Access, env: Dict[str, int], picks: Dict[str, int]) -> List[int]:
        """Individuals an endpoint touches in the current call."""
        if access.edge_id in picks:
            return [picks[access.edge_id]]
        if access.mode in ("var", "join"):
            return [env[access.var]]
        if access.mode == "all":
            return list(range(self.plan.populations[access.population].size))
        if access.mode == "count":
            return self.pick(access.population, access.selector, self.count(access))
        return self.pick(access.population, access.selector, 1)

    def run(self) -> ClusterResult:
        pops = self.plan.populations
        driving = self.cluster.driving
        ranges = [range(pops[members[0]].size) for _, members in driving]
        for values in itertools.product(*ranges):
            env = dict(zip([letter for letter, _ in driving], values))
            factors = self.cluster.factors
            choices = [
                list(range(pops[a.population].size)) if a.mode == "all"
                else self.pick(a.population, a.selector, self.count(a))
                for a in factors
            ]
            for combo in itertools.product(*choices):
                picks = {a.edge_id: i for a, i in zip(factors, combo)}
                self.call(dict(env), picks)
        return self.result

    def call(self, env: Dict[str, int], picks: Dict[str, int]) -> None:
        for letter, members, selector in self.cluster.partners:
            env[letter] = self.pick(members[0], selector, 1)[0]
        for access in self.cluster.inputs:
            if access.mode == "draw":
                picks[access.edge_id] = self.pick(access.population, access.selector, 1)[0]

        values: Dict[str, Any] = {}
        for access in self.cluster.inputs:
            (index,) = self.indices(access, env, picks)
            values[access.edge_id] = self.snapshot.read(access.population, index, access.kind)

        params = self.plan.config.function_params
        for comp_id in self.cluster.computations:
            function = self.plan.functions[comp_id]
            args = [values[edge_id] for edge_id in self.cluster.arguments[comp_id]]
            result = function(*args, **params.get(function.name, {}))
            self.result.calls[comp_id] += 1
            slots = self.cluster.slots[comp_id]
            outputs = result if function.multi else [result] * len(slots)
            for slot, value in zip(slots, outputs):
                for edge_id in slot:
                    values[edge_id] = value

        for access in self.cluster.outputs:
            value = values[access.edge_id]
            for index in self.indices(access, env, {}):
                self.result.writes.append(Write(access.population, index, access.kind, value))


def _aggregate(values: List[float], how: str) -> float:
    if how == "sum":
        return float(sum(values))
    if how == "max":
        return float(max(values))
    return float(np.mean(values))


def _apply_writes(plan: ExecutionPlan, state: RunState, writes: List[Write]) -> None:
    fitness: Dict[Tuple[str, int], List[float]] = defaultdict(list)
    for write in writes:
        if write.kind == InfoKind.EVALUATIVE:
            fitness[(write.population, write.index)].append(float(write.value))

    for pop_id, pop_plan in plan.populations.items():
        if pop_plan.evaluated:
            for individual in state.populations[pop_id].individuals:
                individual.fitness = None
    for (pop_id, index), values in fitness.items():
        individual = state.populations[pop_id].individuals[index]
        individual.fitness = _aggregate(values, plan.config.aggregate)
        individual.pending = False

    for write in writes:
        if write.kind == InfoKind.PHENOTYPIC:
            state.populations[write.population].individuals[write.index].phenotype = write.value
    for write in writes:
        if write.kind != InfoKind.GENOTYPIC:
            continue
        individual = state.populations[write.population].individuals[write.index]
        genome = np.asarray(write.value)
        if genome.shape != individual.genome.shape:
            raise UnsupportedConstruct(
                f"composition into {write.population!r} delivers {genome.shape[0]} gene(s), "
                f"the genome holds {individual.genome.shape[0]}"
            )
        individual.genome = genome.astype(individual.genome.dtype, copy=True)
        individual.fitness = None
        individual.pending = True


def _migrate(plan: ExecutionPlan, state: RunState, generation: int) -> int:
    policy = plan.config.migration
    events = 0
    for route in plan.migrations:
        rng = stream(plan.config.seed, f"migrate:{route.edge_id}", generation)
        source = state.populations[route.source]
        target = state.populations[route.target]
        emigrants = plan.selectors[route.selector](source.fitness(), route.count, rng)
        arrivals = [Individual(source.individuals[int(i)].genome.copy(), pending=True)
                    for i in emigrants]

        open_slots = [i for i, ind in enumerate(target.individuals) if not ind.pending]
        if policy.replace == "worst":
            ranked = np.where(np.isnan(target.fitness()), -np.inf, target.fitness())
            open_slots.sort(key=lambda i: (ranked[i], i))
        else:
            open_slots = [open_slots[int(i)] for i in rng.permutation(len(open_slots))]
        placed = min(len(arrivals), len(open_slots))
        for slot, arrival in zip(open_slots, arrivals):
            target.individuals[slot] = arrival
        if placed:
            events += 1
        logger.debug("generation %d: %d of %d emigrant(s) %s -> %s placed", generation,
                     placed, len(arrivals), route.source, route.target)
    return events


def initial_state(plan: ExecutionPlan) -> RunState:
    populations = {}
    for pop_id, pop in plan.populations.items():
        rng = stream(plan.config.seed, f"init:{pop_id}")
        populations[pop_id] = init_population(pop_id, pop.genome, pop.size, pop.algo, rng)
    return RunState(generation=0, populations=populations)


def _evaluate(plan: ExecutionPlan, snapshot: Snapshot, generation: int,
              executor: Optional[ThreadPoolExecutor]) -> List[ClusterResult]:
    def work(cluster: ClusterPlan) -> ClusterResult:
        rng = stream(plan.config.seed, f"cluster:{cluster.id}", generation)
        return ClusterRunner(plan, cluster, snapshot, rng).run()

    if executor is None:
        return [work(cluster) for cluster in plan.clusters]
    return list(executor.map(work, plan.clusters))


def _ea_steps(plan: ExecutionPlan, state: RunState, generation: int,
              executor: Optional[ThreadPoolExecutor]) -> None:
    evolving = [pop_id for pop_id, pop in plan.populations.items() if pop.evaluated]

    def work(pop_id: str) -> Population:
        rng = stream(plan.config.seed, f"pop:{pop_id}", generation)
        return ea_step(state.populations[pop_id], rng)

    stepped = [work(p) for p in evolving] if executor is None else \
        list(executor.map(work, evolving))
    for pop_id, population in zip(evolving, stepped):
        state.populations[pop_id] = population


def step(plan: ExecutionPlan, state: RunState,
         executor: Optional[ThreadPoolExecutor] = None,
         on_generation: Optional[Callable[[int, RunState], None]] = None):
    """Run one generation in place; returns (calls per computation, migration events)."""
    generation = state.generation + 1
    if generation > 1:
        _ea_steps(plan, state, generation, executor)

    snapshot = Snapshot.take(state.populations)
    results = _evaluate(plan, snapshot, generation, executor)
    calls: Counter = Counter()
    writes: List[Write] = []
    for result in results:
        calls.update(result.calls)
        writes.extend(result.writes)
    _apply_writes(plan, state, writes)
    state.generation = generation
    if on_generation is not None:
        on_generation(generation, state)

    events = 0
    if plan.migrations and generation % plan.config.migration.interval == 0:
        events = _migrate(plan, state, generation)
    return {comp: calls.get(comp, 0) for comp in plan.computation_ids}, events


def run(plan: ExecutionPlan, config: Optional[RunConfig] = None,
        on_generation: Optional[Callable[[int, RunState], None]] = None) -> RunStats:
    """Execute `generations` synchronous generations from a fresh state."""
    if config is not None:
        plan = plan.with_config(config)
    config = plan.config
    state = initial_state(plan)
    stats = RunStats(evaluations={comp: 0 for comp in plan.computation_ids})
    executor = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for _ in range(config.generations):
            calls, events = step(plan, state, executor, on_generation)
            generation = state.generation
            for comp, count in calls.items():
                stats.evaluations[comp] += count
            stats.generation_evaluations.append(calls)
            cumulative = stats.total_evaluations
            for pop_id, population in state.populations.items():
                stats.rows.append(StatsRow(
                    generation=generation,
                    population_id=pop_id,
                    best_fitness=population.best_fitness(),
                    mean_fitness=population.mean_fitness(),
                    diversity=diversity(population, config.diversity_sample),
                    evals_cumulative=cumulative,
                ))
            if events:
                stats.migration_events += events
                stats.migrations_by_generation[generation] = events
            logger.debug("generation %d: %s", generation, ", ".join(
                f"{p}={pop.best_fitness()}" for p, pop in state.populations.items()))
    finally:
        if executor is not None:
            executor.shutdown()
    logger.info("%s: %d generation(s), %d evaluation(s), %d migration event(s)",
                plan.name, config.generations, stats.total_evaluations, stats.migration_events)
    return stats


# Output

STATS_COLUMNS = ["generation", "population_id", "best_fitness", "mean_fitness",
                 "diversity", "evals_cumulative"]


def _number(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def write_stats(stats: RunStats, fmt: str = "csv") -> str:
    if fmt == "json":
        document = {
            "columns": STATS_COLUMNS,
            "rows": [
                {
                    "generation": row.generation,
                    "population_id": row.population_id,
                    "best_fitness": row.best_fitness,
                    "mean_fitness": row.mean_fitness,
                    "diversity": row.diversity,
                    "evals_cumulative": row.evals_cumulative,
                }
                for row in stats.rows
            ],
            "evaluations": stats.evaluations,
            "migration_events": stats.migration_events,
        }
        return json.dumps(document, indent=2) + "\n"

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(STATS_COLUMNS)
    for row in stats.rows:
        writer.writerow([
            row.generation, row.population_id, _number(row.best_fitness),
            _number(row.mean_fitness), _number(row.diversity), row.evals_cumulative,
        ])
    return buffer.getvalue()
