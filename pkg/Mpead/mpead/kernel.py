"""A deliberately small generational EA used as the black box inside
every population node."""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt

from .errors import MissingFitness, UnresolvedAlgorithm
from .schemas import GenomeKind, GenomeSpec

logger = logging.getLogger(__name__)


class AlgoConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tournament_size: PositiveInt = 2
    crossover_rate: float = Field(default=0.9, ge=0, le=1)
    # None means 1 / genome length
    mutation_rate: Optional[float] = Field(default=None, ge=0, le=1)
    elitism: NonNegativeInt = 1
    sigma: PositiveFloat = 0.1

    def mutation_for(self, length: int) -> float:
        return self.mutation_rate if self.mutation_rate is not None else 1.0 / length


ALGORITHMS: Dict[str, AlgoConfig] = {"ga": AlgoConfig()}


def resolve_algorithm(name: str, extra: Optional[Dict[str, AlgoConfig]] = None) -> AlgoConfig:
    if extra and name in extra:
        return extra[name]
    try:
        return ALGORITHMS[name]
    except KeyError:
        known = ", ".join(sorted({*ALGORITHMS, *(extra or {})}))
        raise UnresolvedAlgorithm(f"unknown algorithm {name!r} (known: {known})") from None


@dataclass
class Individual:
    genome: np.ndarray
    fitness: Optional[float] = None
    phenotype: Any = None
    # composed or immigrated, waiting for its first evaluation
    pending: bool = False

    def copy(self) -> "Individual":
        return Individual(self.genome.copy(), self.fitness, self.phenotype, self.pending)


@dataclass
class Population:
    id: str
    genome: GenomeSpec
    algo: AlgoConfig
    individuals: List[Individual] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.individuals)

    def genomes(self) -> np.ndarray:
        return np.stack([ind.genome for ind in self.individuals])

    def fitness(self) -> np.ndarray:
        """Fitness per individual, NaN where missing."""
        return np.array([np.nan if ind.fitness is None else ind.fitness
                         for ind in self.individuals], dtype=float)

    def best_fitness(self) -> Optional[float]:
        values = [ind.fitness for ind in self.individuals if ind.fitness is not None]
        return max(values) if values else None

    def mean_fitness(self) -> Optional[float]:
        values = [ind.fitness for ind in self.individuals if ind.fitness is not None]
        return float(np.mean(values)) if values else None


def random_genome(spec: GenomeSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == GenomeKind.BITS:
        return rng.integers(0, 2, size=spec.length, dtype=np.uint8)
    return rng.random(spec.length)


def init_population(pop_id: str, spec: GenomeSpec, size: int, algo: AlgoConfig,
                    rng: np.random.Generator) -> Population:
    individuals = [Individual(random_genome(spec, rng)) for _ in range(size)]
    return Population(id=pop_id, genome=spec, algo=algo, individuals=individuals)


def diversity(population: Population, sample: int = 32) -> float:
    """Mean pairwise distance over the first `sample` individuals.

    Hamming distance for bit genomes, L1 distance for real genomes.
    """
    members = population.individuals[:sample]
    if len(members) < 2:
        return 0.0
    genomes = np.stack([ind.genome for ind in members]).astype(float)
    distance = np.abs(genomes[:, None, :] - genomes[None, :, :]).sum(axis=2)
    n = len(members)
    return float(distance[np.triu_indices(n, k=1)].mean())


# Variation

def tournament(fitness: np.ndarray, size: int, rng: np.random.Generator) -> int:
    """Index of the fittest of `size` uniformly drawn contestants."""
    contestants = rng.integers(0, len(fitness), size=size)
    scores = np.where(np.isnan(fitness[contestants]), -np.inf, fitness[contestants])
    return int(contestants[int(np.argmax(scores))])


def one_point_crossover(a: np.ndarray, b: np.ndarray, rate: float,
                        rng: np.random.Generator):
    a, b = a.copy(), b.copy()
    if len(a) > 1 and rng.random() < rate:
        point = int(rng.integers(1, len(a)))
        a[point:], b[point:] = b[point:].copy(), a[point:].copy()
    return a, b


def mutate(genome: np.ndarray, spec: GenomeSpec, algo: AlgoConfig,
           rng: np.random.Generator) -> np.ndarray:
    rate = algo.mutation_for(spec.length)
    mask = rng.random(len(genome)) < rate
    if spec.kind == GenomeKind.BITS:
        return genome ^ mask.astype(genome.dtype)
    out = genome.copy()
    out[mask] += rng.normal(0.0, algo.sigma, size=int(mask.sum()))
    return out


def ea_step(population: Population, rng: np.random.Generator) -> Population:
    """One generation: elites, then tournament parents, crossover, mutation.

    Pending individuals are carried over unchanged in front; they have not
    been evaluated yet and take no part in selection.
    """
    pending = [ind for ind in population.individuals if ind.pending]
    evaluated = [ind for ind in population.individuals if not ind.pending]
    missing = [i for i, ind in enumerate(population.individuals)
               if not ind.pending and ind.fitness is None]
    if missing:
        raise MissingFitness(
            f"population {population.id!r}: individual(s) {missing[:5]} have no fitness "
            f"value; every individual needs an evaluative write before the EA step"
        )

    offspring = [ind.copy() for ind in pending]
    if not evaluated:
        return Population(population.id, population.genome, population.algo, offspring)

    algo = population.algo
    fitness = np.array([ind.fitness for ind in evaluated], dtype=float)
    order = np.argsort(-fitness, kind="stable")
    elites = min(algo.elitism, population.size - len(offspring))
    offspring += [evaluated[int(i)].copy() for i in order[:elites]]

    while len(offspring) < population.size:
        mother = evaluated[tournament(fitness, algo.tournament_size, rng)]
        father = evaluated[tournament(fitness, algo.tournament_size, rng)]
        for child in one_point_crossover(mother.genome, father.genome, algo.crossover_rate, rng):
            if len(offspring) < population.size:
                offspring.append(Individual(mutate(child, population.genome, algo, rng)))

    return Population(population.id, population.genome, algo, offspring)
