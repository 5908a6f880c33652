"""Named selectors for edge labels such as `P[10/rand]`.

A selector takes the snapshot fitness of a population (NaN = missing, which
ranks lowest), the number of individuals wanted and a generator, and returns
indices.
"""
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from .errors import UnresolvedSelector

Selector = Callable[[np.ndarray, int, np.random.Generator], np.ndarray]

DEFAULT_SELECTOR = "rand"


def _ranked(fitness: np.ndarray) -> np.ndarray:
    return np.where(np.isnan(fitness), -np.inf, fitness)


def select_random(fitness: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform, without replacement while k fits in the population."""
    n = len(fitness)
    return rng.choice(n, size=k, replace=k > n)


def select_best(fitness: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    order = np.argsort(-_ranked(fitness), kind="stable")
    return np.resize(order, k)


def select_tournament2(fitness: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    ranked = _ranked(fitness)
    pairs = rng.integers(0, len(fitness), size=(k, 2))
    a, b = pairs[:, 0], pairs[:, 1]
    better_b = (ranked[b] > ranked[a]) | ((ranked[b] == ranked[a]) & (b < a))
    return np.where(better_b, b, a)


SELECTORS: Dict[str, Selector] = {
    "rand": select_random,
    "best": select_best,
    "tourn2": select_tournament2,
}


def resolve_selector(name: str, aliases: Optional[Mapping[str, str]] = None,
                     extra: Optional[Mapping[str, Selector]] = None) -> Selector:
    """Look a selector up by name: extra procedures, then aliases, then built-ins."""
    if extra and name in extra:
        return extra[name]
    target = (aliases or {}).get(name, name)
    if target in SELECTORS:
        return SELECTORS[target]
    raise UnresolvedSelector(
        f"unknown selector {name!r}; bind it in the run configuration "
        f"(built-in: {', '.join(SELECTORS)})"
    )
