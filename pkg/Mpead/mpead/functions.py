"""Registry of computation-node functions and the built-in library.

A function declares what each argument accepts and which kinds it emits.
Genetic values are numpy arrays, evaluative values are floats. A function
registered with `multi=True` returns one value per output slot (an edge or
a whole fan-out), in declaration order; otherwise its single value goes to
every slot.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArityMismatch, DuplicateFunction, UnresolvedFunction
from .schemas import InfoKind

logger = logging.getLogger(__name__)

GENETIC = frozenset({InfoKind.GENOTYPIC, InfoKind.PHENOTYPIC})
GENO = frozenset({InfoKind.GENOTYPIC})
PHENO = frozenset({InfoKind.PHENOTYPIC})
EVAL = frozenset({InfoKind.EVALUATIVE})


@dataclass(frozen=True)
class RegisteredFunction:
    name: str
    inputs: Tuple[FrozenSet[InfoKind], ...]
    outputs: FrozenSet[InfoKind]
    procedure: Callable[..., Any]
    multi: int = 0
    defaults: Dict[str, float] = field(default_factory=dict)

    def check(self, node_id: str, input_kinds: Sequence[InfoKind],
              output_slots: Sequence[InfoKind]) -> None:
        """Raise ArityMismatch unless the node's edges fit this signature."""
        if len(input_kinds) != len(self.inputs):
            raise ArityMismatch(
                f"{node_id!r}: {self.name} takes {len(self.inputs)} input(s), "
                f"the node has {len(input_kinds)}"
            )
        for position, (kind, accepted) in enumerate(zip(input_kinds, self.inputs), start=1):
            if kind not in accepted:
                names = "/".join(sorted(k.value for k in accepted))
                raise ArityMismatch(
                    f"{node_id!r}: input {position} of {self.name} expects {names}, "
                    f"got {kind.value}"
                )
        for kind in output_slots:
            if kind not in self.outputs:
                raise ArityMismatch(f"{node_id!r}: {self.name} does not emit {kind.value}")
        if self.multi and len(output_slots) != self.multi:
            raise ArityMismatch(
                f"{node_id!r}: {self.name} returns {self.multi} values, "
                f"the node has {len(output_slots)} output(s)"
            )

    def __call__(self, *args, **params):
        return self.procedure(*args, **{**self.defaults, **params})


class FunctionRegistry:
    def __init__(self):
        self._functions: Dict[str, RegisteredFunction] = {}

    def register(self, name: str, inputs: Iterable[Iterable[InfoKind]],
                 outputs: Iterable[InfoKind], procedure: Callable[..., Any],
                 multi: int = 0, defaults: Optional[Dict[str, float]] = None) -> RegisteredFunction:
        if name in self._functions:
            raise DuplicateFunction(name)
        entry = RegisteredFunction(
            name=name,
            inputs=tuple(frozenset(kinds) for kinds in inputs),
            outputs=frozenset(outputs),
            procedure=procedure,
            multi=multi,
            defaults=dict(defaults or {}),
        )
        self._functions[name] = entry
        logger.debug("registered function %s", name)
        return entry

    def function(self, name: str, inputs, outputs, **options):
        """Decorator form of `register`."""
        def decorate(procedure):
            self.register(name, inputs, outputs, procedure, **options)
            return procedure
        return decorate

    def resolve(self, name: str) -> RegisteredFunction:
        try:
            return self._functions[name]
        except KeyError:
            raise UnresolvedFunction(f"no function registered as {name!r}") from None

    def names(self) -> List[str]:
        return sorted(self._functions)

    def __contains__(self, name: str) -> bool:
        return name in self._functions

    def copy(self) -> "FunctionRegistry":
        clone = FunctionRegistry()
        clone._functions = dict(self._functions)
        return clone


# Built-ins

def _bits(value) -> np.ndarray:
    return np.asarray(value).astype(np.int64)


def _same_length(a: np.ndarray, b: np.ndarray, name: str) -> None:
    if a.shape != b.shape:
        raise ArityMismatch(f"{name}: genomes of length {len(a)} and {len(b)} do not match")


def onemax(genome) -> float:
    return float(_bits(genome).sum())


def coarse_onemax(genome, precision: float = 0.5) -> float:
    """Ones counted on an evenly spaced sample of positions, scaled to the full length.

    A cheaper, less exact stand-in for `onemax`; `precision` is the sampled
    fraction and 1 gives the exact count.
    """
    if not 0 < precision <= 1:
        raise ValueError(f"coarse_onemax: precision must be in (0, 1], got {precision}")
    bits = _bits(genome)
    if not len(bits):
        return 0.0
    count = max(1, round(precision * len(bits)))
    sample = np.unique(np.linspace(0, len(bits) - 1, count).round().astype(np.int64))
    return float(bits[sample].sum()) * len(bits) / len(sample)


def decode_binary(genome, lo: float = 0.0, hi: float = 1.0) -> float:
    bits = _bits(genome)
    value = 0
    for bit in bits.tolist():
        value = (value << 1) | bit
    top = (1 << len(bits)) - 1
    return lo + (hi - lo) * (value / top if top else 0.0)


def gray_decode(genome) -> np.ndarray:
    return np.bitwise_xor.accumulate(_bits(genome)).astype(np.uint8)


def decoded_value(phenotype) -> float:
    return float(phenotype)


def pred_score(predator, prey) -> float:
    a, b = _bits(predator), _bits(prey)
    _same_length(a, b, "pred_score")
    return float(np.sum(a == b))


def prey_score(predator, prey) -> float:
    a, b = _bits(predator), _bits(prey)
    _same_length(a, b, "prey_score")
    return float(np.sum(a != b))


def coop_eval(part_a, part_b) -> float:
    return float(np.concatenate([_bits(part_a), _bits(part_b)]).sum())


def coop_split(part_a, part_b) -> Tuple[float, float]:
    return float(_bits(part_a).sum()), float(_bits(part_b).sum())


def modify(fitness: float, genome, weight: float = 0.1) -> float:
    return float(fitness) + weight * onemax(genome)


def carcass(pred_fitness: float, prey_fitness: float) -> float:
    # what is left of the prey; a placeholder formula
    return max(0.0, float(pred_fitness) - float(prey_fitness))


def scav_eval(carcass_value: float, prey, scavenger) -> float:
    a, b = _bits(prey), _bits(scavenger)
    _same_length(a, b, "scav_eval")
    edibility = float(np.sum(a == b)) / len(a)
    return float(carcass_value) * edibility


def builtin_registry() -> FunctionRegistry:
    registry = FunctionRegistry()
    registry.register("onemax", [GENETIC], EVAL, onemax)
    registry.register("coarse_onemax", [GENETIC], EVAL, coarse_onemax,
                      defaults={"precision": 0.5})
    registry.register("decode_binary", [GENETIC], PHENO, decode_binary,
                      defaults={"lo": 0.0, "hi": 1.0})
    registry.register("gray_decode", [GENETIC], PHENO, gray_decode)
    registry.register("decoded_value", [PHENO], EVAL, decoded_value)
    registry.register("pred_score", [GENETIC, GENETIC], EVAL, pred_score)
    registry.register("prey_score", [GENETIC, GENETIC], EVAL, prey_score)
    registry.register("coop_eval", [GENETIC, GENETIC], EVAL, coop_eval)
    registry.register("coop_split", [GENETIC, GENETIC], EVAL, coop_split, multi=2)
    registry.register("modify", [EVAL, GENETIC], EVAL, modify, defaults={"weight": 0.1})
    registry.register("F_carc", [EVAL, EVAL], EVAL, carcass)
    registry.register("scav_eval", [EVAL, GENETIC, GENETIC], EVAL, scav_eval)
    return registry


DEFAULT_REGISTRY = builtin_registry()


def register_function(name: str, inputs, outputs, procedure: Callable[..., Any],
                      registry: Optional[FunctionRegistry] = None, **options) -> RegisteredFunction:
    """Register into `registry`, or into the process-wide default one."""
    return (registry or DEFAULT_REGISTRY).register(name, inputs, outputs, procedure, **options)
