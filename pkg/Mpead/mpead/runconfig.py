import re
from pathlib import Path
from typing import Dict, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

from .kernel import AlgoConfig
from .schemas import GenomeKind, GenomeSpec
from .selectors import DEFAULT_SELECTOR

_GENOME = re.compile(r"^\s*(bits|reals)\s*\(\s*(\d+)\s*\)\s*$")


def parse_genome(value: Union[str, dict, GenomeSpec]) -> Union[dict, GenomeSpec]:
    """Accept the DSL spelling `bits(30)` wherever a genome spec is expected."""
    if isinstance(value, str):
        match = _GENOME.match(value)
        if match is None:
            raise ValueError(f"genome must look like bits(N) or reals(N), got {value!r}")
        return GenomeSpec(kind=GenomeKind(match.group(1)), length=int(match.group(2)))
    return value


class PopulationOverride(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    size: Optional[PositiveInt] = None
    genome: Optional[GenomeSpec] = None
    algo: Optional[str] = None

    @field_validator("genome", mode="before")
    @classmethod
    def genome_text(cls, value):
        return parse_genome(value)


class MigrationPolicy(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    emigrant: Literal["best", "random"] = "best"
    interval: PositiveInt = 5
    replace: Literal["worst", "random"] = "worst"
    count: PositiveInt = 1


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    generations: PositiveInt = 100
    seed: int = 0
    workers: PositiveInt = 1
    default_size: Optional[PositiveInt] = None
    default_genome: Optional[GenomeSpec] = None
    populations: Dict[str, PopulationOverride] = {}
    migration: MigrationPolicy = MigrationPolicy()
    # selector name -> built-in selector it stands for
    selectors: Dict[str, str] = {}
    default_selector: str = DEFAULT_SELECTOR
    algos: Dict[str, AlgoConfig] = {}
    function_params: Dict[str, Dict[str, float]] = {}
    aggregate: Literal["mean", "sum", "max"] = "mean"
    diversity_sample: PositiveInt = Field(default=32, ge=2)

    @field_validator("default_genome", mode="before")
    @classmethod
    def genome_text(cls, value):
        return parse_genome(value)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
