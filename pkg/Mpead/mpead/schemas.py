import enum
from functools import cached_property
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator
from typing_extensions import Annotated


# Enums

class InfoKind(str, enum.Enum):
    GENOTYPIC = "geno"
    PHENOTYPIC = "pheno"
    EVALUATIVE = "eval"


def is_genetic(kind: InfoKind) -> bool:
    """Genotypic and phenotypic information are genetic; evaluative is not."""
    return kind in (InfoKind.GENOTYPIC, InfoKind.PHENOTYPIC)


class BorderStyle(str, enum.Enum):
    SOLID = "solid"
    DASHED = "dashed"
    ALTERNATING = "alternating"


class Attachment(str, enum.Enum):
    AT_NODE = "at_node"
    INSET = "inset"


class GenomeKind(str, enum.Enum):
    BITS = "bits"
    REALS = "reals"


class Adjacency(str, enum.Enum):
    VON_NEUMANN = "von_neumann"
    MOORE = "moore"


# Source locations

class SourceSpan(BaseModel):
    model_config = ConfigDict(frozen=True)

    file: str = "<input>"
    start_line: PositiveInt
    start_col: PositiveInt
    end_line: PositiveInt
    end_col: PositiveInt

    @model_validator(mode="after")
    def check_order(self):
        if (self.end_line, self.end_col) < (self.start_line, self.start_col):
            raise ValueError("span ends before it starts")
        return self

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


class _Element(BaseModel):
    model_config = ConfigDict(frozen=True)

    span: Optional[SourceSpan] = Field(default=None, exclude=True, repr=False)


# Edge labels

class IndexVar(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["index"] = "index"
    letter: str

    @field_validator("letter")
    @classmethod
    def single_letter(cls, value: str) -> str:
        if len(value) != 1 or not value.isalpha():
            raise ValueError("index variables are single letters")
        return value


class Count(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["count"] = "count"
    lo: PositiveInt
    hi: PositiveInt

    @model_validator(mode="after")
    def check_range(self):
        if self.hi < self.lo:
            raise ValueError("count range ends below its start")
        return self


class AllBinding(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["all"] = "all"


Binding = Annotated[Union[IndexVar, Count, AllBinding], Field(discriminator="kind")]


class EdgeLabel(BaseModel):
    model_config = ConfigDict(frozen=True)

    binding: Binding
    selector: Optional[str] = None

    def __str__(self) -> str:
        binding = self.binding
        if isinstance(binding, IndexVar):
            text = binding.letter
        elif isinstance(binding, Count):
            text = str(binding.lo) if binding.lo == binding.hi else f"{binding.lo}..{binding.hi}"
        else:
            text = "*"
        if self.selector is not None:
            text += f"/{self.selector}"
        return text


# Graph elements

class Endpoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    node: str
    label: Optional[EdgeLabel] = None
    attachment: Attachment = Attachment.AT_NODE


class Edge(_Element):
    id: str
    source: Endpoint
    target: Endpoint
    kind: InfoKind
    divergence_group: Optional[str] = None

    @property
    def is_inset(self) -> bool:
        return self.target.attachment == Attachment.INSET


class GenomeSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: GenomeKind
    length: PositiveInt

    def __str__(self) -> str:
        return f"{self.kind.value}({self.length})"


class PopulationNode(_Element):
    id: str
    name: str = ""
    size: Optional[PositiveInt] = None
    genome: Optional[GenomeSpec] = None
    algo: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def default_name(cls, data):
        if isinstance(data, dict) and not data.get("name"):
            data = {**data, "name": data.get("id", "")}
        return data


class ComputationNode(_Element):
    id: str
    name: str = ""
    fn_ref: str
    declared_output_kinds: Tuple[InfoKind, ...] = Field(min_length=1)

    @model_validator(mode="before")
    @classmethod
    def default_name(cls, data):
        if isinstance(data, dict) and not data.get("name"):
            data = {**data, "name": data.get("id", "")}
        return data


Node = Union[PopulationNode, ComputationNode]


class MacroBox(_Element):
    id: str
    members: Tuple[str, ...] = Field(min_length=1)


class RepeatGroup(_Element):
    """The ellipsis construct: a template population instantiated per index.

    One count means `repeat` (instances `X_k`), two counts mean `grid`
    (rows, cols; instances `X_r_c`).
    """

    id: str
    template: str
    counts: Tuple[int, ...] = Field(min_length=1, max_length=2)
    adjacency: Optional[Adjacency] = None
    link_kind: Optional[InfoKind] = None
    link_inset: bool = False
    boundary: Tuple[Edge, ...] = ()

    @property
    def is_grid(self) -> bool:
        return len(self.counts) == 2

    @property
    def total(self) -> int:
        total = 1
        for count in self.counts:
            total *= count
        return total


class Diagram(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    populations: Tuple[PopulationNode, ...] = ()
    computations: Tuple[ComputationNode, ...] = ()
    edges: Tuple[Edge, ...] = ()
    macro_boxes: Tuple[MacroBox, ...] = ()
    repeat_groups: Tuple[RepeatGroup, ...] = ()

    @cached_property
    def nodes(self) -> Dict[str, Node]:
        index: Dict[str, Node] = {p.id: p for p in self.populations}
        index.update({c.id: c for c in self.computations})
        return index

    @cached_property
    def boxes(self) -> Dict[str, MacroBox]:
        return {box.id: box for box in self.macro_boxes}

    def is_population(self, ref: str) -> bool:
        return isinstance(self.nodes.get(ref), PopulationNode)

    def is_computation(self, ref: str) -> bool:
        return isinstance(self.nodes.get(ref), ComputationNode)

    def outgoing(self, ref: str) -> List[Edge]:
        return [edge for edge in self.edges if edge.source.node == ref]

    def incoming(self, ref: str) -> List[Edge]:
        return [edge for edge in self.edges if edge.target.node == ref]

    def divergence_groups(self) -> Dict[str, List[Edge]]:
        groups: Dict[str, List[Edge]] = {}
        for edge in self.edges:
            if edge.divergence_group is not None:
                groups.setdefault(edge.divergence_group, []).append(edge)
        return groups


class FlatGraph(Diagram):
    """A diagram with every macro box and repeat group expanded away."""

    @model_validator(mode="after")
    def check_flat(self):
        if self.macro_boxes or self.repeat_groups:
            raise ValueError("a flat graph holds no macro boxes or repeat groups")
        return self


# Diagnostics

class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


class ParseDiagnostic(BaseModel):
    model_config = ConfigDict(frozen=True)

    severity: Severity
    message: str
    span: Optional[SourceSpan] = None
    code: str

    @property
    def is_error(self) -> bool:
        return self.severity == Severity.ERROR

    def render(self, file: Optional[str] = None) -> str:
        if self.span is not None:
            where = f"{file or self.span.file}:{self.span.start_line}:{self.span.start_col}"
        else:
            where = f"{file or '<input>'}:1:1"
        prefix = "" if self.is_error else "warning: "
        return f"{where}: [{self.code}] {prefix}{self.message}"
