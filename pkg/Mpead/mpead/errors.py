from typing import List, Optional


class MpeadError(Exception):
    """Base error: a stable code plus a human readable detail."""

    code = "E000"

    def __init__(self, detail: str, code: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        if code is not None:
            self.code = code

    def __str__(self) -> str:
        return f"[{self.code}] {self.detail}"


# Diagram construction

class DanglingReference(MpeadError):
    code = "E101"

    def __init__(self, ref: str, where: str = ""):
        self.ref = ref
        suffix = f" in {where}" if where else ""
        super().__init__(f"unknown node {ref!r}{suffix}")


class DuplicateId(MpeadError):
    code = "E102"

    def __init__(self, ref: str):
        self.ref = ref
        super().__init__(f"duplicate id {ref!r}")


class InvalidDiagram(MpeadError):
    code = "E103"


# Parsing

class ParseFailed(MpeadError):
    code = "E201"

    def __init__(self, diagnostics: List["object"]):
        self.diagnostics = diagnostics
        first = diagnostics[0].message if diagnostics else "parse failed"
        super().__init__(f"{len(diagnostics)} error(s); first: {first}")


# Expansion

class BoxTargetAmbiguous(MpeadError):
    code = "E301"


class TemplateUnresolved(MpeadError):
    code = "E302"


class AdjacencyUnknown(MpeadError):
    code = "E303"


# Rendering

class LayoutFailure(MpeadError):
    code = "E401"


# Evolutionary kernel

class DuplicateFunction(MpeadError):
    code = "E501"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"function {name!r} is already registered")


class MissingFitness(MpeadError):
    code = "E502"


class ArityMismatch(MpeadError):
    code = "E503"


# Engine

class UnresolvedFunction(MpeadError):
    code = "E601"


class UnresolvedSelector(MpeadError):
    code = "E602"


class UnresolvedAlgorithm(MpeadError):
    code = "E603"


class SizeMismatch(MpeadError):
    code = "E604"


class CyclicComputation(MpeadError):
    code = "E605"


class MissingExecutionAttribute(MpeadError):
    code = "E606"


class UnsupportedConstruct(MpeadError):
    code = "E607"
