"""Recursive descent parser for the `.mpead` language.

    diagram     := "diagram" IDENT "{" item* "}"
    item        := popdecl | compdecl | edgedecl | macrodecl | griddecl | repeatdecl
    popdecl     := "population" IDENT ("{" popattr* "}")?
    compdecl    := "compute" IDENT "{" "fn" "=" STRING ("out" "=" kindlist)? "}"
    edgedecl    := endpoint arrow (endpoint | "{" endpoint ("," endpoint)* "}") ":" kind
    macrodecl   := "macro" IDENT "{" "members" "=" "[" IDENT ("," IDENT)* "]" "}"
    griddecl    := "grid" IDENT "{" rows cols template adjacency link "}"
    repeatdecl  := "repeat" IDENT "{" "count" "=" INT "template" "=" IDENT boundary* "}"
    link        := "link" "=" (kind "inset"? | "none")

Blocks also accept `name = STRING` on populations and computations. Errors
never abort the parse: each failing item is reported and the parser resumes
at the next line or declaration keyword.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

from .builder import build_diagram, infer_output_kinds
from .errors import MpeadError, ParseFailed
from .lexer import Token, TokenKind, tokenize
from .schemas import (
    Adjacency,
    AllBinding,
    Attachment,
    ComputationNode,
    Count,
    Diagram,
    Edge,
    EdgeLabel,
    Endpoint,
    GenomeKind,
    GenomeSpec,
    IndexVar,
    InfoKind,
    MacroBox,
    ParseDiagnostic,
    PopulationNode,
    RepeatGroup,
    Severity,
    SourceSpan,
)

logger = logging.getLogger(__name__)

ITEM_KEYWORDS = {"population", "compute", "macro", "grid", "repeat"}
KINDS = {kind.value: kind for kind in InfoKind}
ADJACENCIES = {adj.value: adj for adj in Adjacency}
GENOMES = {kind.value: kind for kind in GenomeKind}
MAX_INT_DIGITS = 18


class _Sync(Exception):
    """Raised after a syntax error has been recorded; unwinds to the item loop."""


@dataclass
class ParseResult:
    diagram: Optional[Diagram]
    diagnostics: List[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.diagram is not None

    @property
    def errors(self) -> List[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.is_error]


class Parser:
    def __init__(self, tokens: List[Token], file: str):
        self.tokens = tokens
        self.file = file
        self.index = 0
        self.depth = 0
        self.diagnostics: List[ParseDiagnostic] = []

        self.populations: List[PopulationNode] = []
        self.computations: List[Tuple[dict, SourceSpan]] = []
        self.edges: List[Edge] = []
        self.macros: List[MacroBox] = []
        self.groups: List[RepeatGroup] = []
        self.edge_counter = 0
        self.group_counter = 0
        self._boundary_owner = ""
        self._boundary_count = 0

    # Token helpers

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != TokenKind.EOF:
            self.index += 1
        if token.kind == TokenKind.LBRACE:
            self.depth += 1
        elif token.kind == TokenKind.RBRACE:
            self.depth -= 1
        return token

    def at(self, kind: TokenKind, text: Optional[str] = None) -> bool:
        token = self.peek()
        return token.kind == kind and (text is None or token.text == text)

    def error(self, code: str, message: str, token: Token,
              severity: Severity = Severity.ERROR) -> None:
        self.diagnostics.append(ParseDiagnostic(
            severity=severity, message=message, span=token.span(self.file), code=code,
        ))

    def fail(self, message: str, token: Optional[Token] = None, code: str = "P002"):
        token = token or self.peek()
        if token.kind == TokenKind.EOF and code == "P002":
            code = "P003"
            message = f"{message}, found end of input (unterminated block?)"
        else:
            message = f"{message}, found {token.describe()}"
        self.error(code, message, token)
        raise _Sync()

    def expect(self, kind: TokenKind, what: Optional[str] = None) -> Token:
        if self.at(kind):
            return self.advance()
        self.fail(f"expected {what or kind.value}")

    def span_from(self, start: Token) -> SourceSpan:
        end = self.tokens[max(self.index - 1, 0)]
        if (end.end_line, end.end_col) < (start.line, start.col):
            end = start
        return SourceSpan(
            file=self.file, start_line=start.line, start_col=start.col,
            end_line=end.end_line, end_col=end.end_col,
        )

    def positive_int(self, what: str) -> int:
        token = self.expect(TokenKind.INT, f"{what} (integer)")
        digits = token.text.lstrip("0") or "0"
        if len(digits) > MAX_INT_DIGITS:
            self.error("P006", f"{what} is too large", token)
            raise _Sync()
        value = int(digits)
        if value < 1:
            self.error("P006", f"{what} must be a positive integer", token)
            raise _Sync()
        return value

    # Recovery

    def synchronize(self, failed_at: int) -> None:
        failed_line = self.tokens[min(failed_at, len(self.tokens) - 1)].line
        while not self.at(TokenKind.EOF):
            token = self.peek()
            if self.depth <= 1:
                if token.kind == TokenKind.RBRACE and self.depth == 1:
                    return
                if token.kind == TokenKind.IDENT and (
                    token.text in ITEM_KEYWORDS or token.line != failed_line
                ) and self.index > failed_at:
                    return
            self.advance()

    # Grammar

    def parse(self) -> Optional[str]:
        if not self.at(TokenKind.IDENT, "diagram"):
            self.error("P002", f"expected 'diagram', found {self.peek().describe()}", self.peek())
            while not self.at(TokenKind.EOF) and not self.at(TokenKind.IDENT, "diagram"):
                self.advance()
            if self.at(TokenKind.EOF):
                return None
        self.advance()
        self.depth = 0
        name_token = self.peek()
        if name_token.kind != TokenKind.IDENT:
            self.error("P002", f"expected diagram name, found {name_token.describe()}", name_token)
            name = "unnamed"
        else:
            name = self.advance().text
        if not self.at(TokenKind.LBRACE):
            self.error("P002", f"expected '{{', found {self.peek().describe()}", self.peek())
        else:
            self.advance()

        while True:
            if self.at(TokenKind.EOF):
                self.error("P003", "unterminated diagram block, missing '}'", self.peek())
                break
            if self.at(TokenKind.RBRACE) and self.depth <= 1:
                self.advance()
                break
            start = self.index
            try:
                self.item()
            except _Sync:
                self.synchronize(start)
                if self.index == start:
                    self.advance()

        if not self.at(TokenKind.EOF):
            self.error("P002", f"unexpected {self.peek().describe()} after the diagram", self.peek())
        return name

    def item(self) -> None:
        token = self.peek()
        if token.kind != TokenKind.IDENT:
            self.fail("expected a declaration or an edge")
        keyword = token.text
        if keyword == "population":
            self.population()
        elif keyword == "compute":
            self.compute()
        elif keyword == "macro":
            self.macro()
        elif keyword == "grid":
            self.grid()
        elif keyword == "repeat":
            self.repeat()
        else:
            self.edge_decl()

    def attributes(self, allowed: Set[str], parse_value) -> Dict[str, object]:
        """Parse `name = value` pairs until the closing brace, in any order."""
        values: Dict[str, object] = {}
        while not self.at(TokenKind.RBRACE):
            token = self.peek()
            if token.kind != TokenKind.IDENT or token.text not in allowed:
                options = ", ".join(sorted(allowed))
                self.fail(f"expected one of {options}")
            self.advance()
            if token.text != "edge":
                self.expect(TokenKind.EQUALS)
            if token.text in values and token.text != "edge":
                self.error("P101", f"duplicate attribute '{token.text}', last one wins",
                           token, Severity.WARNING)
            value = parse_value(token.text)
            if token.text == "edge":
                values.setdefault("edge", []).append(value)
            else:
                values[token.text] = value
        self.expect(TokenKind.RBRACE)
        return values

    def population(self) -> None:
        start = self.advance()
        ident = self.expect(TokenKind.IDENT, "population id").text
        attrs: Dict[str, object] = {}
        if self.at(TokenKind.LBRACE):
            self.advance()
            attrs = self.attributes({"size", "genome", "algo", "name"}, self.population_value)
        self.populations.append(PopulationNode(
            id=ident,
            name=attrs.get("name", ""),
            size=attrs.get("size"),
            genome=attrs.get("genome"),
            algo=attrs.get("algo"),
            span=self.span_from(start),
        ))

    def population_value(self, attr: str):
        if attr == "size":
            return self.positive_int("population size")
        if attr == "genome":
            kind = self.expect(TokenKind.IDENT, "genome kind (bits or reals)")
            if kind.text not in GENOMES:
                self.fail("expected genome kind (bits or reals)", kind)
            self.expect(TokenKind.LPAREN)
            length = self.positive_int("genome length")
            self.expect(TokenKind.RPAREN)
            return GenomeSpec(kind=GENOMES[kind.text], length=length)
        return self.expect(TokenKind.STRING).text

    def compute(self) -> None:
        start = self.advance()
        ident = self.expect(TokenKind.IDENT, "computation id").text
        self.expect(TokenKind.LBRACE)
        attrs = self.attributes({"fn", "out", "name"}, self.compute_value)
        if "fn" not in attrs:
            self.error("P002", f"computation {ident!r} needs 'fn = \"...\"'", start)
            raise _Sync()
        fields = {"id": ident, "name": attrs.get("name", ""), "fn_ref": attrs["fn"],
                  "declared_output_kinds": attrs.get("out")}
        self.computations.append((fields, self.span_from(start)))

    def compute_value(self, attr: str):
        if attr == "out":
            kinds = [self.kind()]
            while self.at(TokenKind.COMMA):
                self.advance()
                kinds.append(self.kind())
            return tuple(dict.fromkeys(kinds))
        return self.expect(TokenKind.STRING).text

    def kind(self) -> InfoKind:
        token = self.peek()
        if token.kind != TokenKind.IDENT or token.text not in KINDS:
            self.fail("expected edge kind (geno, pheno or eval)")
        self.advance()
        return KINDS[token.text]

    def macro(self) -> None:
        start = self.advance()
        ident = self.expect(TokenKind.IDENT, "macro id").text
        self.expect(TokenKind.LBRACE)
        attrs = self.attributes({"members"}, self.member_list)
        if "members" not in attrs:
            self.error("P002", f"macro {ident!r} needs 'members = [...]'", start)
            raise _Sync()
        self.macros.append(MacroBox(id=ident, members=attrs["members"], span=self.span_from(start)))

    def member_list(self, attr: str) -> Tuple[str, ...]:
        self.expect(TokenKind.LBRACKET)
        members = [self.expect(TokenKind.IDENT, "member id").text]
        while self.at(TokenKind.COMMA):
            self.advance()
            members.append(self.expect(TokenKind.IDENT, "member id").text)
        self.expect(TokenKind.RBRACKET)
        return tuple(members)

    def grid(self) -> None:
        start = self.advance()
        ident = self.expect(TokenKind.IDENT, "grid id").text
        self.expect(TokenKind.LBRACE)
        attrs = self.attributes({"rows", "cols", "template", "adjacency", "link"}, self.grid_value)
        for required in ("rows", "cols", "template"):
            if required not in attrs:
                self.error("P002", f"grid {ident!r} needs '{required} = ...'", start)
                raise _Sync()
        link_kind, inset = attrs.get("link", (InfoKind.GENOTYPIC, True))
        self.groups.append(RepeatGroup(
            id=ident,
            template=attrs["template"],
            counts=(attrs["rows"], attrs["cols"]),
            adjacency=attrs.get("adjacency", Adjacency.VON_NEUMANN),
            link_kind=link_kind,
            link_inset=inset,
            span=self.span_from(start),
        ))

    def grid_value(self, attr: str):
        if attr in ("rows", "cols"):
            return self.positive_int(attr)
        if attr == "template":
            return self.expect(TokenKind.IDENT, "template population").text
        if attr == "adjacency":
            token = self.expect(TokenKind.IDENT, "adjacency (von_neumann or moore)")
            if token.text not in ADJACENCIES:
                self.fail("expected adjacency (von_neumann or moore)", token)
            return ADJACENCIES[token.text]
        if self.at(TokenKind.IDENT, "none"):
            self.advance()
            return None, False
        kind = self.kind()
        inset = False
        if self.at(TokenKind.IDENT, "inset"):
            self.advance()
            inset = True
        return kind, inset

    def repeat(self) -> None:
        start = self.advance()
        ident = self.expect(TokenKind.IDENT, "repeat id").text
        self.expect(TokenKind.LBRACE)
        self._boundary_owner = ident
        self._boundary_count = 0
        attrs = self.attributes({"count", "template", "edge"}, self.repeat_value)
        for required in ("count", "template"):
            if required not in attrs:
                self.error("P002", f"repeat {ident!r} needs '{required} = ...'", start)
                raise _Sync()
        self.groups.append(RepeatGroup(
            id=ident,
            template=attrs["template"],
            counts=(attrs["count"],),
            boundary=tuple(attrs.get("edge", ())),
            span=self.span_from(start),
        ))

    def repeat_value(self, attr: str):
        if attr == "count":
            return self.positive_int("repeat count")
        if attr == "template":
            return self.expect(TokenKind.IDENT, "template population").text
        start = self.peek()
        source = self.endpoint()
        attachment = self.arrow()
        target = self.endpoint(attachment)
        self.expect(TokenKind.COLON)
        kind = self.kind()
        self._boundary_count += 1
        return Edge(
            id=f"{self._boundary_owner}:b{self._boundary_count}",
            source=source, target=target, kind=kind, span=self.span_from(start),
        )

    def arrow(self) -> Attachment:
        if self.at(TokenKind.ARROW):
            self.advance()
            return Attachment.AT_NODE
        if self.at(TokenKind.SQUIGGLE):
            self.advance()
            return Attachment.INSET
        self.fail("expected '->' or '~>'")

    def endpoint(self, attachment: Attachment = Attachment.AT_NODE) -> Endpoint:
        node = self.expect(TokenKind.IDENT, "node id").text
        label = None
        if self.at(TokenKind.LBRACKET):
            self.advance()
            label = self.label()
            self.expect(TokenKind.RBRACKET)
        return Endpoint(node=node, label=label, attachment=attachment)

    def label(self) -> EdgeLabel:
        token = self.peek()
        if token.kind == TokenKind.IDENT:
            self.advance()
            if len(token.text) != 1 or not token.text.isalpha():
                self.error("P006", f"index variable {token.text!r} must be a single letter", token)
                raise _Sync()
            binding = IndexVar(letter=token.text)
        elif token.kind == TokenKind.INT:
            lo = self.positive_int("label count")
            hi = lo
            if self.at(TokenKind.DOTDOT):
                self.advance()
                hi_token = self.peek()
                hi = self.positive_int("label range end")
                if hi < lo:
                    self.error("P006", f"label range {lo}..{hi} ends below its start", hi_token)
                    raise _Sync()
            binding = Count(lo=lo, hi=hi)
        elif token.kind == TokenKind.STAR:
            self.advance()
            binding = AllBinding()
        else:
            self.fail("expected an index letter, a count or '*'")
        selector = None
        if self.at(TokenKind.SLASH):
            self.advance()
            selector = self.expect(TokenKind.IDENT, "selector name").text
        return EdgeLabel(binding=binding, selector=selector)

    def edge_decl(self) -> None:
        start = self.peek()
        source = self.endpoint()
        attachment = self.arrow()
        if self.at(TokenKind.LBRACE):
            self.advance()
            targets = [self.endpoint(attachment)]
            while self.at(TokenKind.COMMA):
                self.advance()
                targets.append(self.endpoint(attachment))
            self.expect(TokenKind.RBRACE)
            self.group_counter += 1
            group: Optional[str] = f"g{self.group_counter}"
        else:
            targets = [self.endpoint(attachment)]
            group = None
        self.expect(TokenKind.COLON)
        kind = self.kind()
        span = self.span_from(start)
        for target in targets:
            self.edge_counter += 1
            self.edges.append(Edge(
                id=f"e{self.edge_counter}", source=source, target=target,
                kind=kind, divergence_group=group, span=span,
            ))

    # Cross references

    def resolve(self, name: str) -> Optional[Diagram]:
        def report(code: str, message: str, span: Optional[SourceSpan]) -> None:
            self.diagnostics.append(ParseDiagnostic(
                severity=Severity.ERROR, message=message, span=span, code=code,
            ))

        seen: Set[str] = set()
        declared = [(p.id, p.span) for p in self.populations]
        declared += [(fields["id"], span) for fields, span in self.computations]
        declared += [(m.id, m.span) for m in self.macros]
        declared += [(g.id, g.span) for g in self.groups]
        for ident, span in declared:
            if ident in seen:
                report("P004", f"duplicate id {ident!r}", span)
            seen.add(ident)

        node_ids = {p.id for p in self.populations} | {f["id"] for f, _ in self.computations}
        endpoint_ids = node_ids | {m.id for m in self.macros}
        boundary = [edge for group in self.groups for edge in group.boundary]
        for edge in [*self.edges, *boundary]:
            for endpoint in (edge.source, edge.target):
                if endpoint.node not in endpoint_ids:
                    report("P005", f"edge refers to unknown node {endpoint.node!r}", edge.span)
        for box in self.macros:
            for member in box.members:
                if member not in node_ids:
                    report("P005", f"macro {box.id!r} refers to unknown node {member!r}", box.span)
        population_ids = {p.id for p in self.populations}
        for group in self.groups:
            if group.template not in population_ids:
                report("P005", f"{group.id!r} uses unknown template population {group.template!r}",
                       group.span)

        if any(d.is_error for d in self.diagnostics):
            return None

        computations = []
        for fields, span in self.computations:
            if fields["declared_output_kinds"] is None:
                fields = {**fields,
                          "declared_output_kinds": tuple(infer_output_kinds(fields["id"], self.edges))}
            computations.append(ComputationNode(**fields, span=span))

        try:
            return build_diagram(name, self.populations, computations, self.edges,
                                 self.macros, self.groups)
        except MpeadError as exc:
            report("P005", exc.detail, None)
            return None


def parse(text: str, file: str = "<input>") -> ParseResult:
    """Parse source text; never raises, problems come back as diagnostics."""
    tokens, diagnostics = tokenize(text, file)
    parser = Parser(tokens, file)
    parser.diagnostics.extend(diagnostics)
    name = parser.parse()
    diagram = parser.resolve(name) if name is not None else None
    logger.debug("parsed %s: %d diagnostic(s)", file, len(parser.diagnostics))
    return ParseResult(diagram=diagram, diagnostics=parser.diagnostics)


def parse_file(path) -> ParseResult:
    path = Path(path)
    text = path.read_bytes().decode("utf-8", errors="replace")
    return parse(text, str(path))


def load_diagram(path) -> Diagram:
    result = parse_file(path)
    if not result.ok:
        raise ParseFailed(result.errors)
    return result.diagram
