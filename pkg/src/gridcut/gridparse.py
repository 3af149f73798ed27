"""MATPOWER case-file ingestion and impedance-to-weight graph mapping.

Only the subset of the format needed here is parsed: the ``mpc.bus`` and
``mpc.branch`` matrix blocks.  Bus ids come from column 1 of the bus block;
branches use columns 1-4 (fbus, tbus, r, x).  Remaining columns are parsed
positionally and ignored.  A transmission line maps to an edge weight of
1/sqrt(r^2 + x^2), the inverse impedance magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import DomainError, GridcutError
from .graph import WeightedGraph


class ParseError(GridcutError):
    """Raised for malformed case text; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SemanticError(GridcutError):
    """Structurally valid case text with inconsistent content."""


@dataclass(frozen=True)
class BranchRecord:
    from_bus: int
    to_bus: int
    r: float
    x: float


@dataclass(frozen=True)
class CaseData:
    name: str
    bus_ids: tuple[int, ...]
    branches: tuple[BranchRecord, ...]


def _strip_comment(line: str) -> str:
    pos = line.find("%")
    return line if pos < 0 else line[:pos]


def _extract_block(text: str, key: str) -> list[tuple[int, list[float]]]:
    """Rows of the ``mpc.<key> = [ ... ];`` matrix as (line_no, numbers)."""
    lines = text.splitlines()
    start = None
    tail = ""
    for idx, raw in enumerate(lines):
        stripped = _strip_comment(raw).strip()
        if stripped.replace(" ", "").replace("\t", "").startswith(f"mpc.{key}=["):
            start = idx
            tail = stripped.split("[", 1)[1]
            break
    if start is None:
        raise ParseError(f"missing 'mpc.{key} = [' block", None)

    rows: list[tuple[int, list[float]]] = []
    closed = False

    def consume(fragment: str, line_no: int) -> bool:
        # Rows are ';'-separated; a ']' closes the block.
        fragment = fragment.strip()
        done = False
        if "]" in fragment:
            fragment = fragment.split("]", 1)[0]
            done = True
        for row_text in fragment.split(";"):
            row_text = row_text.strip()
            if not row_text:
                continue
            numbers = []
            for token in row_text.split():
                try:
                    numbers.append(float(token))
                except ValueError:
                    raise ParseError(
                        f"non-numeric token {token!r} in mpc.{key} row", line_no
                    ) from None
            rows.append((line_no, numbers))
        return done

    if consume(tail, start + 1):
        closed = True
    else:
        for idx in range(start + 1, len(lines)):
            if consume(_strip_comment(lines[idx]), idx + 1):
                closed = True
                break
    if not closed:
        raise ParseError(f"unterminated mpc.{key} block", start + 1)
    return rows


def parse_matpower(text: str, name: str = "case") -> CaseData:
    """Parse MATPOWER case text into bus ids and branch impedance records."""
    bus_rows = _extract_block(text, "bus")
    branch_rows = _extract_block(text, "branch")

    bus_ids: list[int] = []
    seen = set()
    for line_no, row in bus_rows:
        if not row:
            continue
        bus = int(row[0])
        if bus in seen:
            raise SemanticError(f"duplicate bus id {bus} (line {line_no})")
        seen.add(bus)
        bus_ids.append(bus)

    branches: list[BranchRecord] = []
    for line_no, row in branch_rows:
        if len(row) < 4:
            raise ParseError(
                f"branch row needs >= 4 columns (fbus tbus r x), got {len(row)}", line_no
            )
        fbus, tbus, r, x = int(row[0]), int(row[1]), row[2], row[3]
        if fbus == tbus:
            raise SemanticError(f"branch connects bus {fbus} to itself (line {line_no})")
        for bus in (fbus, tbus):
            if bus not in seen:
                raise SemanticError(f"branch references unknown bus {bus} (line {line_no})")
        branches.append(BranchRecord(fbus, tbus, r, x))

    return CaseData(name=name, bus_ids=tuple(bus_ids), branches=tuple(branches))


def branch_weight(branch: BranchRecord) -> float:
    """Inverse impedance magnitude 1/sqrt(r^2 + x^2) of one line."""
    z2 = branch.r * branch.r + branch.x * branch.x
    if z2 <= 0.0:
        raise DomainError(
            f"branch {branch.from_bus}-{branch.to_bus} has zero impedance"
        )
    return 1.0 / z2**0.5


def bus_index_map(case: CaseData) -> dict[int, int]:
    """Stable bus-id -> vertex-index map, in bus-block order."""
    return {bus: idx for idx, bus in enumerate(case.bus_ids)}


def case_to_graph(case: CaseData) -> WeightedGraph:
    """Map a parsed case to a MaxCut instance.

    Buses become vertices 0..n-1 in bus-block order; each branch contributes
    1/sqrt(r^2 + x^2); parallel branches between the same pair sum.
    """
    index = bus_index_map(case)
    accum: dict[tuple[int, int], float] = {}
    for branch in case.branches:
        w = branch_weight(branch)
        i, j = index[branch.from_bus], index[branch.to_bus]
        if i > j:
            i, j = j, i
        accum[(i, j)] = accum.get((i, j), 0.0) + w
    edges = tuple((i, j, w) for (i, j), w in sorted(accum.items()))
    return WeightedGraph(len(case.bus_ids), edges)


def load_bundled_case(name: str) -> CaseData:
    """Parse one of the case files shipped with the package (case9, case14)."""
    path = resources.files("gridcut").joinpath(f"data/{name}.m")
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"no bundled case named {name!r}") from None
    return parse_matpower(text, name=name)
