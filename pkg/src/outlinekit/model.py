"""Outline tree and paper-metadata data model.

Parses hierarchical outlines from text (markdown ATX headings and/or
dotted numbered headings), serializes them back to a canonical markdown
form, and validates trees against a configurable schema.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date

from .errors import EmptyOutline, MalformedHeading

PAPER_SOURCES = ("arxiv", "biorxiv", "medrxiv", "other")

_WS_RE = re.compile(r"\s+")
# "1.", "1.2", "1.2.3." -- dotted decimal numbering with optional trailing dot
_DECIMAL_NUM_RE = re.compile(r"^\d+(?:\.\d+)*[.)]?\s+")
# "iv.", "x)" -- roman numerals; groups may all be empty, caller checks
_ROMAN_NUM_RE = re.compile(
    r"^(m{0,3}(?:cm|cd|d?c{0,3})(?:xc|xl|l?x{0,3})(?:ix|iv|v?i{0,3}))[.)]\s+"
)
# "(a)", "(iv)", "(3)"
_PAREN_NUM_RE = re.compile(r"^\([a-z0-9]{1,4}\)\s*")

_ATX_RE = re.compile(r"^(#+)(?:\s+(.*))?$")
# single component needs "." or ")" after the number; multi-component may omit it
_NUMBERED_RE = re.compile(r"^\s*(\d+(?:\.\d+)+)\.?\s+(.*)$|^\s*(\d+)[.)]\s+(.*)$")
_CITATION_RE = re.compile(r"^(.*?)\s*\[([^\[\]]+)\]\s*$")


def normalize_heading(text: str) -> str:
    """Normalize a heading for comparison.

    Lowercases, strips leading numbering ("1.2.3", "IV.", "(a)"), collapses
    internal whitespace, and trims. Generated and human headings differ in
    numbering style, so all text comparison goes through this.
    """
    s = text.strip().lower()
    changed = True
    while changed:
        changed = False
        m = _DECIMAL_NUM_RE.match(s)
        if m:
            s = s[m.end():]
            changed = True
            continue
        m = _ROMAN_NUM_RE.match(s)
        if m and m.group(1):
            s = s[m.end():]
            changed = True
            continue
        m = _PAREN_NUM_RE.match(s)
        if m:
            s = s[m.end():]
            changed = True
    return _WS_RE.sub(" ", s).strip()


def _norm_title(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


@dataclass
class PaperMeta:
    """Metadata for one paper: id, title, optional abstract and date."""

    id: str
    title: str
    abstract: str | None = None
    update_date: date | None = None
    source: str = "other"

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id.strip():
            raise ValueError("paper id must be a non-empty string")
        if not isinstance(self.title, str) or not _norm_title(self.title):
            raise ValueError(f"paper {self.id!r}: title must be non-empty")
        if self.source not in PAPER_SOURCES:
            raise ValueError(f"paper {self.id!r}: unknown source {self.source!r}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "update_date": self.update_date.isoformat() if self.update_date else None,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PaperMeta":
        raw_date = d.get("update_date")
        parsed: date | None = None
        if raw_date:
            parsed = date.fromisoformat(str(raw_date)[:10])
        source = d.get("source") or "other"
        if source not in PAPER_SOURCES:
            source = "other"
        abstract = d.get("abstract")
        if abstract is not None:
            abstract = str(abstract)
            if not abstract.strip():
                abstract = None
        return cls(
            id=str(d.get("id") or ""),
            title=str(d.get("title") or ""),
            abstract=abstract,
            update_date=parsed,
            source=source,
        )


@dataclass
class OutlineNode:
    """One outline section: heading text, depth level, ordered children."""

    heading: str
    level: int
    children: list["OutlineNode"] = field(default_factory=list)
    citations: list[str] = field(default_factory=list)


@dataclass
class OutlineTree:
    """A hierarchical outline.

    The root is a synthetic unlabeled node at level 0 whose children are
    the level-1 sections. Node counts exclude the synthetic root.
    """

    root: OutlineNode

    @classmethod
    def empty(cls) -> "OutlineTree":
        return cls(root=OutlineNode(heading="", level=0))

    @classmethod
    def from_sections(cls, sections: list[OutlineNode]) -> "OutlineTree":
        return cls(root=OutlineNode(heading="", level=0, children=list(sections)))

    @property
    def sections(self) -> list[OutlineNode]:
        return self.root.children

    @property
    def section_count(self) -> int:
        return len(self.root.children)

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    @property
    def depth(self) -> int:
        return max((n.level for n in self.walk()), default=0)

    def walk(self):
        """Yield every real node (excluding the synthetic root) in preorder."""
        stack = list(reversed(self.root.children))
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def all_citations(self) -> list[str]:
        """Citation ids over the whole tree, in document order, deduplicated."""
        seen: dict[str, None] = {}
        for node in self.walk():
            for cid in node.citations:
                seen.setdefault(cid, None)
        return list(seen)


def _split_citations(title: str) -> tuple[str, list[str]]:
    m = _CITATION_RE.match(title)
    if not m:
        return title.strip(), []
    ids = [tok.strip() for tok in m.group(2).split(";")]
    return m.group(1).strip(), [tok for tok in ids if tok]


def parse_outline(text: str) -> OutlineTree:
    """Parse outline text into a tree.

    Recognizes markdown ATX headings ("#", "##", ...) and numbered headings
    ("1. Intro", "1.1 Scope"). A trailing "[id1; id2]" marker is stripped
    from the heading and stored as citations. Level jumps deeper than one
    are clamped to parent level + 1. Non-heading lines are ignored.

    Raises EmptyOutline when no heading line is found and MalformedHeading
    when a heading line has an empty title.
    """
    root = OutlineNode(heading="", level=0)
    # (raw_level, node); parent of a heading is the nearest shallower entry
    stack: list[tuple[int, OutlineNode]] = [(0, root)]
    found = False
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.rstrip()
        m = _ATX_RE.match(line.lstrip())
        if m:
            raw_level = len(m.group(1))
            title = m.group(2) or ""
        else:
            m = _NUMBERED_RE.match(line)
            if not m:
                continue
            if m.group(1) is not None:
                raw_level = m.group(1).count(".") + 1
                title = m.group(2)
            else:
                raw_level = 1
                title = m.group(4)
        found = True
        title, citations = _split_citations(title)
        if not title:
            raise MalformedHeading(f"line {lineno}: heading has no title: {raw_line!r}")
        while stack[-1][0] >= raw_level:
            stack.pop()
        parent = stack[-1][1]
        node = OutlineNode(heading=title, level=parent.level + 1, citations=citations)
        parent.children.append(node)
        stack.append((raw_level, node))
    if not found:
        raise EmptyOutline("no heading lines found")
    return OutlineTree(root=root)


def serialize_outline(tree: OutlineTree) -> str:
    """Serialize a tree to canonical markdown ATX form, one heading per line.

    Citations are re-appended as " [id; id]". parse_outline on the result is
    canonical-equal to the input tree.
    """
    lines = []
    for node in tree.walk():
        suffix = f" [{'; '.join(node.citations)}]" if node.citations else ""
        lines.append(f"{'#' * node.level} {node.heading}{suffix}")
    return "\n".join(lines)


def canonical_equal(a: OutlineTree, b: OutlineTree) -> bool:
    """Compare trees on shape, normalized headings, and citations."""

    def eq(x: OutlineNode, y: OutlineNode) -> bool:
        if x.level != y.level or x.citations != y.citations:
            return False
        if normalize_heading(x.heading) != normalize_heading(y.heading):
            return False
        if len(x.children) != len(y.children):
            return False
        return all(eq(cx, cy) for cx, cy in zip(x.children, y.children))

    return eq(a.root, b.root)


@dataclass
class OutlineSchema:
    """Bounds a generated outline must satisfy to count as well-formed."""

    max_depth: int = 4
    min_top_sections: int = 3
    max_top_sections: int = 20
    max_heading_chars: int = 200
    require_citations_subset: bool = True

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_top_sections > self.max_top_sections:
            raise ValueError("min_top_sections must be <= max_top_sections")


@dataclass
class ValidationResult:
    passed: bool
    violations: list[str]


def validate_schema(
    tree: OutlineTree,
    schema: OutlineSchema | None = None,
    pool: list[str] | None = None,
) -> ValidationResult:
    """Check a tree against a schema; violations are data, not errors.

    The citation subset rule only applies when require_citations_subset is
    set and a paper-id pool is given.
    """
    schema = schema or OutlineSchema()
    violations: list[str] = []
    top = tree.section_count
    if top < schema.min_top_sections:
        violations.append(
            f"too few top-level sections: {top} < {schema.min_top_sections}"
        )
    if top > schema.max_top_sections:
        violations.append(
            f"too many top-level sections: {top} > {schema.max_top_sections}"
        )
    depth = tree.depth
    if depth > schema.max_depth:
        violations.append(f"exceeds max depth: {depth} > {schema.max_depth}")
    for node in tree.walk():
        if not normalize_heading(node.heading):
            violations.append(f"empty heading at level {node.level}")
        if len(node.heading) > schema.max_heading_chars:
            violations.append(
                f"heading too long ({len(node.heading)} > {schema.max_heading_chars}):"
                f" {node.heading[:40]!r}..."
            )
    if schema.require_citations_subset and pool is not None:
        known = set(pool)
        for cid in tree.all_citations():
            if cid not in known:
                violations.append(f"unknown citation: {cid}")
    return ValidationResult(passed=not violations, violations=violations)


@dataclass
class SurveyTask:
    """One generation task: a topic plus the pool of candidate papers."""

    topic: str
    papers: list[PaperMeta]
    reference_outline: OutlineTree | None = None

    def __post_init__(self) -> None:
        if not self.papers:
            raise ValueError("a task needs at least one paper")
        ids = [p.id for p in self.papers]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate paper ids in pool: {dupes}")

    @property
    def paper_ids(self) -> list[str]:
        return [p.id for p in self.papers]

    def to_dict(self) -> dict:
        return {
            "topic": self.topic,
            "papers": [p.to_dict() for p in self.papers],
            "reference_outline": (
                serialize_outline(self.reference_outline)
                if self.reference_outline is not None
                else None
            ),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurveyTask":
        ref = d.get("reference_outline")
        return cls(
            topic=str(d.get("topic", "")),
            papers=[PaperMeta.from_dict(p) for p in d.get("papers", [])],
            reference_outline=parse_outline(ref) if ref else None,
        )
