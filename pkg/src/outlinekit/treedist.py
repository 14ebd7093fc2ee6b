"""Ordered-tree edit distance and the structural reward/distance built on it.

The distance is the classical keyroot/postorder dynamic program over
insert, delete, and relabel operations. Outlines are compared including
their shared synthetic root, so empty-vs-empty is well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import BothEmpty
from .model import OutlineNode, OutlineTree, normalize_heading

RelabelMode = Literal["shape_only", "label_aware"]


@dataclass
class EditCostModel:
    """Costs for the three edit operations.

    In shape_only mode every relabel is free, so the distance depends only
    on tree shape. In label_aware mode relabeling costs 1 unless the
    normalized headings are equal.
    """

    insert_cost: float = 1.0
    delete_cost: float = 1.0
    relabel_cost_mode: RelabelMode = "shape_only"

    def __post_init__(self) -> None:
        for name in ("insert_cost", "delete_cost"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if self.relabel_cost_mode not in ("shape_only", "label_aware"):
            raise ValueError(f"unknown relabel mode {self.relabel_cost_mode!r}")

    def relabel_cost(self, a: OutlineNode, b: OutlineNode) -> float:
        if self.relabel_cost_mode == "shape_only":
            return 0.0
        # synthetic roots (level 0) only match each other for free
        if a.level == 0 and b.level == 0:
            return 0.0
        if a.level == 0 or b.level == 0:
            return 1.0
        return 0.0 if normalize_heading(a.heading) == normalize_heading(b.heading) else 1.0


@dataclass
class DistanceReport:
    """TED plus its normalized forms for one (generated, reference) pair."""

    ted: float
    n_ref: int
    n_gen: int
    normalized_distance: float
    structural_reward: float

    def to_dict(self) -> dict:
        return {
            "ted": self.ted,
            "n_ref": self.n_ref,
            "n_gen": self.n_gen,
            "normalized_distance": self.normalized_distance,
            "structural_reward": self.structural_reward,
        }


class _Annotated:
    """Postorder node list with leftmost-leaf descendants and keyroots."""

    def __init__(self, root: OutlineNode) -> None:
        self.nodes: list[OutlineNode] = []
        self.lmld: list[int] = []

        def visit(node: OutlineNode) -> int:
            if node.children:
                first = None
                for child in node.children:
                    f = visit(child)
                    if first is None:
                        first = f
                self.nodes.append(node)
                self.lmld.append(first)  # type: ignore[arg-type]
            else:
                self.nodes.append(node)
                self.lmld.append(len(self.nodes) - 1)
            return self.lmld[-1]

        visit(root)
        last_for_lmld: dict[int, int] = {}
        for i, l in enumerate(self.lmld):
            last_for_lmld[l] = i
        self.keyroots = sorted(last_for_lmld.values())


def tree_edit_distance(
    a: OutlineTree, b: OutlineTree, costs: EditCostModel | None = None
) -> float:
    """Minimum-cost ordered-tree edit distance between two outlines."""
    costs = costs or EditCostModel()
    ta = _Annotated(a.root)
    tb = _Annotated(b.root)
    na, nb = len(ta.nodes), len(tb.nodes)
    treedists = [[0.0] * nb for _ in range(na)]
    ins, dele = costs.insert_cost, costs.delete_cost
    rel = costs.relabel_cost

    def compute(i: int, j: int) -> None:
        al, bl = ta.lmld, tb.lmld
        an, bn = ta.nodes, tb.nodes
        m = i - al[i] + 2
        n = j - bl[j] + 2
        fd = [[0.0] * n for _ in range(m)]
        ioff = al[i] - 1
        joff = bl[j] - 1
        for x in range(1, m):
            fd[x][0] = fd[x - 1][0] + dele
        for y in range(1, n):
            fd[0][y] = fd[0][y - 1] + ins
        for x in range(1, m):
            for y in range(1, n):
                if al[i] == al[x + ioff] and bl[j] == bl[y + joff]:
                    fd[x][y] = min(
                        fd[x - 1][y] + dele,
                        fd[x][y - 1] + ins,
                        fd[x - 1][y - 1] + rel(an[x + ioff], bn[y + joff]),
                    )
                    treedists[x + ioff][y + joff] = fd[x][y]
                else:
                    p = al[x + ioff] - 1 - ioff
                    q = bl[y + joff] - 1 - joff
                    fd[x][y] = min(
                        fd[x - 1][y] + dele,
                        fd[x][y - 1] + ins,
                        fd[p][q] + treedists[x + ioff][y + joff],
                    )

    for i in ta.keyroots:
        for j in tb.keyroots:
            compute(i, j)
    return treedists[na - 1][nb - 1]


def distance_report(
    gen: OutlineTree, ref: OutlineTree, costs: EditCostModel | None = None
) -> DistanceReport:
    """Compute TED and its normalized distance/reward for a pair of trees.

    The distance is TED divided by the larger node count (synthetic roots
    excluded), capped at 1 so the reward stays in [0, 1]. Raises BothEmpty
    when both trees have zero nodes.
    """
    n_ref = ref.node_count
    n_gen = gen.node_count
    denom = max(n_ref, n_gen)
    if denom == 0:
        raise BothEmpty("both outlines are empty; normalized distance is undefined")
    ted = tree_edit_distance(ref, gen, costs)
    norm = min(1.0, ted / denom)
    return DistanceReport(
        ted=ted,
        n_ref=n_ref,
        n_gen=n_gen,
        normalized_distance=norm,
        structural_reward=1.0 - norm,
    )


def structural_reward(
    gen: OutlineTree, ref: OutlineTree, costs: EditCostModel | None = None
) -> float:
    """1 - normalized TED; 1.0 exactly for identical trees."""
    return distance_report(gen, ref, costs).structural_reward


def structural_distance(
    gen: OutlineTree, ref: OutlineTree, costs: EditCostModel | None = None
) -> float:
    """Normalized TED; lower means structurally closer to the reference."""
    return distance_report(gen, ref, costs).normalized_distance
