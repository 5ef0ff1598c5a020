"""Beam conflict graph and greedy training-resource coloring.

Vertices are DFT beams that appear in at least one user's dominant set.
Two beams conflict when some user needs both, since that user must observe
them on distinct training resources. A proper coloring of the conflict
graph is therefore a valid assignment of beams to resources, and the number
of colors is the training length.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass

import numpy as np

from .spectrum import DominantSupport


def association_matrix(supports: list[DominantSupport], m: int) -> np.ndarray:
    """Symmetric 0/1 matrix with ``a[i, j] = 1`` iff some user has both beams."""
    a = np.zeros((m, m), dtype=np.int8)
    for sup in supports:
        if len(sup.mask) != m:
            raise ValueError("support length does not match m")
        idx = sup.beam_set
        a[np.ix_(idx, idx)] = 1
    np.fill_diagonal(a, 0)
    return a


def association_grid(a: np.ndarray) -> str:
    """Plain-text 0/1 grid, one matrix row per line."""
    return "\n".join(" ".join(str(int(v)) for v in row) for row in a) + "\n"


@dataclass
class ConflictGraph:
    adjacency: np.ndarray
    vertices: np.ndarray

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=bool)
        self.vertices = np.asarray(sorted(int(v) for v in self.vertices), dtype=int)

    @property
    def m(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        """Edge count ``s_i`` of every beam (length M, zero for non-vertices)."""
        return self.adjacency.sum(axis=1)

    @property
    def max_degree(self) -> int:
        if len(self.vertices) == 0:
            return 0
        return int(self.degrees[self.vertices].max())

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    @classmethod
    def from_supports(cls, supports: list[DominantSupport], m: int) -> "ConflictGraph":
        a = association_matrix(supports, m)
        used = np.zeros(m, dtype=bool)
        for sup in supports:
            used |= sup.mask
        return cls(a, np.flatnonzero(used))

    @classmethod
    def from_adjacency(cls, a, vertices=None) -> "ConflictGraph":
        a = np.asarray(a, dtype=bool)
        if vertices is None:
            vertices = range(a.shape[0])
        return cls(a, vertices)


@dataclass
class Coloring:
    """Beam -> color assignment; colors are ``1..m_tr`` and 0 marks an uncolored beam."""

    colors: np.ndarray

    def __post_init__(self):
        self.colors = np.asarray(self.colors, dtype=int)

    @property
    def m_tr(self) -> int:
        return int(self.colors.max(initial=0))

    @property
    def vertices(self) -> np.ndarray:
        return np.flatnonzero(self.colors > 0)

    @property
    def usage(self) -> np.ndarray:
        """Number of beams per color, index ``c - 1`` for color ``c``."""
        return np.bincount(self.colors, minlength=self.m_tr + 1)[1:]

    def color_class(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.colors == c)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["beam_index", "color_id"])
        for b in self.vertices:
            w.writerow([int(b), int(self.colors[b])])
        return buf.getvalue()


def greedy_color(g: ConflictGraph) -> Coloring:
    """Degree-ordered greedy coloring with least-used color reuse.

    Vertices are visited by non-increasing degree, ties by beam index. A
    vertex opens a new color only when every color in use appears among its
    colored neighbors; otherwise it takes the available color used by the
    fewest vertices so far, ties to the smallest color id.
    """
    colors = np.zeros(g.m, dtype=int)
    deg = g.degrees
    order = sorted(g.vertices.tolist(), key=lambda v: (-deg[v], v))
    usage: list[int] = []
    for v in order:
        taken = set(colors[g.neighbors(v)].tolist())
        free = [c for c in range(1, len(usage) + 1) if c not in taken]
        if not free:
            usage.append(1)
            colors[v] = len(usage)
        else:
            c = min(free, key=lambda c: (usage[c - 1], c))
            usage[c - 1] += 1
            colors[v] = c
    return Coloring(colors)


def overhead_reduction(coloring: Coloring, m: int) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    return coloring.m_tr / m


def validate_coloring(g: ConflictGraph, c: Coloring) -> tuple[bool, list[tuple[int, int]]]:
    """Check properness; returns ``(ok, violating_edges)``."""
    if not np.array_equal(np.sort(c.vertices), g.vertices):
        raise ValueError("coloring and graph have different vertex sets")
    bad = [(i, j) for i, j in g.edges() if c.colors[i] == c.colors[j]]
    return not bad, bad
