"""Background grid, level-set interface and the cut-cell grid built from them."""
from __future__ import annotations

import bisect
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError

SPECIES_A = "A"  # upstream side, phi < 0
SPECIES_B = "B"  # downstream side, phi > 0


@dataclass(frozen=True)
class BackgroundGrid:
    nodes: tuple[float, ...]

    def __post_init__(self):
        n = np.asarray(self.nodes, dtype=float)
        if n.ndim != 1 or n.size < 2 or np.any(np.diff(n) <= 0):
            raise ConfigurationError("grid nodes must be strictly increasing, at least two")

    @property
    def x_left(self) -> float:
        return self.nodes[0]

    @property
    def x_right(self) -> float:
        return self.nodes[-1]

    @property
    def num_cells(self) -> int:
        return len(self.nodes) - 1

    @property
    def h(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def cell(self, j: int) -> tuple[float, float]:
        return self.nodes[j], self.nodes[j + 1]

    def locate(self, x: float) -> int:
        """Index of the cell containing ``x``; nodes belong to the cell on their right."""
        j = bisect.bisect_right(self.nodes, x) - 1
        return min(max(j, 0), self.num_cells - 1)


def build_grid(x_left: float, x_right: float, num_cells: int) -> BackgroundGrid:
    if not (isinstance(num_cells, (int, np.integer)) and num_cells >= 1):
        raise ConfigurationError(f"need at least one cell, got {num_cells}")
    if not x_left < x_right:
        raise ConfigurationError(f"degenerate domain ({x_left}, {x_right})")
    # one division per node keeps nodes such as 0.3 or 0.6 correctly rounded
    nodes = [(x_left * (num_cells - j) + x_right * j) / num_cells for j in range(num_cells + 1)]
    return BackgroundGrid(tuple(float(v) for v in nodes))


@dataclass(frozen=True)
class LevelSet:
    x_interface: float

    def __call__(self, x):
        return np.asarray(x, dtype=float) - self.x_interface


@dataclass(frozen=True)
class CutCell:
    """One element of the cut-cell grid: background cell ``j`` restricted to ``species``."""

    j: int
    species: str
    a: float
    b: float

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class EdgeSet:
    interior: tuple[float, ...]
    dirichlet: tuple[float, ...]
    interface: float | None

    def normal(self, x: float) -> float:
        return -1.0 if x == self.dirichlet[0] else 1.0


@dataclass(frozen=True)
class CutCellGrid:
    background: BackgroundGrid
    level_set: LevelSet
    cut_cell_index: int | None
    cells: tuple[CutCell, ...]

    @property
    def x_interface(self) -> float:
        return self.level_set.x_interface

    def occupancy(self, j: int) -> str:
        if j == self.cut_cell_index:
            return "cut"
        return SPECIES_A if self.background.nodes[j + 1] <= self.x_interface else SPECIES_B

    def volume_fractions(self) -> tuple[float, float] | None:
        if self.cut_cell_index is None:
            return None
        a, b = self.background.cell(self.cut_cell_index)
        x = self.x_interface
        return (x - a) / (b - a), (b - x) / (b - a)

    def element_index(self, j: int, species: str) -> int:
        for k, c in enumerate(self.cells):
            if c.j == j and c.species == species:
                return k
        raise KeyError(f"no non-empty cut-cell ({j}, {species})")

    @cached_property
    def cut_elements(self) -> tuple[int, int] | None:
        if self.cut_cell_index is None:
            return None
        j = self.cut_cell_index
        return self.element_index(j, SPECIES_A), self.element_index(j, SPECIES_B)

    @cached_property
    def bounds(self) -> tuple[float, ...]:
        return tuple(c.a for c in self.cells) + (self.cells[-1].b,)

    def locate(self, x: float, side: str = "right") -> int:
        """Element holding ``x``; at a shared endpoint ``side`` picks the left or right one."""
        if side == SPECIES_A:
            side = "left"
        elif side == SPECIES_B:
            side = "right"
        if side == "left":
            k = bisect.bisect_left(self.bounds, x) - 1
        else:
            k = bisect.bisect_right(self.bounds, x) - 1
        return min(max(k, 0), len(self.cells) - 1)

    def edges(self) -> EdgeSet:
        nodes = self.background.nodes
        interior = tuple(nodes[1:-1])
        iface = self.x_interface if self.cut_cell_index is not None else None
        return EdgeSet(interior, (nodes[0], nodes[-1]), iface)


def cut(grid: BackgroundGrid, ls: LevelSet) -> CutCellGrid:
    x = ls.x_interface
    if not grid.x_left < x < grid.x_right:
        raise ConfigurationError(f"interface {x} outside the open domain")
    nodes = grid.nodes
    cells = []
    cut_index = None
    for j in range(grid.num_cells):
        a, b = nodes[j], nodes[j + 1]
        if b <= x:
            cells.append(CutCell(j, SPECIES_A, a, b))
        elif a >= x:
            cells.append(CutCell(j, SPECIES_B, a, b))
        else:
            cut_index = j
            cells.append(CutCell(j, SPECIES_A, a, x))
            cells.append(CutCell(j, SPECIES_B, x, b))
    return CutCellGrid(grid, ls, cut_index, tuple(cells))


def well_placed(cg: CutCellGrid, delta_agg: float = 0.3) -> bool:
    fractions = cg.volume_fractions()
    if fractions is None:
        return True
    # tolerance absorbs rounding in e.g. (0.6 - 0.57) / 0.1
    tol = 64 * np.finfo(float).eps
    return all(f >= delta_agg - tol for f in fractions)


@dataclass(frozen=True)
class NearBand:
    upstream: tuple[int, ...]
    downstream: tuple[int, ...]
    partial: bool

    @property
    def cells(self) -> tuple[int, ...]:
        return self.upstream + self.downstream


def near_band(cg: CutCellGrid, width: int = 1) -> NearBand:
    """Background cells within ``width`` of the cut cell, split by side."""
    if cg.cut_cell_index is None:
        raise ConfigurationError("near band requires a cut cell")
    if width < 1:
        raise ConfigurationError(f"near-band width must be >= 1, got {width}")
    j = cg.cut_cell_index
    J = cg.background.num_cells
    up = tuple(k for k in range(j - width, j) if k >= 0)
    down = tuple(k for k in range(j + 1, j + 1 + width) if k < J)
    partial = len(up) < width or len(down) < width
    if partial:
        warnings.warn(f"near band of cut cell {j} truncated by the domain boundary", stacklevel=2)
    return NearBand(up, down, partial)
