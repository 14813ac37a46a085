"""Structured grid of unit square bilinear elements.

Numbering follows the column-major convention of the classic educational
topology optimization codes: node indices run down each column of the grid
(row index grows downward, i.e. towards the bottom edge), and element
``(row r, col c)`` has index ``c * nely + r``.  All indices are 0-based;
the 1-based node ``n`` of a MATLAB-style listing is node ``n - 1`` here and
its displacement DOFs ``2n - 1, 2n`` become ``2(n - 1), 2(n - 1) + 1``.

Element-local node order is counterclockwise with ``y`` pointing up::

    TL(3) ---- TR(2)
      |          |
    BL(0) ---- BR(1)

so local coordinates are BL=(0, 0), BR=(1, 0), TR=(1, 1), TL=(0, 1).  The
element matrices in :mod:`presstopo.darcy` and :mod:`presstopo.elasticity`
are built against this order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Local node coordinates in the counterclockwise order documented above.
LOCAL_NODE_COORDS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@dataclass(frozen=True)
class GridMesh:
    nelx: int
    nely: int

    def __post_init__(self):
        for name in ("nelx", "nely"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    @property
    def nel(self) -> int:
        return self.nelx * self.nely

    @property
    def nno(self) -> int:
        return (self.nelx + 1) * (self.nely + 1)

    @property
    def shape(self) -> tuple[int, int]:
        """Element-field shape ``(nely, nelx)`` used for images and filtering."""
        return (self.nely, self.nelx)


@dataclass(frozen=True, eq=False)
class DofMaps:
    """Index bookkeeping for pressure (1 per node) and displacement (2 per node) DOFs.

    Attributes
    ----------
    mesh : GridMesh
    node_grid : ndarray, shape (nely + 1, nelx + 1)
        Node index at each grid position.
    elem_grid : ndarray, shape (nely, nelx)
        Element index at each grid position.
    p_dofs : ndarray, shape (nel, 4)
        Pressure DOFs (= node indices) of each element, local order BL, BR, TR, TL.
    u_dofs : ndarray, shape (nel, 8)
        Displacement DOFs of each element, ``(x, y)`` pairs in the same node order.
    lnode, rnode, bnode, tnode : ndarray
        Nodes on the left, right, bottom and top edges.  Left/right lists run
        top to bottom, bottom/top lists run left to right.
    """

    mesh: GridMesh
    node_grid: np.ndarray
    elem_grid: np.ndarray
    p_dofs: np.ndarray
    u_dofs: np.ndarray
    lnode: np.ndarray
    rnode: np.ndarray
    bnode: np.ndarray
    tnode: np.ndarray

    @property
    def all_p_dofs(self) -> np.ndarray:
        return np.arange(self.mesh.nno)

    @property
    def all_u_dofs(self) -> np.ndarray:
        return np.arange(2 * self.mesh.nno)

    @cached_property
    def p_pattern(self) -> tuple[np.ndarray, np.ndarray]:
        """Row/column indices of the 16 entries per element of the flow matrix."""
        return _pattern(self.p_dofs, self.p_dofs)

    @cached_property
    def u_pattern(self) -> tuple[np.ndarray, np.ndarray]:
        """Row/column indices of the 64 entries per element of the stiffness matrix."""
        return _pattern(self.u_dofs, self.u_dofs)

    @cached_property
    def t_pattern(self) -> tuple[np.ndarray, np.ndarray]:
        """Row/column indices of the 8x4 entries per element of the transformation matrix."""
        return _pattern(self.u_dofs, self.p_dofs)

    def node_coords(self) -> np.ndarray:
        """Physical ``(x, y)`` of every node, with ``y = 0`` on the bottom edge."""
        nely = self.mesh.nely
        n = np.arange(self.mesh.nno)
        col, row = np.divmod(n, nely + 1)
        return np.column_stack([col, nely - row]).astype(float)


def _pattern(row_dofs, col_dofs):
    # Per element, entries in row-major order of the element matrix.
    nr, nc = row_dofs.shape[1], col_dofs.shape[1]
    rows = np.repeat(row_dofs, nc, axis=1).ravel()
    cols = np.tile(col_dofs, (1, nr)).ravel()
    return rows, cols


def build_mesh(nelx: int, nely: int) -> tuple[GridMesh, DofMaps]:
    mesh = GridMesh(nelx, nely)
    node_grid = np.arange(mesh.nno).reshape(nelx + 1, nely + 1).T
    elem_grid = np.arange(mesh.nel).reshape(nelx, nely).T

    # Element grid positions in element-index order (column-major).
    col, row = np.divmod(np.arange(mesh.nel), nely)
    bl = node_grid[row + 1, col]
    br = node_grid[row + 1, col + 1]
    tr = node_grid[row, col + 1]
    tl = node_grid[row, col]
    p_dofs = np.column_stack([bl, br, tr, tl])
    u_dofs = np.empty((mesh.nel, 8), dtype=np.int64)
    u_dofs[:, 0::2] = 2 * p_dofs
    u_dofs[:, 1::2] = 2 * p_dofs + 1

    dofs = DofMaps(
        mesh=mesh,
        node_grid=node_grid,
        elem_grid=elem_grid,
        p_dofs=p_dofs,
        u_dofs=u_dofs,
        lnode=node_grid[:, 0].copy(),
        rnode=node_grid[:, -1].copy(),
        bnode=node_grid[-1, :].copy(),
        tnode=node_grid[0, :].copy(),
    )
    for arr in (node_grid, elem_grid, p_dofs, u_dofs):
        arr.flags.writeable = False
    return mesh, dofs


@dataclass(frozen=True, eq=False)
class ActiveSets:
    """Partition of elements into non-design solid, non-design void and design elements."""

    nds: np.ndarray
    ndv: np.ndarray
    act: np.ndarray

    @classmethod
    def from_non_design(cls, nel: int, nds=(), ndv=()) -> "ActiveSets":
        nds = np.unique(np.asarray(nds, dtype=np.int64))
        ndv = np.unique(np.asarray(ndv, dtype=np.int64))
        for name, idx in (("NDS", nds), ("NDV", ndv)):
            if idx.size and (idx.min() < 0 or idx.max() >= nel):
                raise ValueError(f"{name} element index out of range [0, {nel})")
        if np.intersect1d(nds, ndv).size:
            raise ValueError("non-design solid and void regions overlap")
        act = np.setdiff1d(np.arange(nel), np.union1d(nds, ndv))
        if act.size == 0:
            raise ValueError("no design elements left after removing non-design regions")
        return cls(nds=nds, ndv=ndv, act=act)

    def __eq__(self, other):
        if not isinstance(other, ActiveSets):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in ("nds", "ndv", "act")
        )
