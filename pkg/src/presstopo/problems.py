"""Benchmark problem definitions and a builder for custom rectangular problems.

A :class:`ProblemSpec` fully describes one optimization run: mesh size,
optimizer parameters, flow and material parameters, pressure and
displacement boundary conditions and the non-design element sets.

Custom problems are described by a JSON-compatible dictionary::

    {
      "name": "bracket", "nelx": 60, "nely": 30,
      "volfrac": 0.3, "penal": 3, "rmin": 2.4,
      "etaf": 0.2, "betaf": 8, "lst": 1, "maxit": 100,
      "flow": {"Kv": 1.0, "epsf": 1e-7, "r": 0.1, "Dels": 2.0, "Pin": 1.0},
      "material": {"E0": 1.0, "Emin": 1e-9, "nu": 0.3},
      "pressure": [{"select": {"edge": "left"}, "value": 0},
                   {"select": {"edge": "bottom"}, "value": "Pin"}],
      "supports": [{"select": {"nodes": [0, 30]}, "dirs": "xy"}],
      "nds": [{"rows": [0, 2], "cols": [0, 60]}],
      "ndv": []
    }

Pressure entries are applied in order, later ones overwriting earlier ones.
A node selector is one of ``{"edge": "left"|"right"|"top"|"bottom"}``,
``{"nodes": [...]}`` (0-based node ids), ``{"element_nodes": <region>}``
(all nodes of the elements in a region) or ``{"ndv_nodes": true}``.  A
region is ``{"rows": [r0, r1], "cols": [c0, c1]}`` (half-open, 0-based, row
0 at the top) or ``{"elements": [...]}``.  ``nds``/``ndv`` are lists of
regions.  Omitted scalar keys take the defaults of :class:`ProblemSpec`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .darcy import FlowParams, PressureBC
from .elasticity import MaterialParams
from .mesh import ActiveSets, DofMaps, build_mesh

PROBLEMS = ("arch", "piston", "chamber")
EDGES = ("left", "right", "top", "bottom")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Immutable description of a pressure-loaded compliance problem.

    ``penal``, ``etaf`` and ``betaf`` are stored once, inside ``material``
    and ``flow``, and exposed here as read-only properties.
    """

    name: str
    nelx: int
    nely: int
    volfrac: float
    rmin: float
    lst: int
    maxit: int
    flow: FlowParams
    material: MaterialParams
    pressure_bc: PressureBC
    fixed_u_dofs: np.ndarray
    active: ActiveSets
    mvlt: float = 0.1
    dofs: DofMaps = field(default=None, repr=False)

    def __post_init__(self):
        if self.dofs is None:
            object.__setattr__(self, "dofs", build_mesh(self.nelx, self.nely)[1])
        fixed = np.unique(np.asarray(self.fixed_u_dofs, dtype=np.int64))
        fixed.flags.writeable = False
        object.__setattr__(self, "fixed_u_dofs", fixed)
        validate(self)

    @property
    def penal(self) -> float:
        return self.material.penal

    @property
    def etaf(self) -> float:
        return self.flow.etaf

    @property
    def betaf(self) -> float:
        return self.flow.betaf

    @property
    def nel(self) -> int:
        return self.nelx * self.nely

    def __eq__(self, other):
        if not isinstance(other, ProblemSpec):
            return NotImplemented
        scalars = ("name", "nelx", "nely", "volfrac", "rmin", "lst", "maxit", "flow", "material", "mvlt")
        return (
            all(getattr(self, k) == getattr(other, k) for k in scalars)
            and self.pressure_bc == other.pressure_bc
            and np.array_equal(self.fixed_u_dofs, other.fixed_u_dofs)
            and self.active == other.active
        )

    def initial_design(self) -> np.ndarray:
        """Uniform start on the design elements that meets the volume target exactly."""
        act = self.active
        x = np.zeros(self.nel)
        x0 = (self.volfrac * self.nel - act.nds.size) / act.act.size
        x[act.act] = x0
        x[act.nds] = 1.0
        return x


def _rigid_modes_removed(fixed, dofs: DofMaps) -> bool:
    """True if the fixed DOFs restrain the two translations and the rotation."""
    if fixed.size == 0:
        return False
    xy = dofs.node_coords()
    node, comp = np.divmod(fixed, 2)
    modes = np.zeros((fixed.size, 3))
    modes[:, 0] = comp == 0
    modes[:, 1] = comp == 1
    modes[:, 2] = np.where(comp == 0, -xy[node, 1], xy[node, 0])
    return np.linalg.matrix_rank(modes) == 3


def validate(spec: ProblemSpec) -> None:
    if not 0 < spec.volfrac < 1:
        raise ValueError(f"volfrac must lie in (0, 1), got {spec.volfrac}")
    if isinstance(spec.maxit, bool) or not isinstance(spec.maxit, (int, np.integer)) or spec.maxit < 0:
        raise ValueError(f"maxit must be a non-negative integer, got {spec.maxit!r}")
    if spec.lst not in (0, 1):
        raise ValueError(f"lst must be 0 or 1, got {spec.lst!r}")
    if not spec.rmin > 0:
        raise ValueError(f"rmin must be positive, got {spec.rmin}")
    if not 0 < spec.mvlt <= 1:
        raise ValueError(f"move limit must lie in (0, 1], got {spec.mvlt}")
    dofs = spec.dofs
    if (dofs.mesh.nelx, dofs.mesh.nely) != (spec.nelx, spec.nely):
        raise ValueError("dof maps do not match the mesh size")
    nno = dofs.mesh.nno
    fixed = spec.fixed_u_dofs
    if fixed.size and (fixed.min() < 0 or fixed.max() >= 2 * nno):
        raise ValueError("fixed displacement DOF out of range")
    if not _rigid_modes_removed(fixed, dofs):
        raise ValueError("displacement supports do not remove all rigid-body modes")
    bc = spec.pressure_bc
    if bc.nodes.size == 0:
        raise ValueError("no prescribed pressure nodes")
    if bc.nodes.min() < 0 or bc.nodes.max() >= nno:
        raise ValueError("pressure BC node out of range")
    if not np.all(np.isin(bc.values, (0.0, spec.flow.Pin))):
        raise ValueError("pressure BC values must be 0 or Pin")
    act = spec.active
    n_all = act.nds.size + act.ndv.size + act.act.size
    if n_all != spec.nel or (act.act.size and act.act.max() >= spec.nel):
        raise ValueError("active sets do not partition the elements")
    x0 = (spec.volfrac * spec.nel - act.nds.size) / act.act.size
    if not 0 <= x0 <= 1:
        raise ValueError(
            f"volume target {spec.volfrac} is unreachable with {act.nds.size} solid "
            f"and {act.ndv.size} void non-design elements"
        )


def _udofs(nodes, dirs="xy"):
    nodes = np.asarray(nodes, dtype=np.int64).ravel()
    parts = []
    if "x" in dirs:
        parts.append(2 * nodes)
    if "y" in dirs:
        parts.append(2 * nodes + 1)
    return np.concatenate(parts)


def _spec(name, nelx, nely, volfrac, penal, rmin, etaf, betaf, lst, maxit, dofs, pressure, fixed,
          nds=(), ndv=(), flow=None, material=None, mvlt=0.1):
    flow = replace(flow or FlowParams(), etaf=float(etaf), betaf=float(betaf))
    material = replace(material or MaterialParams(), penal=float(penal))
    return ProblemSpec(
        name=name, nelx=nelx, nely=nely, volfrac=float(volfrac), rmin=float(rmin), lst=int(lst),
        maxit=int(maxit), flow=flow, material=material,
        pressure_bc=PressureBC.from_assignments(dofs.mesh.nno, [(n, v * flow.Pin) for n, v in pressure]),
        fixed_u_dofs=fixed,
        active=ActiveSets.from_non_design(nelx * nely, nds, ndv),
        mvlt=mvlt, dofs=dofs,
    )


def make_arch(nelx=200, nely=100, volfrac=0.30, penal=3.0, rmin=2.4, etaf=0.2, betaf=8.0, lst=1,
              maxit=100, side_pressure_zero=True) -> ProblemSpec:
    """Arch: pressure loading from the bottom edge, both bottom corners pinned.

    With ``side_pressure_zero`` the top, left and right edges are held at
    zero pressure; otherwise only the top edge is, and the sides are
    impermeable.
    """
    _, d = build_mesh(nelx, nely)
    zero = [d.tnode, d.lnode, d.rnode] if side_pressure_zero else [d.tnode]
    pressure = [(np.concatenate(zero), 0.0), (d.bnode, 1.0)]
    fixed = _udofs([d.bnode[0], d.bnode[-1]])
    return _spec("arch", nelx, nely, volfrac, penal, rmin, etaf, betaf, lst, maxit, d, pressure, fixed)


def make_piston(nelx=300, nely=100, volfrac=0.20, penal=3.0, rmin=2.4, etaf=0.1, betaf=8.0, lst=1,
                maxit=150) -> ProblemSpec:
    """Piston: pressure on the top edge, zero pressure on the bottom edge.

    The left and right edges are on rollers (x fixed) and one bottom node
    near the middle is pinned.
    """
    _, d = build_mesh(nelx, nely)
    pressure = [(d.bnode, 0.0), (d.tnode, 1.0)]
    mid = d.bnode[math.ceil((nelx + 1) / 2)] if nelx > 1 else d.bnode[-1]
    fixed = np.concatenate([_udofs([mid]), _udofs(d.lnode, "x"), _udofs(d.rnode, "x")])
    return _spec("piston", nelx, nely, volfrac, penal, rmin, etaf, betaf, lst, maxit, d, pressure, fixed)


def chamber_regions(nelx: int, nely: int, dofs: DofMaps | None = None):
    """Non-design solid and void element sets and the wall nodes of the chamber."""
    if dofs is None:
        _, dofs = build_mesh(nelx, nely)
    e = dofs.elem_grid
    c0 = max(2 * nelx // 3 - 1, 0)
    s1 = e[max(3 * nely // 8 - 1, 0): 17 * nely // 40, c0:nelx]
    s2 = e[max(23 * nely // 40 - 1, 0): 5 * nely // 8, c0:nelx]
    v1 = e[max(17 * nely // 40 - 1, 0):, max(7 * nelx // 15 - 1, 0): 8 * nelx // 15]
    v2 = e[max(17 * nely // 40 - 1, 0): 23 * nely // 40, max(8 * nelx // 15 - 1, 0):nelx]
    s1fix = e[max(3 * nely // 8 - 1, 0): 17 * nely // 40, nelx - 1]
    s2fix = e[max(23 * nely // 40 - 1, 0): 25 * nely // 40, nelx - 1]
    nds = np.concatenate([s1.ravel(order="F"), s2.ravel(order="F")])
    ndv = np.concatenate([v1.ravel(order="F"), v2.ravel(order="F")])
    wall = np.unique(dofs.p_dofs[np.concatenate([s1fix, s2fix])])
    return nds, ndv, wall


def make_chamber(nelx=300, nely=200, volfrac=0.20, penal=3.0, rmin=6.0, etaf=0.1, betaf=10.0, lst=1,
                 maxit=200) -> ProblemSpec:
    """Pressure chamber: a void inlet region feeding a cavity bounded by solid strips.

    The void regions and the bottom edge carry the input pressure, the
    other edges are at zero pressure.  Both bottom corners and the nodes of
    the strip ends on the right edge are fixed.
    """
    _, d = build_mesh(nelx, nely)
    nds, ndv, wall = chamber_regions(nelx, nely, d)
    # The strips share one row with the inlet block on each side; the void wins there.
    nds = np.setdiff1d(nds, ndv)
    pressure = [
        (np.concatenate([d.tnode, d.lnode, d.rnode]), 0.0),
        (np.concatenate([np.unique(d.p_dofs[ndv]), d.bnode]), 1.0),
    ]
    fixed = np.concatenate([_udofs([d.bnode[0]]), _udofs([d.bnode[-1]]), _udofs(wall)])
    return _spec("chamber", nelx, nely, volfrac, penal, rmin, etaf, betaf, lst, maxit, d, pressure, fixed,
                 nds=nds, ndv=ndv)


BUILDERS = {"arch": make_arch, "piston": make_piston, "chamber": make_chamber}


def make_problem(name: str, **overrides) -> ProblemSpec:
    """Build a named benchmark, passing scalar ``overrides`` to its builder."""
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; available: {', '.join(PROBLEMS)}") from None
    return builder(**{k: v for k, v in overrides.items() if v is not None})


# --- custom problems -------------------------------------------------------

SCALAR_KEYS = {
    "nelx": int, "nely": int, "volfrac": float, "penal": float, "rmin": float,
    "etaf": float, "betaf": float, "lst": int, "maxit": int, "mvlt": float,
}
SCALAR_DEFAULTS = {"penal": 3.0, "rmin": 2.4, "etaf": 0.2, "betaf": 8.0, "lst": 1, "maxit": 100, "mvlt": 0.1}
CONFIG_KEYS = set(SCALAR_KEYS) | {"name", "flow", "material", "pressure", "supports", "nds", "ndv"}


def _typed(key, value, kind):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{key} must be a number, got {value!r}")
    if kind is int and float(value) != int(value):
        raise ValueError(f"{key} must be an integer, got {value!r}")
    return kind(value)


def _region(region, dofs: DofMaps) -> np.ndarray:
    nely, nelx = dofs.elem_grid.shape
    if "elements" in region:
        idx = np.asarray(region["elements"], dtype=np.int64).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= nely * nelx):
            raise ValueError("region element index out of range")
        return idx
    try:
        (r0, r1), (c0, c1) = region["rows"], region["cols"]
    except (KeyError, TypeError, ValueError):
        raise ValueError(f"invalid region {region!r}") from None
    if not (0 <= r0 < r1 <= nely and 0 <= c0 < c1 <= nelx):
        raise ValueError(f"region {region!r} outside the {nely}x{nelx} element grid")
    return dofs.elem_grid[r0:r1, c0:c1].ravel(order="F")


def _nodes(select, dofs: DofMaps, ndv) -> np.ndarray:
    if not isinstance(select, dict) or len(select) != 1:
        raise ValueError(f"node selector must have exactly one key, got {select!r}")
    (kind, arg), = select.items()
    if kind == "edge":
        if arg not in EDGES:
            raise ValueError(f"unknown edge {arg!r}; expected one of {EDGES}")
        return {"left": dofs.lnode, "right": dofs.rnode, "top": dofs.tnode, "bottom": dofs.bnode}[arg]
    if kind == "nodes":
        idx = np.asarray(arg, dtype=np.int64).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= dofs.mesh.nno):
            raise ValueError("node index out of range")
        return idx
    if kind == "element_nodes":
        return np.unique(dofs.p_dofs[_region(arg, dofs)])
    if kind == "ndv_nodes":
        return np.unique(dofs.p_dofs[ndv]) if ndv.size else np.zeros(0, dtype=np.int64)
    raise ValueError(f"unknown node selector {kind!r}")


def build_custom(config: dict) -> ProblemSpec:
    """Build and validate a :class:`ProblemSpec` from a configuration mapping."""
    if not isinstance(config, dict):
        raise ValueError("problem config must be a mapping")
    unknown = set(config) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in ("nelx", "nely", "volfrac", "pressure", "supports"):
        if key not in config:
            raise ValueError(f"config is missing required key {key!r}")
    s = {**SCALAR_DEFAULTS}
    for key, kind in SCALAR_KEYS.items():
        if key in config:
            s[key] = _typed(key, config[key], kind)
    try:
        flow = FlowParams(**config.get("flow", {}))
        material = MaterialParams(**config.get("material", {}))
    except TypeError as exc:
        raise ValueError(f"invalid flow/material parameters: {exc}") from None

    _, d = build_mesh(s["nelx"], s["nely"])
    nds = np.concatenate([_region(r, d) for r in config.get("nds", [])] or [np.zeros(0, np.int64)])
    ndv = np.concatenate([_region(r, d) for r in config.get("ndv", [])] or [np.zeros(0, np.int64)])
    if np.intersect1d(nds, ndv).size:
        raise ValueError("non-design solid and void regions overlap")

    pressure = []
    for entry in config["pressure"]:
        value = entry.get("value")
        if value == "Pin":
            level = 1.0
        elif value in (0, 0.0) and not isinstance(value, bool):
            level = 0.0
        elif isinstance(value, (int, float)) and not isinstance(value, bool) and value == flow.Pin:
            level = 1.0
        else:
            raise ValueError(f"pressure value must be 0 or 'Pin', got {value!r}")
        pressure.append((_nodes(entry.get("select"), d, np.unique(ndv)), level))

    fixed = []
    for entry in config["supports"]:
        dirs = entry.get("dirs", "xy")
        if dirs not in ("x", "y", "xy"):
            raise ValueError(f"support dirs must be 'x', 'y' or 'xy', got {dirs!r}")
        fixed.append(_udofs(_nodes(entry.get("select"), d, np.unique(ndv)), dirs))
    fixed = np.concatenate(fixed) if fixed else np.zeros(0, dtype=np.int64)

    return _spec(
        str(config.get("name", "custom")), s["nelx"], s["nely"], s["volfrac"], s["penal"], s["rmin"],
        s["etaf"], s["betaf"], s["lst"], s["maxit"], d, pressure, fixed, nds=nds, ndv=ndv,
        flow=flow, material=material, mvlt=s["mvlt"],
    )


def spec_to_config(spec: ProblemSpec) -> dict:
    """Explicit configuration that :func:`build_custom` maps back to ``spec``."""
    flow = {f.name: getattr(spec.flow, f.name) for f in fields(spec.flow) if f.name not in ("etaf", "betaf")}
    material = {f.name: getattr(spec.material, f.name) for f in fields(spec.material) if f.name != "penal"}
    bc = spec.pressure_bc
    fixed = spec.fixed_u_dofs
    return {
        "name": spec.name,
        "nelx": spec.nelx, "nely": spec.nely, "volfrac": spec.volfrac, "penal": spec.penal,
        "rmin": spec.rmin, "etaf": spec.etaf, "betaf": spec.betaf, "lst": spec.lst,
        "maxit": spec.maxit, "mvlt": spec.mvlt,
        "flow": flow, "material": material,
        "pressure": [
            {"select": {"nodes": bc.nodes[bc.values == 0].tolist()}, "value": 0},
            {"select": {"nodes": bc.nodes[bc.values != 0].tolist()}, "value": "Pin"},
        ],
        "supports": [
            {"select": {"nodes": (fixed[fixed % 2 == 0] // 2).tolist()}, "dirs": "x"},
            {"select": {"nodes": (fixed[fixed % 2 == 1] // 2).tolist()}, "dirs": "y"},
        ],
        "nds": [{"elements": spec.active.nds.tolist()}] if spec.active.nds.size else [],
        "ndv": [{"elements": spec.active.ndv.tolist()}] if spec.active.ndv.size else [],
    }
