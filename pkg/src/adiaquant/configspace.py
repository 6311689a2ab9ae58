"""Flat CW configuration spaces.

Cells are labeled copies of R^n carrying an affine translation action
y -> y + Lambda x and the linear scaling y -> t y; 0-cells and boundary
spheres are fixed points of both actions.  The module supplies the built-in
spaces used by the model library (point, interface, disk, quarter-space,
infinite square), isotropy lattices with a bounded integer-kernel search,
covolumes, and oriented boundary loops of cells.

Sign convention: the action is y + Lambda x throughout.  (One of the
literature's interface examples uses y - x_1; that corresponds here to the
choice Lambda = -e_1.)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigError",
    "Cell",
    "ConfigPoint",
    "ConfigSpace",
    "BoundaryLoop",
    "builtin_space",
    "integer_kernel_basis",
    "smith_normal_form",
    "SATURATION",
]

# chart value at which tanh-type profiles are exactly saturated in float64
SATURATION = 20.0

KERNEL_HEIGHT = 32   # bounded integer search height for rationality
KERNEL_TOL = 1e-9


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# integer linear algebra


def smith_normal_form(mat):
    """U @ mat @ V = D with U, V unimodular and D diagonal.

    Plain euclidean reduction; fine for the tiny matrices that occur here.
    Returns (U, D, V) as integer arrays.
    """
    a = np.array(mat, dtype=np.int64, copy=True)
    m, n = a.shape
    u = np.eye(m, dtype=np.int64)
    v = np.eye(n, dtype=np.int64)
    t = 0
    while t < min(m, n):
        sub = a[t:, t:]
        if not sub.any():
            break
        # move the smallest nonzero entry to the pivot
        nz = np.argwhere(sub != 0)
        i, j = min(nz, key=lambda ij: abs(sub[ij[0], ij[1]]))
        i, j = i + t, j + t
        if i != t:
            a[[t, i]] = a[[i, t]]
            u[[t, i]] = u[[i, t]]
        if j != t:
            a[:, [t, j]] = a[:, [j, t]]
            v[:, [t, j]] = v[:, [j, t]]
        done = True
        for i in range(t + 1, m):
            q = a[i, t] // a[t, t]
            if q:
                a[i] -= q * a[t]
                u[i] -= q * u[t]
            if a[i, t]:
                done = False
        for j in range(t + 1, n):
            q = a[t, j] // a[t, t]
            if q:
                a[:, j] -= q * a[:, t]
                v[:, j] -= q * v[:, t]
            if a[t, j]:
                done = False
        if done:
            if a[t, t] < 0:
                a[t] = -a[t]
                u[t] = -u[t]
            t += 1
    return u, a, v


def _unimodular_inverse(m):
    inv = np.linalg.inv(m.astype(float))
    ri = np.rint(inv).astype(np.int64)
    if not np.array_equal(m @ ri, np.eye(len(m), dtype=np.int64)):
        raise ConfigError("matrix is not unimodular")
    return ri


def integer_kernel_basis(lam, height=KERNEL_HEIGHT, tol=KERNEL_TOL):
    """Primitive basis of ker(Lambda) intersected with Z^d.

    Bounded search: integer vectors with entries up to `height` are scanned;
    the lattice they generate is reduced to a basis via Smith normal form.
    Vectors outside the search box are missed by construction, which is the
    documented rationality test.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    d = lam.shape[1]
    scale = max(np.abs(lam).max(), 1.0)
    rng = np.arange(-height, height + 1)
    grids = np.meshgrid(*([rng] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    pts = pts[np.any(pts != 0, axis=1)]
    resid = np.abs(pts @ lam.T).max(axis=1)
    found = pts[resid <= tol * scale * height]
    if len(found) == 0:
        return []
    gen = found.T.astype(np.int64)  # d x K columns
    u, dmat, _ = smith_normal_form(gen)
    rank = int(np.count_nonzero([dmat[i, i] for i in range(min(dmat.shape))]))
    w = _unimodular_inverse(u)
    basis = []
    for i in range(rank):
        col = w[:, i] * dmat[i, i]
        # saturation: a kernel lattice built from all bounded vectors is
        # generated by primitive vectors, so d_i = 1; keep the product anyway
        basis.append(col)
    # normalize sign: first nonzero entry positive
    out = []
    for b in basis:
        nz = b[np.nonzero(b)[0][0]]
        out.append(b if nz > 0 else -b)
    return [np.asarray(b, dtype=np.int64) for b in out]


def lattice_decomposition(iso_basis, d):
    """Completion of a saturated isotropy basis to a unimodular frame.

    Returns (basis, completion, frame, frame_inv): `frame` has the
    completion columns first, then the isotropy columns, and is unimodular;
    any q in Z^d decomposes as q = frame @ (a, m).
    """
    r = len(iso_basis)
    if r == 0:
        frame = np.eye(d, dtype=np.int64)
        return [], [frame[:, i] for i in range(d)], frame, frame
    b = np.stack(iso_basis, axis=1).astype(np.int64)  # d x r
    u, dm, _ = smith_normal_form(b)
    diag = [dm[i, i] for i in range(min(dm.shape))]
    if any(abs(x) != 1 for x in diag[:r]):
        raise ConfigError("isotropy basis is not saturated/primitive")
    w = _unimodular_inverse(u)
    iso = [w[:, i] for i in range(r)]
    comp = [w[:, i] for i in range(r, d)]
    frame = np.stack(comp + iso, axis=1)
    return iso, comp, frame, _unimodular_inverse(frame)


# ---------------------------------------------------------------------------
# cells and spaces


@dataclass(frozen=True)
class Cell:
    id: str
    dim: int
    lam: tuple | None           # (dim x d) rows for flat cells, None for fixed
    kind: str = "flat"          # "flat" | "fixed"
    label: str = ""
    boundary: tuple = ()        # ids of the lower-dimensional closure cells
    chart_dim: int = 0          # number of chart coordinates

    def lam_array(self):
        return None if self.lam is None else np.asarray(self.lam, dtype=float)


@dataclass(frozen=True)
class ConfigPoint:
    cell: str
    coords: tuple = ()

    def coords_array(self):
        return np.asarray(self.coords, dtype=float)


@dataclass
class BoundaryLoop:
    """Oriented boundary of a 1- or 2-cell.

    For a 1-cell: `endpoints` lists (zero-cell id, sign), + at the
    y -> +infinity end.  For a 2-cell: `traversals` lists the two adjacent
    1-cells, the first traversed outward (from the shared "bulk" vertex to
    the "vacuum" vertex), the second inward.
    """

    cell: str
    endpoints: list = field(default_factory=list)
    traversals: list = field(default_factory=list)

    def sample(self, per_edge, scale=1.0, reverse=False):
        """Closed, uniformly parametrized ConfigPoint loop (2-cells only)."""
        if not self.traversals:
            raise ConfigError("sample() needs a 2-cell boundary loop")
        pts = []
        (first, _), (second, _) = self.traversals
        for i in range(per_edge):
            tau = 2.0 * i / per_edge
            pts.append(ConfigPoint(first, (_tau_to_chart(tau, scale),)))
        for i in range(per_edge):
            tau = 2.0 - 2.0 * i / per_edge
            pts.append(ConfigPoint(second, (_tau_to_chart(tau, scale),)))
        if reverse:
            pts = [pts[0]] + pts[1:][::-1]
        return pts


def _tau_to_chart(tau, scale):
    # inverse of the saturating profile tau = 1 + tanh(y/scale); the
    # endpoints land exactly on the attached 0-cell values in float64
    if tau <= 0.0:
        return -SATURATION * scale
    if tau >= 2.0:
        return SATURATION * scale
    return scale * np.arctanh(np.clip(tau - 1.0, -1 + 1e-15, 1 - 1e-15))


class ConfigSpace:
    """Immutable flat CW complex with translation and scaling actions."""

    def __init__(self, d, cells, loops=None, name=""):
        self.d = d
        self.name = name
        self.cells = {c.id: c for c in cells}
        self._loops = loops or {}
        self._iso_cache = {}
        for c in cells:
            for b in c.boundary:
                if b not in self.cells:
                    raise ConfigError(f"boundary cell {b} of {c.id} missing")
                if self.cells[b].dim >= c.dim:
                    raise ConfigError("boundary cell must have lower dimension")

    # -- bookkeeping

    def cell(self, cid):
        try:
            return self.cells[cid]
        except KeyError:
            raise ConfigError(f"no cell {cid!r} in space {self.name!r}")

    def skeleton(self, n):
        return [c.id for c in self.cells.values() if c.dim <= n]

    def cells_of_dim(self, n):
        return [c.id for c in self.cells.values() if c.dim == n]

    def point(self, cid, coords=()):
        cell = self.cell(cid)
        arr = np.atleast_1d(np.asarray(coords, dtype=float))
        coords = tuple(float(x) for x in arr.ravel())
        if len(coords) != cell.chart_dim:
            raise ConfigError(
                f"cell {cid} expects {cell.chart_dim} coordinates, got {len(coords)}"
            )
        if coords and not np.all(np.isfinite(coords)):
            raise ConfigError("non-finite chart coordinates")
        return ConfigPoint(cid, coords)

    # -- group actions

    def translate(self, point, x):
        cell = self.cell(point.cell)
        if cell.kind == "fixed" or cell.chart_dim == 0:
            return point
        x = np.asarray(x, dtype=float)
        y = point.coords_array() + cell.lam_array() @ x
        return ConfigPoint(point.cell, tuple(y))

    def scale(self, point, t):
        if t <= 0:
            raise ConfigError("scale factor must be positive")
        cell = self.cell(point.cell)
        if cell.kind == "fixed" or cell.chart_dim == 0:
            return point
        return ConfigPoint(point.cell, tuple(t * point.coords_array()))

    # -- lattice data

    def isotropy_lattice(self, cid, height=KERNEL_HEIGHT):
        """Primitive basis of the isotropy group of the cell's points."""
        cell = self.cell(cid)
        if cell.kind == "fixed":
            return [np.eye(self.d, dtype=np.int64)[i] for i in range(self.d)]
        key = (cid, height)
        if key not in self._iso_cache:
            basis = integer_kernel_basis(cell.lam_array(), height=height)
            if len(basis) != self.d - cell.dim:
                raise ConfigError(
                    f"cell {cid} is not rational at height {height}: found "
                    f"{len(basis)} kernel vectors, expected {self.d - cell.dim}"
                )
            self._iso_cache[key] = basis
        return self._iso_cache[key]

    def is_rational(self, cid, height=KERNEL_HEIGHT):
        try:
            self.isotropy_lattice(cid, height=height)
            return True
        except ConfigError:
            return False

    def transversal_frame(self, cid):
        """(iso_basis, completion, frame, frame_inv) for a rational cell."""
        basis = self.isotropy_lattice(cid)
        return lattice_decomposition(basis, self.d)

    def covolume(self, cid):
        """Fundamental-domain volume of Lambda . Z^d inside the cell chart."""
        cell = self.cell(cid)
        if cell.kind == "fixed" or cell.dim == 0:
            raise ConfigError("covolume needs a flat cell of dimension >= 1")
        _, comp, _, _ = self.transversal_frame(cid)
        w = cell.lam_array() @ np.stack(comp, axis=1).astype(float)
        return abs(np.linalg.det(w))

    # -- boundary data

    def boundary_loop(self, cid):
        cell = self.cell(cid)
        if cell.dim == 1:
            if cid not in self._loops:
                raise ConfigError(f"no boundary data for 1-cell {cid}")
            return BoundaryLoop(cell=cid, endpoints=list(self._loops[cid]))
        if cell.dim == 2:
            if cid not in self._loops:
                raise ConfigError(f"no boundary data for 2-cell {cid}")
            return BoundaryLoop(cell=cid, traversals=list(self._loops[cid]))
        raise ConfigError("boundary_loop is defined for 1- and 2-cells")


# ---------------------------------------------------------------------------
# built-in spaces


def _unit_rows(*vecs):
    return tuple(tuple(float(x) for x in v) for v in vecs)


def builtin_space(name, **params):
    """Construct one of the built-in configuration spaces.

    point | interface(lam) | disk(n, lam) | quarter(lam1, lam2) |
    infinite_square(lams = 4 vectors).
    """
    if name == "point":
        d = params.get("d", 1)
        return ConfigSpace(d, [Cell("pt", 0, None, "fixed", "point")], name="point")

    if name == "interface":
        lam = np.asarray(params["lam"], dtype=float)
        d = lam.size
        if not lam.any():
            raise ConfigError("interface normal must be nonzero")
        cells = [
            Cell("line", 1, _unit_rows(lam), "flat", "interface line",
                 boundary=("plus", "minus"), chart_dim=1),
            Cell("plus", 0, None, "fixed", "+infinity"),
            Cell("minus", 0, None, "fixed", "-infinity"),
        ]
        loops = {"line": [("plus", +1), ("minus", -1)]}
        return ConfigSpace(d, cells, loops, name="interface")

    if name == "disk":
        n = params["n"]
        lam = np.atleast_2d(np.asarray(params["lam"], dtype=float))
        d = lam.shape[1]
        if lam.shape[0] != n or np.linalg.matrix_rank(lam) != n:
            raise ConfigError("disk needs a full-rank n x d Lambda")
        if n == 1:
            cells = [
                Cell("disk", 1, _unit_rows(*lam), "flat", "1-cell",
                     boundary=("plus", "minus"), chart_dim=1),
                Cell("plus", 0, None, "fixed", "+end"),
                Cell("minus", 0, None, "fixed", "-end"),
            ]
            loops = {"disk": [("plus", +1), ("minus", -1)]}
            return ConfigSpace(d, cells, loops, name="disk1")
        if n == 2:
            cells = [
                Cell("disk", 2, _unit_rows(*lam), "flat", "2-cell",
                     boundary=("sphere",), chart_dim=2),
                Cell("sphere", 1, None, "fixed", "boundary circle", chart_dim=1),
            ]
            return ConfigSpace(d, cells, {}, name="disk2")
        raise ConfigError("disk implemented for n in {1, 2}")

    if name == "quarter":
        lam1 = np.asarray(params["lam1"], dtype=float)
        lam2 = np.asarray(params["lam2"], dtype=float)
        d = lam1.size
        if np.linalg.matrix_rank(np.stack([lam1, lam2])) != 2:
            raise ConfigError("quarter needs independent normals")
        cells = [
            Cell("corner", 2, _unit_rows(lam1, lam2), "flat", "corner 2-cell",
                 boundary=("edge1", "edge2", "bulk", "vac"), chart_dim=2),
            Cell("edge1", 1, _unit_rows(lam1), "flat", "half-space 1",
                 boundary=("bulk", "vac"), chart_dim=1),
            Cell("edge2", 1, _unit_rows(lam2), "flat", "half-space 2",
                 boundary=("bulk", "vac"), chart_dim=1),
            Cell("bulk", 0, None, "fixed", "interior bulk"),
            Cell("vac", 0, None, "fixed", "exterior"),
        ]
        loops = {
            "corner": [("edge1", +1), ("edge2", -1)],
            "edge1": [("vac", +1), ("bulk", -1)],
            "edge2": [("vac", +1), ("bulk", -1)],
        }
        space = ConfigSpace(d, cells, loops, name="quarter")
        for cid in ("corner", "edge1", "edge2"):
            space.isotropy_lattice(cid)  # rationality required up front
        return space

    if name == "infinite_square":
        lams = [np.asarray(v, dtype=float) for v in params["lams"]]
        if len(lams) != 4:
            raise ConfigError("infinite_square needs 4 normals")
        d = lams[0].size
        cells = [Cell("bulk", 0, None, "fixed", "interior bulk"),
                 Cell("vac", 0, None, "fixed", "exterior")]
        loops = {}
        for a in range(4):
            eid = f"edge{a + 1}"
            cells.append(Cell(eid, 1, _unit_rows(lams[a]), "flat",
                              f"half-space {a + 1}", boundary=("bulk", "vac"),
                              chart_dim=1))
            loops[eid] = [("vac", +1), ("bulk", -1)]
        for a in range(4):
            b = (a + 1) % 4
            cid = f"cell{a + 1}{b + 1}"
            cells.append(Cell(cid, 2, _unit_rows(lams[a], lams[b]), "flat",
                              f"quarter {a + 1},{b + 1}",
                              boundary=(f"edge{a + 1}", f"edge{b + 1}", "bulk", "vac"),
                              chart_dim=2))
            loops[cid] = [(f"edge{a + 1}", +1), (f"edge{b + 1}", -1)]
        space = ConfigSpace(d, cells, loops, name="infinite_square")
        for c in space.cells.values():
            if c.kind == "flat":
                space.isotropy_lattice(c.id)
        return space

    raise ConfigError(f"unknown built-in space {name!r}")
