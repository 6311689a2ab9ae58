"""Finite lattice realizations of symbols.

The matrix element between sites x and y of the quantization at scale t is

    1/2 ( f_{x-y}(t x |> w)  +  f_{y-x}(t y |> w)^dagger ),

which is the symmetrized representation of the symbol; covariance
(relabeling sites by z equals moving w by (t z)) holds exactly up to float
rounding.  Open directions drop out-of-range hops; periodic directions use
the minimal-image wrap and require L > 2 max|q|.  Bloch reduction along
isotropy directions produces momentum-fibered transverse operators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .configspace import ConfigError
from .linalg import SparseHermitian

__all__ = [
    "LatticeRegion",
    "LatticeHamiltonian",
    "BlochFamily",
    "quantize",
    "quantize_bloch",
    "covariance_check",
    "truncate_with_padding",
    "gap_bisect_t0",
]


@dataclass(frozen=True)
class LatticeRegion:
    """Axis-aligned lattice box: per-direction ('open'|'periodic', L)."""

    dims: tuple                       # e.g. (("open", 24), ("periodic", 8))
    origin: tuple = None

    def __post_init__(self):
        for kind, L in self.dims:
            if kind not in ("open", "periodic") or L < 1:
                raise ConfigError(f"bad region spec ({kind}, {L})")
        if self.origin is None:
            object.__setattr__(self, "origin", (0,) * len(self.dims))

    @property
    def d(self):
        return len(self.dims)

    @property
    def shape(self):
        return tuple(L for _, L in self.dims)

    @property
    def nsites(self):
        return int(np.prod(self.shape))

    def sites(self):
        """Site coordinates in lexicographic order, (nsites, d) int array."""
        ranges = [np.arange(o, o + L) for (_, L), o in zip(self.dims, self.origin)]
        grids = np.meshgrid(*ranges, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def index(self, site):
        idx = 0
        for (kind, L), o, x in zip(self.dims, self.origin, site):
            local = x - o
            if kind == "periodic":
                local %= L
            elif not (0 <= local < L):
                return None
            idx = idx * L + local
        return idx

    def wrap(self, site):
        """Representative of a site inside the box (None if outside an open dir)."""
        out = []
        for (kind, L), o, x in zip(self.dims, self.origin, site):
            local = x - o
            if kind == "periodic":
                local %= L
            elif not (0 <= local < L):
                return None
            out.append(local + o)
        return tuple(out)

    def min_image(self, delta):
        """Displacement with periodic components folded to minimal image."""
        out = []
        for (kind, L), dx in zip(self.dims, delta):
            if kind == "periodic":
                dx = (dx + L // 2) % L - L // 2
            out.append(dx)
        return np.asarray(out)


@dataclass
class LatticeHamiltonian:
    region: LatticeRegion
    N: int
    matrix: SparseHermitian
    omega: object
    t: float
    symbol: object = None
    padding: object = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.region.nsites * self.N

    def sites(self):
        return self.region.sites()

    def positions(self):
        """Per-basis-vector site coordinates, ((nsites*N), d)."""
        return np.repeat(self.region.sites(), self.N, axis=0)

    def to_dense(self):
        return self.matrix.to_dense()

    def to_csr(self):
        return self.matrix.to_csr()


def _site_points(symbol, omega, t, sites):
    """(t x) |> w for every site x; one ConfigPoint per site."""
    space = symbol.space
    cell = space.cell(omega.cell)
    if cell.kind == "fixed" or cell.chart_dim == 0:
        return [omega] * len(sites)
    lam = cell.lam_array()
    coords = np.asarray(omega.coords) + (t * sites) @ lam.T
    from .configspace import ConfigPoint

    return [ConfigPoint(omega.cell, tuple(c)) for c in coords]


def quantize(symbol, omega, t, region):
    """Lattice realization pi_w(H^(t)) on a finite region."""
    if not (0 < t <= 1):
        raise ConfigError("scale t must lie in (0, 1]")
    if region.d != symbol.d:
        raise ConfigError("region dimension does not match the symbol")
    hop = symbol.max_hop()
    for kind, L in region.dims:
        if kind == "periodic" and L <= 2 * hop:
            raise ConfigError(
                f"periodic length {L} ambiguous for hopping range {hop}"
            )
    sites = region.sites()
    points = _site_points(symbol, omega, t, sites)
    coeffs = [symbol.coefficients(p) for p in points]
    index_of = {tuple(s): i for i, s in enumerate(sites)}
    mat = SparseHermitian(len(sites) * symbol.N)
    for i, x in enumerate(sites):
        cx = coeffs[i]
        for q in symbol.support:
            y = region.wrap(tuple(x - np.asarray(q)))
            if y is None:
                continue
            jdx = index_of[y]
            fy = coeffs[jdx].get(tuple(-int(a) for a in q))
            fx = cx.get(q)
            zero = np.zeros((symbol.N, symbol.N), dtype=complex)
            blk = 0.5 * ((fx if fx is not None else zero)
                         + (fy.conj().T if fy is not None else zero))
            if i == jdx:
                # on-site: every q folding back to the same site contributes;
                # only q = 0 does so unless wrapping collapses, which the
                # periodic-length precondition forbids for q != 0
                mat.add_block(i, i, blk, symbol.N)
            elif i < jdx:
                mat.add_block(i, jdx, blk, symbol.N)
            else:
                # handled when the mirrored hop is visited from jdx
                continue
    mat.validate()
    return LatticeHamiltonian(region=region, N=symbol.N, matrix=mat,
                              omega=omega, t=t, symbol=symbol)


@dataclass
class BlochFamily:
    """Transverse lattice operators fibered over isotropy momenta."""

    region: LatticeRegion          # transverse region (n directions)
    N: int
    omega: object
    t: float
    iso_basis: list                # isotropy basis vectors in Z^d
    completion: list               # transversal directions in Z^d
    ks: np.ndarray                 # (M, len(iso_basis)) momenta
    matrices: list                 # dense (dim, dim) arrays, one per k
    symbol: object = None

    @property
    def dim(self):
        return self.region.nsites * self.N

    def positions(self):
        return np.repeat(self.region.sites(), self.N, axis=0)

    def fiber(self, k):
        """Fiber at an arbitrary momentum from the cached hop blocks."""
        return self._fiber_at(np.atleast_1d(np.asarray(k, dtype=float)))


def quantize_bloch(symbol, omega, t, region_perp, ks):
    """Bloch-reduced quantization along the isotropy lattice of omega's cell.

    `region_perp` spans the transversal coset coordinates a (the true sites
    are x = C a + B m with [C|B] the unimodular frame); hops along the
    isotropy basis B carry phases e^{i k.m}.
    """
    space = symbol.space
    cell = space.cell(omega.cell)
    iso, comp, frame, frame_inv = space.transversal_frame(omega.cell)
    n_perp = len(comp)
    if region_perp.d != n_perp:
        raise ConfigError(f"transverse region must have {n_perp} directions")
    ks = np.atleast_2d(np.asarray(ks, dtype=float))
    if ks.shape[1] != len(iso):
        raise ConfigError("one momentum per isotropy basis vector required")
    hop = symbol.max_hop()
    for kind, L in region_perp.dims:
        if kind == "periodic" and L <= 2 * hop * max(1, int(np.abs(frame).max())):
            raise ConfigError("periodic transverse length too small")

    sites = region_perp.sites()                      # (ns, n_perp)
    cmat = np.stack(comp, axis=1) if comp else np.zeros((symbol.d, 0), int)
    # chart coordinates depend on x only through Lambda x = Lambda C a
    from .configspace import ConfigPoint

    if cell.kind == "fixed" or cell.chart_dim == 0:
        points = [omega] * len(sites)
    else:
        lam = cell.lam_array()
        coords = np.asarray(omega.coords) + (t * sites) @ (lam @ cmat).T
        points = [ConfigPoint(omega.cell, tuple(c)) for c in coords]
    coeffs = [symbol.coefficients(p) for p in points]
    index_of = {tuple(s): i for i, s in enumerate(sites)}
    nq = symbol.N
    dim = len(sites) * nq
    decomp = {}
    for q in symbol.support:
        z = frame_inv @ np.asarray(q, dtype=np.int64)
        decomp[q] = (z[:n_perp], z[n_perp:])
    # k enters only through phases on the isotropy windings: assemble one
    # sparse block per distinct winding m, then sum with phases per momentum
    import scipy.sparse as sp

    triplets = {}
    for i, a_row in enumerate(sites):
        cx = coeffs[i]
        for q in symbol.support:
            a_shift, m_wind = decomp[q]
            target = region_perp.wrap(tuple(a_row - a_shift))
            if target is None:
                continue
            jdx = index_of[target]
            fx = cx.get(q)
            fy = coeffs[jdx].get(tuple(-int(b) for b in q))
            zero = np.zeros((nq, nq), dtype=complex)
            blk = 0.5 * ((fx if fx is not None else zero)
                         + (fy.conj().T if fy is not None else zero))
            key = tuple(int(b) for b in m_wind)
            rows, cols, vals = triplets.setdefault(key, ([], [], []))
            for a in range(nq):
                for b in range(nq):
                    if blk[a, b] != 0.0:
                        rows.append(i * nq + a)
                        cols.append(jdx * nq + b)
                        vals.append(blk[a, b])
    blocks = {key: sp.coo_matrix((v, (r, c)), shape=(dim, dim)).tocsr()
              for key, (r, c, v) in triplets.items()}

    def fiber_at(k):
        h = sp.csr_matrix((dim, dim), dtype=complex)
        for m_wind, b in blocks.items():
            h = h + b * np.exp(1j * float(np.dot(k, m_wind)))
        err = abs(h - h.conj().T).max() if dim else 0.0
        if err > 1e-12 * max(abs(h).max(), 1.0):
            raise ConfigError("bloch fiber is not hermitian")
        return h if dim > 1600 else h.toarray()

    mats = [fiber_at(k) for k in ks]
    fam = BlochFamily(region=region_perp, N=nq, omega=omega, t=t,
                      iso_basis=iso, completion=comp, ks=ks, matrices=mats,
                      symbol=symbol)
    fam.blocks = blocks
    fam._fiber_at = fiber_at
    return fam


def quotient_symbol(symbol, cell_id):
    """Symbol rewritten in the unimodular frame adapted to a cell's isotropy.

    Returns (symbol', frame) with frame = [completion | isotropy basis]; in
    the new coordinates the isotropy directions are the trailing axes, so a
    region periodic along them is an honest quotient of the lattice (no
    seams: the chart coordinates depend only on the leading axes).  Positions
    in original coordinates are sites' @ frame.T; a direction v pairs with
    the new coordinates as v' = frame.T @ v.
    """
    space = symbol.space
    iso, comp, frame, frame_inv = space.transversal_frame(cell_id)
    from .configspace import Cell, ConfigSpace

    cells = []
    for c in space.cells.values():
        if c.kind == "flat":
            lam2 = c.lam_array() @ frame.astype(float)
            cells.append(Cell(c.id, c.dim, tuple(tuple(r) for r in lam2),
                              c.kind, c.label, c.boundary, c.chart_dim))
        else:
            cells.append(c)
    space2 = ConfigSpace(space.d, cells, space._loops,
                         name=space.name + "@" + cell_id)
    support2 = [tuple(int(a) for a in frame_inv @ np.asarray(q))
                for q in symbol.support]
    remap = dict(zip(support2, symbol.support))

    def wrap_fn(fn):
        def inner(y):
            cd = fn(y)
            return {q2: cd[q] for q2, q in remap.items() if q in cd}
        return inner

    fns = {cid: wrap_fn(fn) for cid, fn in symbol.coeff_fns.items()}
    from .symbols import Symbol

    sym2 = Symbol(space2, symbol.N, fns, support2, symbol.chart_scale,
                  symbol.symmetries, name=symbol.name + "@" + cell_id)
    return sym2, frame


def covariance_check(symbol, omega, x, t, region):
    """Max interior matrix-element mismatch of the covariance relation.

    Compares <x+z|H_w|y+z> with <x|H_{(t z)|>w}|y> over all site pairs whose
    shift by z stays in the region; exact identity up to float rounding.
    """
    x = np.asarray(x, dtype=np.int64)
    space = symbol.space
    shifted_omega = space.translate(omega, t * x.astype(float))
    h1 = quantize(symbol, omega, t, region)
    h2 = quantize(symbol, shifted_omega, t, region)
    sites = region.sites()
    idx = {tuple(s): i for i, s in enumerate(sites)}
    m1 = h1.to_dense()
    m2 = h2.to_dense()
    n = symbol.N
    worst = 0.0
    interior = [(i, idx.get(tuple(s + x))) for i, s in enumerate(sites)]
    interior = [(i, j) for i, j in interior if j is not None]
    for i, ii in interior:
        for j, jj in interior:
            a = m1[ii * n:(ii + 1) * n, jj * n:(jj + 1) * n]
            b = m2[i * n:(i + 1) * n, j * n:(j + 1) * n]
            worst = max(worst, np.abs(a - b).max())
    if not interior:
        raise ConfigError("region too small for the requested shift")
    return worst


def truncate_with_padding(ham, mask, s_pad):
    """Decouple masked-out sites and pin them to the scalar block s_pad.

    `mask` is a predicate on site coordinate tuples; the masked-in block is
    untouched, all cross terms are dropped.
    """
    s_pad = np.asarray(s_pad, dtype=complex)
    if np.abs(np.linalg.det(s_pad)) < 1e-12:
        raise ConfigError("padding block must be invertible")
    if np.abs(s_pad - s_pad.conj().T).max() > 1e-12:
        raise ConfigError("padding block must be hermitian")
    n = ham.N
    sites = ham.region.sites()
    keep = np.array([bool(mask(tuple(s))) for s in sites])
    new = SparseHermitian(ham.dim)
    for (r, c), v in ham.matrix._data.items():
        if keep[r // n] and keep[c // n]:
            new.add(r, c, v)
    for i in np.where(~keep)[0]:
        new.add_block(i, i, s_pad, n)
    new.validate()
    return LatticeHamiltonian(region=ham.region, N=n, matrix=new,
                              omega=ham.omega, t=ham.t, symbol=ham.symbol,
                              padding={"mask": mask, "block": s_pad},
                              meta=dict(ham.meta, padded=True))


def gap_bisect_t0(symbol, cell_id, target_gap, region_perp, coords=None,
                  k_res=12, t_lo=0.05, t_hi=1.0, iters=12):
    """Largest t (bisection) with Bloch gap >= target_gap on the given cell.

    Returns (t0, gap_at_t0); raises if even t_lo fails.
    """
    space = symbol.space
    cell = space.cell(cell_id)
    if coords is None:
        coords = (0.0,) * cell.chart_dim
    omega = space.point(cell_id, coords)
    iso, _, _, _ = space.transversal_frame(cell_id)
    kaxes = [np.arange(k_res) * (2 * np.pi / k_res) for _ in iso]
    kgrid = (np.stack([g.ravel() for g in np.meshgrid(*kaxes, indexing="ij")], axis=1)
             if iso else np.zeros((1, 0)))

    def gap_at(t):
        fam = quantize_bloch(symbol, omega, t, region_perp, kgrid)
        g = np.inf
        for h in fam.matrices:
            w = np.linalg.eigvalsh(h)
            g = min(g, float(np.abs(w).min()))
        return g

    if gap_at(t_lo) < target_gap:
        raise ConfigError(f"gap {target_gap:.3g} not reached even at t={t_lo}")
    lo, hi = t_lo, t_hi
    if gap_at(hi) >= target_gap:
        return hi, gap_at(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if gap_at(mid) >= target_gap:
            lo = mid
        else:
            hi = mid
    return lo, gap_at(lo)
