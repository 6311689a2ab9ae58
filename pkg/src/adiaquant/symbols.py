"""Adiabatic symbols: finite Fourier series over a configuration space.

A Symbol stores, per cell, a map from chart coordinates to a finite set of
Fourier coefficients q -> f_q (N x N), so H(w, k) = sum_q f_q(w) e^{i k.q}
with k in [0, 2pi)^d.  The module also houses gap certification, symmetry
verification and the model library (Chern insulator interface, quarter-space
corner model, infinite-square hinge model, Dirac point defects).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .configspace import SATURATION, ConfigError, ConfigPoint, builtin_space
from .linalg import (
    GaplessError,
    _log_rotated_cut,
    clifford_generators,
    grading_permutation,
    kron,
    matrix_log_gl,
    pauli,
)

__all__ = [
    "Symbol",
    "GapCertificate",
    "eval_symbol",
    "gap_on",
    "symmetry_check",
    "restrict",
    "model_qwz",
    "model_interface",
    "model_corner_quarter",
    "model_hinge_square",
    "model_dirac_defect",
    "default_interface_profile",
    "path_parameter",
    "smooth_warp",
]

HERM_TOL = 1e-12


# ---------------------------------------------------------------------------
# profiles


def default_interface_profile(y):
    """Monotone interpolation weight: 1 at -infinity, 0 at +infinity."""
    return 0.5 * (1.0 - np.tanh(y))


def path_parameter(y, scale=1.0):
    """Compactified chart coordinate: maps R onto the path parameter (0, 2)."""
    return 1.0 + np.tanh(np.asarray(y, dtype=float) / scale)


def smooth_warp(tau):
    """C^1 monotone time warp on [0,2], flat at 0, 1 and 2.

    Applied to path parameters so segment junctions do not produce kinks in
    the sampled fields (second-order finite differences stay accurate).
    """
    return tau - np.sin(2.0 * np.pi * tau) / (2.0 * np.pi)


# ---------------------------------------------------------------------------
# coefficient-dictionary helpers


def cd_scale(cd, a):
    return {q: a * m for q, m in cd.items()}


def cd_sum(*cds):
    out = {}
    for cd in cds:
        for q, m in cd.items():
            out[q] = out.get(q, 0) + m
    return out


def cd_mirror(cd, mat, axis_swap=(1, 0)):
    """Coefficient map of M H(k_swapped) M^dagger."""
    out = {}
    for q, m in cd.items():
        q2 = tuple(q[i] for i in axis_swap)
        out[q2] = out.get(q2, 0) + mat @ m @ mat.conj().T
    return out


def cd_conjugate_inversion(cd, mat):
    """Coefficient map of G H(-k) G^dagger."""
    out = {}
    for q, m in cd.items():
        q2 = tuple(-x for x in q)
        out[q2] = out.get(q2, 0) + mat @ m @ mat.conj().T
    return out


def cd_hermiticity_defect(cd):
    err = 0.0
    for q, m in cd.items():
        mq = cd.get(tuple(-x for x in q))
        if mq is None:
            err = max(err, np.abs(m).max())
        else:
            err = max(err, np.abs(m - mq.conj().T).max())
    return err


# ---------------------------------------------------------------------------
# symbol


@dataclass
class GapCertificate:
    region: tuple
    min_gap: float
    k_res: int
    omega_samples: int
    argmin: tuple  # (ConfigPoint, k-vector)


class Symbol:
    """Matrix-valued finite Fourier series over a configuration space."""

    def __init__(self, space, N, coeff_fns, support, chart_scale=1.0,
                 symmetries=None, name=""):
        self.space = space
        self.d = space.d
        self.N = N
        self.coeff_fns = dict(coeff_fns)
        self.support = [tuple(int(x) for x in q) for q in support]
        self.chart_scale = float(chart_scale)
        self.symmetries = symmetries or {}
        self.name = name
        missing = [c for c in space.cells if c not in self.coeff_fns]
        if missing:
            raise ConfigError(f"symbol lacks coefficients on cells {missing}")

    def coefficients(self, point):
        """Fourier coefficients {q: (N,N)} at a configuration point."""
        fn = self.coeff_fns.get(point.cell)
        if fn is None:
            raise ConfigError(f"symbol not defined on cell {point.cell}")
        return fn(point.coords_array())

    def bloch(self, point, k):
        """H(w, k) for a single momentum k."""
        k = np.asarray(k, dtype=float)
        cd = self.coefficients(point)
        h = np.zeros((self.N, self.N), dtype=complex)
        for q, m in cd.items():
            h = h + m * np.exp(1j * float(np.dot(k, q)))
        return h

    def bloch_grid(self, point, kpts):
        """H(w, k) over an (M, d) array of momenta -> (M, N, N)."""
        kpts = np.asarray(kpts, dtype=float).reshape(-1, self.d)
        cd = self.coefficients(point)
        qs = list(cd.keys())
        mats = np.stack([np.asarray(cd[q], dtype=complex) for q in qs])
        phases = np.exp(1j * kpts @ np.array(qs, dtype=float).T)  # (M, Q)
        return np.einsum("mq,qab->mab", phases, mats)

    def max_hop(self):
        return max((max(abs(x) for x in q) for q in self.support), default=0)


def eval_symbol(symbol, point, k):
    """H(w, k) = sum_q f_q(w) e^{i k.q}."""
    return symbol.bloch(point, k)


# ---------------------------------------------------------------------------
# sampling, gaps, symmetries


def _k_grid(d, res):
    axes = [np.arange(res) * (2 * np.pi / res) for _ in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def cell_sample_points(symbol, cid, res):
    """Chart sample points of one cell, endpoints of the compactification
    included (profiles are exactly saturated there in float64)."""
    space = symbol.space
    cell = space.cell(cid)
    scale = symbol.chart_scale
    sat = SATURATION * scale
    if cell.chart_dim == 0:
        return [space.point(cid)]
    if cell.kind == "fixed":
        # boundary sphere: angular grid
        thetas = np.arange(res) * (2 * np.pi / res)
        return [space.point(cid, (t,)) for t in thetas]
    if cell.id == "disk" and cell.dim == 2:
        pts = [space.point(cid, (0.0, 0.0))]
        for r in np.linspace(0, 1, res)[1:] ** 2 * sat:
            for t in np.arange(res) * (2 * np.pi / res):
                pts.append(space.point(cid, (r * np.cos(t), r * np.sin(t))))
        return pts
    grid = np.linspace(-sat, sat, res)
    if cell.chart_dim == 1:
        return [space.point(cid, (y,)) for y in grid]
    if cell.chart_dim == 2:
        return [space.point(cid, (a, b)) for a in grid for b in grid]
    raise ConfigError(f"no sampler for cell {cid}")


def gap_on(symbol, cells, k_res=16, omega_res=16):
    """Exhaustive grid certificate for min |spec H(w,k)| over the cells."""
    kpts = _k_grid(symbol.d, k_res)
    best = np.inf
    argmin = None
    count = 0
    for cid in cells:
        for pt in cell_sample_points(symbol, cid, omega_res):
            count += 1
            h = symbol.bloch_grid(pt, kpts)
            w = np.linalg.eigvalsh(h)
            gaps = np.abs(w).min(axis=1)
            i = int(np.argmin(gaps))
            if gaps[i] < best:
                best = float(gaps[i])
                argmin = (pt, tuple(kpts[i]))
    return GapCertificate(region=tuple(cells), min_gap=best, k_res=k_res,
                          omega_samples=count, argmin=argmin)


def symmetry_check(symbol, which, k_res=8, omega_res=8):
    """Max violation of a declared symmetry over a sample grid."""
    if which not in symbol.symmetries:
        raise ConfigError(f"symbol has no {which!r} symmetry data")
    data = symbol.symmetries[which]
    kpts = _k_grid(symbol.d, k_res)
    worst = 0.0
    for cid in symbol.space.cells:
        for pt in cell_sample_points(symbol, cid, omega_res):
            h = symbol.bloch_grid(pt, kpts)
            if which == "chiral":
                j = data
                v = np.einsum("ab,mbc,cd->mad", j, h, j) + h
            else:
                mat, point_map, k_map = data
                pt2 = point_map(pt)
                h2 = symbol.bloch_grid(pt2, k_map(kpts))
                v = np.einsum("ab,mbc,cd->mad", mat, h2, mat.conj().T) - h
            worst = max(worst, np.abs(v).max())
    return worst


def restrict(symbol, cells):
    """Restriction of a symbol to a closed invariant subcomplex."""
    cells = list(cells)
    for cid in cells:
        for b in symbol.space.cell(cid).boundary:
            if b not in cells:
                raise ConfigError(
                    f"restriction is not closed: {cid} needs boundary cell {b}"
                )
    from .configspace import ConfigSpace

    sub = ConfigSpace(
        symbol.space.d,
        [symbol.space.cell(c) for c in cells],
        {c: symbol.space._loops[c] for c in cells if c in symbol.space._loops},
        name=symbol.space.name + "|" + ",".join(cells),
    )
    return Symbol(sub, symbol.N,
                  {c: symbol.coeff_fns[c] for c in cells},
                  symbol.support, symbol.chart_scale, symbol.symmetries,
                  name=symbol.name + "|restricted")


# ---------------------------------------------------------------------------
# model library


def model_qwz(m):
    """Two-band Chern insulator on the point space (d = 2).

    H(k) = sin k1 s1 + sin k2 s2 + (m + cos k1 + cos k2) s3; |Ch| = 1 for
    0 < |m| < 2 and 0 for |m| > 2.
    """
    if m in (0.0, 2.0, -2.0):
        raise GaplessError("critical mass: QWZ model is gapless")
    s1, s2, s3 = pauli(1), pauli(2), pauli(3)
    f = {
        (0, 0): m * s3,
        (1, 0): -0.5j * s1 + 0.5 * s3,
        (-1, 0): 0.5j * s1 + 0.5 * s3,
        (0, 1): -0.5j * s2 + 0.5 * s3,
        (0, -1): 0.5j * s2 + 0.5 * s3,
    }
    space = builtin_space("point", d=2)
    return Symbol(space, 2, {"pt": lambda _y, f=f: dict(f)}, list(f),
                  name=f"qwz(m={m})")


def model_interface(s_plus, s_minus, lam, profile=None, chart_scale=1.0):
    """Coefficient-wise interpolation of two bulk symbols across a wall.

    f_q(y) = profile(y) f_q^- + (1 - profile(y)) f_q^+ on the 1-cell; the
    0-cells carry the pure bulk coefficients.
    """
    if s_plus.N != s_minus.N or s_plus.d != s_minus.d:
        raise ConfigError("interface needs bulks of equal N and d")
    if "pt" not in s_plus.space.cells or "pt" not in s_minus.space.cells:
        raise ConfigError("interface bulks must live on the point space")
    profile = profile or default_interface_profile
    space = builtin_space("interface", lam=lam)
    origin_p = ConfigPoint("pt")
    cp = s_plus.coefficients(origin_p)
    cm = s_minus.coefficients(origin_p)
    support = sorted(set(cp) | set(cm))
    zero = np.zeros((s_plus.N, s_plus.N), dtype=complex)

    def line(y):
        w = float(profile(y[0]))
        return {q: w * cm.get(q, zero) + (1 - w) * cp.get(q, zero) for q in support}

    fns = {"line": line, "plus": lambda _y: dict(cp), "minus": lambda _y: dict(cm)}
    sym = {}
    if "chiral" in s_plus.symmetries and "chiral" in s_minus.symmetries:
        if np.allclose(s_plus.symmetries["chiral"], s_minus.symmetries["chiral"]):
            sym["chiral"] = s_plus.symmetries["chiral"]
    return Symbol(space, s_plus.N, fns, support, chart_scale, sym,
                  name="interface")


# -- quarter-space corner model ---------------------------------------------

def _quarter_matrices():
    ga = kron(pauli(1), pauli(1))
    gb = kron(pauli(1), pauli(3))
    gc = kron(pauli(1), pauli(2))
    gd = kron(pauli(2), pauli(0))
    j = kron(pauli(3), pauli(0))
    m = np.zeros((4, 4), dtype=complex)
    m[0, 1] = m[1, 0] = 1.0
    m[2, 2] = 1.0
    m[3, 3] = -1.0
    return ga, gb, gc, gd, j, m


def _chiral_block(w):
    n = w.shape[0]
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    h[:n, n:] = w.conj().T
    h[n:, :n] = w
    return h


def _quarter_bulk_coeffs(mu):
    ga, gb, gc, gd, _, _ = _quarter_matrices()
    return {
        (0, 0): ga + gb,
        (1, 0): 0.5 * mu * ga + 0.5j * mu * gc,
        (-1, 0): 0.5 * mu * ga - 0.5j * mu * gc,
        (0, 1): 0.5 * mu * gb - 0.5j * mu * gd,
        (0, -1): 0.5 * mu * gb + 0.5j * mu * gd,
    }


def model_corner_quarter(mu, chart_scale=1.0):
    """Mirror- and chirally-symmetric second-order model on the quarter space.

    The bulk is the four-band Hamiltonian
        H_B = (1+mu cos k1) GA + (1+mu cos k2) GB - mu sin k1 GC + mu sin k2 GD
    with the pairwise-anticommuting set GA = s1(x)s1, GB = s1(x)s3,
    GC = s1(x)s2, GD = s2(x)s0, so H_B^2 = (g(k1)+g(k2)) 1 with
    g(k) = 1 + mu^2 + 2 mu cos k; gapped for mu != 1.

    Edge paths (chart y mapped to tau in (0,2) by 1 + tanh(y/scale), then
    C^1 time-warped): tau in [0,1] is the linear homotopy H_B -> GD, and
    tau in [1,2] the invertible chiral path whose off-diagonal block is
    exp((1-s) Log(i 1) + s Log(s1+s3)), ending at S(1) with block s1+s3.
    GD is used as the midpoint because the straight homotopy onto s1(x)s0
    closes the gap for this bulk (GD anticommutes with every bulk term, so
    the square stays scalar).  The second edge is the mirror conjugate and
    the 2-cell is the transfinite (Coons) interpolation of the two edge
    paths against the corner values H_B and S(1).
    """
    if mu <= 1.0:
        raise ConfigError("corner model needs mu > 1 (topological bulk)")
    ga, gb, gc, gd, j, mmat = _quarter_matrices()
    bulk = _quarter_bulk_coeffs(mu)
    a = pauli(1) + pauli(3)
    log_a = matrix_log_gl(a)
    s1mat = _chiral_block(a)
    s1cd = {(0, 0): s1mat}

    lam_a, vec_a = np.linalg.eigh(a)

    def seg2_block(s):
        # exp((1-s) Log(i 1) + s Log(a)): the two logs commute, so the
        # exponential factorizes over the eigenbasis of a
        logs = np.array([(1 - s) * _log_rotated_cut(1j) + s * _log_rotated_cut(x)
                         for x in lam_a])
        return (vec_a * np.exp(logs)) @ vec_a.conj().T

    def edge_path(tau):
        tau = float(smooth_warp(np.clip(tau, 0.0, 2.0)))
        if tau <= 1.0:
            return cd_sum(cd_scale(bulk, 1.0 - tau), {(0, 0): tau * gd})
        return {(0, 0): _chiral_block(seg2_block(tau - 1.0))}

    def edge1(y):
        return edge_path(path_parameter(y[0], chart_scale))

    def edge2(y):
        return cd_mirror(edge_path(path_parameter(y[0], chart_scale)), mmat)

    def corner(y):
        u = path_parameter(y[0], chart_scale)
        v = path_parameter(y[1], chart_scale)
        uh, vh = u / 2.0, v / 2.0
        p = edge_path(u)
        q = cd_mirror(edge_path(v), mmat)
        return cd_sum(
            cd_scale(p, 1.0 - vh),
            cd_scale(q, 1.0 - uh),
            cd_scale(bulk, -(1.0 - uh) * (1.0 - vh)),
            cd_scale(s1cd, uh * vh),
        )

    space = builtin_space("quarter", lam1=(1.0, 0.0), lam2=(0.0, 1.0))
    fns = {
        "bulk": lambda _y: dict(bulk),
        "vac": lambda _y: dict(s1cd),
        "edge1": edge1,
        "edge2": edge2,
        "corner": corner,
    }

    def mirror_map(pt):
        if pt.cell == "edge1":
            return ConfigPoint("edge2", pt.coords)
        if pt.cell == "edge2":
            return ConfigPoint("edge1", pt.coords)
        if pt.cell == "corner":
            return ConfigPoint("corner", (pt.coords[1], pt.coords[0]))
        return pt

    def mirror_k(kpts):
        return kpts[:, ::-1]

    sym = {
        "chiral": j,
        "mirror": (mmat, mirror_map, mirror_k),
    }
    support = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
    s = Symbol(space, 4, fns, support, chart_scale, sym, name=f"corner(mu={mu})")
    s.pad_matrix = s1mat
    s.log_a = log_a  # kept for inspection
    return s


# -- infinite-square hinge model --------------------------------------------

def _hinge_matrices():
    g0 = kron(pauli(0), pauli(3))
    g1 = kron(pauli(3), pauli(1))
    g2 = kron(pauli(0), pauli(2))
    g3 = kron(pauli(2), pauli(1))
    mass = kron(pauli(1), pauli(1))
    return g0, g1, g2, g3, mass


def _hinge_bulk_coeffs():
    g0, g1, g2, g3, _ = _hinge_matrices()
    gs = (g1, g2, g3)
    f = {(0, 0, 0): 2.0 * g0}
    for i in range(3):
        e = tuple(1 if a == i else 0 for a in range(3))
        me = tuple(-x for x in e)
        f[e] = -0.5j * gs[i] + 0.5 * g0
        f[me] = 0.5j * gs[i] + 0.5 * g0
    return f


def model_hinge_square(mu, signs, inversion=False, chart_scale=1.0):
    """Second-order hinge model on the infinite square (d = 3, N = 4).

    Bulk H_B(k) = sum_i Gamma_i sin k_i + Gamma_0 (2 + sum_i cos k_i).
    Each edge path removes the cosine terms on tau in [0,1] while adding the
    gap-preserving mass 2 mu tau (1 - tau) s_a (s1 x s1), then deforms onto
    Gamma_0 on tau in [1,2].  2-cells interpolate the adjacent edge paths
    toward Gamma_0 (Coons patch).  With inversion=True the signs must
    satisfy s_a = -s_{a+2}.
    """
    if mu <= 0:
        raise ConfigError("hinge model needs mu > 0")
    signs = tuple(int(s) for s in signs)
    if len(signs) != 4 or any(s not in (-1, 1) for s in signs):
        raise ConfigError("signs must be four values in {-1, +1}")
    if inversion and not (signs[0] == -signs[2] and signs[1] == -signs[3]):
        raise ConfigError("inversion symmetry requires s_a = -s_{a+2}")
    g0, g1, g2, g3, mass = _hinge_matrices()
    gs = (g1, g2, g3)
    bulk = _hinge_bulk_coeffs()
    vac = {(0, 0, 0): g0}

    def edge_path(tau, sa):
        tau = float(smooth_warp(np.clip(tau, 0.0, 2.0)))
        out = {}
        if tau <= 1.0:
            out[(0, 0, 0)] = 2.0 * g0 + 2.0 * mu * tau * (1.0 - tau) * sa * mass
            for i in range(3):
                e = tuple(1 if a == i else 0 for a in range(3))
                me = tuple(-x for x in e)
                out[e] = -0.5j * gs[i] + 0.5 * (1.0 - tau) * g0
                out[me] = 0.5j * gs[i] + 0.5 * (1.0 - tau) * g0
        else:
            out[(0, 0, 0)] = (3.0 - tau) * g0
            for i in range(3):
                e = tuple(1 if a == i else 0 for a in range(3))
                me = tuple(-x for x in e)
                out[e] = -0.5j * (2.0 - tau) * gs[i]
                out[me] = 0.5j * (2.0 - tau) * gs[i]
        return out

    lams = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)]
    space = builtin_space("infinite_square", lams=lams)
    fns = {"bulk": lambda _y: dict(bulk), "vac": lambda _y: dict(vac)}
    for a in range(4):
        fns[f"edge{a + 1}"] = (
            lambda y, sa=signs[a]: edge_path(path_parameter(y[0], chart_scale), sa)
        )
    for a in range(4):
        b = (a + 1) % 4

        def cell_fn(y, sa=signs[a], sb=signs[b]):
            u = path_parameter(y[0], chart_scale)
            v = path_parameter(y[1], chart_scale)
            uh, vh = u / 2.0, v / 2.0
            return cd_sum(
                cd_scale(edge_path(u, sa), 1.0 - vh),
                cd_scale(edge_path(v, sb), 1.0 - uh),
                cd_scale(bulk, -(1.0 - uh) * (1.0 - vh)),
                cd_scale(vac, uh * vh),
            )

        fns[f"cell{a + 1}{b + 1}"] = cell_fn

    # no chiral partner exists: Gamma_0..Gamma_3 and the mass fill the
    # Clifford algebra on C^4; the model is protected by inversion alone
    sym = {}
    if inversion:
        def inv_map(pt):
            shift = {"edge1": "edge3", "edge3": "edge1", "edge2": "edge4",
                     "edge4": "edge2", "cell12": "cell34", "cell34": "cell12",
                     "cell23": "cell41", "cell41": "cell23"}
            return ConfigPoint(shift.get(pt.cell, pt.cell), pt.coords)

        sym["inversion"] = (g0, inv_map, lambda kpts: -kpts)
    support = list(_hinge_bulk_coeffs().keys())
    s = Symbol(space, 4, fns, support, chart_scale, sym,
               name=f"hinge(mu={mu},signs={signs})")
    s.pad_matrix = g0
    return s


# -- elementary codimension-n Dirac defect ----------------------------------

def model_dirac_defect(d, n, winding=1, mass=2.0, chart_scale=3.0):
    """Dirac vector-field defect on the disk space, (d, n) in {(1,1), (2,2)}.

    The boundary sphere carries a gapped Dirac field of mapping degree
    `winding` (0 or 1); the disk interior interpolates radially toward a
    constant vector at the center, where the gap may close: that is the
    defect.  For (2,2) the standard lattice Dirac field
    (sin k1, sin k2, sin th, mass + cos k1 + cos k2 + cos th) is used; it is
    gapped (|f| >= 1) though not normalized on the sphere, since a unit-norm
    degree-one field cannot have finite hopping range in k.
    """
    if d + n > 5:
        raise ConfigError("matrix size cap: d + n <= 5")
    if (d, n) not in ((1, 1), (2, 2)):
        raise ConfigError("built-in winding data covers (d,n) in {(1,1),(2,2)}")
    if winding not in (0, 1):
        raise ConfigError("built-in winding data is degree 0 or 1")
    gens = clifford_generators(d + n + 1)
    gammas, j = gens[: d + n], gens[d + n]
    perm = grading_permutation(j)
    gammas = [perm @ g @ perm.conj().T for g in gammas]
    j = perm @ j @ perm.conj().T
    nmat = gammas[0].shape[0]
    space = builtin_space("disk", n=n, lam=np.eye(d)[:n])

    def rho(r):
        return np.tanh(abs(r) / chart_scale)

    if (d, n) == (1, 1):
        g1, g2 = gammas

        def sphere_field(sgn):
            # + end: (cos k, sin k), the winding-one circle map;
            # - end (and winding 0): the constant (1, 0)
            if sgn > 0 and winding == 1:
                return {(1,): 0.5 * g1 - 0.5j * g2, (-1,): 0.5 * g1 + 0.5j * g2}
            return {(0,): g1 + 0j}

        # f = (1 - rho) c + rho f_sphere with c = (1, 0)
        def disk(y):
            r = rho(y[0])
            base = sphere_field(np.sign(y[0]) if y[0] != 0 else 1.0)
            out = cd_scale(base, r)
            out[(0,)] = out.get((0,), 0) + (1.0 - r) * g1
            return out

        fns = {
            "disk": disk,
            "plus": lambda _y: sphere_field(+1),
            "minus": lambda _y: sphere_field(-1),
        }
        support = [(0,), (1,), (-1,)]
    else:
        g1, g2, g3, g4 = gammas

        def field(theta, weight):
            # weight * (sin k1, sin k2, sin th, mass + cos k1 + cos k2 + cos th)
            # + (1 - weight) * (0, 0, 0, 1); degree-`winding` on the sphere
            w = weight if winding == 1 else 0.0
            out = {}
            out[(0, 0)] = (w * np.sin(theta)) * g3 + (
                w * (mass + np.cos(theta)) + (1.0 - w)
            ) * g4
            for i, g in ((0, g1), (1, g2)):
                e = tuple(1 if a == i else 0 for a in range(2))
                me = tuple(-x for x in e)
                out[e] = -0.5j * w * g + 0.5 * w * g4
                out[me] = 0.5j * w * g + 0.5 * w * g4
            return out

        def disk(y):
            r = np.hypot(y[0], y[1])
            theta = np.arctan2(y[1], y[0])
            return field(theta, rho(r))

        fns = {"disk": disk, "sphere": lambda y: field(y[0], 1.0)}
        support = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]

    s = Symbol(space, nmat, fns, support, chart_scale, {"chiral": j},
               name=f"dirac(d={d},n={n},deg={winding})")
    s.gammas = gammas
    return s
