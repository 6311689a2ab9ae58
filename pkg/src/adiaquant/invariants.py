"""Chern-cocycle pairings and real-space defect invariants.

Conventions.  Every mesh factor carries a unit coordinate u in [0, 1) with
periodic uniform samples; momentum factors evaluate symbols at k = 2 pi u.
The even pairing of an m-form is

    c_m sum_{rho in S_m} sgn(rho) Int tr(P d_{rho(1)}P ... d_{rho(m)}P),
    c_0 = 1, c_2 = -1/(2 pi i), c_4 = -1/(8 pi^2),

and the odd pairing is the winding number (m = 1) respectively

    -(1/24 pi^2) Int tr((U^dag dU)^3)    (m = 3),

pinned so that the circle generator u -> e^{2 pi i u} pairs to +1 and cup
products multiply.  Loop factors traverse boundary loops of 2-cells with
the outward-normal-first orientation; reversing a loop flips every value
exactly.

On the lattice side the derivation along a direction v is the commutator
with the diagonal position operator, -2 pi i [v.X, .]; pairings divide by
the number of isotropy periods covered (counting trace) and the per-volume
normalization multiplies by c_lambda = covolume of the cell.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .configspace import ConfigError
from .linalg import GaplessError, eig_hermitian, matrix_function

__all__ = [
    "Mesh",
    "ChernResult",
    "DefectReport",
    "chern_even",
    "chern_odd",
    "fhs_chern2d",
    "projection_field",
    "unitary_field",
    "torus_field",
    "loop_field",
    "loop_chern",
    "zero_mode_index",
    "spectral_flow",
    "defect_winding",
    "correspondence_check",
    "smooth_step",
]

PROJ_TOL = 1e-8
UNIT_TOL = 1e-8
MIN_RES = 8


@dataclass
class Mesh:
    """Ordered product of periodic factors: ('loop'|'torus', resolution)."""

    factors: tuple
    orientation: int = 1

    def __post_init__(self):
        for kind, res in self.factors:
            if kind not in ("loop", "torus"):
                raise ConfigError(f"unknown mesh factor kind {kind!r}")
            if res < MIN_RES:
                raise ConfigError(f"mesh factor resolution {res} < {MIN_RES}")
        if self.orientation not in (-1, 1):
            raise ConfigError("orientation must be +-1")

    @property
    def shape(self):
        return tuple(res for _, res in self.factors)


@dataclass
class ChernResult:
    value: float
    mesh: Mesh
    nearest_integer_distance: float
    refinement_delta: float

    @property
    def rounded(self):
        return int(np.rint(self.value))


@dataclass
class DefectReport:
    zero_mode_index: int = 0
    zero_modes: list = field(default_factory=list)  # (eigenvalue, weight)
    spectral_flow: int = 0
    winding: float = 0.0
    trace_normalization: str = "counting"
    extras: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# field construction


def torus_field(symbol, point, res, axes=None, kind="projection"):
    """Sampled field over the momentum torus at a fixed configuration point.

    axes: which momentum directions form the mesh (default: all d).  Returns
    an array of shape res^len(axes) x N x N.
    """
    axes = list(range(symbol.d)) if axes is None else list(axes)
    grids = np.meshgrid(*[np.arange(res) / res for _ in axes], indexing="ij")
    kpts = np.zeros((grids[0].size, symbol.d))
    for g, ax in zip(grids, axes):
        kpts[:, ax] = 2 * np.pi * g.ravel()
    h = symbol.bloch_grid(point, kpts)
    h = h.reshape(*(res,) * len(axes), symbol.N, symbol.N)
    return _field_from_hamiltonians(h, kind, symbol)


def _loop_points_at(symbol, cell_id, svals, reverse=False):
    """ConfigPoints of the boundary loop at loop parameters s in [0, 1)."""
    from .configspace import ConfigPoint, _tau_to_chart

    loop = symbol.space.boundary_loop(cell_id)
    (first, _), (second, _) = loop.traversals
    scale = symbol.chart_scale
    pts = []
    for s in np.asarray(svals) % 1.0:
        if reverse:
            s = (1.0 - s) % 1.0
        if s < 0.5:
            pts.append(ConfigPoint(first, (_tau_to_chart(4.0 * s, scale),)))
        else:
            pts.append(ConfigPoint(second,
                                   (_tau_to_chart(2.0 - 4.0 * (s - 0.5), scale),)))
    return pts


def _evaluate_loop(symbol, pts, k_res, kaxes, kind):
    grids = np.meshgrid(*[np.arange(k_res) / k_res for _ in kaxes], indexing="ij")
    kpts = np.zeros((grids[0].size, symbol.d))
    for g, ax in zip(grids, kaxes):
        kpts[:, ax] = 2 * np.pi * g.ravel()
    hs = []
    for p in pts:
        h = symbol.bloch_grid(p, kpts)
        hs.append(h.reshape(*(k_res,) * len(kaxes), symbol.N, symbol.N))
    return _field_from_hamiltonians(np.stack(hs), kind, symbol)


def adaptive_loop_parameters(symbol, cell_id, n, kind, k_probe=12,
                             smooth_sigma=2.0, floor=0.25, kaxes=None):
    """Loop parameters concentrated where the field varies fastest.

    One uniform probe pass estimates the per-interval field variation; its
    smoothed inverse cumulative reparametrizes the loop, so uniform centered
    differences in the new parameter resolve the sharp path segments (the
    pairing integral is reparametrization invariant).
    """
    kaxes = list(range(symbol.d)) if kaxes is None else list(kaxes)
    s = np.arange(n) / n
    f = _evaluate_loop(symbol, _loop_points_at(symbol, cell_id, s), k_probe,
                       kaxes, kind)
    var = np.linalg.norm((np.roll(f, -1, axis=0) - f).reshape(n, -1), axis=1)
    x = np.arange(n)
    ker = np.exp(-0.5 * (((x + n / 2) % n - n / 2) / smooth_sigma) ** 2)
    ker /= ker.sum()
    var = np.real(np.fft.ifft(np.fft.fft(var) * np.fft.fft(ker)))
    var = np.maximum(var, floor * var.mean())
    cum = np.concatenate([[0.0], np.cumsum(var / var.sum())])
    su = np.concatenate([s, [1.0]])
    return np.interp(np.arange(n) / n, cum, su)


def loop_field(symbol, cell_id, per_edge, k_res, kaxes, kind="projection",
               reverse=False, adaptive=True):
    """Field over (boundary loop of cell) x (momentum torus in kaxes)."""
    kaxes = list(kaxes)
    n = 2 * per_edge
    if adaptive:
        svals = adaptive_loop_parameters(symbol, cell_id, n, kind,
                                         kaxes=kaxes)
    else:
        svals = np.arange(n) / n
    pts = _loop_points_at(symbol, cell_id, svals, reverse=reverse)
    return _evaluate_loop(symbol, pts, k_res, kaxes, kind)


def _field_from_hamiltonians(h, kind, symbol):
    if kind == "hamiltonian":
        return h
    w, v = np.linalg.eigh(h)
    gap = np.abs(w).min()
    if gap < 10 * PROJ_TOL:
        raise GaplessError(f"field is gapless on the mesh (min |eig| {gap:.2e})")
    if kind == "projection":
        occ = (w < 0.0)
        nocc = occ.sum(axis=-1)
        if nocc.min() != nocc.max():
            raise GaplessError("occupied-band count varies over the mesh")
        vocc = v * occ[..., None, :]
        return np.einsum("...ak,...bk->...ab", vocc, vocc.conj())
    if kind == "unitary":
        n = symbol.N
        if n % 2:
            raise ConfigError("unitary field needs even internal dimension")
        sgn = np.einsum("...ak,...k,...bk->...ab", v, np.sign(w), v.conj())
        return sgn[..., n // 2:, : n // 2]
    raise ConfigError(f"unknown field kind {kind!r}")


def projection_field(h):
    """Batched Fermi projections of an array of Hamiltonians (..., N, N)."""
    w, v = np.linalg.eigh(h)
    if np.abs(w).min() < 10 * PROJ_TOL:
        raise GaplessError("gapless Hamiltonian in projection_field")
    occ = (w < 0.0)
    vocc = v * occ[..., None, :]
    return np.einsum("...ak,...bk->...ab", vocc, vocc.conj())


def unitary_field(h, n_half=None):
    w, v = np.linalg.eigh(h)
    if np.abs(w).min() < 10 * PROJ_TOL:
        raise GaplessError("gapless Hamiltonian in unitary_field")
    n = h.shape[-1]
    n_half = n // 2 if n_half is None else n_half
    sgn = np.einsum("...ak,...k,...bk->...ab", v, np.sign(w), v.conj())
    return sgn[..., n_half:, :n_half]


# ---------------------------------------------------------------------------
# pairings


def _deriv_centered(fld, axis, res):
    return (np.roll(fld, -1, axis=axis) - np.roll(fld, 1, axis=axis)) * (res / 2.0)


def _deriv_spectral(fld, axis, res):
    freqs = np.fft.fftfreq(res, d=1.0 / res) * (2j * np.pi)
    shape = [1] * fld.ndim
    shape[axis] = res
    return np.fft.ifft(np.fft.fft(fld, axis=axis) * freqs.reshape(shape),
                       axis=axis)


def _derivs(fld, mesh):
    """One derivative per mesh factor: spectral on smooth periodic torus
    factors, centered second-order on loop factors (only C^1 there)."""
    out = []
    for ax, (kind, res) in enumerate(mesh.factors):
        if kind == "torus":
            out.append(_deriv_spectral(fld, ax, res))
        else:
            out.append(_deriv_centered(fld, ax, res))
    return out


def _check_projection(p):
    err = max(np.abs(p - np.einsum("...ab,...bc->...ac", p, p)).max(),
              np.abs(p - np.swapaxes(p, -1, -2).conj()).max())
    if err > PROJ_TOL:
        raise ConfigError(f"samples are not projections (defect {err:.2e})")


def _check_unitary(u):
    n = u.shape[-1]
    err = np.abs(np.einsum("...ba,...bc->...ac", u.conj(), u)
                 - np.eye(n)).max()
    if err > UNIT_TOL:
        raise ConfigError(f"samples are not unitary (defect {err:.2e})")


def _even_value(p, mesh):
    m = len(mesh.factors)
    if m == 0:
        return float(np.real(np.trace(p)))
    derivs = _derivs(p, mesh)
    total = 0.0 + 0.0j

    def walk(mat, used):
        # depth-first over permutations, sharing chain prefixes
        nonlocal total
        if len(used) == m - 1:
            for ax in range(m):
                if ax not in used:
                    tr = np.einsum("...ab,...ba->...", mat, derivs[ax]).mean()
                    total += _perm_sign(used + (ax,)) * tr
            return
        for ax in range(m):
            if ax not in used:
                walk(np.einsum("...ab,...bc->...ac", mat, derivs[ax]),
                     used + (ax,))

    walk(p, ())
    if m == 2:
        c = -1.0 / (2j * np.pi)
    elif m == 4:
        c = -1.0 / (8 * np.pi ** 2)
    else:
        raise ConfigError("even pairings implemented for m in {0, 2, 4}")
    return float(np.real(c * total))


def _odd_value(u, mesh):
    m = len(mesh.factors)
    if m == 1:
        # exact phase increments of det U: equals (1/2 pi i) Int tr(U^dag dU)
        # but converges to the integer to machine precision
        det = np.linalg.det(u)
        inc = np.angle(np.roll(det, -1) / det)
        return float(inc.sum() / (2 * np.pi))
    uinv = np.swapaxes(u, -1, -2).conj()
    a = [np.einsum("...ab,...bc->...ac", uinv, d) for d in _derivs(u, mesh)]
    if m == 3:
        total = 0.0 + 0.0j
        for perm in itertools.permutations(range(3)):
            sgn = _perm_sign(perm)
            prod = np.einsum("...ab,...bc,...ca->...",
                             a[perm[0]], a[perm[1]], a[perm[2]])
            total += sgn * prod.mean()
        return float(np.real(-total / (24 * np.pi ** 2)))
    raise ConfigError("odd pairings implemented for m in {1, 3}")


def _perm_sign(perm):
    sgn = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sgn = -sgn
    return sgn


def _subsample(fld, m):
    for ax in range(m):
        fld = np.take(fld, np.arange(0, fld.shape[ax], 2), axis=ax)
    return fld


def chern_even(p, mesh):
    """Normalized even Chern pairing of a projection field on a mesh."""
    p = np.asarray(p)
    m = len(mesh.factors)
    if m % 2:
        raise ConfigError("even pairing needs an even number of factors")
    if tuple(p.shape[:m]) != mesh.shape:
        raise ConfigError("field shape does not match the mesh")
    _check_projection(p)
    value = mesh.orientation * _even_value(p, mesh)
    delta = np.nan
    if m and min(mesh.shape) >= 2 * MIN_RES:
        half_mesh = Mesh(tuple((k, r // 2) for k, r in mesh.factors),
                         mesh.orientation)
        half = mesh.orientation * _even_value(_subsample(p, m), half_mesh)
        delta = abs(value - half)
    return ChernResult(value=value, mesh=mesh,
                       nearest_integer_distance=abs(value - np.rint(value)),
                       refinement_delta=delta)


def chern_odd(u, mesh):
    """Normalized odd Chern pairing of a unitary field on a mesh."""
    u = np.asarray(u)
    m = len(mesh.factors)
    if m % 2 == 0:
        raise ConfigError("odd pairing needs an odd number of factors")
    if tuple(u.shape[:m]) != mesh.shape:
        raise ConfigError("field shape does not match the mesh")
    _check_unitary(u)
    value = mesh.orientation * _odd_value(u, mesh)
    delta = np.nan
    if min(mesh.shape) >= 2 * MIN_RES:
        half_mesh = Mesh(tuple((k, r // 2) for k, r in mesh.factors),
                         mesh.orientation)
        half = mesh.orientation * _odd_value(_subsample(u, m), half_mesh)
        delta = abs(value - half)
    return ChernResult(value=value, mesh=mesh,
                       nearest_integer_distance=abs(value - np.rint(value)),
                       refinement_delta=delta)


def fhs_chern2d(p):
    """Plaquette Berry-flux Chern number of a projection field on T^2.

    Gauge-invariant integer oracle: frames from the projection samples,
    U(1) link variables from overlap determinants, fluxes from plaquette
    products.  Raises if any plaquette flux is within 2% of +-pi.
    """
    p = np.asarray(p)
    _check_projection(p)
    r1, r2 = p.shape[0], p.shape[1]
    w, v = np.linalg.eigh(p)
    nocc = int(np.rint(w[0, 0].sum()))
    frames = v[..., -nocc:] if nocc else None
    if nocc == 0 or nocc == p.shape[-1]:
        return 0
    link1 = np.zeros((r1, r2), dtype=complex)
    link2 = np.zeros((r1, r2), dtype=complex)
    for i in range(r1):
        for j in range(r2):
            f = frames[i, j]
            link1[i, j] = np.linalg.det(f.conj().T @ frames[(i + 1) % r1, j])
            link2[i, j] = np.linalg.det(f.conj().T @ frames[i, (j + 1) % r2])
    flux = np.angle(
        link1
        * np.roll(link2, -1, axis=0)
        / np.roll(link1, -1, axis=1)
        / link2
    )
    if np.abs(flux).max() > 0.98 * np.pi:
        raise ConfigError("plaquette flux near +-pi: refine the mesh")
    # orientation chosen to match chern_even's (k1, k2) convention
    total = -flux.sum() / (2 * np.pi)
    if abs(total - np.rint(total)) > 1e-6:
        raise ConfigError("plaquette fluxes do not sum to an integer")
    return int(np.rint(total))


def loop_chern(symbol, cell_id, cls, kdirs, per_edge=24, k_res=24,
               reverse=False):
    """Chern pairing over (boundary loop of a 1-/2-cell) x momentum torus.

    `kdirs` are signed 1-based momentum axes, e.g. (3, 2, -1): the mesh
    factors follow the order given and each sign multiplies the value
    (linearity of the cocycle in its directions).  For a 1-cell the loop is
    S^0 and the value is the difference of endpoint torus pairings.
    """
    cell = symbol.space.cell(cell_id)
    kaxes = [abs(k) - 1 for k in kdirs]
    sign = int(np.prod([np.sign(k) for k in kdirs])) if kdirs else 1
    if cell.dim == 1:
        loop = symbol.space.boundary_loop(cell_id)
        vals = []
        for cid, s in loop.endpoints:
            fld = torus_field(symbol, symbol.space.point(cid), k_res,
                              axes=kaxes, kind="projection" if cls == "even"
                              else "unitary")
            mesh = Mesh(tuple(("torus", k_res) for _ in kaxes))
            r = (chern_even if cls == "even" else chern_odd)(fld, mesh)
            vals.append(s * r.value)
        total = sign * sum(vals) * (-1 if reverse else 1)
        mesh = Mesh(tuple(("torus", k_res) for _ in kaxes),
                    orientation=-1 if reverse else 1)
        return ChernResult(value=total, mesh=mesh,
                           nearest_integer_distance=abs(total - np.rint(total)),
                           refinement_delta=np.nan)
    kind = "projection" if cls == "even" else "unitary"
    fld = loop_field(symbol, cell_id, per_edge, k_res, kaxes, kind=kind,
                     reverse=reverse)
    mesh = Mesh((("loop", 2 * per_edge),) + tuple(("torus", k_res) for _ in kaxes))
    r = (chern_even if cls == "even" else chern_odd)(fld, mesh)
    r.value *= sign
    r.nearest_integer_distance = abs(r.value - np.rint(r.value))
    return r


# ---------------------------------------------------------------------------
# lattice-side invariants


def smooth_step(x):
    """Quintic smoothstep on [0,1], C^2 at both ends."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)


def _flatten_function(gap):
    """rho: R -> [0,1], 0 below the gap, 1 above; f = 2 rho - 1 is the odd
    polynomial smoothstep supported in (-gap, gap)."""
    def rho(w):
        return smooth_step((np.asarray(w) + gap) / (2.0 * gap))

    return rho


def zero_mode_index(ham, j_site, tol=1e-8, locus=None, radius=None,
                    k_near=16):
    """Chiral index of the tol-kernel, with localization data.

    j_site: the chiral matrix acting per site.  The index is the kernel
    trace Tr(J W P_ker) with W = 1 globally, or the indicator of the ball
    of `radius` around `locus`.  The windowed trace is basis independent on
    the kernel span, so hybridized pairs (a defect mode split against its
    compensating partner at a remote truncation boundary: any finite
    chirally-balanced lattice has total kernel index Tr(J) = 0) still sum
    to the local charge of the defect.  The rounding residual and near-tol
    spectral crowding are reported, never silently dropped.
    """
    j_site = np.asarray(j_site, dtype=complex)
    nsites = ham.region.nsites
    jfull_diag = np.tile(np.real(np.diag(j_site)), nsites)
    mat = ham.matrix if hasattr(ham, "matrix") else ham
    dim = ham.dim
    if dim <= 4096:
        w, v = eig_hermitian(mat.to_dense() if hasattr(mat, "to_dense") else mat)
    else:
        w, v = eig_hermitian(mat, k=min(k_near, dim - 2))
    sel = np.abs(w) <= tol
    crowd = np.logical_and(np.abs(w) > tol, np.abs(w) <= 10 * tol)
    positions = ham.positions()
    if locus is not None:
        dist = np.linalg.norm(positions - np.asarray(locus), axis=1)
        window = (dist <= radius).astype(float)
    else:
        window = np.ones(dim)
    modes = []
    index = 0.0
    for i in np.where(sel)[0]:
        psi = v[:, i]
        weight = float(np.sum(np.abs(psi) ** 2 * window))
        index += float(np.real(np.vdot(psi, jfull_diag * window * psi)))
        modes.append((float(w[i]), weight))
    residual = abs(index - np.rint(index))
    report = DefectReport(zero_mode_index=int(np.rint(index)),
                          zero_modes=modes)
    report.extras["index_residual"] = residual
    report.extras["index_raw"] = index
    report.extras["crowding"] = int(crowd.sum())
    return report


def spectral_flow(matrices, ks=None, window=0.5, site_weights=None,
                  weight_threshold=0.5, refine=4, k_builder=None):
    """Signed count of eigenvalue branches crossing 0 upward over one period.

    `matrices` is a periodic Hermitian family over an ordered momentum grid.
    Branches inside the window are matched between neighbouring momenta by
    eigenvector overlap; steps with unresolved deep-in-window states are
    bisected via `k_builder(k)` up to `refine` levels.  `site_weights`
    (length dim, e.g. an indicator of the defect neighbourhood) restricts
    the count to states with filtered mass >= weight_threshold; on any
    finite region the unfiltered flow of a periodic family is zero, so the
    per-defect flow must be read off locally.
    """
    nk = len(matrices)
    if ks is None:
        ks = np.arange(nk) * (2 * np.pi / nk)
    # entries may be precomputed (eigenvalues, eigenvectors) pairs, so one
    # diagonalization pass can serve several locus filters
    eigs = [h if isinstance(h, tuple) else _window_eigs(h, window)
            for h in matrices]
    flow = 0
    for j in range(nk):
        w1, v1 = eigs[j]
        w2, v2 = eigs[(j + 1) % nk]
        k2 = ks[j + 1] if j + 1 < nk else ks[0] + 2 * np.pi
        flow += _step_flow(w1, v1, w2, v2, ks[j], k2, window, site_weights,
                           weight_threshold, refine, k_builder)
    return int(flow)


def _window_eigs(h, window, n_eigs=32):
    """Eigenpairs with |w| <= window; shift-invert for large fibers."""
    import scipy.sparse as sp

    dim = h.shape[0]
    if dim <= 2600:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        w, v = np.linalg.eigh(dense)
        sel = np.abs(w) <= window
        return w[sel], v[:, sel]
    hs = sp.csr_matrix(h)
    k = min(n_eigs, dim - 2)
    w, v = eig_hermitian(hs, k=k, tol=1e-6)
    if np.abs(w).max() < window:
        # window not fully covered by the k nearest eigenvalues: widen once
        w, v = eig_hermitian(hs, k=min(2 * k, dim - 2), tol=1e-6)
        if np.abs(w).max() < window:
            raise ConfigError("spectral window too wide for the sparse solve")
    sel = np.abs(w) <= window
    return w[sel], v[:, sel]


def _step_flow(w1, v1, w2, v2, k1, k2, window, site_weights, threshold,
               refine, k_builder):
    if len(w1) == 0 and len(w2) == 0:
        return 0
    if v1.size and v2.size:
        overlap = np.abs(v1.conj().T @ v2) ** 2
    else:
        overlap = np.zeros((len(w1), len(w2)))
    order = sorted(
        ((overlap[i, j], i, j) for i in range(len(w1)) for j in range(len(w2))),
        reverse=True,
    )
    used1, used2, pairs = set(), set(), []
    for ov, i, j in order:
        if ov < 0.5:
            break
        if i in used1 or j in used2:
            continue
        used1.add(i)
        used2.add(j)
        pairs.append((i, j))
    un1 = [i for i in range(len(w1)) if i not in used1]
    un2 = [j for j in range(len(w2)) if j not in used2]
    deep = (any(abs(w1[i]) < 0.5 * window for i in un1)
            or any(abs(w2[j]) < 0.5 * window for j in un2))
    if deep:
        if refine > 0 and k_builder is not None:
            kmid = 0.5 * (k1 + k2)
            wm, vm = _window_eigs(k_builder(kmid), window)
            return (_step_flow(w1, v1, wm, vm, k1, kmid, window, site_weights,
                               threshold, refine - 1, k_builder)
                    + _step_flow(wm, vm, w2, v2, kmid, k2, window,
                                 site_weights, threshold, refine - 1,
                                 k_builder))
        raise ConfigError("untrackable crossings after maximal refinement")
    flow = 0
    for i, j in pairs:
        if site_weights is not None:
            m1 = float((np.abs(v1[:, i]) ** 2 * site_weights).sum())
            m2 = float((np.abs(v2[:, j]) ** 2 * site_weights).sum())
            if 0.5 * (m1 + m2) < threshold:
                continue
        if w1[i] < 0.0 <= w2[j]:
            flow += 1
        elif w2[j] < 0.0 <= w1[i]:
            flow -= 1
    return flow


def defect_winding(ham, v_dir, gap, rho=None, periods=None,
                   transversal_mask=None, per_volume=False, covolume=1.0,
                   decay_tol=1e-6, locus_window=None):
    """Chiral winding of U = e^{2 pi i rho(H)} paired with the direction v.

    The derivation is the commutator with the diagonal position operator
    (minimal-image displacements along periodic directions) and the trace is
    the counting trace over a transversal of the isotropy action: either the
    full trace divided by `periods` (isotropy-invariant periodic box), or a
    per-site boolean `transversal_mask` selecting one site per isotropy
    coset (straight line through the defect on an open box).  Sign pinned so
    the quantized circle generator e^{ik} winds to +1.  per_volume=True
    multiplies by the covolume c_lambda (trace per unit surface length).
    """
    rho = rho or _flatten_function(gap)
    h = ham.to_dense()
    u = matrix_function(h, lambda x: np.exp(2j * np.pi * float(rho(x))))
    positions = ham.positions().astype(float)
    if locus_window is not None:
        locus, rad = locus_window
        dist = np.linalg.norm(positions - np.asarray(locus), axis=1)
        far = dist > rad
        off = np.abs(u - np.eye(len(u)))[np.ix_(far, far)].max() if far.any() else 0.0
        if off > decay_tol:
            raise ConfigError(
                f"U - 1 does not decay away from the defect ({off:.2e})")
    v_dir = np.asarray(v_dir, dtype=float)
    sites = ham.region.sites()
    n = ham.N
    diff = sites[:, None, :] - sites[None, :, :]
    for ax, (kind, length) in enumerate(ham.region.dims):
        if kind == "periodic":
            diff[..., ax] = (diff[..., ax] + length // 2) % length - length // 2
    disp = np.kron(diff.astype(float) @ v_dir, np.ones((n, n)))
    comm = disp * u                      # [v.X, U] elementwise
    prod = u.conj().T @ comm             # U^dag [v.X, U]
    diag = np.real(np.diagonal(prod))
    if transversal_mask is not None:
        mask = np.repeat(np.asarray(transversal_mask, dtype=bool), n)
        winding = float(diag[mask].sum())
    else:
        if periods is None:
            raise ConfigError("pass periods (periodic box) or transversal_mask")
        winding = float(diag.sum()) / float(periods)
    if per_volume:
        winding *= covolume
    return winding


def correspondence_check(symbol_value, lattice_values, label="", tol=0.05):
    """Two-column table comparing a symbol-side value with lattice values."""
    rows = []
    ok = True
    for name, val in lattice_values:
        diff = abs(val - symbol_value)
        rows.append({"t": name, "lattice": val, "symbol": symbol_value,
                     "difference": diff})
        ok = ok and diff <= tol
    return {"label": label, "rows": rows, "pass": ok, "tolerance": tol}
