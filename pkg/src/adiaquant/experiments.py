"""End-to-end experiment drivers: bulk-interface, corner, point-defect and
hinge reproductions, with both sides of each correspondence.

Orientation conventions pinned here (and validated by the acceptance
suite): for an interface with normal lam, the winding direction is the
clockwise normal v = (lam_2, -lam_1), which makes the counting-trace
winding equal (Ch_+ - Ch_-)/c_lambda; spectral-flow fibers are oriented
along the isotropy generator with v . b > 0, which makes flow and winding
agree including sign.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp

from .configspace import ConfigPoint
from .invariants import (
    Mesh,
    _window_eigs,
    chern_even,
    defect_winding,
    fhs_chern2d,
    loop_chern,
    spectral_flow,
    torus_field,
    zero_mode_index,
)
from .quantize import (
    LatticeRegion,
    gap_bisect_t0,
    quantize,
    quantize_bloch,
    quotient_symbol,
    truncate_with_padding,
)
from .symbols import (
    gap_on,
    model_corner_quarter,
    model_dirac_defect,
    model_hinge_square,
    model_interface,
    model_qwz,
    symmetry_check,
)

__all__ = [
    "interface_experiment",
    "corner_experiment",
    "dirac_experiment",
    "hinge_experiment",
    "hinge_slab_blocks",
]


def _perp_clockwise(lam):
    lam = np.asarray(lam, dtype=float)
    return np.array([lam[1], -lam[0]])


def interface_experiment(m_plus=1.0, m_minus=-1.0, lam=(1.0, 0.0), t=1.0,
                         open_len=48, periods=24, window_radius=15,
                         grid=32, t_list=None):
    """Bulk-interface correspondence: Chern difference vs winding vs flow.

    Returns a report dict with the two bulk Chern numbers (FHS oracle), the
    counting-trace defect winding (and its covolume normalization), and the
    filtered spectral flow of the Bloch family.
    """
    lam = np.asarray(lam, dtype=float)
    sp_bulk = model_qwz(m_plus)
    sm_bulk = model_qwz(m_minus)
    pt = ConfigPoint("pt")
    ch_p = fhs_chern2d(torus_field(sp_bulk, pt, grid))
    ch_m = fhs_chern2d(torus_field(sm_bulk, pt, grid))
    iface = model_interface(sp_bulk, sm_bulk, tuple(lam))
    cert = gap_on(iface, ["plus", "minus"], k_res=grid, omega_res=4)
    gap = cert.min_gap
    om = ConfigPoint("line", (0.0,))
    c_lam = iface.space.covolume("line")
    v = _perp_clockwise(lam)

    qsym, frame = quotient_symbol(iface, "line")
    v_q = frame.T @ v

    def winding_at(tt):
        reg = LatticeRegion((("open", open_len), ("periodic", periods)),
                            origin=(-open_len // 2, 0))
        ham = quantize(qsym, om, tt, reg)
        sites = reg.sites()
        mask = (sites[:, 1] == 0) & (np.abs(sites[:, 0]) <= window_radius)
        return defect_winding(ham, v_q, gap=0.95 * gap, transversal_mask=mask)

    w1 = winding_at(t)

    # Bloch family over the isotropy momentum, oriented along v
    iso, _, _, _ = iface.space.transversal_frame("line")
    sgn = 1.0 if float(v @ iso[0]) > 0 else -1.0
    regp = LatticeRegion((("open", 2 * open_len),), origin=(-open_len,))
    nk = 48
    ks = (np.arange(nk) * 2 * np.pi / nk).reshape(-1, 1)
    fam = quantize_bloch(iface, om, t, regp, sgn * ks)
    pos = fam.positions()[:, 0]
    wt = (np.abs(pos) < open_len // 3).astype(float)
    flow = spectral_flow(fam.matrices, ks=ks.ravel(), window=0.4 * gap,
                         site_weights=wt,
                         k_builder=lambda k: fam.fiber(sgn * k))

    report = {
        "ch_plus": ch_p,
        "ch_minus": ch_m,
        "ch_difference": ch_p - ch_m,
        "c_lambda": c_lam,
        "winding": w1,
        "winding_per_volume": c_lam * w1,
        "spectral_flow": flow,
        "skeleton_gap": gap,
    }
    if t_list:
        report["t_windings"] = [(tt, winding_at(tt)) for tt in t_list]
    return report


def corner_experiment(mu=1.5, size=24, per_edge=48, k_res=24, mask_margin=3,
                      locus_radius=8.0, kernel_tol=1e-2):
    """Quarter-space corner: skeleton loop Chern vs localized zero modes."""
    model = model_corner_quarter(mu)
    cert = gap_on(model, ["edge1", "edge2", "bulk", "vac"], k_res=16,
                  omega_res=97)
    loop = loop_chern(model, "corner", "odd", (1, 2), per_edge=per_edge,
                      k_res=k_res)
    loop_half = loop_chern(model, "corner", "odd", (1, 2),
                           per_edge=per_edge // 2, k_res=k_res // 2)
    regp = LatticeRegion((("open", 120),), origin=(-60,))
    t0, bloch_gap = gap_bisect_t0(model, "edge1", cert.min_gap / 2, regp,
                                  k_res=12)
    cx = size - 8
    om = ConfigPoint("corner", (-t0 * cx, -t0 * cx))
    reg = LatticeRegion((("open", size), ("open", size)))
    ham = quantize(model, om, t0, reg)
    padded = truncate_with_padding(
        ham, lambda s: s[0] <= cx + mask_margin and s[1] <= cx + mask_margin,
        model.pad_matrix)
    j = model.symmetries["chiral"]
    rep = zero_mode_index(padded, j, tol=kernel_tol, locus=(cx, cx),
                          radius=locus_radius)
    lam_min = min((abs(e) for e, _ in rep.zero_modes), default=np.nan)
    return {
        "skeleton_gap": cert.min_gap,
        "loop_chern": loop.value,
        "loop_chern_half": loop_half.value,
        "vol_p": model.space.covolume("corner"),
        "t0": t0,
        "bloch_gap": bloch_gap,
        "zero_mode_index": rep.zero_mode_index,
        "index_raw": rep.extras["index_raw"],
        "kernel_eigenvalue": lam_min,
        "zero_modes": rep.zero_modes,
        "chiral_defect": symmetry_check(model, "chiral", k_res=4, omega_res=5),
        "mirror_defect": symmetry_check(model, "mirror", k_res=4, omega_res=5),
    }


def dirac_experiment(d, n, t=1.0):
    """Codimension-n Dirac defect: boundary invariant vs bound states."""
    model = model_dirac_defect(d, n)
    j = model.symmetries["chiral"]
    if (d, n) == (1, 1):
        reg = LatticeRegion((("open", 60),), origin=(-30,))
        om = ConfigPoint("disk", (0.0,))
        locus, radius, tol = (0.0,), 10.0, 1e-8
        # boundary invariant: winding difference of the two endpoint symbols
        res = 64
        kk = 2 * np.pi * np.arange(res) / res
        bw = []
        for cid in ("plus", "minus"):
            hs = model.bloch_grid(ConfigPoint(cid), kk.reshape(-1, 1))
            w, v = np.linalg.eigh(hs)
            sgn = np.einsum("...ak,...k,...bk->...ab", v, np.sign(w), v.conj())
            u = sgn[:, 1:, :1]
            det = u[:, 0, 0]
            bw.append(float(np.angle(np.roll(det, -1) / det).sum() / (2 * np.pi)))
        boundary = bw[0] - bw[1]
    else:
        reg = LatticeRegion((("open", 21), ("open", 21)), origin=(-10, -10))
        om = ConfigPoint("disk", (0.0, 0.0))
        locus, radius, tol = (0.0, 0.0), 6.0, 1e-3
        boundary = _sphere_degree(model)
    ham = quantize(model, om, t, reg)
    rep = zero_mode_index(ham, j, tol=tol, locus=locus, radius=radius)
    return {
        "boundary_invariant": boundary,
        "zero_mode_index": rep.zero_mode_index,
        "index_raw": rep.extras["index_raw"],
        "zero_modes": rep.zero_modes,
        "local_mass": sum(w for _, w in rep.zero_modes),
    }


def _sphere_degree(model, res=24):
    """Mapping-degree oracle of the (2,2) boundary Dirac field."""
    kk = 2 * np.pi * np.arange(res) / res
    kgrid = np.stack([g.ravel() for g in np.meshgrid(kk, kk, indexing="ij")],
                     axis=1)
    v = np.zeros((res, res, res, 4))
    for it, th in enumerate(kk):
        h = model.bloch_grid(ConfigPoint("sphere", (th,)), kgrid)
        for gi, g in enumerate(model.gammas):
            comp = np.real(np.einsum("mab,ba->m", h, g)) / model.N
            v[:, :, it, gi] = comp.reshape(res, res)
    nrm = v / np.linalg.norm(v, axis=-1, keepdims=True)
    dv = [(np.roll(nrm, -1, axis=a) - np.roll(nrm, 1, axis=a)) * (res / 2.0)
          for a in range(3)]
    mats = np.stack([nrm, dv[0], dv[1], dv[2]], axis=-2)
    return float(np.linalg.det(mats).mean() / (2 * np.pi ** 2))


def hinge_slab_blocks(model, t, width, margin):
    """Sparse hop blocks of the combined four-corner slab, fibered over k3.

    The slab coefficient field is the inclusion-exclusion combination of
    the four corner patches minus the four edge paths plus the bulk, which
    restricts to each corner patch near that corner and saturates to the
    scalar outside; all four hinges are adiabatic, so no gapless hard
    surfaces appear.
    """
    fns = model.coeff_fns
    half = width / 2.0
    length = width + 2 * margin

    def field(x1, x2):
        y = [t * (x1 - half), t * (x2 - half), t * (-x1 - half),
             t * (-x2 - half)]
        total = {}

        def acc(cd, s):
            for q, m in cd.items():
                total[q] = total.get(q, 0) + s * m

        for a in range(4):
            b = (a + 1) % 4
            acc(fns[f"cell{a + 1}{b + 1}"](np.array([y[a], y[b]])), +1.0)
            acc(fns[f"edge{a + 1}"](np.array([y[a]])), -1.0)
        acc(fns["bulk"](np.array([])), +1.0)
        return total

    nq = model.N
    sites = [(i - length // 2, j - length // 2)
             for i in range(length) for j in range(length)]
    index = {s: i for i, s in enumerate(sites)}
    coeffs = [field(*s) for s in sites]
    dim = len(sites) * nq
    tri = {}
    for i, (x1, x2) in enumerate(sites):
        for q in model.support:
            tgt = (x1 - q[0], x2 - q[1])
            if tgt not in index:
                continue
            jdx = index[tgt]
            fx = coeffs[i].get(q)
            fy = coeffs[jdx].get((-q[0], -q[1], -q[2]))
            zero = np.zeros((nq, nq), dtype=complex)
            blk = 0.5 * ((fx if fx is not None else zero)
                         + (fy.conj().T if fy is not None else zero))
            rows, cols, vals = tri.setdefault(q[2], ([], [], []))
            for a in range(nq):
                for b in range(nq):
                    if blk[a, b] != 0.0:
                        rows.append(i * nq + a)
                        cols.append(jdx * nq + b)
                        vals.append(blk[a, b])
    blocks = {m: sp.coo_matrix((v, (r, c)), shape=(dim, dim)).tocsr()
              for m, (r, c, v) in tri.items()}
    positions = np.repeat(np.array(sites, dtype=float), nq, axis=0)
    corners = {
        "12": (half, half),
        "23": (-half, half),
        "34": (-half, -half),
        "41": (half, -half),
    }
    return blocks, positions, corners


def hinge_experiment(mu=1.0, signs=(1, 1, -1, -1), per_edge=16, k_res=16,
                     t=1.0, width=12, margin=6, nk=48, window=0.3,
                     corner_radius=4.5, inversion=None):
    """Infinite-square loop Chern table and slab hinge spectral flows."""
    if inversion is None:
        inversion = (signs[0] == -signs[2] and signs[1] == -signs[3])
    model = model_hinge_square(mu, signs, inversion=inversion)
    cert = gap_on(model, [c for c in model.space.cells
                          if model.space.cell(c).dim <= 1],
                  k_res=10, omega_res=33)
    lam_axis = {1: 1, 2: 2, 3: -1, 4: -2}
    table = {}
    for a in range(1, 5):
        b = a % 4 + 1
        kd = (3, lam_axis[a], lam_axis[b])
        r = loop_chern(model, f"cell{a}{b}", "even", kd, per_edge=per_edge,
                       k_res=k_res)
        table[f"cell{a}{b}"] = r.value
    blocks, positions, corners = hinge_slab_blocks(model, t, width, margin)
    dim = positions.shape[0]

    def fiber(k):
        h = sp.csr_matrix((dim, dim), dtype=complex)
        for m, b in blocks.items():
            h = h + b * np.exp(1j * float(k) * m)
        return h

    ks = np.arange(nk) * 2 * np.pi / nk
    eigensystems = [_window_eigs(fiber(k), window) for k in ks]
    flows = {}
    for name, c in corners.items():
        dist = np.linalg.norm(positions - np.asarray(c), axis=1)
        wt = (dist <= corner_radius).astype(float)
        flows[name] = spectral_flow(eigensystems, ks=ks, window=window,
                                    site_weights=wt, k_builder=fiber)
    return {
        "skeleton_gap": cert.min_gap,
        "loop_table": table,
        "flows": flows,
        "expected_pattern": [0.5 * (signs[a - 1] - signs[a % 4]) for a in
                             range(1, 5)],
    }
