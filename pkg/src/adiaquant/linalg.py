"""Complex linear-algebra kernel shared by every other module.

Pauli and Clifford generator sets, Hermitian eigensolves (dense and sparse
shift-invert), matrix functions through the spectral theorem, a matrix
logarithm with a rotated branch cut, and the Fermi projection / Fermi
unitary of a gapped Hamiltonian.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "LinalgError",
    "GaplessError",
    "SparseHermitian",
    "pauli",
    "kron",
    "clifford_generators",
    "eig_hermitian",
    "matrix_function",
    "matrix_log_gl",
    "fermi_projection",
    "fermi_unitary",
    "grading_permutation",
]

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
GAP_TOL = 1e-8        # spectral gap threshold around 0
DENSE_LIMIT = 4096    # largest dimension eig_hermitian will densify
CLIFFORD_MAX = 8
LOG_CUT_TOL = 1e-12   # distance of an eigenvalue to the branch cut


class LinalgError(ValueError):
    pass


class GaplessError(LinalgError):
    """Raised when an operation requires a spectral gap at zero."""


_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


def pauli(i):
    """Pauli matrix sigma_i, i in {0,1,2,3}, sigma_0 the identity."""
    if i not in (0, 1, 2, 3):
        raise LinalgError(f"pauli index must be 0..3, got {i}")
    return _PAULI[i].copy()


def kron(a, b):
    """Kronecker product of two complex matrices."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def clifford_generators(m):
    """m pairwise-anticommuting Hermitian involutions on C^(2^floor(m/2)).

    Jordan-Wigner construction; m = 1 returns [sigma_3] on C^2 so a chiral
    partner always exists on the same space.
    """
    if m < 1:
        raise LinalgError("need at least one generator")
    if m > CLIFFORD_MAX:
        raise LinalgError(f"clifford_generators capped at m <= {CLIFFORD_MAX}")
    if m == 1:
        return [pauli(3)]
    npairs = m // 2
    dim = 2 ** npairs
    gens = []
    for i in range(npairs):
        left = np.eye(1, dtype=complex)
        for _ in range(i):
            left = np.kron(left, _PAULI[3])
        right = np.eye(2 ** (npairs - i - 1), dtype=complex)
        gens.append(np.kron(np.kron(left, _PAULI[1]), right))
        gens.append(np.kron(np.kron(left, _PAULI[2]), right))
    if m % 2 == 1:
        odd = np.eye(1, dtype=complex)
        for _ in range(npairs):
            odd = np.kron(odd, _PAULI[3])
        gens.append(odd)
    assert all(g.shape == (dim, dim) for g in gens)
    return gens[:m]


def is_hermitian(a, tol=HERMITICITY_TOL):
    a = np.asarray(a)
    scale = max(np.abs(a).max(), 1.0)
    return np.abs(a - a.conj().T).max() <= tol * scale


def _require_hermitian(a, what="matrix"):
    if not is_hermitian(a):
        raise LinalgError(f"{what} is not hermitian")


class SparseHermitian:
    """Sparse Hermitian operator; only row <= col entries are stored.

    The lower triangle is the implicit conjugate mirror.  Entries added to
    the same key accumulate (assembly convenience); `validate` checks the
    type invariants afterwards.
    """

    def __init__(self, dim):
        self.dim = int(dim)
        self._data = {}

    def add(self, row, col, value):
        if row > col:
            row, col, value = col, row, np.conj(value)
        key = (row, col)
        self._data[key] = self._data.get(key, 0.0) + value

    def add_block(self, i, j, block, n):
        """Accumulate an n x n block at block-row i, block-col j.

        For i == j only the upper triangle of the (hermitian) block is
        stored; for i > j the call is folded into the mirrored block.
        """
        block = np.asarray(block, dtype=complex)
        if i > j:
            self.add_block(j, i, block.conj().T, n)
            return
        r0, c0 = i * n, j * n
        for a in range(n):
            bstart = a if i == j else 0
            for b in range(bstart, n):
                v = block[a, b]
                if v != 0.0:
                    self.add(r0 + a, c0 + b, v)

    def validate(self, tol=HERMITICITY_TOL):
        for (r, c), v in self._data.items():
            if r == c and abs(v.imag) > tol * max(1.0, abs(v)):
                raise LinalgError(f"diagonal entry ({r},{r}) not real: {v}")
        return self

    @property
    def nnz(self):
        return len(self._data)

    def to_coo(self):
        rows, cols, vals = [], [], []
        for (r, c), v in self._data.items():
            rows.append(r)
            cols.append(c)
            vals.append(v)
            if r != c:
                rows.append(c)
                cols.append(r)
                vals.append(np.conj(v))
        return sp.coo_matrix(
            (vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex
        )

    def to_csr(self):
        return self.to_coo().tocsr()

    def to_dense(self):
        return self.to_coo().toarray()


def eig_hermitian(h, k=None, tol=0):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian operator.

    Dense input: full spectrum via LAPACK.  SparseHermitian or scipy sparse
    input with k set: the k eigenpairs nearest 0 via shift-invert Lanczos.
    """
    if isinstance(h, SparseHermitian):
        if k is None and h.dim <= DENSE_LIMIT:
            h = h.to_dense()
        else:
            h = h.to_csr()
    if sp.issparse(h):
        if k is None:
            if h.shape[0] <= DENSE_LIMIT:
                h = h.toarray()
            else:
                raise LinalgError(
                    "full spectrum of a large sparse operator: pass k for the "
                    "eigenpairs nearest 0"
                )
        else:
            try:
                w, v = spla.eigsh(h.tocsc(), k=k, sigma=0.0, tol=tol)
            except spla.ArpackNoConvergence as exc:
                raise LinalgError(f"sparse eigensolve did not converge: {exc}")
            order = np.argsort(w)
            return w[order], v[:, order]
    h = np.asarray(h, dtype=complex)
    _require_hermitian(h)
    w, v = np.linalg.eigh(h)
    return w, v


def matrix_function(h, f):
    """f(H) for Hermitian H via the spectral theorem."""
    h = np.asarray(h, dtype=complex)
    _require_hermitian(h)
    w, v = np.linalg.eigh(h)
    fw = np.asarray([f(x) for x in w], dtype=complex)
    if not np.all(np.isfinite(fw)):
        raise LinalgError("scalar function undefined on an eigenvalue")
    return (v * fw) @ v.conj().T


def _log_rotated_cut(z):
    # principal-like log with the cut along the negative imaginary axis,
    # arg in (-pi/2, 3pi/2); negative real eigenvalues are admissible
    theta = np.angle(z)
    if theta < -np.pi / 2:
        theta += 2 * np.pi
    return np.log(np.abs(z)) + 1j * theta


def matrix_log_gl(a, tol=1e-9):
    """Matrix logarithm of an invertible matrix, cut on -i R_+.

    exp(result) reproduces the input to `tol` relative error; eigenvalues
    within LOG_CUT_TOL of the cut (or of 0) are rejected.
    """
    a = np.asarray(a, dtype=complex)
    lam, v = np.linalg.eig(a)
    if np.abs(lam).min() < LOG_CUT_TOL:
        raise LinalgError("matrix_log_gl: singular input")
    for z in lam:
        if z.imag < 0 and abs(z.real) <= LOG_CUT_TOL * abs(z):
            raise LinalgError("matrix_log_gl: eigenvalue on the branch cut")
    logs = np.array([_log_rotated_cut(z) for z in lam])
    out = v @ np.diag(logs) @ np.linalg.inv(v)
    from scipy.linalg import expm

    back = expm(out)
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(back - a).max() > tol * scale:
        raise LinalgError("matrix_log_gl: exp(log A) failed to reproduce A")
    return out


def fermi_projection(h, gap_tol=GAP_TOL):
    """Spectral projection of a Hermitian matrix onto eigenvalues < 0."""
    h = np.asarray(h, dtype=complex)
    _require_hermitian(h)
    w, v = np.linalg.eigh(h)
    if np.abs(w).min() < gap_tol:
        raise GaplessError(f"eigenvalue {np.abs(w).min():.2e} inside gap tolerance")
    neg = v[:, w < 0]
    return neg @ neg.conj().T


def grading_permutation(j_diag):
    """Permutation matrix P with P J P^T = diag(+1...,-1...) for a +-1 diagonal J."""
    d = np.asarray(j_diag)
    if d.ndim == 2:
        if np.abs(d - np.diag(np.diag(d))).max() > HERMITICITY_TOL:
            raise LinalgError("grading operator must be diagonal")
        d = np.real(np.diag(d))
    order = np.concatenate([np.where(d > 0)[0], np.where(d < 0)[0]])
    p = np.zeros((len(d), len(d)), dtype=complex)
    for new, old in enumerate(order):
        p[new, old] = 1.0
    return p


def fermi_unitary(h, j, gap_tol=GAP_TOL, chiral_tol=1e-10):
    """Fermi unitary u_F: the lower-left block of sign(H) in the J grading.

    Requires J H J = -H and J = diag(1_{N/2}, -1_{N/2}) (inputs already in
    the grading basis).
    """
    h = np.asarray(h, dtype=complex)
    j = np.asarray(j, dtype=complex)
    n = h.shape[0]
    if n % 2:
        raise LinalgError("chiral grading needs even dimension")
    half = n // 2
    expected = np.diag(np.concatenate([np.ones(half), -np.ones(half)]))
    if np.abs(j - expected).max() > HERMITICITY_TOL:
        raise LinalgError("J must be diag(1,...,-1,...); permute the basis first")
    scale = max(np.abs(h).max(), 1.0)
    if np.abs(j @ h @ j + h).max() > chiral_tol * scale:
        raise LinalgError("chiral symmetry violated: JHJ != -H")
    w, v = np.linalg.eigh(h)
    if np.abs(w).min() < gap_tol:
        raise GaplessError("fermi_unitary of a gapless Hamiltonian")
    sgn = (v * np.sign(w)) @ v.conj().T
    uf = sgn[half:, :half]
    err = np.abs(uf.conj().T @ uf - np.eye(half)).max()
    if err > 1e-9:
        raise LinalgError(f"fermi unitary not unitary (deviation {err:.2e})")
    return uf
