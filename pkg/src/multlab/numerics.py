"""Dense-matrix utilities: vec/unvec, Kronecker products, Choi matrices, spans.

Conventions, fixed once and used everywhere:

* ``vec`` stacks columns: ``vec(A)[i + j*rows] = A[i, j]``.  Consequently
  ``vec(A @ X @ B) = kron(B.T, A) @ vec(X)``.
* ``kron(A, B)`` indexes the left factor slowly:
  ``kron(A, B)[(i, k), (j, l)] = A[i, j] * B[k, l]`` where the row index is
  ``i * rows(B) + k``.
* The Choi matrix of a linear map Phi on d x d matrices is
  ``C[(i, k), (j, l)] = Phi(E_ij)[k, l]``, i.e. ``C = sum_ij kron(E_ij, Phi(E_ij))``.

All operators are numpy arrays with complex dtype.  Tolerances are absolute
unless stated otherwise; ``DEFAULT_TOL`` is the package-wide default for
membership and consistency checks.
"""

from __future__ import annotations

import numpy as np

from .errors import MembershipError, ValidationError

DEFAULT_TOL = 1e-10

# Hard ceiling on the side length of any materialized Kronecker product.
MAX_KRON_DIM = 20000


def as_square(a, name="operator"):
    """Coerce to a complex square 2-d array, validating the shape."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(a):
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def vec(a):
    """Column-stacking vectorization: vec(A)[i + j*rows] = A[i, j]."""
    return np.asarray(a).flatten(order="F")


def unvec(v, shape=None):
    """Inverse of :func:`vec`.  ``shape`` defaults to square."""
    v = np.asarray(v)
    if shape is None:
        d = int(round(np.sqrt(v.size)))
        if d * d != v.size:
            raise ValidationError(f"cannot unvec length {v.size} without a shape")
        shape = (d, d)
    return v.reshape(shape, order="F")


def kron(a, b):
    """Kronecker product with the left factor indexed slowly.

    kron(A, B)[(i, k), (j, l)] = A[i, j] * B[k, l].
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] * b.shape[0] > MAX_KRON_DIM or a.shape[1] * b.shape[1] > MAX_KRON_DIM:
        raise ValidationError(
            f"kron result {a.shape[0] * b.shape[0]} exceeds cap {MAX_KRON_DIM}"
        )
    return np.kron(a, b)


def operator_norm(a):
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(a), 2))


def frob_norm(a):
    """Frobenius (Hilbert-Schmidt) norm."""
    return float(np.linalg.norm(np.asarray(a)))


def hs_inner(a, b):
    """Hilbert-Schmidt inner product tr(a* b), conjugate-linear in ``a``."""
    return complex(np.vdot(a, b))


def choi_matrix(superop, dim):
    """Choi matrix of a map given as its action on vec'd matrices.

    ``superop`` is the dim^2 x dim^2 matrix with Phi(X) = unvec(superop @ vec(X)).
    Returns C with C[(i, k), (j, l)] = Phi(E_ij)[k, l].
    """
    d = dim
    L = np.asarray(superop, dtype=complex)
    if L.shape != (d * d, d * d):
        raise ValidationError(f"superoperator must be {d * d} x {d * d}, got {L.shape}")
    # Column vec(E_ij) sits at index i + j*d; entry (k + l*d) of it is Phi(E_ij)[k, l].
    L4 = L.reshape(d, d, d, d)  # [l, k][j, i] after row/col split, C order
    return L4.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def choi_to_superop(choi, dim):
    """Inverse of :func:`choi_matrix`."""
    d = dim
    C = np.asarray(choi, dtype=complex)
    if C.shape != (d * d, d * d):
        raise ValidationError(f"Choi matrix must be {d * d} x {d * d}, got {C.shape}")
    C4 = C.reshape(d, d, d, d)  # [i, k][j, l]
    return C4.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def is_psd(a, tol=DEFAULT_TOL):
    """Whether a Hermitian matrix is positive semidefinite up to ``tol``."""
    h = (np.asarray(a) + dagger(a)) / 2
    if frob_norm(h - np.asarray(a)) > max(tol, 1e-9 * (1 + frob_norm(h))):
        return False
    return bool(np.linalg.eigvalsh(h)[0] >= -tol)


class DenseSpan:
    """A linear span of matrices with explicit basis, supporting coordinates.

    The basis is a stacked array of shape (dim, rows, cols).  For an
    orthogonal basis coordinates are Hilbert-Schmidt projections; otherwise a
    pseudoinverse of the Gram matrix is used.  ``coeffs`` optionally enforces
    membership within a tolerance.
    """

    def __init__(self, basis, tol=DEFAULT_TOL):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 3:
            raise ValidationError(f"basis must be stacked matrices, got ndim {basis.ndim}")
        self.basis = basis
        self.dim = basis.shape[0]
        self.shape = basis.shape[1:]
        flat = basis.reshape(self.dim, -1)
        gram = flat.conj() @ flat.T
        norms = np.sqrt(np.real(np.diag(gram)))
        if np.any(norms < tol):
            raise ValidationError("basis contains a (near-)zero matrix")
        off = gram - np.diag(np.diag(gram))
        self._flat = flat
        if frob_norm(off) <= tol * max(1.0, float(norms.max()) ** 2):
            # Orthogonal: dual basis is the basis scaled by 1/norm^2.
            self._dual = flat.conj() / np.real(np.diag(gram))[:, None]
        else:
            rank = np.linalg.matrix_rank(gram, tol=max(tol, 1e-12) * self.dim)
            if rank < self.dim:
                raise ValidationError(
                    f"basis is linearly dependent (rank {rank} of {self.dim})"
                )
            self._dual = np.linalg.solve(gram, flat.conj())

    @property
    def ambient_dim(self):
        return self.shape[0] * self.shape[1]

    def basis_matrix(self, k):
        return self.basis[k]

    def coeffs(self, x, tol=DEFAULT_TOL, require=False):
        """Coordinates of ``x`` in the basis; optionally enforce membership."""
        x = np.asarray(x, dtype=complex)
        c = self._dual @ x.reshape(-1)
        if require:
            rebuilt = (c @ self._flat).reshape(self.shape)
            res = frob_norm(x - rebuilt)
            if res > tol * max(1.0, frob_norm(x)):
                raise MembershipError("operator lies outside the span", res)
        return c

    def matrix(self, c):
        """The span element with coordinates ``c``."""
        c = np.asarray(c, dtype=complex)
        return (c @ self._flat).reshape(self.shape)

    def project(self, x):
        return self.matrix(self.coeffs(x))

    def residual(self, x):
        """Frobenius distance from ``x`` to the span."""
        return frob_norm(np.asarray(x, dtype=complex) - self.project(x))

    def contains(self, x, tol=DEFAULT_TOL):
        return self.residual(x) <= tol * max(1.0, frob_norm(x))


class SpanMap:
    """A linear map between two matrix spans, stored as a coordinate matrix.

    ``coords`` has shape (codomain.dim, domain.dim):
    applying to a domain basis element e_k yields the codomain element with
    coordinates ``coords[:, k]``.
    """

    def __init__(self, domain, codomain, coords):
        coords = np.asarray(coords, dtype=complex)
        if coords.shape != (codomain.dim, domain.dim):
            raise ValidationError(
                f"coords shape {coords.shape} != ({codomain.dim}, {domain.dim})"
            )
        self.domain = domain
        self.codomain = codomain
        self.coords = coords

    @classmethod
    def identity(cls, span):
        return cls(span, span, np.eye(span.dim))

    @classmethod
    def from_function(cls, domain, codomain, f, require=True, tol=DEFAULT_TOL):
        """Build from a callable acting on ambient matrices."""
        cols = [
            codomain.coeffs(f(domain.basis_matrix(k)), tol=tol, require=require)
            for k in range(domain.dim)
        ]
        return cls(domain, codomain, np.stack(cols, axis=1))

    def apply(self, x, tol=DEFAULT_TOL, require=True):
        c = self.domain.coeffs(x, tol=tol, require=require)
        return self.codomain.matrix(self.coords @ c)

    def __matmul__(self, other):
        if other.codomain is not self.domain and other.codomain.dim != self.domain.dim:
            raise ValidationError("span maps not composable")
        return SpanMap(other.domain, self.codomain, self.coords @ other.coords)

    def __add__(self, other):
        return SpanMap(self.domain, self.codomain, self.coords + other.coords)

    def __sub__(self, other):
        return SpanMap(self.domain, self.codomain, self.coords - other.coords)

    def __mul__(self, scalar):
        return SpanMap(self.domain, self.codomain, scalar * self.coords)

    __rmul__ = __mul__

    def coords_distance(self, other):
        """Operator-norm distance between coordinate matrices."""
        return operator_norm(self.coords - other.coords)
