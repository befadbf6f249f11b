"""Block matrix algebras, completely bounded maps on them, group actions, modules.

A *block algebra* is a direct sum of full matrix blocks sitting inside
M_D with D the sum of the block sizes: all matrices supported on the diagonal
blocks.  Its canonical basis is the list of matrix units enumerated block by
block, row-major inside each block; coordinates in that basis are exact
entry reads, so membership checks are cheap and sharp.

A :class:`CbMap` is a linear map on the ambient matrices that must send the
algebra into itself (validated at construction).  Internally it is stored
either as Kraus pairs (L_i, R_i) acting by x -> sum_i L_i x R_i*, or as the
vectorized D^2 x D^2 matrix; the Choi matrix follows the convention of
:mod:`multlab.numerics`.

A :class:`GroupAction` realizes each group element as conjugation by a
unitary of the form U_r P_r where U_r lies in the algebra and P_r permutes
equal-sized blocks.  The homomorphism property is verified on algebra
coordinates, not on ambient matrices: the same implementing unitaries can be
an action on a subalgebra while failing to compose on the full matrix ring.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ActionError, MembershipError, ValidationError
from .numerics import (
    DEFAULT_TOL,
    DenseSpan,
    choi_matrix,
    dagger,
    frob_norm,
    is_psd,
    kron,
    unvec,
    vec,
)

MAX_ALGEBRA_DIM = 16


class CheckResult(NamedTuple):
    """Outcome of a verification: flag, worst residual, tolerance used."""

    ok: bool
    residual: float
    tol: float


class BlockAlgebra:
    """Direct sum of full matrix blocks inside M_D."""

    def __init__(self, blocks, max_dim=MAX_ALGEBRA_DIM):
        blocks = tuple(int(b) for b in blocks)
        if not blocks or any(b < 1 for b in blocks):
            raise ValidationError(f"block sizes must be positive, got {blocks}")
        total = sum(blocks)
        if max_dim is not None and total > max_dim:
            raise ValidationError(f"total dimension {total} exceeds cap {max_dim}")
        self.blocks = blocks
        self.total_dim = total
        self.offsets = np.concatenate([[0], np.cumsum(blocks)])
        units = []
        positions = []
        for b, d in enumerate(blocks):
            off = self.offsets[b]
            for p in range(d):
                for q in range(d):
                    e = np.zeros((total, total), dtype=complex)
                    e[off + p, off + q] = 1.0
                    units.append(e)
                    positions.append((b, p, q, off + p, off + q))
        self.dim = len(units)
        self._positions = positions
        self._index = {(b, p, q): i for i, (b, p, q, _, _) in enumerate(positions)}
        self.span = DenseSpan(np.stack(units))
        self.identity = np.eye(total, dtype=complex)

    def __repr__(self):
        return f"BlockAlgebra(blocks={self.blocks})"

    def unit(self, i):
        return self.span.basis[i]

    def unit_position(self, i):
        """(block, row-in-block, col-in-block, global row, global col)."""
        return self._positions[i]

    def unit_index(self, block, p, q):
        return self._index[(block, p, q)]

    def unit_product(self, i, j):
        """Index of unit(i) @ unit(j), or None if the product vanishes."""
        b1, p1, q1, _, _ = self._positions[i]
        b2, p2, q2, _, _ = self._positions[j]
        if b1 != b2 or q1 != p2:
            return None
        return self._index[(b1, p1, q2)]

    def adjoint_index(self, i):
        b, p, q, _, _ = self._positions[i]
        return self._index[(b, q, p)]

    def coeffs(self, x, require=False, tol=DEFAULT_TOL):
        return self.span.coeffs(x, tol=tol, require=require)

    def element(self, c):
        return self.span.matrix(c)

    def residual(self, x):
        return self.span.residual(x)

    def contains(self, x, tol=DEFAULT_TOL):
        return self.span.contains(x, tol=tol)


def make_algebra(blocks, max_dim=MAX_ALGEBRA_DIM):
    """Build the block algebra with the given block sizes."""
    return BlockAlgebra(blocks, max_dim=max_dim)


class CbMap:
    """A linear map on M_D that preserves a block algebra.

    ``coords`` is the map's matrix on the algebra's unit basis and is the
    representation everything downstream consumes; the ambient ``matrix``
    and ``choi`` forms are materialized on demand.
    """

    def __init__(self, algebra, kraus=None, mat=None, coords=None, check=True, tol=DEFAULT_TOL):
        if (kraus is None) == (mat is None):
            raise ValidationError("provide exactly one of kraus pairs or a matrix")
        self.algebra = algebra
        self._kraus = kraus
        self._mat = None if mat is None else np.asarray(mat, dtype=complex)
        d = algebra.total_dim
        if self._mat is not None and self._mat.shape != (d * d, d * d):
            raise ValidationError(f"matrix must be {d * d} x {d * d}")
        self._choi = None
        if coords is not None:
            self.coords = np.asarray(coords, dtype=complex)
        else:
            images = [self._raw_apply(algebra.unit(i)) for i in range(algebra.dim)]
            cols = []
            for i, img in enumerate(images):
                try:
                    cols.append(algebra.coeffs(img, require=check, tol=tol))
                except MembershipError as err:
                    raise MembershipError(
                        f"image of basis unit {i} leaves the algebra", err.residual
                    ) from None
            self.coords = np.stack(cols, axis=1)

    def _raw_apply(self, x):
        if self._kraus is not None:
            out = np.zeros_like(np.asarray(x, dtype=complex))
            for left, right in self._kraus:
                out += left @ x @ dagger(right)
            return out
        return unvec(self._mat @ vec(x))

    @classmethod
    def from_kraus(cls, algebra, lefts, rights=None, check=True):
        if rights is None:
            rights = lefts
        if len(lefts) != len(rights):
            raise ValidationError("left and right Kraus lists differ in length")
        pairs = [
            (np.asarray(l, dtype=complex), np.asarray(r, dtype=complex))
            for l, r in zip(lefts, rights)
        ]
        return cls(algebra, kraus=pairs, check=check)

    @classmethod
    def from_matrix(cls, algebra, mat, check=True):
        return cls(algebra, mat=mat, check=check)

    @classmethod
    def from_unit_images(cls, algebra, images, check=True):
        """Define the map by its values on the algebra's unit basis.

        Outside the algebra the map acts as zero on the orthogonal complement.
        """
        images = [np.asarray(im, dtype=complex) for im in images]
        if len(images) != algebra.dim:
            raise ValidationError(f"need {algebra.dim} images, got {len(images)}")
        im_stack = np.stack([vec(im) for im in images], axis=1)
        un_stack = np.stack([vec(algebra.unit(i)) for i in range(algebra.dim)], axis=1)
        mat = im_stack @ un_stack.conj().T
        return cls(algebra, mat=mat, check=check)

    @classmethod
    def from_coords(cls, algebra, coords, check=False):
        images = [algebra.element(np.asarray(coords)[:, i]) for i in range(algebra.dim)]
        return cls.from_unit_images(algebra, images, check=check)

    @classmethod
    def identity(cls, algebra):
        return cls.from_kraus(algebra, [algebra.identity], check=False)

    @classmethod
    def zero(cls, algebra):
        return cls.from_kraus(algebra, [np.zeros_like(algebra.identity)], check=False)

    @classmethod
    def ad(cls, algebra, u, check=True):
        """Conjugation x -> u x u*."""
        return cls.from_kraus(algebra, [u], check=check)

    @property
    def matrix(self):
        if self._mat is None:
            d = self.algebra.total_dim
            mat = np.zeros((d * d, d * d), dtype=complex)
            for left, right in self._kraus:
                mat += kron(right.conj(), left)
            self._mat = mat
        return self._mat

    @property
    def choi(self):
        if self._choi is None:
            self._choi = choi_matrix(self.matrix, self.algebra.total_dim)
        return self._choi

    def apply(self, x):
        return self._raw_apply(np.asarray(x, dtype=complex))

    def is_cp(self, tol=1e-9):
        return is_psd(self.choi, tol=tol)

    def is_unital(self, tol=DEFAULT_TOL):
        return frob_norm(self.apply(self.algebra.identity) - self.algebra.identity) <= tol

    def __matmul__(self, other):
        if self._kraus is not None and other._kraus is not None and (
            len(self._kraus) * len(other._kraus) <= 64
        ):
            pairs = [
                (la @ lb, ra @ rb)
                for la, ra in self._kraus
                for lb, rb in other._kraus
            ]
            out = CbMap(self.algebra, kraus=pairs, coords=self.coords @ other.coords)
        else:
            out = CbMap(
                self.algebra,
                mat=self.matrix @ other.matrix,
                coords=self.coords @ other.coords,
            )
        return out

    def __add__(self, other):
        if self._kraus is not None and other._kraus is not None:
            return CbMap(
                self.algebra,
                kraus=self._kraus + other._kraus,
                coords=self.coords + other.coords,
            )
        return CbMap(
            self.algebra, mat=self.matrix + other.matrix, coords=self.coords + other.coords
        )

    def __mul__(self, scalar):
        if self._kraus is not None:
            pairs = [(scalar * l, r) for l, r in self._kraus]
            return CbMap(self.algebra, kraus=pairs, coords=scalar * self.coords)
        return CbMap(self.algebra, mat=scalar * self.matrix, coords=scalar * self.coords)

    __rmul__ = __mul__

    def coords_distance(self, other):
        return float(np.linalg.norm(self.coords - other.coords, 2))


def cbmap_from_kraus(algebra, lefts, rights=None):
    """Kraus-form constructor; rights default to lefts (completely positive)."""
    return CbMap.from_kraus(algebra, lefts, rights)


def _perm_matrix(algebra, perm):
    """Block-permutation unitary moving block j's content to block perm[j]."""
    blocks = algebra.blocks
    k = len(blocks)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(k)):
        raise ValidationError(f"not a permutation of {k} blocks: {perm}")
    for j in range(k):
        if blocks[perm[j]] != blocks[j]:
            raise ValidationError(
                f"block permutation maps size {blocks[j]} onto size {blocks[perm[j]]}"
            )
    out = np.zeros((algebra.total_dim, algebra.total_dim), dtype=complex)
    off = algebra.offsets
    for j, d in enumerate(blocks):
        out[off[perm[j]] : off[perm[j]] + d, off[j] : off[j] + d] = np.eye(d)
    return out


class GroupAction:
    """An action of a finite group on a block algebra by *-automorphisms.

    Element r acts as Ad(U_r P_r): an inner unitary from the algebra composed
    with a permutation of equal-sized blocks.  Validation checks, on algebra
    coordinates, that r=0 acts as the identity and that composition matches
    the group table; the offending pair is reported otherwise.
    """

    def __init__(self, group, algebra, unitaries=None, block_perms=None, tol=DEFAULT_TOL):
        n = group.order
        k = len(algebra.blocks)
        if unitaries is None:
            unitaries = [algebra.identity] * n
        if block_perms is None:
            block_perms = [list(range(k))] * n
        if len(unitaries) != n or len(block_perms) != n:
            raise ValidationError("need one unitary and one block permutation per element")
        self.group = group
        self.algebra = algebra
        ws = []
        for r in range(n):
            u = np.asarray(unitaries[r], dtype=complex)
            if not algebra.contains(u, tol=tol):
                raise MembershipError(
                    f"inner unitary for element {r} lies outside the algebra",
                    algebra.residual(u),
                )
            if frob_norm(dagger(u) @ u - algebra.identity) > tol * algebra.total_dim:
                raise ValidationError(f"matrix for element {r} is not unitary")
            ws.append(u @ _perm_matrix(algebra, block_perms[r]))
        self.inner_unitaries = [np.asarray(u, dtype=complex) for u in unitaries]
        self.block_perms = [list(int(j) for j in p) for p in block_perms]
        self._unitaries = ws
        self._coords = [self._conj_coords(w) for w in ws]
        ident = np.eye(algebra.dim)
        if np.linalg.norm(self._coords[0] - ident) > tol * algebra.dim:
            raise ActionError("identity element does not act as the identity", pair=(0, 0))
        for r in range(n):
            for s in range(n):
                err = np.linalg.norm(
                    self._coords[r] @ self._coords[s] - self._coords[group.mult(r, s)]
                )
                if err > tol * algebra.dim:
                    raise ActionError(
                        f"composition fails at pair ({r}, {s})", pair=(r, s), residual=float(err)
                    )

    def _conj_coords(self, w):
        alg = self.algebra
        cols = []
        for i in range(alg.dim):
            _, _, _, gp, gq = alg.unit_position(i)
            image = np.outer(w[:, gp], w[:, gq].conj())
            cols.append(alg.coeffs(image))
        return np.stack(cols, axis=1)

    def unitary(self, r):
        """The implementing unitary U_r P_r on the ambient space."""
        return self._unitaries[r]

    def coords(self, r):
        """Matrix of alpha_r on the algebra's unit basis."""
        return self._coords[r]

    def apply(self, r, x):
        w = self._unitaries[r]
        return w @ np.asarray(x, dtype=complex) @ dagger(w)

    def apply_inverse(self, r, x):
        return self.apply(self.group.inv(r), x)

    def cbmap(self, r):
        w = self._unitaries[r]
        return CbMap(self.algebra, kraus=[(w, w)], coords=self._coords[r])

    def fixed_point_basis(self, tol=1e-8):
        """Orthonormal basis (in HS inner product) of the fixed-point subalgebra."""
        avg = sum(self._coords) / self.group.order
        avg = (avg + dagger(avg)) / 2
        vals, vecs = np.linalg.eigh(avg)
        keep = vals > 1 - max(tol, 1e-8)
        return np.stack(
            [self.algebra.element(vecs[:, j]) for j in np.flatnonzero(keep)]
        )


def make_action(group, algebra, unitaries=None, block_perms=None, tol=DEFAULT_TOL):
    """Validated group action from inner unitaries and block permutations."""
    return GroupAction(group, algebra, unitaries=unitaries, block_perms=block_perms, tol=tol)


def trivial_action(group, algebra):
    return GroupAction(group, algebra)


def translation_action(group):
    """The group acting on functions over itself: position s moves to rs."""
    algebra = make_algebra((1,) * group.order, max_dim=None)
    perms = [[group.mult(r, s) for s in group.elements] for r in group.elements]
    return GroupAction(group, algebra, block_perms=perms)


def ad_action(group, algebra, unitaries, tol=DEFAULT_TOL):
    """Inner action r -> Ad(U_r); the U_r need only compose projectively."""
    return GroupAction(group, algebra, unitaries=unitaries, tol=tol)


class ModuleStructure:
    """A *-subalgebra acting on its parent algebra by multiplication.

    ``basis`` spans the acting subalgebra; validation checks the span is
    closed under products and adjoints and lies inside the parent.
    ``two_sided`` selects bimodule (left and right) versus left-only checks.
    """

    def __init__(self, algebra, basis, two_sided=True, tol=DEFAULT_TOL):
        self.algebra = algebra
        self.two_sided = bool(two_sided)
        mats = [np.asarray(b, dtype=complex) for b in basis]
        for i, b in enumerate(mats):
            if not algebra.contains(b, tol=tol):
                raise ValidationError(f"acting element {i} lies outside the parent algebra")
        self.span = DenseSpan(np.stack(mats))
        for i, a in enumerate(mats):
            if self.span.residual(dagger(a)) > tol:
                raise ValidationError(f"acting span is not *-closed (element {i})")
            for j, b in enumerate(mats):
                if self.span.residual(a @ b) > tol:
                    raise ValidationError(
                        f"acting span is not closed under products (pair {i}, {j})"
                    )
        self.basis = mats
        self.dim = len(mats)

    def element(self, i):
        return self.basis[i]

    def left_coords(self, b):
        """Coordinate matrix on the parent of left multiplication by b."""
        alg = self.algebra
        cols = [alg.coeffs(b @ alg.unit(i)) for i in range(alg.dim)]
        return np.stack(cols, axis=1)

    def right_coords(self, b):
        alg = self.algebra
        cols = [alg.coeffs(alg.unit(i) @ b) for i in range(alg.dim)]
        return np.stack(cols, axis=1)


def is_module_map(phi, mod, tol=DEFAULT_TOL):
    """Check phi(b a) = b phi(a) (and the right-handed twin if two-sided)."""
    alg = mod.algebra
    worst = 0.0
    for b in mod.basis:
        for i in range(alg.dim):
            a = alg.unit(i)
            worst = max(worst, frob_norm(phi.apply(b @ a) - b @ phi.apply(a)))
            if mod.two_sided:
                worst = max(worst, frob_norm(phi.apply(a @ b) - phi.apply(a) @ b))
    return CheckResult(worst <= tol, worst, tol)


def fixed_point_module(action, two_sided=True, tol=1e-8):
    """The fixed-point subalgebra of an action, as a module over its parent."""
    return ModuleStructure(action.algebra, list(action.fixed_point_basis(tol=tol)), two_sided)


def commutant_basis(algebra, elements, tol=1e-9):
    """Orthonormal basis of the commutant of ``elements`` inside the algebra."""
    m = algebra.dim
    rows = []
    for b in elements:
        b = np.asarray(b, dtype=complex)
        lc = np.stack([algebra.coeffs(b @ algebra.unit(i)) for i in range(m)], axis=1)
        rc = np.stack([algebra.coeffs(algebra.unit(i) @ b) for i in range(m)], axis=1)
        rows.append(lc - rc)
    system = np.concatenate(rows, axis=0)
    _, svals, vh = np.linalg.svd(system)
    null_mask = np.concatenate([svals, np.zeros(m - len(svals))]) <= tol
    basis = [algebra.element(vh[j].conj()) for j in np.flatnonzero(null_mask)]
    return np.stack(basis)


def sample_element(rng, algebra, hermitian=False):
    """Random algebra element with independent complex Gaussian coordinates."""
    c = rng.standard_normal(algebra.dim) + 1j * rng.standard_normal(algebra.dim)
    x = algebra.element(c)
    if hermitian:
        x = (x + dagger(x)) / 2
    return x


def sample_unitary(rng, dim):
    """Haar-ish random unitary via phase-fixed QR of a complex Gaussian."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def sample_cbmap(rng, algebra, terms=2, cp=False, pool=None):
    """Random CbMap with Kraus factors from the algebra (or a given pool).

    Factors are normalized to unit Frobenius norm so map norms stay O(1).
    With ``cp=True`` the right factors equal the left ones.
    """

    def draw():
        if pool is None:
            x = sample_element(rng, algebra)
        else:
            c = rng.standard_normal(len(pool)) + 1j * rng.standard_normal(len(pool))
            x = sum(ci * p for ci, p in zip(c, pool))
        return x / max(frob_norm(x), 1e-12)

    lefts = [draw() for _ in range(terms)]
    rights = lefts if cp else [draw() for _ in range(terms)]
    return CbMap.from_kraus(algebra, lefts, rights)
