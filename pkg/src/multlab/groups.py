"""Finite groups as multiplication tables, their representations and duals.

A group of order n is a table ``T`` with ``T[r, s] = r*s`` over labels
``0..n-1``; label 0 is always the identity.  Validation checks the axioms
exhaustively and reports an offending witness on failure.

Regular representations act on l2(G) with basis indexed by group labels:
``left_regular(g, r)`` maps e_s to e_{rs} and ``right_regular(g, r)`` maps
e_s to e_{s r^-1}, so both are homomorphisms and commute with each other.

For abelian groups, :func:`dual_group` computes the character group exactly
by structure theory: pick a maximal-order element, split it off, recurse on
the quotient, and lift the quotient generators with a root correction.  The
characters come out as explicit roots of unity.
"""

from __future__ import annotations

from functools import reduce
from itertools import permutations as _permutations, product as _product

import numpy as np

from .errors import CayleyError, DualUnsupportedError, ValidationError
from .numerics import DenseSpan, SpanMap, kron

MAX_GROUP_ORDER = 24


class FiniteGroup:
    """A finite group presented by its full multiplication table."""

    def __init__(self, table, name=None, max_order=MAX_GROUP_ORDER):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValidationError(f"table must be square, got {table.shape}")
        n = table.shape[0]
        if n == 0:
            raise ValidationError("empty table")
        if max_order is not None and n > max_order:
            raise ValidationError(f"group order {n} exceeds cap {max_order}")
        if table.min() < 0 or table.max() >= n:
            raise ValidationError("table entries must be labels 0..n-1")
        if not (np.array_equal(table[0], np.arange(n)) and np.array_equal(table[:, 0], np.arange(n))):
            bad = int(np.argmax(table[0] != np.arange(n)))
            raise CayleyError("identity", (0, bad))
        left = table[table, :]   # left[r, s, t] = (rs)t
        right = table[:, table]  # right[r, s, t] = r(st)
        if not np.array_equal(left, right):
            r, s, t = np.argwhere(left != right)[0]
            raise CayleyError("associativity", (int(r), int(s), int(t)))
        inv = np.full(n, -1, dtype=np.int64)
        for r in range(n):
            zeros = np.flatnonzero(table[r] == 0)
            if zeros.size != 1:
                raise CayleyError("inverses", (r,))
            inv[r] = zeros[0]
        self.table = table
        self.order = n
        self.name = name or f"group{n}"
        self._inv = inv
        self._orders = None
        self._vn_span = None

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"

    def mult(self, r, s):
        return int(self.table[r, s])

    def inv(self, r):
        return int(self._inv[r])

    @property
    def elements(self):
        return range(self.order)

    @property
    def is_abelian(self):
        return bool(np.array_equal(self.table, self.table.T))

    def power(self, r, k):
        out, base = 0, r
        k = int(k)
        while k > 0:
            if k & 1:
                out = self.mult(out, base)
            base = self.mult(base, base)
            k >>= 1
        return out

    def element_orders(self):
        """Order of each element, as a list indexed by label."""
        if self._orders is None:
            orders = []
            for r in self.elements:
                k, x = 1, r
                while x != 0:
                    x = self.mult(x, r)
                    k += 1
                orders.append(k)
            self._orders = orders
        return list(self._orders)

    def vn_span(self):
        """Span of the left-translation unitaries, memoized."""
        if self._vn_span is None:
            self._vn_span = DenseSpan(
                np.stack([left_regular(self, r) for r in self.elements])
            )
        return self._vn_span


def make_cyclic(n, name=None):
    """The cyclic group of order n with addition mod n."""
    if n < 1:
        raise ValidationError("order must be positive")
    r = np.arange(n)
    return FiniteGroup((r[:, None] + r[None, :]) % n, name=name or f"Z{n}")


def direct_product(g, h, name=None):
    """Direct product with (a, b) labeled a*|h| + b."""
    m = h.order
    table = (g.table[:, None, :, None] * m + h.table[None, :, None, :]).reshape(
        g.order * m, g.order * m
    )
    return FiniteGroup(table, name=name or f"{g.name}x{h.name}")


def make_symmetric(n, name=None):
    """The symmetric group on n points (n <= 4), permutations in lex order.

    Composition is (p*q)(i) = p(q(i)); the stored ``permutations`` list maps
    labels to permutation tuples, identity first.
    """
    if not 1 <= n <= 4:
        raise ValidationError("symmetric groups supported for 1 <= n <= 4")
    perms = sorted(_permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    size = len(perms)
    table = np.empty((size, size), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            table[i, j] = index[tuple(p[q[k]] for k in range(n))]
    group = FiniteGroup(table, name=name or f"S{n}")
    group.permutations = perms
    return group


def left_regular(g, r):
    """Permutation unitary e_s -> e_{rs} on l2(G)."""
    out = np.zeros((g.order, g.order))
    for s in g.elements:
        out[g.mult(r, s), s] = 1.0
    return out


def right_regular(g, r):
    """Permutation unitary e_s -> e_{s r^-1}; commutes with left translations."""
    out = np.zeros((g.order, g.order))
    rinv = g.inv(r)
    for s in g.elements:
        out[g.mult(s, rinv), s] = 1.0
    return out


def mult_operator(g, values):
    """Multiplication by a function on G, as a diagonal operator."""
    values = np.asarray(values)
    if values.shape != (g.order,):
        raise ValidationError(f"expected {g.order} function values, got {values.shape}")
    return np.diag(values.astype(complex))


def _coset_quotient(g, subgroup):
    """Quotient of an abelian group by a subgroup, via minimal coset reps.

    Returns (quotient FiniteGroup, reps array mapping quotient labels to
    elements of g).
    """
    sub = sorted(subgroup)
    rep_of = {}
    for s in g.elements:
        coset = min(g.mult(s, b) for b in sub)
        rep_of[s] = coset
    reps = sorted(set(rep_of.values()))
    label = {rep: i for i, rep in enumerate(reps)}
    k = len(reps)
    table = np.empty((k, k), dtype=np.int64)
    for i, a in enumerate(reps):
        for j, b in enumerate(reps):
            table[i, j] = label[rep_of[g.mult(a, b)]]
    return FiniteGroup(table, name=f"{g.name}/sub", max_order=None), reps


def cyclic_decomposition(g):
    """Generators and orders realizing an abelian group as a product of cyclics.

    Returns [(b_1, m_1), ...] with m_1 >= m_2 >= ... (the invariant factors)
    such that every element is uniquely prod_i b_i^{e_i} with 0 <= e_i < m_i.
    """
    if not g.is_abelian:
        raise DualUnsupportedError(f"{g.name} is not abelian")
    if g.order == 1:
        return []
    orders = g.element_orders()
    b = int(np.argmax(orders))
    m = orders[b]
    powers = [0]
    while len(powers) < m:
        powers.append(g.mult(powers[-1], b))
    if m == g.order:
        return [(b, m)]
    power_index = {p: i for i, p in enumerate(powers)}
    quotient, reps = _coset_quotient(g, powers)
    decomp = [(b, m)]
    for q_gen, mu in cyclic_decomposition(quotient):
        c = reps[q_gen]
        # c^mu lands in <b>; being a mu-th power there, its exponent is a
        # multiple of mu, so dividing it out yields a true order-mu generator.
        t = power_index[g.power(c, mu)]
        if t % mu != 0:
            raise ValidationError("cyclic decomposition failed (impure subgroup)")
        c = g.mult(c, g.power(g.inv(b), t // mu))
        decomp.append((c, mu))
    return decomp


class DualGroup:
    """Character group of a finite abelian group.

    ``group`` is the dual as an abstract group (a product of cyclics matching
    the invariant factors), and ``characters[gamma, s]`` is the value of the
    gamma-th character at s, an exact root of unity.  Multiplication in
    ``group`` corresponds to pointwise multiplication of characters.
    """

    def __init__(self, source, group, characters, invariant_orders, generators):
        self.source = source
        self.group = group
        self.characters = characters
        self.invariant_orders = invariant_orders
        self.generators = generators

    def __repr__(self):
        return f"DualGroup(of={self.source.name}, orders={self.invariant_orders})"


def dual_group(g):
    """Compute the character group of an abelian group exactly."""
    decomp = cyclic_decomposition(g)
    n = g.order
    gens = [b for b, _ in decomp]
    sizes = [m for _, m in decomp]
    exponents = {}
    for e in _product(*(range(m) for m in sizes)):
        elem = 0
        for b, k in zip(gens, e):
            elem = g.mult(elem, g.power(b, k))
        if elem in exponents:
            raise ValidationError("cyclic decomposition is not a bijection")
        exponents[elem] = e
    if len(exponents) != n:
        raise ValidationError("cyclic decomposition does not cover the group")
    if sizes:
        dual = reduce(direct_product, [make_cyclic(m) for m in sizes])
    else:
        dual = make_cyclic(1)
    dual.name = f"dual({g.name})"
    exp_array = np.array([exponents[s] for s in g.elements], dtype=np.float64)
    if sizes:
        gamma_list = list(_product(*(range(m) for m in sizes)))
        gammas = np.array(gamma_list, dtype=np.float64)
        phases = (gammas / np.asarray(sizes, dtype=np.float64)) @ exp_array.T
        characters = np.exp(2j * np.pi * phases)
    else:
        characters = np.ones((1, 1), dtype=complex)
    return DualGroup(g, dual, characters, sizes, gens)


def vn_coproduct(g):
    """The map sending each translation unitary u_r to u_r (x) u_r.

    Domain is the span of translations in B(l2 G); codomain lives in
    B(l2 G (x) l2 G).  Applying it to anything outside the domain raises.
    """
    lams = [left_regular(g, r) for r in g.elements]
    codomain = DenseSpan(np.stack([kron(l, l) for l in lams]))
    return SpanMap(g.vn_span(), codomain, np.eye(g.order))


def linf_span(g):
    """Span of the diagonal one-point indicator operators on l2(G)."""
    basis = np.zeros((g.order, g.order, g.order), dtype=complex)
    for s in g.elements:
        basis[s, s, s] = 1.0
    return DenseSpan(basis)


def linf_coproduct(g):
    """The map taking a function f on G to the two-variable function f(st).

    Functions are diagonal operators; the output is diagonal on l2(G x G)
    with entry f(st) at index s*n + t.
    """
    n = g.order
    basis = np.zeros((n * n, n * n, n * n), dtype=complex)
    for k in range(n * n):
        basis[k, k, k] = 1.0
    codomain = DenseSpan(basis)
    coords = np.zeros((n * n, n), dtype=complex)
    for s in g.elements:
        for t in g.elements:
            coords[s * n + t, g.mult(s, t)] = 1.0
    return SpanMap(linf_span(g), codomain, coords)


def predual_map(g, tmap):
    """Matrix of the predual of a map on the translation span.

    ``tmap`` is either a SpanMap on ``g.vn_span()`` or its raw coordinate
    matrix ``C`` (so the map sends u_s to sum_r C[r, s] u_r).  The predual
    acts on function-value vectors u by the transpose: the pairing
    <x, u> = sum_r coeff_r(x) u(r) satisfies <T x, u> = <x, T_* u>.
    """
    coords = tmap.coords if isinstance(tmap, SpanMap) else np.asarray(tmap, dtype=complex)
    if coords.shape != (g.order, g.order):
        raise ValidationError(f"expected {g.order} x {g.order} coordinates")
    return coords.T.copy()


def vn_pairing(g, x, u):
    """Bilinear pairing of a translation-span operator with a function on G."""
    c = g.vn_span().coeffs(x)
    return complex(np.sum(c * np.asarray(u)))
