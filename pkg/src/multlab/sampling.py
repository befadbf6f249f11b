"""Seeded random inputs for the property suites.

All randomness flows through an explicit :class:`numpy.random.Generator`;
the package-wide default seed is fixed so reports and tests are
reproducible.  Builders only assemble existing samplers into the symbol
containers used by the verification suites.
"""

import numpy as np

from .algebras import sample_cbmap
from .errors import ValidationError
from .herzschur import FiberSymbol
from .schur import SchurSymbol

DEFAULT_SEED = 0x5EED


def make_rng(seed=DEFAULT_SEED):
    """Deterministic generator; accepts ints or strings like "0x5eed"."""
    if isinstance(seed, str):
        seed = int(seed, 0)
    return np.random.default_rng(seed)


def random_function_vector(rng, n):
    """Complex values of a function on a group of order ``n``."""
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def random_scalar_grid(rng, nx, ny=None):
    """Complex grid with independent standard-normal entries."""
    ny = nx if ny is None else ny
    return rng.standard_normal((nx, ny)) + 1j * rng.standard_normal((nx, ny))


def random_schur_symbol(rng, algebra, nx, ny=None, terms=2):
    """Grid of independent random maps on a shared coefficient algebra."""
    ny = nx if ny is None else ny
    maps = [
        [sample_cbmap(rng, algebra, terms=terms) for _ in range(ny)]
        for _ in range(nx)
    ]
    return SchurSymbol(maps)


def random_fiber_symbol(rng, model, terms=2):
    """Group-indexed random fibers on the model's coefficient algebra."""
    fibers = [
        sample_cbmap(rng, model.algebra, terms=terms)
        for _ in model.group.elements
    ]
    return FiberSymbol(model.group, fibers)


def random_bisymbol(rng, n):
    """Random coefficient table over (dual group) x (group)."""
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def toeplitz_grid(group, values):
    """Scalar grid whose kernel entry at (row t, column s) is values[t s^-1].

    In symbol-grid orientation (x = column block, y = row block) the cell
    (x, y) holds values[y x^-1]: this is the transferred grid of the scalar
    fiber vector ``values`` under the trivial action.
    """
    v = np.asarray(values, dtype=complex).reshape(-1)
    n = group.order
    if v.size != n:
        raise ValidationError(f"need {n} values, got {v.size}")
    grid = np.empty((n, n), dtype=complex)
    for x in group.elements:
        for y in group.elements:
            grid[x, y] = v[group.mult(y, group.inv(x))]
    return grid
