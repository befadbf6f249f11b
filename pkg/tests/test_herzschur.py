"""Tests for fiberwise multipliers of crossed products.

The defining oracle is independent of the span machinery: applying the
multiplier to ``element_of(a, r)`` (built by direct block placement) must give
``element_of(F(r)(a), r)``.  Fiber preservation is cross-checked two ways —
structurally on the coordinate matrix and dynamically through the coaction
identity delta(T x) = (T tensor id)(delta x).
"""

import numpy as np
import pytest

from multlab import algebras as al
from multlab import crossed as cr
from multlab import groups as gr
from multlab import herzschur as hz
from multlab.errors import CompatibilityError, NotMultiplierError, ValidationError


def sign_model():
    g = gr.make_cyclic(2)
    m = al.make_algebra((2,))
    act = al.make_action(g, m, unitaries=[np.eye(2), np.diag([1.0, -1.0])])
    return cr.CrossedProductModel(act)


def z3_ad_model():
    g = gr.make_cyclic(3)
    m = al.make_algebra((2,))
    w = np.exp(2j * np.pi / 3)
    act = al.make_action(g, m, unitaries=[np.diag([1.0, w**r]) for r in range(3)])
    return cr.CrossedProductModel(act)


def random_symbol(rng, model):
    fibers = [al.sample_cbmap(rng, model.algebra) for _ in model.group.elements]
    return hz.FiberSymbol(model.group, fibers)


def test_fiber_symbol_validation():
    model = sign_model()
    with pytest.raises(ValidationError):
        hz.FiberSymbol(model.group, [al.CbMap.identity(model.algebra)])
    v = [2.0, -1.0]
    sym = hz.FiberSymbol.from_scalar_vector(model.group, model.algebra, v)
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    for r in model.group.elements:
        np.testing.assert_allclose(sym.fiber(r).apply(a), v[r] * a, atol=1e-13)


def test_multiplier_map_defining_relation():
    model = z3_ad_model()
    rng = np.random.default_rng(71)
    sym = random_symbol(rng, model)
    tmap = hz.multiplier_map(model, sym)
    for r in model.group.elements:
        for _ in range(2):
            a = al.sample_element(rng, model.algebra)
            got = tmap.apply(model.element_of(a, r))
            want = model.element_of(sym.fiber(r).apply(a), r)
            np.testing.assert_allclose(got, want, atol=1e-10)


def test_multiplier_map_coords_structure():
    model = sign_model()
    rng = np.random.default_rng(72)
    sym = random_symbol(rng, model)
    tmap = hz.multiplier_map(model, sym)
    m = model.algebra.dim
    n = model.group.order
    s4 = tmap.coords.reshape(m, n, m, n)
    for r in model.group.elements:
        np.testing.assert_allclose(s4[:, r, :, r], sym.fiber(r).coords, atol=1e-13)
        for t in model.group.elements:
            if t != r:
                np.testing.assert_allclose(s4[:, r, :, t], 0, atol=1e-13)
    ident = hz.multiplier_map(
        model, hz.FiberSymbol.from_scalar_vector(model.group, model.algebra, np.ones(n))
    )
    np.testing.assert_allclose(ident.coords, np.eye(m * n), atol=1e-13)


def test_multiplier_composition_is_fiberwise():
    model = z3_ad_model()
    rng = np.random.default_rng(73)
    s1 = random_symbol(rng, model)
    s2 = random_symbol(rng, model)
    comp = hz.multiplier_map(model, s1) @ hz.multiplier_map(model, s2)
    fibers = [s1.fiber(r) @ s2.fiber(r) for r in model.group.elements]
    want = hz.multiplier_map(model, hz.FiberSymbol(model.group, fibers))
    np.testing.assert_allclose(comp.coords, want.coords, atol=1e-12)


def test_verify_multiplier_accepts():
    model = z3_ad_model()
    rng = np.random.default_rng(74)
    tmap = hz.multiplier_map(model, random_symbol(rng, model))
    check = hz.verify_multiplier(model, tmap, tol=1e-9)
    assert check.ok
    assert check.residual <= 1e-9


def _fiber_shift_map(model):
    """Coordinate map sending fiber r to fiber r+1: linear but not fiberwise."""
    m = model.algebra.dim
    n = model.group.order
    coords = np.zeros((m * n, m * n), dtype=complex)
    s4 = coords.reshape(m, n, m, n)
    for r in model.group.elements:
        s4[:, model.group.mult(1, r), :, r] = np.eye(m)
    return coords


def test_verify_multiplier_rejects_fiber_shift():
    model = sign_model()
    coords = _fiber_shift_map(model)
    check = hz.verify_multiplier(model, coords, tol=1e-9)
    assert not check.ok
    assert check.residual > 0.5
    with pytest.raises(NotMultiplierError):
        hz.extract_fiber_symbol(model, coords)


def test_extract_fiber_symbol_roundtrip():
    model = z3_ad_model()
    rng = np.random.default_rng(75)
    sym = random_symbol(rng, model)
    tmap = hz.multiplier_map(model, sym)
    got, residual = hz.extract_fiber_symbol(model, tmap)
    assert residual <= 1e-12
    for r in model.group.elements:
        assert got.fiber(r).coords_distance(sym.fiber(r)) <= 1e-12


def test_scale_fibers():
    model = z3_ad_model()
    rng = np.random.default_rng(76)
    sym = random_symbol(rng, model)
    u = np.exp(2j * np.pi * np.arange(3) / 3)
    scaled = hz.scale_fibers(sym, u)
    a = al.sample_element(rng, model.algebra)
    for r in model.group.elements:
        np.testing.assert_allclose(
            scaled.fiber(r).apply(a), u[r] * sym.fiber(r).apply(a), atol=1e-12
        )
    tmap = hz.multiplier_map(model, scaled)
    for r in model.group.elements:
        got = tmap.apply(model.element_of(a, r))
        want = u[r] * model.element_of(sym.fiber(r).apply(a), r)
        np.testing.assert_allclose(got, want, atol=1e-10)


def test_lift_module_action_invariant_element():
    model = sign_model()
    b = np.diag([2.0, 3.0])  # invariant under Ad(diag(1,-1))
    sym = hz.lift_module_action(model, b)
    rng = np.random.default_rng(77)
    a = al.sample_element(rng, model.algebra)
    for r in model.group.elements:
        np.testing.assert_allclose(sym.fiber(r).apply(a), b @ a, atol=1e-12)
    check = hz.hs_module_check(model, b)
    assert check.ok
    assert check.residual <= 1e-9


def test_lift_module_action_rejects_noninvariant():
    model = sign_model()
    b = np.array([[0.0, 1.0], [1.0, 0.0]])  # flipped in sign by the action
    with pytest.raises(CompatibilityError):
        hz.lift_module_action(model, b)


def test_ambient_multiplication_matches_lift():
    model = sign_model()
    b = np.diag([1.0, -4.0])
    sym = hz.lift_module_action(model, b)
    tmap = hz.multiplier_map(model, sym)
    amb = np.kron(b, np.eye(model.group.order))
    for k in range(model.span.dim):
        x = model.span.basis[k]
        np.testing.assert_allclose(tmap.apply(x), amb @ x, atol=1e-10)
