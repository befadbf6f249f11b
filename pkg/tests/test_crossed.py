"""Tests for crossed-product models and the duality isomorphisms.

The isomorphisms are constructed by generator-word extension; the closed
forms used here as oracles are derived independently:

* first duality map:  b (x) E_st  ->  rep(alpha_s(b)) u_{s t^-1} (x) E_st
* second duality map: rep_beta(a (x) delta_p) u_r  ->  a (x) E_{p, r^-1 p}

where rep is the twisted embedding and u the ambient translation unitary.
"""

import numpy as np
import pytest

from multlab import algebras as al
from multlab import crossed as cr
from multlab import groups as gr
from multlab import numerics as nm
from multlab.errors import ExtensionError, MembershipError


def sign_model():
    g = gr.make_cyclic(2)
    m = al.make_algebra((2,))
    act = al.make_action(g, m, unitaries=[np.eye(2), np.diag([1.0, -1.0])])
    return cr.CrossedProductModel(act)


def translation_model(n=3):
    g = gr.make_cyclic(n)
    return cr.CrossedProductModel(al.translation_action(g))


def test_basis_gram_is_scaled_identity():
    model = sign_model()
    flat = model.span.basis.reshape(model.span.dim, -1)
    gram = flat.conj() @ flat.T
    np.testing.assert_allclose(gram, model.group.order * np.eye(model.span.dim), atol=1e-12)


def test_covariance_relation():
    model = sign_model()
    rng = np.random.default_rng(41)
    a = al.sample_element(rng, model.algebra)
    for r in model.group.elements:
        u = model.translation_unitary(r)
        lhs = u @ model.algebra_rep(a) @ u.conj().T
        rhs = model.algebra_rep(model.action.apply(r, a))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_product_rule():
    model = translation_model(3)
    rng = np.random.default_rng(42)
    a = al.sample_element(rng, model.algebra)
    b = al.sample_element(rng, model.algebra)
    g = model.group
    for r in g.elements:
        for t in g.elements:
            lhs = model.element_of(a, r) @ model.element_of(b, t)
            rhs = model.element_of(a @ model.action.apply(r, b), g.mult(r, t))
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_span_closed_under_products_and_star():
    model = sign_model()
    span = model.span
    for i in range(span.dim):
        bi = span.basis_matrix(i)
        assert span.residual(bi.conj().T) < 1e-10
        for j in range(span.dim):
            assert span.residual(bi @ span.basis_matrix(j)) < 1e-10


def test_membership_rejects_outside_operator():
    model = sign_model()
    # I (x) E_01 has a single off-diagonal translation block: not in the span.
    e01 = np.zeros((2, 2))
    e01[0, 1] = 1.0
    x = nm.kron(np.eye(2), e01)
    with pytest.raises(MembershipError):
        model.coeffs(x, require=True)


def test_dirac_kernel_identity():
    # The basis element with symbol a at fiber r equals the kernel operator
    # k(s, t) = [s t^-1 = r] alpha_{s^-1}(a).
    model = translation_model(3)
    g = model.group
    rng = np.random.default_rng(43)
    a = al.sample_element(rng, model.algebra)
    for r in g.elements:
        direct = model.element_of(a, r)
        blocks = np.zeros((model.ambient_dim, model.ambient_dim), dtype=complex)
        b4 = blocks.reshape(
            model.algebra.total_dim, g.order, model.algebra.total_dim, g.order
        )
        for s in g.elements:
            for t in g.elements:
                if g.mult(s, g.inv(t)) == r:
                    b4[:, s, :, t] = model.action.apply_inverse(s, a)
        np.testing.assert_allclose(direct, blocks, atol=1e-12)


def test_coeffs_roundtrip_and_fibers():
    model = sign_model()
    rng = np.random.default_rng(44)
    c = rng.standard_normal(model.span.dim) + 1j * rng.standard_normal(model.span.dim)
    x = model.span.matrix(c)
    np.testing.assert_allclose(model.coeffs(x), c, atol=1e-11)
    # Fiber reads match the flat coordinates.
    m = model.algebra.dim
    for r in model.group.elements:
        np.testing.assert_allclose(
            model.fiber_coeffs(x, r), c.reshape(m, model.group.order)[:, r], atol=1e-11
        )


def test_dual_coaction_on_basis():
    model = translation_model(3)
    g = model.group
    delta = cr.dual_coaction(model)
    for r in g.elements:
        b = model.element_of(model.algebra.identity, r)
        lam = gr.left_regular(g, r)
        np.testing.assert_allclose(delta.apply(b), nm.kron(b, lam), atol=1e-12)


def test_coaction_identity():
    model = sign_model()
    rng = np.random.default_rng(45)
    delta = cr.dual_coaction(model)
    c = rng.standard_normal(model.span.dim) + 1j * rng.standard_normal(model.span.dim)
    x = model.span.matrix(c)
    check = delta.coaction_identity_check(x)
    assert check.ok, check
    assert check.residual < 1e-10


def test_second_dual_action_formula():
    model = sign_model()
    big = cr.second_dual_action(model)
    rng = np.random.default_rng(46)
    a = al.sample_element(rng, model.algebra)
    g = model.group
    for r in g.elements:
        t = rng.integers(g.order)
        e = np.zeros((g.order, g.order))
        e[int(t), g.mult(int(t), 1) if g.order > 1 else 0] = 1.0
        x = nm.kron(a, e)
        # alpha_r (x) Ad(right translation): E_st -> E_{s r^-1, t r^-1}.
        lhs = big.apply(r, x)
        rho = gr.right_regular(g, r)
        rhs = nm.kron(model.action.apply(r, a), rho @ e @ rho.conj().T)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_second_dual_fixed_points_are_the_crossed_span():
    for model in [sign_model(), translation_model(3)]:
        big = cr.second_dual_action(model)
        fixed = big.fixed_point_basis()
        assert fixed.shape[0] == model.span.dim
        for f in fixed:
            assert model.span.residual(f) < 1e-9


def test_double_span_roundtrip():
    model = sign_model()
    dspan = cr.DoubleSpan(model)
    rng = np.random.default_rng(47)
    c = rng.standard_normal(dspan.dim) + 1j * rng.standard_normal(dspan.dim)
    x = dspan.matrix(c)
    got, residual = dspan.coeffs_with_residual(x)
    np.testing.assert_allclose(got, c, atol=1e-10)
    assert residual < 1e-10
    # A perturbation outside the span shows up as residual.
    # A perturbation sticks out (partly, since single entries overlap the span).
    y = x.copy()
    y[0, -1] += 0.5
    _, res2 = dspan.coeffs_with_residual(y)
    assert res2 > 0.3


def test_first_duality_generator_relations():
    model = sign_model()
    phi = cr.takai_duality(model)
    rep = phi.report
    assert rep["rank"] == model.span.dim * model.group.order
    for key in ("algebra_gen", "translation_gen", "function_gen"):
        assert rep["relations"][key] < 1e-9
    assert rep["multiplicative"] < 1e-9
    assert rep["star"] < 1e-9
    assert rep["unital"] < 1e-9


def test_first_duality_closed_form():
    model = sign_model()
    g = model.group
    phi = cr.takai_duality(model)
    rng = np.random.default_rng(48)
    b = al.sample_element(rng, model.algebra)
    n = g.order
    for s in g.elements:
        for t in g.elements:
            e = np.zeros((n, n))
            e[s, t] = 1.0
            x = nm.kron(b, e)
            r = g.mult(s, g.inv(t))
            expected = nm.kron(
                model.element_of(model.action.apply(s, b), r), e
            )
            np.testing.assert_allclose(phi.apply(x), expected, atol=1e-9)
            np.testing.assert_allclose(phi.inverse_apply(expected), x, atol=1e-9)


def test_first_duality_nonabelian():
    g = gr.make_symmetric(3)
    model = cr.CrossedProductModel(al.translation_action(g))
    phi = cr.takai_duality(model)
    assert phi.report["rank"] == model.span.dim * g.order
    assert phi.report["multiplicative"] < 1e-8


def test_second_duality_relations_and_closed_form():
    g = gr.make_cyclic(3)
    m = al.make_algebra((2,))
    psi = cr.stone_von_neumann(m, g)
    assert psi.report["rank"] == m.dim * g.order * g.order
    assert psi.report["multiplicative"] < 1e-9
    rng = np.random.default_rng(49)
    a = al.sample_element(rng, m)
    n = g.order
    for p in g.elements:
        for r in g.elements:
            x = psi.domain_model.element_of(
                _beta_element(psi.domain_model.algebra, m, a, p), r
            )
            e = np.zeros((n, n))
            e[p, g.mult(g.inv(r), p)] = 1.0
            np.testing.assert_allclose(psi.apply(x), nm.kron(a, e), atol=1e-9)


def _beta_element(beta_algebra, m, a, slot):
    """The element of M (x) functions(G) equal to a at position ``slot``, else 0."""
    d = m.total_dim
    out = np.zeros((beta_algebra.total_dim, beta_algebra.total_dim), dtype=complex)
    out[slot * d : (slot + 1) * d, slot * d : (slot + 1) * d] = a
    return out


def test_extension_error_when_generators_insufficient():
    model = sign_model()
    dspan = cr.DoubleSpan(model)
    mb = model.mb_algebra
    # Only the algebra generators: their words never leave one fiber.
    gens = [g for g in cr.takai_generators(model) if g[0].startswith("algebra")]
    with pytest.raises(ExtensionError):
        cr.word_extension(mb.span, dspan, gens, target_dim=dspan.dim)
