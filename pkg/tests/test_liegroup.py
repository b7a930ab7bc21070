"""Lie algebras, exp-word group elements, and the tangent group.

Oracles: the rotation algebra's adjoint representation is checked against
the closed-form Rodrigues rotation formula, and the infinitesimal coadjoint
action against a finite-difference derivative of the group-level one.
"""

import numpy as np
import pytest

from algebroids.liegroup import (AlgebraError, LieAlgebra, TGElement, coad_TG,
                                 tg_bracket)


@pytest.fixture(scope="module")
def so3():
    return LieAlgebra.so3()


def rodrigues(axis, theta):
    axis = np.asarray(axis, float)
    n = np.linalg.norm(axis)
    if n == 0:
        return np.eye(3)
    u = axis / n
    K = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
    return np.eye(3) + np.sin(theta) * K + (1 - np.cos(theta)) * K @ K


def test_so3_bracket_is_cross_product(so3, rng):
    for _ in range(10):
        a, b = rng.uniform(-2, 2, size=(2, 3))
        assert np.allclose(so3.bracket(a, b), np.cross(a, b), atol=1e-12)


def test_so3_Ad_matches_rodrigues(so3, rng):
    for _ in range(10):
        axis = rng.uniform(-1, 1, size=3)
        t = rng.uniform(-2, 2)
        g = so3.exp(axis, t)
        theta = t * np.linalg.norm(axis)
        assert np.allclose(g.Ad, rodrigues(axis, theta), atol=1e-10)


def test_group_word_algebra(so3, rng):
    g = so3.exp(rng.uniform(-1, 1, 3), 0.7)
    h = so3.exp(rng.uniform(-1, 1, 3), -0.3)
    assert np.allclose((g * h).Ad, g.Ad @ h.Ad, atol=1e-12)
    assert np.allclose((g * g.inverse()).Ad, np.eye(3), atol=1e-12)
    mu = rng.uniform(-1, 1, 3)
    assert np.allclose(g.inverse().Coad(g.Coad(mu)), mu, atol=1e-12)


def test_coad_is_derivative_of_Coad(so3, rng):
    h = 1e-5
    for _ in range(5):
        xi = rng.uniform(-1, 1, 3)
        mu = rng.uniform(-1, 1, 3)
        fd = (so3.exp(xi, h).Coad(mu) - so3.exp(xi, -h).Coad(mu)) / (2 * h)
        assert np.allclose(fd, so3.coad(xi, mu), atol=1e-8)


def test_Coad_is_left_action(so3, rng):
    g = so3.exp(rng.uniform(-1, 1, 3), 0.9)
    k = so3.exp(rng.uniform(-1, 1, 3), -0.4)
    mu = rng.uniform(-1, 1, 3)
    assert np.allclose((g * k).Coad(mu), g.Coad(k.Coad(mu)), atol=1e-10)


def test_isotropy_subalgebra(so3):
    iso = so3.isotropy_subalgebra((0.0, 0.0, 1.0))
    assert iso.shape == (3, 1)
    assert np.allclose(np.abs(iso[:, 0]), [0, 0, 1], atol=1e-12)
    assert LieAlgebra.abelian(2).isotropy_subalgebra((1.0, 2.0)).shape == (2, 2)


def test_from_sparse_rejects_non_jacobi():
    with pytest.raises(AlgebraError):
        LieAlgebra.from_sparse(
            3, [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1), (0, 1, 0, 1)]
        )


# -- tangent group TG = G x g ----------------------------------------------

def test_tg_product_identity_and_associativity(so3, rng):
    def rand_elem():
        return TGElement(so3.exp(rng.uniform(-1, 1, 3), rng.uniform(-1, 1)),
                         tuple(rng.uniform(-1, 1, 3)))

    e = TGElement.identity(so3)
    p, q, r = rand_elem(), rand_elem(), rand_elem()
    mu = (rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))

    for left, right in (((p * e), p), ((e * p), p),
                        ((p * q) * r, p * (q * r))):
        a = coad_TG(left, mu)
        b = coad_TG(right, mu)
        assert np.allclose(a[0], b[0], atol=1e-10)
        assert np.allclose(a[1], b[1], atol=1e-10)


def test_coad_TG_is_left_action(so3, rng):
    p = TGElement(so3.exp(rng.uniform(-1, 1, 3), 0.5),
                  tuple(rng.uniform(-1, 1, 3)))
    q = TGElement(so3.exp(rng.uniform(-1, 1, 3), -0.8),
                  tuple(rng.uniform(-1, 1, 3)))
    mu = (rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
    a = coad_TG(p * q, mu)
    b = coad_TG(p, coad_TG(q, mu))
    assert np.allclose(a[0], b[0], atol=1e-10)
    assert np.allclose(a[1], b[1], atol=1e-10)


def test_tg_bracket_jacobi(so3, rng):
    def add(p, q):
        return (p[0] + q[0], p[1] + q[1])

    ps = [(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)) for _ in range(3)]
    p, q, r = ps
    total = add(
        add(tg_bracket(so3, p, tg_bracket(so3, q, r)),
            tg_bracket(so3, q, tg_bracket(so3, r, p))),
        tg_bracket(so3, r, tg_bracket(so3, p, q)),
    )
    assert np.allclose(total[0], 0, atol=1e-10)
    assert np.allclose(total[1], 0, atol=1e-10)


def test_coad_TG_infinitesimal_matches_tg_bracket(so3, rng):
    # derivative of Coad^TG along a one-parameter family in the xi slot is
    # the dual of the tangent-algebra bracket in that direction
    eta = rng.uniform(-1, 1, 3)
    mu1, mu2 = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    h = 1e-6
    p_plus = TGElement(so3.identity(), tuple(h * eta))
    p_minus = TGElement(so3.identity(), tuple(-h * eta))
    fd1 = (coad_TG(p_plus, (mu1, mu2))[0]
           - coad_TG(p_minus, (mu1, mu2))[0]) / (2 * h)
    assert np.allclose(fd1, so3.coad(eta, mu2), atol=1e-6)
