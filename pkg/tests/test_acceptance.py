"""Acceptance gate: the headline identities at pinned tolerances.

One test per criterion; each prints a single pass line once all of its
assertions hold.  Residual tolerances are stated inline and must not be
weakened.
"""

import time

import numpy as np
import pytest
import sympy as sp

from algebroids import fixtures as fx
from algebroids.algebroid import anchor_apply, bracket, check_axioms
from algebroids.hamiltonian import (base_poisson, check_hamiltonian_action,
                                    check_JT_equivariance,
                                    check_level_subspaces, linear_poisson)
from algebroids.liegroup import TGElement
from algebroids.lifts import (check_cv_relations, check_flow_duality,
                              check_psi_equivariance, linear_fiber_function)
from algebroids.prolong import build_prolongation, liouville_section, omega_A, omega_local
from algebroids.reduce import (check_general_embedding, check_mu_zero_iso,
                               check_reduced_dynamics, check_reduced_poisson,
                               check_shifted_iso, check_well_defined,
                               magnetic_term, reduce_fiber)
from algebroids.symexpr import canonicalize

AXIOM_FIXTURES = ("fix-tm2", "fix-so3", "fix-act", "fix-mag", "fix-so3-act")
RATIONAL_FIXTURES = ("fix-tm2", "fix-so3", "fix-act")


def _ok(n, msg):
    print(f"[criterion {n:>2}] PASS - {msg}")


def test_criterion_01_axiom_suite():
    t0 = time.monotonic()
    for name in AXIOM_FIXTURES:
        records = check_axioms(fx.load_fixture(name).model)
        assert records and all(r.passed for r in records), name
        if name in RATIONAL_FIXTURES:
            assert all(r.residual == 0.0 for r in records), name
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    _ok(1, f"axioms on {len(AXIOM_FIXTURES)} fixtures in {elapsed:.1f}s, "
           "exact residuals on rational fixtures")


def test_criterion_02_lift_suite(rng):
    for name in AXIOM_FIXTURES:
        assert check_cv_relations(fx.load_fixture(name).model) == {
            "cc": True, "cv": True, "vv": True
        }, name
    x1, x2 = sp.symbols("x1 x2")
    X = fx.load_fixture("fix-tm2").model.section((x2, -x1 + x2**2 / 4))
    duality_samples = [
        (rng.uniform(-0.5, 0.5), rng.uniform(-1, 1, 2),
         rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)) for _ in range(10)
    ]
    dual_res = max(check_flow_duality(X, duality_samples))
    assert dual_res < 1e-6
    act = fx.load_fixture("fix-act").action
    eq_samples = [
        (rng.uniform(-0.5, 0.5), rng.uniform(-1, 1, 1),
         rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 2)) for _ in range(50)
    ]
    eq_res = max(check_psi_equivariance(act, eq_samples))
    assert eq_res < 1e-6
    _ok(2, f"lift identities; flow duality {dual_res:.2e}, "
           f"equivariance {eq_res:.2e} over 50 tuples")


def test_criterion_03_linear_poisson_correspondence():
    for name in AXIOM_FIXTURES:
        model = fx.load_fixture(name).model
        n = model.rank
        ys = sp.symbols([f"y{i+1}" for i in range(n)])
        # three defining relations, symbolically
        for I in range(min(n, 3)):
            for J in range(min(n, 3)):
                X, Y = model.basis_section(I), model.basis_section(J)
                Xh = linear_fiber_function(X, dual=True)
                Yh = linear_fiber_function(Y, dual=True)
                brh = linear_fiber_function(bracket(X, Y), dual=True)
                assert canonicalize(linear_poisson(model, Xh, Yh) + brh) == 0
                if model.dim:
                    f = model.coord_symbols[0]
                    assert canonicalize(linear_poisson(model, Xh, f)
                                        + anchor_apply(X, f)) == 0
        if model.dim >= 2:
            f, g = model.coord_symbols[:2]
            assert linear_poisson(model, f, g) == 0
        # base Poisson of the prolongation reproduces the linear bracket
        Om = omega_A(build_prolongation(model))
        probes = list(ys[:2]) + ([model.coord_symbols[0]] if model.dim else [])
        for F in probes:
            for G in probes:
                assert canonicalize(base_poisson(Om, F, G)
                                    - linear_poisson(model, F, G)) == 0
    # sign convention pinned by the classical canonical bracket
    tm2 = fx.load_fixture("fix-tm2").model
    Om = omega_A(build_prolongation(tm2))
    x1, y1 = sp.symbols("x1 y1")
    assert base_poisson(Om, x1, y1) == 1
    _ok(3, "defining relations and base == linear bracket on all fixtures; "
           "{x1,y1} = +1")


def test_criterion_04_canonical_cover(rng):
    for name in AXIOM_FIXTURES:
        p = build_prolongation(fx.load_fixture(name).model)
        Om = omega_A(p)  # raises if -d(liouville) != local block formula
        assert (Om.omega - omega_local(p)).is_zero(), name
    # constant-bracket pairing formula at 20 sampled points
    so3 = fx.load_fixture("fix-so3")
    Om = omega_A(build_prolongation(so3.model))
    alg = so3.algebra
    worst = 0.0
    for _ in range(20):
        eta0 = rng.uniform(-2, 2, 3)
        xi, xi2 = rng.uniform(-1, 1, (2, 3))
        eta, eta2 = rng.uniform(-1, 1, (2, 3))
        v = np.concatenate([xi, eta])
        w = np.concatenate([xi2, eta2])
        got = v @ Om.matrix_at(eta0) @ w
        want = eta2 @ xi - eta @ xi2 + eta0 @ alg.bracket(xi, xi2)
        worst = max(worst, abs(got - want))
    assert worst < 1e-12
    _ok(4, f"canonical section matches -d(liouville) symbolically; "
           f"constant-bracket pairing residual {worst:.2e} at 20 samples")


def test_criterion_05_momentum_suite(rng):
    for name in fx.ACTION_FIXTURES:
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        samples = [(rng.uniform(-0.4, 0.4),
                    rng.uniform(-1, 1, setup.act.algebra.dim),
                    rng.uniform(-1, 1, setup.p.model.dim)) for _ in range(5)]
        records = check_hamiltonian_action(setup.Om, setup.lifted, setup.J,
                                           samples)
        assert records and all(r.passed for r in records), name
        # tangent-group equivariance of J^T
        d = setup.act.algebra.dim
        jt_samples = [
            (TGElement(setup.act.algebra.exp(rng.uniform(-1, 1, d),
                                             rng.uniform(-0.4, 0.4)),
                       tuple(rng.uniform(-1, 1, d))),
             rng.uniform(-1, 1, setup.p.model.dim + setup.p.model.rank))
            for _ in range(5)
        ]
        assert max(check_JT_equivariance(setup.J, jt_samples)) < 1e-6, name
        # subspace identities at 30 level-set points
        points = fx.sample_level_points(name, 30, rng)
        lem = check_level_subspaces(setup.Om, setup.lifted, setup.J,
                                    data.mu, points, tol=1e-8)
        assert lem and all(r.passed for r in lem), name
    _ok(5, "Hamiltonian actions, tangent-group equivariance < 1e-6, "
           "subspace identities at 30 points per fixture")


def test_criterion_06_point_reduction(rng):
    t0 = time.monotonic()
    for name in fx.ACTION_FIXTURES:
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        for pt in fx.sample_level_points(name, 5, rng):
            # reduce_fiber raises if the kernel identity, evenness or
            # nondegeneracy fail
            rf = reduce_fiber(setup.Om, setup.lifted, setup.J, data.mu, pt)
            assert rf.dim % 2 == 0
            assert abs(np.linalg.det(rf.omega_mu)) > 1e-10
            wd = check_well_defined(setup.Om, setup.lifted, setup.J,
                                    data.mu, pt, trials=5)
            assert wd and all(r.passed for r in wd), name
    so3 = fx.reduction_setup("fix-so3")
    rf = reduce_fiber(so3.Om, so3.lifted, so3.J, (0.0, 0.0, 1.0),
                      np.array([0.0, 0.0, -1.0]))
    assert rf.dim == 2  # coadjoint-orbit dimension of the unit sphere
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    _ok(6, f"even nondegenerate reduced fibers, 5-fold resampling stable, "
           f"orbit dimension 2, in {elapsed:.1f}s")


def test_criterion_07_reduced_bracket_comparison(rng):
    for name in ("fix-tm2-translation", "fix-so3"):
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        points = fx.sample_level_points(name, 30, rng)
        records = check_reduced_poisson(setup, data.invariant_pairs,
                                        data.mu, points)
        assert records and all(r.passed for r in records), name
        assert max(r.residual for r in records) < 1e-6, name
    _ok(7, "reduced bracket equals bracket-of-extensions to 1e-6 "
           "at 30 points per fixture")


def test_criterion_08_zero_level_identification(rng):
    for name in ("fix-tm2-translation", "fix-act"):
        setup = fx.reduction_setup(name)
        zero = np.zeros(setup.act.algebra.dim)
        points = fx.sample_level_points(name, 30, rng, mu=zero)
        records = check_mu_zero_iso(setup, points)
        assert records and all(r.passed for r in records), name
        assert max(r.residual for r in records) < 1e-8, name
        # dimension bookkeeping against the quotient prolongation
        n0 = setup.quotient.model.rank
        rf = reduce_fiber(setup.Om, setup.lifted, setup.J, zero, points[0])
        assert rf.dim == 2 * n0, name
    _ok(8, "zero-level reduction isomorphic to the quotient prolongation "
           "to 1e-8, dimensions 2*rank(quotient)")


def test_criterion_09_magnetic_identification(rng):
    setup = fx.reduction_setup("fix-mag")
    data = fx.suite_data("fix-mag")
    mag = magnetic_term(setup, data.mu)
    points = fx.sample_level_points("fix-mag", 30, rng)
    with_B = check_shifted_iso(setup, mag, data.mu, points)
    assert with_B and all(r.passed for r in with_B)
    assert max(r.residual for r in with_B) < 1e-8
    without_B = check_shifted_iso(setup, mag, data.mu, points,
                                  drop_magnetic=True)
    # difference isolation: the residual equals the dropped field strength
    for r in without_B:
        assert not r.passed
        assert abs(r.residual - abs(data.mu[0])) < 1e-8
    _ok(9, "magnetic identification to 1e-8; dropped term leaves residual "
           "equal to the field strength")


def test_criterion_10_isotropy_embedding(rng):
    setup = fx.reduction_setup("fix-so3-act")
    data = fx.suite_data("fix-so3-act")
    points = fx.sample_level_points("fix-so3-act", 30, rng)
    records = check_general_embedding(setup, data.mu, data.iso_basis, points)
    assert records and all(r.passed for r in records), [
        (r.check_id, r.detail) for r in records if not r.passed
    ]
    assert max(r.residual for r in records) < 1e-8
    # codimension 2 = dim(g) - dim(g_mu) on the rotation fixture
    rf = reduce_fiber(setup.Om, setup.lifted, setup.J, data.mu, points[0])
    assert rf.dim == 2
    assert 3 - len(data.iso_basis) == 2

    ab = fx.reduction_setup("fix-tm2-translation")
    ab_data = fx.suite_data("fix-tm2-translation")
    ab_points = fx.sample_level_points("fix-tm2-translation", 10, rng)
    ab_records = check_general_embedding(ab, ab_data.mu, ab_data.iso_basis,
                                         ab_points)
    assert ab_records and all(r.passed for r in ab_records)
    _ok(10, "embedding injective with codimension 2 and exact pullback to "
            "1e-8; isomorphism in the abelian case")


def test_criterion_11_dynamics():
    t0 = time.monotonic()
    # rigid-body Casimir conservation over T=10
    so3 = fx.load_fixture("fix-so3").model
    Om = omega_A(build_prolongation(so3))
    y1, y2, y3 = sp.symbols("y1 y2 y3")
    h = y1**2 / 2 + y2**2 / 4 + y3**2 / 6
    from algebroids.reduce import integrate_hamiltonian
    _, traj = integrate_hamiltonian(Om, h, np.array([0.3, 1.0, 0.2]), 10.0)
    casimir = (np.asarray(traj) ** 2).sum(axis=1)
    drift = float(np.max(np.abs(casimir - casimir[0])))
    assert drift < 1e-8
    # momentum conservation and projected-trajectory agreement over T=5
    for name in ("fix-tm2-translation", "fix-mag"):
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        f, f_red = data.hamiltonian
        mag = magnetic_term(setup, data.mu) if name == "fix-mag" else None
        records = check_reduced_dynamics(setup, f, f_red, data.mu,
                                         np.asarray(data.x0, float), 5.0,
                                         step=1e-3, mag=mag)
        by_id = {r.check_id: r for r in records}
        assert by_id["momentum-conservation"].residual < 1e-6, name
        assert by_id["projected-trajectory"].residual < 1e-5, name
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    _ok(11, f"Casimir drift {drift:.1e} over T=10; momentum and projection "
            f"tolerances met over T=5; {elapsed:.1f}s")
