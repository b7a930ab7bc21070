"""Symplectic sections, Hamiltonian sections, base Poisson brackets, the
linear Poisson structure on A*, and momentum maps with their checks.

Sign conventions (fixed once, used everywhere downstream):
  * i_H Omega means Omega(H, .), i.e. (i_H Omega)_J = H^I Omega_IJ.
  * {f, g} = rho(H_g)(f).
These are pinned by the requirement that the tangent-algebroid fixture
reproduce the classical canonical bracket on the cotangent bundle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from . import symexpr
from .algebroid import (
    AlgebroidModel,
    CheckRecord,
    KFormField,
    SectionField,
    anchor_apply,
    bracket,
    d_A,
    interior,
    lie_derivative_form,
)
from .liegroup import LieAlgebra
from .lifts import LiftAction, fiber_names, flow, complete_lift_A
from .symexpr import ZeroTestConfig, canonicalize, is_zero

DET_TOL = 1e-10
RANK_RTOL = 1e-10
SUBSPACE_TOL = 1e-8
LEVEL_SET_TOL = 1e-9


class HamiltonianError(ValueError):
    pass


class SingularError(HamiltonianError):
    pass


class ConstantRankError(HamiltonianError):
    pass


@dataclass(frozen=True)
class SymplecticSection:
    """Nondegenerate closed 2-section, stored as its antisymmetric matrix."""

    model: AlgebroidModel
    omega: KFormField

    @classmethod
    def from_matrix(cls, model, entries):
        """entries: n x n nested antisymmetric matrix of expressions."""
        n = model.rank
        form = model.form(2)
        for I in range(n):
            for J in range(I + 1, n):
                e = canonicalize(entries[I][J])
                if not is_zero(canonicalize(entries[J][I] + e)):
                    raise HamiltonianError("matrix is not antisymmetric")
                form.set((I, J), e)
        return cls(model, form)

    @property
    def matrix(self):
        return self.omega.matrix()

    def matrix_at(self, x):
        fn = symexpr.lambdify(self.model.coord_symbols, self.matrix.tolist())
        return np.asarray(fn(*x), dtype=float)

    def is_closed(self, config=None):
        return d_A(self.omega).is_zero(config)

    def check_nondegenerate(self, points):
        """|det| > DET_TOL after row-norm scaling at every sampled point."""
        for x in points:
            M = self.matrix_at(x)
            norms = np.maximum(np.linalg.norm(M, axis=1), 1.0)
            if abs(np.linalg.det(M / norms[:, None])) <= DET_TOL:
                return False
        return True


def hamiltonian_section(Om: SymplecticSection, f) -> SectionField:
    """Section H with i_H Omega = d_A f, i.e. Omega_IJ H^I = (d_A f)_J.

    A symbolic inverse is attempted first; callers needing per-point values
    can fall back to hamiltonian_section_at.
    """
    model = Om.model
    n = model.rank
    M = Om.matrix
    df = d_A(model.form(0, {(): canonicalize(f)}))
    b = sp.Matrix([sp.sympify(df.get((J,))) for J in range(n)])
    try:
        H = M.T.solve(b)
    except Exception as exc:  # sympy raises on singular matrices
        raise SingularError(f"symbolic solve failed: {exc}") from exc
    return model.section([canonicalize(H[I]) for I in range(n)])


def hamiltonian_section_at(Om: SymplecticSection, f, x):
    """Numeric components of the Hamiltonian section at a base point."""
    model = Om.model
    df = d_A(model.form(0, {(): canonicalize(f)}))
    bfn = symexpr.lambdify(
        model.coord_symbols, [df.get((J,)) for J in range(model.rank)]
    )
    M = Om.matrix_at(x)
    if abs(np.linalg.det(M)) <= DET_TOL:
        raise SingularError(f"Omega singular at {x}")
    return np.linalg.solve(M.T, np.asarray(bfn(*x), dtype=float))


def base_poisson(Om: SymplecticSection, f, g):
    """{f, g} = rho(H_g)(f)."""
    Hg = hamiltonian_section(Om, g)
    return anchor_apply(Hg, f)


def linear_poisson(model: AlgebroidModel, F, G):
    """Fiberwise-polynomial Poisson bracket on A*:
    {F,G} = -C_IJ^K y_K dF/dy_I dG/dy_J
            - rho_I^j (dF/dy_I dG/dx^j - dG/dy_I dF/dx^j)."""
    ys = tuple(sp.Symbol(n) for n in fiber_names(model, dual=True))
    xs = model.coord_symbols
    F = sp.sympify(F)
    G = sp.sympify(G)
    if ys:
        for e in (F, G):
            try:
                sp.Poly(e, *ys)
            except sp.PolynomialError as exc:
                raise HamiltonianError(
                    "arguments must be polynomial in the fiber"
                ) from exc
    out = sp.Integer(0)
    n, m = model.rank, model.dim
    for I in range(n):
        for J in range(n):
            cy = sum(model.C[I][J][K] * ys[K] for K in range(n))
            out -= cy * sp.diff(F, ys[I]) * sp.diff(G, ys[J])
    for I in range(n):
        for j in range(m):
            out -= model.rho[I][j] * (
                sp.diff(F, ys[I]) * sp.diff(G, xs[j])
                - sp.diff(G, ys[I]) * sp.diff(F, xs[j])
            )
    return canonicalize(out)


# ---------------------------------------------------------------------------
# Momentum maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentumMap:
    """J: M -> g*, componentwise J_a over the base coordinates."""

    action: LiftAction
    components: tuple

    @classmethod
    def make(cls, action, components):
        comps = tuple(canonicalize(c) for c in components)
        if len(comps) != action.algebra.dim:
            raise HamiltonianError("J needs one component per algebra basis element")
        return cls(action, comps)

    @property
    def model(self):
        return self.action.model

    def value_at(self, x):
        fn = symexpr.lambdify(self.model.coord_symbols, list(self.components))
        return np.asarray(fn(*x), dtype=float)

    def jacobian(self):
        """dJ_a/dx^i as a d x m matrix of expressions."""
        xs = self.model.coord_symbols
        return tuple(
            tuple(canonicalize(sp.diff(c, x)) for x in xs)
            for c in self.components
        )

    def jacobian_at(self, x):
        fn = symexpr.lambdify(self.model.coord_symbols,
                              [list(r) for r in self.jacobian()])
        return np.asarray(fn(*x), dtype=float)

    def tj_rho_at(self, x):
        """Matrix of T_xJ o rho_x : A_x -> g* (d x n)."""
        rho_fn = symexpr.lambdify(self.model.coord_symbols,
                                  [list(r) for r in self.model.rho])
        rho = np.asarray(rho_fn(*x), dtype=float)  # n x m
        return self.jacobian_at(x) @ rho.T


def check_hamiltonian_action(Om: SymplecticSection, act: LiftAction,
                             J: MomentumMap, samples=None, step=1e-3,
                             config=None):
    """Three-part Hamiltonian-action check.

    (a) L_{psi(e_a)} Omega = 0 for every algebra basis element (infinitesimal
        invariance), symbolic;
    (b) i_{psi(e_a)} Omega = d_A J_a, symbolic;
    (c) J(phi_g(x)) = Coad_g J(x) along sampled one-parameter subgroups.
    """
    records = []
    d = act.algebra.dim
    model = act.model
    for a in range(d):
        psi_a = act.psi_basis(a)
        inv = lie_derivative_form(psi_a, Om.omega)
        records.append(
            CheckRecord(f"invariance[{a}]", inv.is_zero(config), 0.0,
                        "L_psi Omega = 0")
        )
        lhs = interior(psi_a, Om.omega)
        rhs = d_A(model.form(0, {(): J.components[a]}))
        diff = lhs + (-1) * rhs
        records.append(
            CheckRecord(f"momentum-identity[{a}]", diff.is_zero(config), 0.0,
                        "i_psi Omega = d_A J")
        )
    if samples is None:
        samples = ()
    worst = 0.0
    for t, eta, x in samples:
        g = act.algebra.exp(eta, t)
        gx = act.phi_g_on_M(g, x, step)
        res = float(np.max(np.abs(J.value_at(gx) - g.Coad(J.value_at(np.asarray(x, float))))))
        worst = max(worst, res)
    if samples:
        records.append(
            CheckRecord("equivariance", worst < 1e-6, worst,
                        "J(phi_g x) = Coad_g J(x)")
        )
    return records


def poisson_hamiltonian_field(model: AlgebroidModel, h):
    """Hamiltonian vector field of h for the fiberwise-linear bracket on A*,
    as a lifted field: components {x_j, h} along the base, {y_I, h} along
    the fiber."""
    from .lifts import LiftedVectorField
    ys = tuple(sp.Symbol(n) for n in fiber_names(model, dual=True))
    base = tuple(linear_poisson(model, x, h) for x in model.coord_symbols)
    fiber = tuple(linear_poisson(model, y, h) for y in ys)
    return LiftedVectorField(model, "A*", base, fiber)


def check_JT_equivariance(J: MomentumMap, samples, step=1e-3):
    """Residuals of J^T(Phi^T_{(g,xi)} a) = Coad^TG_{(g,xi)} J^T(a) over an
    iterable of (TGElement, fiber point) samples."""
    from .liegroup import coad_TG
    residuals = []
    for elem, point in samples:
        moved = J.action.phi_T_apply(elem, point, step)
        lhs = J_T(J, moved)
        rhs = coad_TG(elem, J_T(J, point))
        residuals.append(float(max(
            np.max(np.abs(lhs[0] - rhs[0])), np.max(np.abs(lhs[1] - rhs[1]))
        )))
    return residuals


def J_T(J: MomentumMap, point):
    """J^T(a) = ((T J o rho)(a), J(tau(a))) for a fiber point (x, a^I)."""
    model = J.model
    p = np.asarray(point, float)
    x, a = p[: model.dim], p[model.dim:]
    return J.tj_rho_at(x) @ a, J.value_at(x)


def level_set_fiber(J: MomentumMap, mu, x):
    """Orthonormal basis (columns) of ker(T_x J o rho_x) in A_x."""
    x = np.asarray(x, float)
    mu = np.asarray(mu, float)
    if np.max(np.abs(J.value_at(x) - mu), initial=0.0) > LEVEL_SET_TOL:
        raise HamiltonianError(f"point {x} is not on the mu level set")
    L = J.tj_rho_at(x)
    return _null_basis(L)


def _null_basis(L):
    from scipy.linalg import null_space
    if not np.asarray(L).any():
        return np.eye(np.asarray(L).shape[1])
    return null_space(L, rcond=RANK_RTOL)


def subspaces_equal(U, W, tol=SUBSPACE_TOL):
    """dim U = dim W and rank [U | W] = dim U (columns span)."""
    U = np.atleast_2d(np.asarray(U, float))
    W = np.atleast_2d(np.asarray(W, float))
    du = np.linalg.matrix_rank(U, tol=tol)
    dw = np.linalg.matrix_rank(W, tol=tol)
    if du != dw:
        return False
    return np.linalg.matrix_rank(np.hstack([U, W]), tol=tol) == du


def subspace_contained(U, W, tol=SUBSPACE_TOL):
    W = np.atleast_2d(np.asarray(W, float))
    return np.linalg.matrix_rank(np.hstack([U, W]), tol=tol) == np.linalg.matrix_rank(W, tol=tol)


def omega_orthogonal(Om_matrix, V, tol=RANK_RTOL):
    """Omega-orthogonal complement of span(columns of V)."""
    V = np.atleast_2d(np.asarray(V, float))
    # w in V^perp  iff  Omega(v, w) = 0 for all v: (V^T Omega) w = 0
    return _null_basis(V.T @ np.asarray(Om_matrix, float))


def check_level_subspaces(Om: SymplecticSection, act: LiftAction,
                          J: MomentumMap, mu, points, tol=SUBSPACE_TOL):
    """Kernel / isotropy subspace identities at sampled level-set points.

    (ii) ker(T_x J o rho_x) = (psi_x(g))^Omega-perp;
    (i)  psi_x(g_mu) = psi_x(g) intersect ker(T_x J o rho_x).
    """
    records = []
    mu = np.asarray(mu, float)
    iso = act.algebra.isotropy_subalgebra(mu)
    for k, x in enumerate(points):
        x = np.asarray(x, float)
        K = level_set_fiber(J, mu, x)
        psi = act.psi_matrix_at(x).T  # columns psi_a(x)
        perp = omega_orthogonal(Om.matrix_at(x), psi)
        ok2 = subspaces_equal(K, perp, tol)
        psi_mu = psi @ iso if iso.size else np.zeros((psi.shape[0], 0))
        inter = intersect_columns(psi, K)
        ok1 = subspaces_equal(psi_mu, inter, tol)
        records.append(CheckRecord(f"lemma-subspaces[{k}]", ok1 and ok2, 0.0,
                                   f"(i)={ok1} (ii)={ok2} at x={x.tolist()}"))
    return records


def intersect_columns(U, W, tol=RANK_RTOL):
    """Basis of span(U) intersect span(W)."""
    U = np.atleast_2d(np.asarray(U, float))
    W = np.atleast_2d(np.asarray(W, float))
    if U.shape[1] == 0 or W.shape[1] == 0:
        return np.zeros((U.shape[0], 0))
    ns = _null_basis(np.hstack([U, -W]))
    if ns.shape[0] == 0 or ns.shape[1] == 0:
        return np.zeros((U.shape[0], 0))
    vecs = U @ ns[: U.shape[1], :]
    q, r = np.linalg.qr(vecs)
    keep = np.abs(np.diag(r)) > tol if r.size else np.zeros(0, bool)
    return q[:, : int(np.sum(keep))]
