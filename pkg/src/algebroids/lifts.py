"""Vertical and complete lifts, actions by complete lifts, and flows.

Lifted vector fields live on the total space of A (coordinates x^i, v^I)
or A* (coordinates x^i, y_I).  Group elements act through numeric flows of
the corresponding infinitesimal generators, so every global statement is
verified along one-parameter subgroups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy as sp

from . import symexpr
from .algebroid import AlgebroidModel, SectionField, bracket, _require_same_model
from .liegroup import GroupElement, LieAlgebra, TGElement
from .symexpr import ZeroTestConfig, canonicalize, is_zero


class LiftError(ValueError):
    pass


class FlowError(RuntimeError):
    pass


def fiber_names(model: AlgebroidModel, dual: bool):
    """Fiber coordinate names for A (v^I) or A* (y_I), avoiding base names."""
    prefix = "y" if dual else "v"
    names = tuple(f"{prefix}{I + 1}" for I in range(model.rank))
    if set(names) & set(model.coords):
        names = tuple(f"{prefix}{prefix}{I + 1}" for I in range(model.rank))
    if set(names) & set(model.coords):
        raise LiftError("cannot pick fiber coordinate names")
    return names


@dataclass(frozen=True)
class LiftedVectorField:
    """Vector field on the total space of A or A*.

    base:  m components along the base coordinates.
    fiber: n components along the fiber coordinates.
    """

    model: AlgebroidModel
    bundle: str  # "A" or "A*"
    base: tuple
    fiber: tuple

    def __post_init__(self):
        if self.bundle not in ("A", "A*"):
            raise LiftError("bundle must be 'A' or 'A*'")

    @property
    def fiber_symbols(self):
        return tuple(
            sp.Symbol(n) for n in fiber_names(self.model, self.bundle == "A*")
        )

    @property
    def all_symbols(self):
        return self.model.coord_symbols + self.fiber_symbols

    @property
    def all_components(self):
        return self.base + self.fiber

    def __add__(self, other):
        if self.model != other.model or self.bundle != other.bundle:
            raise LiftError("incompatible lifted fields")
        return LiftedVectorField(
            self.model,
            self.bundle,
            tuple(canonicalize(a + b) for a, b in zip(self.base, other.base)),
            tuple(canonicalize(a + b) for a, b in zip(self.fiber, other.fiber)),
        )

    def __rmul__(self, s):
        return LiftedVectorField(
            self.model,
            self.bundle,
            tuple(canonicalize(s * a) for a in self.base),
            tuple(canonicalize(s * a) for a in self.fiber),
        )

    def __neg__(self):
        return (-1) * self

    def __sub__(self, other):
        return self + (-other)

    def apply_to(self, f):
        """Directional derivative of a function of (base, fiber) coordinates."""
        out = sp.Integer(0)
        for s, comp in zip(self.all_symbols, self.all_components):
            out += comp * sp.diff(sp.sympify(f), s)
        return canonicalize(out)

    def commutator(self, other):
        if self.model != other.model or self.bundle != other.bundle:
            raise LiftError("incompatible lifted fields")
        comps = [
            canonicalize(self.apply_to(w) - other.apply_to(v))
            for v, w in zip(self.all_components, other.all_components)
        ]
        m = self.model.dim
        return LiftedVectorField(
            self.model, self.bundle, tuple(comps[:m]), tuple(comps[m:])
        )

    def is_zero(self, config=None):
        return all(is_zero(c, config) for c in self.all_components)

    def callable(self):
        syms = self.all_symbols
        fns = symexpr.lambdify(syms, list(self.all_components))
        def rhs(p):
            return np.asarray(fns(*p), dtype=float)
        return rhs


def vertical_lift(X: SectionField) -> LiftedVectorField:
    """X^v = X^I d/dv^I."""
    model = X.model
    return LiftedVectorField(
        model, "A", (sp.Integer(0),) * model.dim, tuple(X.components)
    )


def complete_lift_A(X: SectionField) -> LiftedVectorField:
    """X^c = X^I rho_I^i d/dx^i + (rho_J^i dX^I/dx^i - X^K C_KJ^I) v^J d/dv^I."""
    model = X.model
    xs = model.coord_symbols
    vs = tuple(sp.Symbol(n) for n in fiber_names(model, dual=False))
    base = []
    for i in range(model.dim):
        base.append(
            canonicalize(
                sum(X.components[I] * model.rho[I][i] for I in range(model.rank))
            )
        )
    fiber = []
    for I in range(model.rank):
        term = sp.Integer(0)
        for J in range(model.rank):
            coeff = sum(
                model.rho[J][i] * sp.diff(X.components[I], xs[i])
                for i in range(model.dim)
            )
            coeff -= sum(
                X.components[K] * model.C[K][J][I] for K in range(model.rank)
            )
            term += coeff * vs[J]
        fiber.append(canonicalize(term))
    return LiftedVectorField(model, "A", tuple(base), tuple(fiber))


def complete_lift_Astar(X: SectionField) -> LiftedVectorField:
    """X^{*c} = X^I rho_I^i d/dx^i - (rho_I^i dX^K/dx^i + C_IJ^K X^J) y_K d/dy_I."""
    model = X.model
    xs = model.coord_symbols
    ys = tuple(sp.Symbol(n) for n in fiber_names(model, dual=True))
    base = []
    for i in range(model.dim):
        base.append(
            canonicalize(
                sum(X.components[I] * model.rho[I][i] for I in range(model.rank))
            )
        )
    fiber = []
    for I in range(model.rank):
        term = sp.Integer(0)
        for K in range(model.rank):
            coeff = sum(
                model.rho[I][i] * sp.diff(X.components[K], xs[i])
                for i in range(model.dim)
            )
            coeff += sum(
                model.C[I][J][K] * X.components[J] for J in range(model.rank)
            )
            term -= coeff * ys[K]
        fiber.append(canonicalize(term))
    return LiftedVectorField(model, "A*", tuple(base), tuple(fiber))


def linear_fiber_function(alpha_or_Y, dual: bool):
    """hat of a section: alpha_hat = alpha_I v^I on A, Y_hat = Y^I y_I on A*."""
    model = alpha_or_Y.model
    syms = tuple(sp.Symbol(n) for n in fiber_names(model, dual))
    if dual:
        comps = alpha_or_Y.components  # Y^I
    else:
        comps = tuple(alpha_or_Y.get((I,)) for I in range(model.rank))
    return canonicalize(sum(c * s for c, s in zip(comps, syms)))


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------


def flow(V: LiftedVectorField, p0, t, step=1e-3):
    """Fixed-step RK4 flow of a lifted field; deterministic."""
    rhs = V.callable()
    return rk4(rhs, np.asarray(p0, float), float(t), step)


def rk4(rhs, p0, t, step):
    p = np.array(p0, float)
    if t == 0:
        return p
    nsteps = max(1, int(round(abs(t) / step)))
    h = t / nsteps
    for _ in range(nsteps):
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * h * k1)
        k3 = rhs(p + 0.5 * h * k2)
        k4 = rhs(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(p)):
            raise FlowError("trajectory left the finite region")
    return p


# ---------------------------------------------------------------------------
# Actions by complete lifts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftAction:
    """Action data: anti-morphism psi: g -> Gamma(A) in components psi[a][I]."""

    algebra: LieAlgebra
    model: AlgebroidModel
    psi: tuple  # d x n expressions over the base coordinates
    free: bool = False
    name: str = ""

    def __post_init__(self):
        if len(self.psi) != self.algebra.dim or any(
            len(row) != self.model.rank for row in self.psi
        ):
            raise LiftError("psi must be dim(g) x rank(A)")

    @classmethod
    def from_rows(cls, algebra, model, rows, free=False, name=""):
        psi = tuple(tuple(canonicalize(x) for x in row) for row in rows)
        return cls(algebra, model, psi, free, name)

    def psi_section(self, xi) -> SectionField:
        comps = [
            canonicalize(
                sum(sp.nsimplify(xi[a], rational=True) * self.psi[a][I]
                    for a in range(self.algebra.dim))
            )
            for I in range(self.model.rank)
        ]
        return self.model.section(comps)

    def psi_basis(self, a) -> SectionField:
        return self.model.section(self.psi[a])

    def xi_M(self, a):
        """Base generator components rho(psi(xi_a))."""
        sec = self.psi_basis(a)
        return tuple(
            canonicalize(
                sum(sec.components[I] * self.model.rho[I][i]
                    for I in range(self.model.rank))
            )
            for i in range(self.model.dim)
        )

    def check_anti_morphism(self, config=None):
        """[[psi(a), psi(b)]] + c_ab^e psi(e) = 0 symbolically."""
        d = self.algebra.dim
        for a in range(d):
            for b in range(d):
                br = bracket(self.psi_basis(a), self.psi_basis(b))
                corr = self.model.section(
                    [
                        sum(
                            sp.Rational(self.algebra.c[a][b][e]) * self.psi[e][I]
                            for e in range(d)
                        )
                        for I in range(self.model.rank)
                    ]
                )
                if not (br + corr).is_zero(config):
                    return False
        return True

    def psi_matrix_at(self, x):
        """Numeric matrix [psi_a^I(x)] (rows a, columns I)."""
        fns = symexpr.lambdify(self.model.coord_symbols, [list(r) for r in self.psi])
        return np.asarray(fns(*x), dtype=float)

    def infinitesimal(self, xi, eta) -> LiftedVectorField:
        """(xi, eta)_A = psi(xi)^c + psi(eta)^v."""
        return complete_lift_A(self.psi_section(xi)) + vertical_lift(
            self.psi_section(eta)
        )

    # -- numeric group actions via flows -----------------------------------

    def phi_g_on_A(self, g: GroupElement, point, step=1e-3):
        """Phi_g on the total space of A, g as a word of exponentials."""
        p = np.asarray(point, float)
        for xi, t in reversed(g.word):
            V = complete_lift_A(self.psi_section(xi))
            p = flow(V, p, t, step)
        return p

    def phi_g_on_M(self, g: GroupElement, x, step=1e-3):
        p = np.concatenate([np.asarray(x, float), np.zeros(self.model.rank)])
        return self.phi_g_on_A(g, p, step)[: self.model.dim]

    def phi_g_on_Astar(self, g: GroupElement, point, step=1e-3):
        """Phi*_g on A*; generator of Phi* is psi(xi)^{*c}."""
        p = np.asarray(point, float)
        for xi, t in reversed(g.word):
            V = complete_lift_Astar(self.psi_section(xi))
            p = flow(V, p, t, step)
        return p

    def phi_T_apply(self, elem: TGElement, point, step=1e-3):
        """Phi^T((g, xi), a_x) = Phi_g(a_x + psi(xi)(x))."""
        p = np.asarray(point, float)
        x = p[: self.model.dim]
        psi_val = self.psi_matrix_at(x).T @ np.asarray(elem.xi, float)
        shifted = np.concatenate([x, p[self.model.dim:] + psi_val])
        return self.phi_g_on_A(elem.g, shifted, step)


def check_cv_relations(model: AlgebroidModel, sections=None, config=None):
    """Eq-type bracket relations between complete and vertical lifts:
    [X^c, Y^c] = [[X,Y]]^c, [X^c, Y^v] = [[X,Y]]^v, [X^v, Y^v] = 0."""
    if sections is None:
        xs = model.coord_symbols
        f1 = canonicalize(sum((i + 1) * s for i, s in enumerate(xs)) + 1)
        f2 = canonicalize(sum(s ** 2 for s in xs) + 2)
        X = model.section([f1 if I % 2 == 0 else f2 for I in range(model.rank)])
        Y = model.section([f2 if I % 2 == 0 else f1 for I in range(model.rank)])
        sections = (X, Y)
    X, Y = sections
    br = bracket(X, Y)
    results = {}
    results["cc"] = (
        complete_lift_A(X).commutator(complete_lift_A(Y)) - complete_lift_A(br)
    ).is_zero(config)
    results["cv"] = (
        complete_lift_A(X).commutator(vertical_lift(Y)) - vertical_lift(br)
    ).is_zero(config)
    results["vv"] = (
        vertical_lift(X).commutator(vertical_lift(Y))
    ).is_zero(config)
    return results


def check_flow_duality(X: SectionField, samples, step=1e-3):
    """Residuals of the duality between the two complete lifts.

    The flow of X^{*c} is dual to the flow of X^c: the natural pairing
    between a fiber point of A and one of A* over the same base point is
    preserved when both are moved forward by their respective flows.
    Samples are (t, x, a, alpha) tuples.
    """
    model = X.model
    Vc = complete_lift_A(X)
    Vs = complete_lift_Astar(X)
    m = model.dim
    residuals = []
    for t, x, a, alpha in samples:
        pa = flow(Vc, np.concatenate([np.asarray(x, float),
                                      np.asarray(a, float)]), t, step)
        pal = flow(Vs, np.concatenate([np.asarray(x, float),
                                       np.asarray(alpha, float)]), t, step)
        before = float(np.dot(np.asarray(a, float), np.asarray(alpha, float)))
        after = float(np.dot(pa[m:], pal[m:]))
        base_gap = float(np.max(np.abs(pa[:m] - pal[:m]))) if m else 0.0
        residuals.append(max(abs(after - before), base_gap))
    return residuals


def check_psi_equivariance(act: LiftAction, samples, step=1e-3):
    """Residuals of Phi_g(psi(Ad_{g^-1} xi)(x)) = psi(xi)(phi_g(x)) for
    g = exp(t eta), over an iterable of (t, eta, xi, x) tuples."""
    residuals = []
    model = act.model
    for t, eta, xi, x in samples:
        g = act.algebra.exp(eta, t)
        xi_back = g.inverse().Ad @ np.asarray(xi, float)
        psi_at_x = act.psi_matrix_at(np.asarray(x, float)).T @ xi_back
        left = act.phi_g_on_A(
            g, np.concatenate([np.asarray(x, float), psi_at_x]), step
        )
        gx = act.phi_g_on_M(g, x, step)
        right = np.concatenate(
            [gx, act.psi_matrix_at(gx).T @ np.asarray(xi, float)]
        )
        residuals.append(float(np.max(np.abs(left - right))))
    return residuals
