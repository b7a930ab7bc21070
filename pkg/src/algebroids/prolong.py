"""The canonical cover T^A A*: prolonged model, Liouville section, the
canonical symplectic-like section, the lifted action and its momentum map.

The prolongation is materialized as an ordinary algebroid of rank 2n over
the chart (x^i, y_I): the projectable basis splits into an X-block covering
the parent basis sections and a Y-block covering the fiber directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .algebroid import AlgebroidModel, KFormField, d_A, interior, lie_derivative_form
from .hamiltonian import MomentumMap, SymplecticSection, J_T
from .lifts import LiftAction, complete_lift_Astar, fiber_names
from .symexpr import canonicalize, is_zero


class ProlongError(ValueError):
    pass


@dataclass(frozen=True)
class ProlongedModel:
    """Derived algebroid of rank 2n over (x^i, y_I) with inherited structure."""

    parent: AlgebroidModel
    model: AlgebroidModel
    fiber_coords: tuple

    @property
    def n(self):
        return self.parent.rank


def build_prolongation(parent: AlgebroidModel) -> ProlongedModel:
    """Chart (x, y); anchor rho(X_I) = rho_I^i d/dx^i, rho(Y^I) = d/dy_I;
    brackets [[X_I, X_J]] = C_IJ^K X_K and zero on mixed / Y pairs."""
    n = parent.rank
    m = parent.dim
    ynames = fiber_names(parent, dual=True)
    coords = parent.coords + ynames
    N = 2 * n
    rho = [[sp.Integer(0)] * (m + n) for _ in range(N)]
    for I in range(n):
        for i in range(m):
            rho[I][i] = parent.rho[I][i]
        rho[n + I][m + I] = sp.Integer(1)
    C = [[[sp.Integer(0)] * N for _ in range(N)] for _ in range(N)]
    for I in range(n):
        for J in range(n):
            for K in range(n):
                C[I][J][K] = parent.C[I][J][K]
    model = AlgebroidModel.from_arrays(
        coords, rho, C, name=(parent.name + "-prolonged") if parent.name else ""
    )
    return ProlongedModel(parent, model, ynames)


def liouville_section(p: ProlongedModel) -> KFormField:
    """lambda = y_I X^I (zero on the Y-block)."""
    lam = p.model.form(1)
    for I in range(p.n):
        lam.set((I,), sp.Symbol(p.fiber_coords[I]))
    return lam


def omega_local(p: ProlongedModel) -> KFormField:
    """X^I ^ Y_I + (1/2) C_IJ^K y_K X^I ^ X^J in component form."""
    n = p.n
    om = p.model.form(2)
    for I in range(n):
        om.set((I, n + I), sp.Integer(1))
    for I in range(n):
        for J in range(I + 1, n):
            val = canonicalize(
                sum(p.parent.C[I][J][K] * sp.Symbol(p.fiber_coords[K])
                    for K in range(n))
            )
            if val != 0:
                om.set((I, J), val)
    return om


def omega_A(p: ProlongedModel) -> SymplecticSection:
    """Canonical section built both as -d lambda and from the local
    expression; a mismatch signals a convention bug and raises."""
    local = omega_local(p)
    exact = (-1) * d_A(liouville_section(p))
    if not (local - exact).is_zero():
        raise ProlongError("-d(lambda) disagrees with the local expression")
    return SymplecticSection(p.model, local)


def lifted_action(p: ProlongedModel, act: LiftAction) -> LiftAction:
    """psi^T(xi_a) = (psi(xi_a), psi(xi_a)^{*c}): X-block psi_a^I(x), Y-block
    the fiber components of the complete lift to A*."""
    if act.model != p.parent:
        raise ProlongError("action lives on a different parent model")
    n = p.n
    rows = []
    for a in range(act.algebra.dim):
        star = complete_lift_Astar(act.psi_basis(a))
        rows.append(tuple(act.psi[a]) + tuple(star.fiber))
    lifted = LiftAction.from_rows(
        act.algebra, p.model, rows, free=act.free,
        name=(act.name + "-lifted") if act.name else ""
    )
    if not lifted.check_anti_morphism():
        raise ProlongError("lifted action fails the anti-morphism invariant")
    return lifted


def check_preserves_liouville(p: ProlongedModel, lifted: LiftAction, config=None):
    """L_{psi^T(xi_a)} lambda = 0 for every basis element."""
    lam = liouville_section(p)
    return all(
        lie_derivative_form(lifted.psi_basis(a), lam).is_zero(config)
        for a in range(lifted.algebra.dim)
    )


def J_Astar(p: ProlongedModel, act: LiftAction, lifted=None) -> MomentumMap:
    """(J_{A*})_a = y_I psi_a^I(x) on the prolonged model."""
    if lifted is None:
        lifted = lifted_action(p, act)
    comps = []
    for a in range(act.algebra.dim):
        comps.append(
            canonicalize(
                sum(sp.Symbol(p.fiber_coords[I]) * act.psi[a][I]
                    for I in range(p.n))
            )
        )
    return MomentumMap.make(lifted, tuple(comps))


def J_T_Astar(p: ProlongedModel, act: LiftAction, point, lifted=None):
    """J^T on the prolonged model: ((T J_{A*} o rho)(v), J_{A*}(base))."""
    J = J_Astar(p, act, lifted)
    return J_T(J, point)
