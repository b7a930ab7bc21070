"""Finite-dimensional Lie algebras with exact structure constants, adjoint
and coadjoint machinery, and the tangent group G x g.

Group elements are represented operationally: a word of exponentials
together with the cached adjoint matrix.  Every construction here factors
through Ad / Coad, so no faithful representation of G is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm, null_space

SVD_RTOL = 1e-10


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants c[a][b][e] = c_ab^e (exact rationals)."""

    dim: int
    c: tuple  # dim x dim x dim nested tuples of Fraction
    name: str = ""

    @classmethod
    def from_sparse(cls, dim, entries, name=""):
        """entries: iterable of (a, b, e, value); antisymmetry auto-completed."""
        c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for a, b, e, val in entries:
            val = Fraction(val)
            c[a][b][e] = val
            c[b][a][e] = -val
        alg = cls(dim, tuple(tuple(tuple(r) for r in m) for m in c), name)
        alg.validate()
        return alg

    @classmethod
    def abelian(cls, dim, name="abelian"):
        return cls.from_sparse(dim, [], name)

    @classmethod
    def so3(cls):
        return cls.from_sparse(3, [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)], "so3")

    def validate(self):
        d = self.dim
        for a in range(d):
            for b in range(d):
                for e in range(d):
                    if self.c[a][b][e] != -self.c[b][a][e]:
                        raise AlgebraError("structure constants not antisymmetric")
        for a in range(d):
            for b in range(d):
                for e in range(d):
                    for f in range(d):
                        s = sum(
                            self.c[a][b][g] * self.c[g][e][f]
                            + self.c[b][e][g] * self.c[g][a][f]
                            + self.c[e][a][g] * self.c[g][b][f]
                            for g in range(d)
                        )
                        if s != 0:
                            raise AlgebraError("Jacobi identity fails")

    @property
    def c_float(self):
        return np.array(self.c, dtype=float)

    def bracket(self, xi, eta):
        """[xi, eta]^e = c_ab^e xi^a eta^b."""
        c = self.c_float
        return np.einsum("abe,a,b->e", c, np.asarray(xi, float), np.asarray(eta, float))

    def ad(self, xi):
        """Matrix of ad_xi: (ad_xi)^e_b = c_ab^e xi^a."""
        return np.einsum("abe,a->eb", self.c_float, np.asarray(xi, float))

    def coad(self, xi, mu):
        """Infinitesimal left coadjoint action coad_xi mu = -ad_xi^T mu."""
        return -self.ad(xi).T @ np.asarray(mu, float)

    def exp(self, xi, t=1.0):
        return GroupElement(self, ((tuple(float(v) for v in xi), float(t)),))

    def identity(self):
        return GroupElement(self, ())

    def isotropy_subalgebra(self, mu):
        """Orthonormal basis (columns) of g_mu = {eta : coad_eta mu = 0}."""
        mu = np.asarray(mu, float)
        d = self.dim
        if d == 0:
            return np.zeros((0, 0))
        # column a of L is coad_{e_a} mu
        L = np.column_stack([self.coad(np.eye(d)[a], mu) for a in range(d)])
        if not L.any():
            return np.eye(d)
        ns = null_space(L, rcond=SVD_RTOL)
        return ns


@dataclass(frozen=True)
class GroupElement:
    """g = exp(t_1 xi_1) ... exp(t_k xi_k), acting through Ad only."""

    algebra: LieAlgebra
    word: tuple  # sequence of (xi tuple, t)

    @property
    def Ad(self):
        M = np.eye(self.algebra.dim)
        for xi, t in self.word:
            M = M @ expm(t * self.algebra.ad(np.asarray(xi)))
        return M

    def inverse(self):
        return GroupElement(
            self.algebra, tuple((xi, -t) for xi, t in reversed(self.word))
        )

    def __mul__(self, other):
        if self.algebra is not other.algebra and self.algebra != other.algebra:
            raise AlgebraError("group elements from different algebras")
        return GroupElement(self.algebra, self.word + other.word)

    def Coad(self, mu):
        """Left coadjoint action: (Coad_g mu)(xi) = mu(Ad_{g^-1} xi)."""
        return self.inverse().Ad.T @ np.asarray(mu, float)


@dataclass(frozen=True)
class TGElement:
    """Element (g, xi) of TG = G x g with product law
    (g, xi) (g', xi') = (g g', xi' + Ad_{g'^-1} xi)."""

    g: GroupElement
    xi: tuple

    @property
    def algebra(self):
        return self.g.algebra

    def __mul__(self, other):
        g2 = self.g * other.g
        xi2 = np.asarray(other.xi, float) + other.g.inverse().Ad @ np.asarray(
            self.xi, float
        )
        return TGElement(g2, tuple(xi2))

    @classmethod
    def identity(cls, algebra):
        return cls(algebra.identity(), (0.0,) * algebra.dim)


def tg_bracket(algebra, p, q):
    """Lie bracket on g x g: [(xi,eta),(xi',eta')] = ([xi,xi'], [xi,eta'] - [xi',eta])."""
    (xi, eta), (xi2, eta2) = p, q
    return (
        algebra.bracket(xi, xi2),
        algebra.bracket(xi, eta2) - algebra.bracket(xi2, eta),
    )


def coad_TG(elem: TGElement, mu_pair):
    """Coad^{TG}_{(g,xi)}(mu', mu'') = (Coad_g(mu' + coad_xi mu''), Coad_g mu'')."""
    mu1, mu2 = (np.asarray(m, float) for m in mu_pair)
    alg = elem.algebra
    xi = np.asarray(elem.xi, float)
    return (
        elem.g.Coad(mu1 + alg.coad(xi, mu2)),
        elem.g.Coad(mu2),
    )
