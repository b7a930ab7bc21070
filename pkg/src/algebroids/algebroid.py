"""Lie algebroid over a single coordinate chart: structure functions,
sections, k-forms and the bracket / anchor / differential calculus.

A model is the chart-level data (rho_I^i, C_IJ^K); everything else is
computed from it.  Forms and multisections are stored on strictly
increasing multi-indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import symexpr
from .symexpr import VarEnv, ZeroTestConfig, canonicalize, is_zero


class ModelError(ValueError):
    pass


def _perm_sign(indices):
    """Sign of the permutation sorting `indices`; 0 on a repeat."""
    if len(set(indices)) != len(indices):
        return 0, tuple(indices)
    inv = sum(
        1
        for a in range(len(indices))
        for b in range(a + 1, len(indices))
        if indices[a] > indices[b]
    )
    return (-1 if inv % 2 else 1), tuple(sorted(indices))


@dataclass(frozen=True)
class AlgebroidModel:
    """Lie algebroid of rank n over one chart of dimension m.

    rho: n x m matrix of expressions in the base coordinates.
    C:   n x n x n tensor, C[I][J][K] = C_IJ^K, antisymmetric in (I, J).
    """

    coords: tuple[str, ...]
    rank: int
    rho: tuple
    C: tuple
    name: str = ""

    @property
    def dim(self):
        return len(self.coords)

    @property
    def env(self):
        return VarEnv.make(base=self.coords)

    @property
    def coord_symbols(self):
        return tuple(sp.Symbol(c) for c in self.coords)

    @classmethod
    def from_arrays(cls, coords, rho, C, name=""):
        coords = tuple(coords)
        n = len(rho)
        rho_t = tuple(tuple(canonicalize(x) for x in row) for row in rho)
        C_t = tuple(
            tuple(tuple(canonicalize(x) for x in row) for row in mat) for mat in C
        )
        model = cls(coords=coords, rank=n, rho=rho_t, C=C_t, name=name)
        model._validate_shapes()
        return model

    def _validate_shapes(self):
        if len(self.rho) != self.rank or any(len(r) != self.dim for r in self.rho):
            raise ModelError("rho must be rank x dim")
        n = self.rank
        if len(self.C) != n or any(
            len(m) != n or any(len(r) != n for r in m) for m in self.C
        ):
            raise ModelError("C must be rank x rank x rank")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if canonicalize(self.C[i][j][k] + self.C[j][i][k]) != 0:
                        raise ModelError(
                            f"C not antisymmetric at ({i},{j},{k})"
                        )

    def section(self, components):
        return SectionField(self, tuple(canonicalize(c) for c in components))

    def basis_section(self, I):
        comps = [sp.Integer(0)] * self.rank
        comps[I] = sp.Integer(1)
        return self.section(comps)

    def form(self, degree, components=None):
        return KFormField(self, degree, dict(components or {}))

    def basis_form(self, indices):
        """Dual-basis wedge e^{I1} ^ ... ^ e^{Ik} for increasing indices."""
        f = KFormField(self, len(indices), {})
        f.set(tuple(indices), sp.Integer(1))
        return f

    def multisection(self, degree, components=None):
        return MultiSectionField(self, degree, dict(components or {}))

    def structure_bracket(self, I, J):
        """Bracket of basis sections e_I, e_J as a section."""
        return self.section([self.C[I][J][K] for K in range(self.rank)])


@dataclass(frozen=True)
class SectionField:
    model: AlgebroidModel
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.model.rank:
            raise ModelError("component count must equal the rank")

    def __add__(self, other):
        _require_same_model(self, other)
        return SectionField(
            self.model,
            tuple(canonicalize(a + b) for a, b in zip(self.components, other.components)),
        )

    def __sub__(self, other):
        _require_same_model(self, other)
        return SectionField(
            self.model,
            tuple(canonicalize(a - b) for a, b in zip(self.components, other.components)),
        )

    def __rmul__(self, f):
        return SectionField(
            self.model, tuple(canonicalize(f * a) for a in self.components)
        )

    def __neg__(self):
        return SectionField(self.model, tuple(canonicalize(-a) for a in self.components))

    def is_zero(self, config=None):
        return all(is_zero(c, config) for c in self.components)


class _Antisymmetric:
    """Shared storage for antisymmetric component maps on increasing indices."""

    def __init__(self, model, degree, components):
        if degree < 0:
            raise ModelError("degree must be nonnegative")
        self.model = model
        self.degree = degree
        self.components = {}
        for idx, val in components.items():
            self.set(idx, val)

    def set(self, indices, value):
        indices = tuple(indices)
        if len(indices) != self.degree:
            raise ModelError("index length must equal degree")
        sign, key = _perm_sign(indices)
        if sign == 0:
            return
        value = canonicalize(value)
        if sign < 0:
            value = canonicalize(-value)
        if value == 0:
            self.components.pop(key, None)
        else:
            self.components[key] = value

    def add_to(self, indices, value):
        indices = tuple(indices)
        sign, key = _perm_sign(indices)
        if sign == 0:
            return
        current = self.components.get(key, sp.Integer(0))
        self.set(key, current + sign * value)

    def get(self, indices):
        indices = tuple(indices)
        if self.degree == 0 and indices == ():
            return self.components.get((), sp.Integer(0))
        sign, key = _perm_sign(indices)
        if sign == 0:
            return sp.Integer(0)
        val = self.components.get(key, sp.Integer(0))
        return val if sign > 0 else canonicalize(-val)

    def keys(self):
        return sorted(self.components)

    def is_zero(self, config=None):
        return all(is_zero(v, config) for v in self.components.values())

    def map(self, fn):
        return {k: canonicalize(fn(v)) for k, v in self.components.items()}


class KFormField(_Antisymmetric):
    """Section of wedge^k A*."""

    def __init__(self, model, degree, components=None):
        super().__init__(model, degree, components or {})

    def copy_with(self, components):
        return KFormField(self.model, self.degree, components)

    def __add__(self, other):
        _require_same_model(self, other)
        if self.degree != other.degree:
            raise ModelError("degree mismatch")
        out = KFormField(self.model, self.degree, dict(self.components))
        for k, v in other.components.items():
            out.add_to(k, v)
        return out

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, f):
        return KFormField(self.model, self.degree, self.map(lambda v: f * v))

    def evaluate_on(self, sections):
        """Pair the k-form with k sections (symbolically)."""
        if len(sections) != self.degree:
            raise ModelError("need exactly k sections")
        total = sp.Integer(0)
        n = self.model.rank
        for idx in itertools.combinations(range(n), self.degree):
            coeff = self.components.get(idx)
            if coeff is None:
                continue
            # antisymmetrized product of the section components
            mat = sp.Matrix(
                [[sections[a].components[idx[b]] for b in range(self.degree)]
                 for a in range(self.degree)]
            )
            total += coeff * mat.det()
        return canonicalize(total)

    def matrix(self):
        """Degree-2 convenience: full antisymmetric n x n component matrix."""
        if self.degree != 2:
            raise ModelError("matrix() requires a 2-form")
        n = self.model.rank
        return sp.Matrix(n, n, lambda i, j: self.get((i, j)))


class MultiSectionField(_Antisymmetric):
    """Section of wedge^k A."""

    def __init__(self, model, degree, components=None):
        super().__init__(model, degree, components or {})

    def evaluate_on_forms(self, forms):
        """Pair with k one-forms (each a KFormField of degree 1)."""
        if len(forms) != self.degree:
            raise ModelError("need exactly k one-forms")
        total = sp.Integer(0)
        n = self.model.rank
        for idx in itertools.combinations(range(n), self.degree):
            coeff = self.components.get(idx)
            if coeff is None:
                continue
            mat = sp.Matrix(
                [[forms[a].get((idx[b],)) for b in range(self.degree)]
                 for a in range(self.degree)]
            )
            total += coeff * mat.det()
        return canonicalize(total)


def _require_same_model(a, b):
    if a.model is not b.model and a.model != b.model:
        raise ModelError("operands belong to different models")


# ---------------------------------------------------------------------------
# Calculus
# ---------------------------------------------------------------------------


def anchor_apply(X: SectionField, f):
    """rho(X)(f) = X^I rho_I^i df/dx^i."""
    model = X.model
    out = sp.Integer(0)
    for I in range(model.rank):
        for i, c in enumerate(model.coord_symbols):
            out += X.components[I] * model.rho[I][i] * sp.diff(sp.sympify(f), c)
    return canonicalize(out)


def bracket(X: SectionField, Y: SectionField) -> SectionField:
    """[[X, Y]]^K = X^I rho_I^i dY^K/dx^i - Y^J rho_J^i dX^K/dx^i + X^I Y^J C_IJ^K."""
    _require_same_model(X, Y)
    model = X.model
    comps = []
    for K in range(model.rank):
        term = anchor_apply(X, Y.components[K]) - anchor_apply(Y, X.components[K])
        for I in range(model.rank):
            for J in range(model.rank):
                cijk = model.C[I][J][K]
                if cijk != 0:
                    term += X.components[I] * Y.components[J] * cijk
        comps.append(canonicalize(term))
    return SectionField(model, tuple(comps))


def d_A(mu) -> KFormField:
    """Exterior differential of a k-form (a bare expression counts as k=0)."""
    if not isinstance(mu, KFormField):
        model = getattr(mu, "model", None)
        raise ModelError("d_A expects a KFormField; wrap functions with model.form(0, ...)")
    model = mu.model
    k = mu.degree
    out = KFormField(model, k + 1)
    if k + 1 > model.rank:
        return out  # zero (n+1)-form by convention
    if k == 0:
        f = mu.get(())
        for I in range(model.rank):
            val = anchor_apply(model.basis_section(I), f)
            if val != 0:
                out.add_to((I,), val)
        return out
    for idx in itertools.combinations(range(model.rank), k + 1):
        total = sp.Integer(0)
        for i in range(k + 1):
            rest = idx[:i] + idx[i + 1:]
            total += (-1) ** i * anchor_apply(
                model.basis_section(idx[i]), mu.get(rest)
            )
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                br = model.structure_bracket(idx[i], idx[j])
                rest = tuple(idx[a] for a in range(k + 1) if a not in (i, j))
                for K in range(model.rank):
                    cK = br.components[K]
                    if cK != 0:
                        total += (-1) ** (i + j) * cK * mu.get((K,) + rest)
        out.add_to(idx, total)
    return out


def interior(X: SectionField, mu: KFormField) -> KFormField:
    """(i_X mu)_{I2..Ik} = X^{I1} mu_{I1 I2..Ik}."""
    if mu.degree == 0:
        raise ModelError("interior product needs degree >= 1")
    model = mu.model
    out = KFormField(model, mu.degree - 1)
    for idx in itertools.combinations(range(model.rank), mu.degree - 1):
        total = sp.Integer(0)
        for I in range(model.rank):
            total += X.components[I] * mu.get((I,) + idx)
        out.add_to(idx, total)
    return out


def lie_derivative_form(X: SectionField, mu: KFormField) -> KFormField:
    """Cartan formula L_X = i_X d + d i_X (on functions: rho(X))."""
    if mu.degree == 0:
        out = KFormField(mu.model, 0)
        out.set((), anchor_apply(X, mu.get(())))
        return out
    return interior(X, d_A(mu)) + d_A(interior(X, mu))


def lie_derivative_multisection(X: SectionField, P: MultiSectionField) -> MultiSectionField:
    """L_X P via the dual-basis characterization
    L_X P(a_1..a_k) = rho(X)(P(a_1..a_k)) - sum P(a_1,..,L_X a_i,..,a_k)."""
    model = P.model
    k = P.degree
    out = MultiSectionField(model, k)
    if k == 0:
        out.set((), anchor_apply(X, P.get(())))
        return out
    basis_forms = [model.basis_form((I,)) for I in range(model.rank)]
    lie_basis = [lie_derivative_form(X, bf) for bf in basis_forms]
    for idx in itertools.combinations(range(model.rank), k):
        forms = [basis_forms[i] for i in idx]
        total = anchor_apply(X, P.evaluate_on_forms(forms))
        for slot in range(k):
            perturbed = list(forms)
            perturbed[slot] = lie_basis[idx[slot]]
            total -= P.evaluate_on_forms(perturbed)
        out.add_to(idx, total)
    return out


def wedge(mu: KFormField, nu: KFormField) -> KFormField:
    """Shuffle-convention wedge: (a^b)(X,Y) = a(X)b(Y) - a(Y)b(X) on 1-forms."""
    _require_same_model(mu, nu)
    model = mu.model
    k, l = mu.degree, nu.degree
    out = KFormField(model, k + l)
    if k + l > model.rank:
        return out
    for idx in itertools.combinations(range(model.rank), k + l):
        total = sp.Integer(0)
        for left in itertools.combinations(range(k + l), k):
            right = tuple(a for a in range(k + l) if a not in left)
            perm = left + right
            inv = sum(
                1
                for a in range(len(perm))
                for b in range(a + 1, len(perm))
                if perm[a] > perm[b]
            )
            sign = -1 if inv % 2 else 1
            total += (
                sign
                * mu.get(tuple(idx[a] for a in left))
                * nu.get(tuple(idx[a] for a in right))
            )
        out.add_to(idx, total)
    return out


# ---------------------------------------------------------------------------
# Axiom checking
# ---------------------------------------------------------------------------


@dataclass
class CheckRecord:
    check_id: str
    passed: bool
    residual: float
    detail: str = ""


def _section_residual(S: SectionField, config):
    """0.0 for symbolic zero; max sampled |component| otherwise."""
    worst = 0.0
    cfg = config or ZeroTestConfig()
    for c in S.components:
        c = canonicalize(c)
        if c == 0:
            continue
        if symexpr.is_rational_function(c):
            return float("inf")
        syms = sorted(sp.sympify(c).free_symbols, key=lambda s: s.name)
        rng = np.random.default_rng(cfg.seed)
        fn = symexpr.lambdify(syms, c)
        vals = []
        while len(vals) < cfg.samples:
            pt = rng.uniform(-cfg.box, cfg.box, size=len(syms))
            try:
                v = fn(*pt) if syms else fn()
            except (ZeroDivisionError, FloatingPointError):
                continue
            if np.isfinite(v):
                vals.append(abs(float(v)))
        worst = max(worst, max(vals) if vals else 0.0)
    return worst


def check_axioms(model: AlgebroidModel, config: ZeroTestConfig | None = None):
    """Antisymmetry, Leibniz, Jacobi and anchor-morphism checks."""
    records = []
    n = model.rank
    cfg = config or ZeroTestConfig()

    # (a) antisymmetry of C (construction enforces it; re-verify)
    anti_ok = all(
        is_zero(model.C[i][j][k] + model.C[j][i][k], cfg)
        for i in range(n)
        for j in range(n)
        for k in range(n)
    )
    records.append(CheckRecord("antisymmetry", anti_ok, 0.0 if anti_ok else float("inf")))

    # (b) Leibniz on basis sections with a generic polynomial function
    f = sum(
        (idx + 1) * c for idx, c in enumerate(model.coord_symbols)
    ) if model.dim else sp.Integer(1)
    f = canonicalize(f + sum(c ** 2 for c in model.coord_symbols))
    leib_ok = True
    worst = 0.0
    for I in range(n):
        for J in range(n):
            X, Y = model.basis_section(I), model.basis_section(J)
            lhs = bracket(X, f * Y)
            rhs = f * bracket(X, Y) + anchor_apply(X, f) * Y
            diff_sec = lhs - rhs
            if not diff_sec.is_zero(cfg):
                leib_ok = False
                worst = max(worst, _section_residual(diff_sec, cfg))
    records.append(CheckRecord("leibniz", leib_ok, worst))

    # (c) Jacobi on basis triples
    jac_ok = True
    worst = 0.0
    for I in range(n):
        for J in range(I + 1, n):
            for K in range(J + 1, n):
                X, Y, Z = (model.basis_section(a) for a in (I, J, K))
                s = (
                    bracket(bracket(X, Y), Z)
                    + bracket(bracket(Y, Z), X)
                    + bracket(bracket(Z, X), Y)
                )
                if not s.is_zero(cfg):
                    jac_ok = False
                    worst = max(worst, _section_residual(s, cfg))
    records.append(CheckRecord("jacobi", jac_ok, worst))

    # (d) anchor morphism rho[[X,Y]] = [rho X, rho Y] on basis pairs
    mor_ok = True
    worst = 0.0
    for I in range(n):
        for J in range(n):
            X, Y = model.basis_section(I), model.basis_section(J)
            br = bracket(X, Y)
            for i, c in enumerate(model.coord_symbols):
                lhs = sum(
                    br.components[K] * model.rho[K][i] for K in range(n)
                )
                rhs = anchor_apply(X, model.rho[J][i]) - anchor_apply(
                    Y, model.rho[I][i]
                )
                resid = canonicalize(lhs - rhs)
                if not is_zero(resid, cfg):
                    mor_ok = False
                    worst = max(
                        worst,
                        _section_residual(
                            SectionField(model, (resid,) + (sp.Integer(0),) * (n - 1)),
                            cfg,
                        ),
                    )
    records.append(CheckRecord("anchor-morphism", mor_ok, worst))

    # (e) d_A^2 = 0 on a generic function and on every dual basis element
    f0 = model.form(0, {(): f})
    dd_ok = d_A(d_A(f0)).is_zero(cfg)
    for K in range(n):
        if not d_A(d_A(model.basis_form((K,)))).is_zero(cfg):
            dd_ok = False
    records.append(CheckRecord("d_A-squared", dd_ok, 0.0 if dd_ok else float("inf")))
    return records
