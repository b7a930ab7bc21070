"""Built-in fixture registry.

Fixture data files live in the package's fixtures/ directory; this module
adds the per-fixture test scaffolding that cannot live in data: level-set
samplers, invariant Hamiltonians with their reduced counterparts, declared
isotropy bases, and default momentum values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
import sympy as sp

from . import modelfile
from .modelfile import LoadedModel
from .reduce import ReductionSetup


def fixture_path(name):
    return resources.files("algebroids") / "fixtures" / f"{name}.toml"


FIXTURE_NAMES = (
    "fix-tm2",
    "fix-tm2-translation",
    "fix-so3",
    "fix-act",
    "fix-mag",
    "fix-so3-act",
    "fix-so3-broken",
)


@lru_cache(maxsize=None)
def load_fixture(name) -> LoadedModel:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; see list-fixtures")
    return modelfile.load(fixture_path(name))


@lru_cache(maxsize=None)
def reduction_setup(name) -> ReductionSetup:
    """Prolongation, canonical section, lifted action and momentum map."""
    lm = load_fixture(name)
    if lm.action is None:
        raise ValueError(f"fixture {name!r} declares no action")
    return ReductionSetup.build(
        lm.model, lm.action, triv=lm.trivialization, connection=lm.connection
    )


def _syms(*names):
    return sp.symbols(names)


@dataclass(frozen=True)
class SuiteData:
    """Per-fixture data for the verification suites."""

    mu: tuple
    level_sampler: object  # (rng, mu) -> point on the prolonged chart
    iso_basis: tuple | None = None  # exact isotropy basis at mu
    invariant_pairs: tuple = ()  # ((f, g), (f_red, g_red)) expression pairs
    hamiltonian: object = None  # (f, f_red) for reduced dynamics
    x0: tuple = ()  # dynamics start point on the level set


def _tm2_translation_suite():
    x1, x2, y1, y2 = _syms("x1", "x2", "y1", "y2")
    mu = (1.0,)

    def sampler(rng, mu=mu):
        x = rng.uniform(-2, 2, size=2)
        return np.array([x[0], x[1], mu[0], rng.uniform(-2, 2)])

    f = y1**2 / 2 + y2**2 / 2
    g = x2 * y2
    # reduced chart is (x2, y1) with w = y2 restricted to the level set
    X2, W = _syms("x2", "y1")
    f_red = sp.Rational(1, 2) + W**2 / 2
    g_red = X2 * W
    return SuiteData(
        mu=mu,
        level_sampler=sampler,
        iso_basis=((1,),),
        invariant_pairs=(((f, g), (f_red, g_red)),),
        hamiltonian=(f, f_red),
        x0=(0.2, 0.3, 1.0, 0.4),
    )


def _so3_suite():
    y1, y2, y3 = _syms("y1", "y2", "y3")
    mu = (0.0, 0.0, 1.0)

    def sampler(rng, mu=mu):
        # the momentum level set in the base is the single point y = -mu
        return -np.asarray(mu, float)

    # invariant extensions are functions of the squared radius
    f = (y1**2 + y2**2 + y3**2) / 2
    g = y1**2 + y2**2 + y3**2
    f_red = sp.Rational(1, 2)
    g_red = sp.Integer(1)
    return SuiteData(
        mu=mu,
        level_sampler=sampler,
        iso_basis=((0, 0, 1),),
        invariant_pairs=(((f, g), (f_red, g_red)),),
    )


def _act_suite():
    x1, x2, y1, y2, y3 = _syms("x1", "x2", "y1", "y2", "y3")
    mu = (0.0,)

    def sampler(rng, mu=mu):
        x = rng.uniform(-2, 2, size=2)
        a = rng.uniform(-2, 2)
        b = rng.uniform(-2, 2)
        # momentum is -y1 + y3
        return np.array([x[0], x[1], a, b, a + mu[0]])

    f = x1 * y2 + y3**2 / 2 + y1 * y3 / 1
    X1, W1, W2 = _syms("x1", "y1", "y2")
    return SuiteData(mu=mu, level_sampler=sampler, iso_basis=((1,),))


def _mag_suite():
    x1, x2, x3, y1, y2, y3 = _syms("x1", "x2", "x3", "y1", "y2", "y3")
    mu = (1.0,)

    def sampler(rng, mu=mu):
        x = rng.uniform(-2, 2, size=3)
        y = rng.uniform(-2, 2, size=2)
        return np.array([x[0], x[1], x[2], y[0], y[1], mu[0]])

    f = (y1**2 + y2**2 + y3**2) / 2
    X1, X2, W1, W2 = _syms("x1", "x2", "y1", "y2")
    # shifted fiber coordinates: w1 = y1, w2 = y2 - x1, level y3 = 1
    f_red = (W1**2 + (W2 + X1) ** 2 + 1) / 2
    g = x2 * y2
    g_red = X2 * (W2 + X1)
    return SuiteData(
        mu=mu,
        level_sampler=sampler,
        iso_basis=((1,),),
        invariant_pairs=(((f, g), (f_red, g_red)),),
        hamiltonian=(f, f_red),
        x0=(0.2, 0.3, 0.1, 0.4, 0.5, 1.0),
    )


def _so3_act_suite():
    mu = (0.0, 0.0, 1.0)

    def sampler(rng, mu=mu):
        theta = rng.uniform(0, 2 * np.pi)
        r = rng.uniform(0.5, 1.5)
        x = np.array([r * np.cos(theta), r * np.sin(theta), 0.0])
        s = rng.uniform(-1, 1)
        y = np.cross(np.asarray(mu, float), x) / np.dot(x, x) + s * x
        return np.concatenate([x, y])

    return SuiteData(mu=mu, level_sampler=sampler, iso_basis=((0, 0, 1),))


_SUITES = {
    "fix-tm2-translation": _tm2_translation_suite,
    "fix-so3": _so3_suite,
    "fix-act": _act_suite,
    "fix-mag": _mag_suite,
    "fix-so3-act": _so3_act_suite,
}


@lru_cache(maxsize=None)
def suite_data(name) -> SuiteData:
    if name not in _SUITES:
        raise KeyError(f"fixture {name!r} has no verification-suite data")
    return _SUITES[name]()


def sample_level_points(name, count, rng, mu=None):
    data = suite_data(name)
    mu = data.mu if mu is None else tuple(mu)
    return [data.level_sampler(rng, np.asarray(mu, float)) for _ in range(count)]


ACTION_FIXTURES = ("fix-tm2-translation", "fix-so3", "fix-act", "fix-mag",
                   "fix-so3-act")
AXIOM_FIXTURES = ("fix-tm2", "fix-so3", "fix-act", "fix-mag", "fix-so3-act")
TRIVIALIZED_FIXTURES = ("fix-tm2-translation", "fix-act", "fix-mag")
