"""Command-line front door.

Subcommands: check-axioms, prolong, reduce, verify <suite>, dynamics,
list-fixtures.  Reports go to stdout as structured text; --out writes the
same records as deterministic JSON.  Exit codes: 0 all checks pass, 1 a
check failed, 2 usage error, 3 model error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import fixtures as fx
from . import modelfile, symexpr
from .algebroid import ModelError, check_axioms
from .hamiltonian import (
    HamiltonianError,
    check_hamiltonian_action,
    check_JT_equivariance,
    check_level_subspaces,
)
from .liegroup import AlgebraError, TGElement
from .lifts import LiftError, check_cv_relations, check_flow_duality, check_psi_equivariance
from .modelfile import ModelFileError
from .prolong import ProlongError, build_prolongation
from .reduce import (
    DEFAULT_TOL,
    HypothesisError,
    ReduceError,
    check_general_embedding,
    check_mu_zero_iso,
    check_reduced_dynamics,
    check_reduced_poisson,
    check_shifted_iso,
    check_well_defined,
    integrate_hamiltonian,
    magnetic_term,
    reduce_fiber,
)
from .symexpr import SAMPLE_SEED, ZeroTestConfig

MODEL_ERRORS = (
    ModelFileError, ModelError, AlgebraError, LiftError,
    HamiltonianError, ProlongError, ReduceError, symexpr.ExprError,
)

SIGN_CONVENTIONS = (
    "interior product contracts the first slot",
    "bracket of functions: {f,g} = anchor(H_g)(f)",
    "wedge pairing: (a^b)(X,Y) = a(X)b(Y) - a(Y)b(X)",
)


@dataclass
class Context:
    seed: int = SAMPLE_SEED
    samples: int = 30
    tol_scale: float = 1.0

    @property
    def tol(self):
        return DEFAULT_TOL.scale(self.tol_scale)

    @property
    def zero_config(self):
        return ZeroTestConfig(seed=self.seed)

    def rng(self):
        return np.random.default_rng(self.seed)


@dataclass
class Report:
    header: dict
    records: list = field(default_factory=list)

    def add(self, scope, rec, sample="symbolic", tolerance=0.0):
        self.records.append({
            "id": f"{scope}:{rec.check_id}",
            "sample": sample,
            "residual": float(rec.residual),
            "tolerance": float(tolerance),
            "verdict": "pass" if rec.passed else "FAIL",
            "detail": rec.detail,
        })

    @property
    def passed(self):
        return all(r["verdict"] == "pass" for r in self.records)

    def as_text(self):
        lines = ["# environment"]
        for k, v in self.header.items():
            lines.append(f"  {k}: {v}")
        lines.append("# checks")
        for r in self.records:
            lines.append(
                f"  [{r['verdict']:>4}] {r['id']} residual={r['residual']:.3e}"
                f" tol={r['tolerance']:.1e} ({r['detail']})"
            )
        npass = sum(r["verdict"] == "pass" for r in self.records)
        lines.append(f"# {npass}/{len(self.records)} checks passed")
        return "\n".join(lines)

    def as_json(self):
        return json.dumps(
            {"header": self.header, "records": self.records},
            indent=2, sort_keys=True,
        )


def make_report(ctx: Context) -> Report:
    return Report(header={
        "seed": ctx.seed,
        "samples": ctx.samples,
        "tol_scale": ctx.tol_scale,
        "sign_conventions": list(SIGN_CONVENTIONS),
        "tolerances": {k: float(v) for k, v in ctx.tol.__dict__.items()},
    })


def _load_target(args):
    """Model selected by --fixture or --model."""
    if getattr(args, "model", None):
        return modelfile.load(args.model)
    name = getattr(args, "fixture", None)
    if not name:
        raise ModelFileError("select a target with --fixture or --model")
    try:
        return fx.load_fixture(name)
    except KeyError as exc:
        raise ModelFileError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def suite_axioms(ctx, report, names=None):
    for name in names or fx.AXIOM_FIXTURES:
        lm = fx.load_fixture(name)
        for rec in check_axioms(lm.model, ctx.zero_config):
            report.add(f"axioms/{name}", rec, tolerance=ctx.zero_config.tol)


def suite_lifts(ctx, report, names=None):
    from .algebroid import CheckRecord
    for name in names or ("fix-tm2", "fix-so3", "fix-act"):
        lm = fx.load_fixture(name)
        for key, ok in check_cv_relations(lm.model, config=ctx.zero_config).items():
            report.add(f"lifts/{name}",
                       CheckRecord(f"bracket-relation-{key}", ok, 0.0,
                                   "complete/vertical lift commutators"))
    # flow duality on the tangent-plane fixture
    lm = fx.load_fixture("fix-tm2")
    X = lm.model.section(["x2", "x1 - x2"])
    rng = ctx.rng()
    samples = [
        (rng.uniform(-0.8, 0.8), rng.uniform(-1, 1, 2),
         rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2))
        for _ in range(min(ctx.samples, 10))
    ]
    res = check_flow_duality(X, samples)
    worst = max(res) if res else 0.0
    report.add("lifts/fix-tm2",
               CheckRecord("flow-duality", worst < 1e-6 * ctx.tol_scale, worst,
                           "pairing preserved by the dual pair of flows"),
               tolerance=1e-6 * ctx.tol_scale)
    # equivariance of the action generators along sampled subgroups
    lm = fx.load_fixture("fix-act")
    rng = ctx.rng()
    eq_samples = [
        (rng.uniform(-1, 1), (rng.uniform(-1, 1),), (rng.uniform(-1, 1),),
         rng.uniform(-1.5, 1.5, 2))
        for _ in range(ctx.samples)
    ]
    res = check_psi_equivariance(lm.action, eq_samples)
    worst = max(res) if res else 0.0
    report.add("lifts/fix-act",
               CheckRecord("action-equivariance", worst < 1e-6 * ctx.tol_scale,
                           worst, "generator transport along group flows"),
               tolerance=1e-6 * ctx.tol_scale)


def suite_momentum(ctx, report, names=None):
    from .algebroid import CheckRecord
    for name in names or fx.ACTION_FIXTURES:
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        rng = ctx.rng()
        flow_samples = []
        if setup.parent.dim:
            for _ in range(3):
                eta = rng.uniform(-1, 1, setup.act.algebra.dim)
                x = rng.uniform(-1, 1, setup.p.model.dim)
                flow_samples.append((rng.uniform(-0.6, 0.6), tuple(eta), x))
        for rec in check_hamiltonian_action(setup.Om, setup.lifted, setup.J,
                                            samples=flow_samples,
                                            config=ctx.zero_config):
            report.add(f"momentum/{name}", rec,
                       tolerance=ctx.tol.equivariance)
        pts = fx.sample_level_points(name, ctx.samples, rng)
        for rec in check_level_subspaces(setup.Om, setup.lifted, setup.J,
                                         data.mu, pts, tol=ctx.tol.subspace):
            report.add(f"momentum/{name}", rec, tolerance=ctx.tol.subspace)
    # tangent-group momentum equivariance on the mixed-generator fixture
    setup = fx.reduction_setup("fix-act")
    rng = ctx.rng()
    tg_samples = []
    for _ in range(min(ctx.samples, 10)):
        g = setup.act.algebra.exp((rng.uniform(-1, 1),), rng.uniform(-0.8, 0.8))
        elem = TGElement(g, (rng.uniform(-1, 1),))
        point = rng.uniform(-1, 1, setup.p.model.dim + setup.p.model.rank)
        tg_samples.append((elem, point))
    res = check_JT_equivariance(setup.J, tg_samples)
    worst = max(res) if res else 0.0
    report.add("momentum/fix-act",
               CheckRecord("tangent-group-equivariance",
                           worst < ctx.tol.equivariance, worst,
                           "paired momentum transforms by the tangent-group coadjoint"),
               tolerance=ctx.tol.equivariance)


def suite_theorem_2_8(ctx, report, names=None):
    from .algebroid import CheckRecord
    for name in names or ("fix-tm2-translation", "fix-so3", "fix-mag",
                          "fix-so3-act"):
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        rng = ctx.rng()
        pts = fx.sample_level_points(name, ctx.samples, rng)
        dims = set()
        worst_ok = True
        for p in pts:
            try:
                rf = reduce_fiber(setup.Om, setup.lifted, setup.J, data.mu, p,
                                  ctx.tol)
                dims.add(rf.dim)
            except HypothesisError as exc:
                worst_ok = False
                report.add(f"theorem-2.8/{name}",
                           CheckRecord("reduce-fiber", False, float("inf"),
                                       str(exc)))
                break
        if worst_ok:
            report.add(f"theorem-2.8/{name}",
                       CheckRecord("reduce-fiber", len(dims) == 1, 0.0,
                                   f"reduced dimension(s) {sorted(dims)} at"
                                   f" {len(pts)} samples"))
            for rec in check_well_defined(setup.Om, setup.lifted, setup.J,
                                          data.mu, pts[0], ctx.tol,
                                          seed=ctx.seed):
                report.add(f"theorem-2.8/{name}", rec,
                           tolerance=ctx.tol.well_defined)


def suite_marsden_ratiu(ctx, report, names=None):
    for name in names or ("fix-tm2-translation", "fix-so3", "fix-mag"):
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        if not data.invariant_pairs:
            continue
        rng = ctx.rng()
        pts = fx.sample_level_points(name, ctx.samples, rng)
        mag = None
        if setup.connection is not None and np.any(np.asarray(data.mu)):
            mag = magnetic_term(setup, data.mu, config=ctx.zero_config)
            if all(v == 0 for v in mag.B_mu.components.values()):
                mag = None
        for rec in check_reduced_poisson(setup, data.invariant_pairs, data.mu,
                                         pts, mag=mag, tol=ctx.tol):
            report.add(f"marsden-ratiu/{name}", rec, tolerance=ctx.tol.marra)


def suite_p1(ctx, report, names=None):
    for name in names or ("fix-tm2-translation", "fix-act"):
        setup = fx.reduction_setup(name)
        rng = ctx.rng()
        mu0 = np.zeros(setup.act.algebra.dim)
        pts = fx.sample_level_points(name, ctx.samples, rng, mu=mu0)
        for rec in check_mu_zero_iso(setup, pts, ctx.tol):
            report.add(f"p1/{name}", rec, tolerance=ctx.tol.pullback)


def suite_p2(ctx, report, names=None):
    from .algebroid import CheckRecord
    name = "fix-mag"
    setup = fx.reduction_setup(name)
    data = fx.suite_data(name)
    mag = magnetic_term(setup, data.mu, config=ctx.zero_config)
    nonzero = any(v != 0 for v in mag.B_mu.components.values())
    report.add(f"p2/{name}",
               CheckRecord("magnetic-term", nonzero, 0.0,
                           "curved connection produces a nonzero reduced two-form"))
    rng = ctx.rng()
    pts = fx.sample_level_points(name, ctx.samples, rng)
    for rec in check_shifted_iso(setup, mag, data.mu, pts, ctx.tol):
        report.add(f"p2/{name}", rec, tolerance=ctx.tol.pullback)
    # difference isolation: dropping the magnetic term must fail by exactly it
    dropped = check_shifted_iso(setup, mag, data.mu, pts[:5], ctx.tol,
                                drop_magnetic=True)
    Bfn = symexpr.lambdify(
        build_prolongation(setup.quotient.model).model.coord_symbols,
        [[mag.B_mu.get((r, s)) for s in range(setup.triv.n0)]
         for r in range(setup.triv.n0)],
    )
    ok = True
    worst = 0.0
    for rec, p in zip(dropped, pts[:5]):
        Bval = np.max(np.abs(np.asarray(
            Bfn(*setup.project_point(p, data.mu)), dtype=float)))
        gap = abs(rec.residual - Bval)
        worst = max(worst, gap)
        ok = ok and not rec.passed and gap < ctx.tol.pullback
    report.add(f"p2/{name}",
               CheckRecord("difference-isolation", ok, worst,
                           "residual without the magnetic term equals its size"),
               tolerance=ctx.tol.pullback)


def suite_t53(ctx, report, names=None):
    for name in names or ("fix-so3-act", "fix-tm2-translation"):
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        rng = ctx.rng()
        pts = fx.sample_level_points(name, ctx.samples, rng)
        for rec in check_general_embedding(setup, data.mu, data.iso_basis, pts,
                                           ctx.tol, seed=ctx.seed):
            report.add(f"t5.3/{name}", rec, tolerance=ctx.tol.pullback)


def suite_dynamics(ctx, report, names=None, T=None, step=1e-3):
    from .algebroid import CheckRecord
    names = names or ("fix-so3", "fix-tm2-translation", "fix-mag")
    if "fix-so3" in names:
        setup = fx.reduction_setup("fix-so3")
        y1, y2, y3 = sp.symbols("y1 y2 y3")
        f = y1**2 / 2 + y2**2 / 4 + y3**2 / 6
        x0 = np.array([0.2, 0.3, 0.9])
        times, traj = integrate_hamiltonian(setup.Om, f, x0, T or 10.0, step)
        cas = np.sum(traj**2, axis=1)
        worst = float(np.max(np.abs(cas - cas[0])))
        report.add("dynamics/fix-so3",
                   CheckRecord("casimir-conservation",
                               worst < 1e-8 * ctx.tol_scale, worst,
                               f"squared radius drift over T={times[-1]:g}"),
                   tolerance=1e-8 * ctx.tol_scale)
    for name in ("fix-tm2-translation", "fix-mag"):
        if name not in names:
            continue
        setup = fx.reduction_setup(name)
        data = fx.suite_data(name)
        if data.hamiltonian is None:
            continue
        f, f_red = data.hamiltonian
        mag = None
        if setup.connection is not None and np.any(np.asarray(data.mu)):
            mag = magnetic_term(setup, data.mu, config=ctx.zero_config)
            if all(v == 0 for v in mag.B_mu.components.values()):
                mag = None
        for rec in check_reduced_dynamics(setup, f, f_red, data.mu,
                                          np.asarray(data.x0, float),
                                          T or 5.0, step, mag=mag,
                                          tol=ctx.tol):
            tol = (ctx.tol.momentum_conservation
                   if rec.check_id == "momentum-conservation"
                   else ctx.tol.trajectory)
            report.add(f"dynamics/{name}", rec, tolerance=tol)


SUITES = {
    "axioms": suite_axioms,
    "lifts": suite_lifts,
    "momentum": suite_momentum,
    "theorem-2.8": suite_theorem_2_8,
    "marsden-ratiu": suite_marsden_ratiu,
    "p1": suite_p1,
    "p2": suite_p2,
    "t5.3": suite_t53,
    "dynamics": suite_dynamics,
}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_list_fixtures(args, ctx):
    for name in fx.FIXTURE_NAMES:
        lm = fx.load_fixture(name)
        print(f"{name}: {lm.description}")
    return 0


def cmd_check_axioms(args, ctx):
    lm = _load_target(args)
    report = make_report(ctx)
    for rec in check_axioms(lm.model, ctx.zero_config):
        report.add(f"axioms/{lm.name or 'model'}", rec,
                   tolerance=ctx.zero_config.tol)
    _emit(report, args)
    return 0 if report.passed else 1


def cmd_prolong(args, ctx):
    lm = _load_target(args)
    p = build_prolongation(lm.model)
    text = modelfile.dump_model(
        p.model, description="derived model: canonical cover of the dual bundle"
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def cmd_reduce(args, ctx):
    name = args.fixture
    setup = fx.reduction_setup(name)
    data = fx.suite_data(name)
    mu = np.asarray([float(v) for v in args.mu.split(",")], float) \
        if args.mu else np.asarray(data.mu, float)
    if args.at:
        point = np.asarray([float(v) for v in args.at.split(",")], float)
    else:
        point = data.level_sampler(ctx.rng(), mu)
    report = make_report(ctx)
    rf = reduce_fiber(setup.Om, setup.lifted, setup.J, mu, point, ctx.tol)
    print(f"fixture: {name}")
    print(f"momentum value: {mu.tolist()}")
    print(f"base point: {np.asarray(point).tolist()}")
    print(f"constraint dimension: {rf.K.shape[1]}")
    print(f"gauge dimension: {rf.gauge.shape[1]}")
    print(f"reduced dimension: {rf.dim}")
    print("reduced form:")
    with np.printoptions(precision=6, suppress=True):
        print(rf.omega_mu)
    for rec in check_well_defined(setup.Om, setup.lifted, setup.J, mu, point,
                                  ctx.tol, seed=ctx.seed):
        report.add(f"reduce/{name}", rec, tolerance=ctx.tol.well_defined)
    _emit(report, args)
    return 0 if report.passed else 1


def cmd_verify(args, ctx):
    if args.suite == "all":
        chosen = list(SUITES)
    elif args.suite in SUITES:
        chosen = [args.suite]
    else:
        raise ModelFileError(
            f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all"
        )
    names = (args.fixture,) if args.fixture else None
    report = make_report(ctx)
    for suite in chosen:
        SUITES[suite](ctx, report, names=names)
    _emit(report, args)
    return 0 if report.passed else 1


def cmd_dynamics(args, ctx):
    names = (args.fixture,) if args.fixture else None
    report = make_report(ctx)
    suite_dynamics(ctx, report, names=names, T=args.T, step=args.step)
    _emit(report, args)
    return 0 if report.passed else 1


def _emit(report, args):
    print(report.as_text())
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(report.as_json() + "\n")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="algebroids",
        description="Coordinate Lie algebroid calculus and reduction checks.",
    )
    parser.add_argument("--seed", type=int, default=SAMPLE_SEED)
    parser.add_argument("--samples", type=int, default=30)
    parser.add_argument("--tol-scale", type=float, default=1.0)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-fixtures")

    p = sub.add_parser("check-axioms")
    p.add_argument("--fixture")
    p.add_argument("--model")
    p.add_argument("--out")

    p = sub.add_parser("prolong")
    p.add_argument("--fixture")
    p.add_argument("--model")
    p.add_argument("--out")

    p = sub.add_parser("reduce")
    p.add_argument("--fixture", required=True)
    p.add_argument("--mu")
    p.add_argument("--at")
    p.add_argument("--out")

    p = sub.add_parser("verify")
    p.add_argument("suite")
    p.add_argument("--fixture")
    p.add_argument("--out")

    p = sub.add_parser("dynamics")
    p.add_argument("--fixture")
    p.add_argument("-T", type=float, default=None)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--out")

    return parser


COMMANDS = {
    "list-fixtures": cmd_list_fixtures,
    "check-axioms": cmd_check_axioms,
    "prolong": cmd_prolong,
    "reduce": cmd_reduce,
    "verify": cmd_verify,
    "dynamics": cmd_dynamics,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    ctx = Context(seed=args.seed, samples=args.samples,
                  tol_scale=args.tol_scale)
    try:
        return COMMANDS[args.command](args, ctx)
    except MODEL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
