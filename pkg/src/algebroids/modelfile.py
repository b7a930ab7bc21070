"""Declarative model files: one TOML file describes one fixture.

Sections:
  [algebroid]       coords, rank, rho (dense rows of expressions),
                    C (sparse 1-based entries {i, j, k, expr});
  [algebra]         dim, c (sparse {a, b, e, expr}, rational constants);
  [action]          psi (d rows of n expressions), optional xi_M, free;
  [omega]           omega (sparse {i, j, expr}, antisymmetric);
  [momentum]        J (d expressions over the base chart);
  [connection]      A (d rows of m expressions);
  [trivialization]  reduced_coords, group_coords, frame (rows);
  [fixture-meta]    name, description.

Unknown sections or keys are rejected; cross-section dimensions are
checked at load time.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import sympy as sp

from . import symexpr
from .algebroid import AlgebroidModel
from .hamiltonian import SymplecticSection
from .liegroup import LieAlgebra
from .lifts import LiftAction
from .reduce import Trivialization
from .symexpr import VarEnv, canonicalize


class ModelFileError(ValueError):
    pass


@dataclass(frozen=True)
class LoadedModel:
    """Everything a model file can declare, in constructed form."""

    model: AlgebroidModel
    algebra: LieAlgebra | None = None
    action: LiftAction | None = None
    omega: SymplecticSection | None = None
    momentum: tuple | None = None
    connection: tuple | None = None
    trivialization: Trivialization | None = None
    name: str = ""
    description: str = ""


_SECTIONS = {
    "algebroid", "algebra", "action", "omega", "momentum",
    "connection", "trivialization", "fixture-meta",
}


def _check_keys(section, data, allowed):
    extra = set(data) - set(allowed)
    if extra:
        raise ModelFileError(f"unknown keys {sorted(extra)} in [{section}]")


def _parse_expr(text, env, where):
    try:
        return symexpr.parse(str(text), env)
    except symexpr.ExprError as exc:
        raise ModelFileError(f"bad expression in {where}: {exc}") from exc


def load(path) -> LoadedModel:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ModelFileError(f"invalid TOML: {exc}") from exc
    return from_dict(data, default_name=Path(path).stem)


def from_dict(data, default_name="") -> LoadedModel:
    extra = set(data) - _SECTIONS
    if extra:
        raise ModelFileError(f"unknown sections {sorted(extra)}")
    if "algebroid" not in data:
        raise ModelFileError("missing [algebroid] section")

    meta = data.get("fixture-meta", {})
    _check_keys("fixture-meta", meta, {"name", "description"})
    name = meta.get("name", default_name)

    alg_sec = data["algebroid"]
    _check_keys("algebroid", alg_sec, {"coords", "rank", "rho", "C"})
    coords = tuple(alg_sec.get("coords", ()))
    rank = int(alg_sec["rank"])
    env = VarEnv.make(base=coords)
    rho_rows = alg_sec.get("rho", [[]] * rank)
    if len(rho_rows) != rank or any(len(r) != len(coords) for r in rho_rows):
        raise ModelFileError("rho must have rank rows of dim entries")
    rho = [
        [_parse_expr(x, env, f"rho[{I}][{i}]") for i, x in enumerate(row)]
        for I, row in enumerate(rho_rows)
    ]
    C = [[[sp.Integer(0)] * rank for _ in range(rank)] for _ in range(rank)]
    for entry in alg_sec.get("C", []):
        _check_keys("algebroid.C", entry, {"i", "j", "k", "expr"})
        i, j, k = entry["i"] - 1, entry["j"] - 1, entry["k"] - 1
        if not all(0 <= v < rank for v in (i, j, k)):
            raise ModelFileError(f"C index out of range in {entry}")
        val = _parse_expr(entry["expr"], env, "C entry")
        C[i][j][k] = val
        C[j][i][k] = canonicalize(-val)
    model = AlgebroidModel.from_arrays(coords, rho, C, name=name)

    algebra = None
    if "algebra" in data:
        sec = data["algebra"]
        _check_keys("algebra", sec, {"dim", "c"})
        dim = int(sec["dim"])
        entries = []
        for entry in sec.get("c", []):
            _check_keys("algebra.c", entry, {"a", "b", "e", "expr"})
            a, b, e = entry["a"] - 1, entry["b"] - 1, entry["e"] - 1
            if not all(0 <= v < dim for v in (a, b, e)):
                raise ModelFileError(f"algebra index out of range in {entry}")
            entries.append((a, b, e, Fraction(str(entry["expr"]))))
        algebra = LieAlgebra.from_sparse(dim, entries, name=name)

    action = None
    if "action" in data:
        if algebra is None:
            raise ModelFileError("[action] requires [algebra]")
        sec = data["action"]
        _check_keys("action", sec, {"psi", "xi_M", "free"})
        psi_rows = sec["psi"]
        if len(psi_rows) != algebra.dim or any(len(r) != rank for r in psi_rows):
            raise ModelFileError("psi must be dim(g) rows of rank entries")
        rows = [
            [_parse_expr(x, env, f"psi[{a}]") for x in row]
            for a, row in enumerate(psi_rows)
        ]
        action = LiftAction.from_rows(
            algebra, model, rows, free=bool(sec.get("free", False)), name=name
        )
        if "xi_M" in sec:
            declared = sec["xi_M"]
            if len(declared) != algebra.dim or any(
                len(r) != len(coords) for r in declared
            ):
                raise ModelFileError("xi_M must be dim(g) rows of dim entries")
            for a, row in enumerate(declared):
                computed = action.xi_M(a)
                for i, x in enumerate(row):
                    want = _parse_expr(x, env, f"xi_M[{a}][{i}]")
                    if not symexpr.is_zero(canonicalize(want - computed[i])):
                        raise ModelFileError(
                            f"declared xi_M[{a}] disagrees with rho(psi)"
                        )

    omega = None
    if "omega" in data:
        sec = data["omega"]
        _check_keys("omega", sec, {"omega"})
        entries = [[sp.Integer(0)] * rank for _ in range(rank)]
        for entry in sec.get("omega", []):
            _check_keys("omega.omega", entry, {"i", "j", "expr"})
            i, j = entry["i"] - 1, entry["j"] - 1
            if not (0 <= i < rank and 0 <= j < rank):
                raise ModelFileError(f"omega index out of range in {entry}")
            val = _parse_expr(entry["expr"], env, "omega entry")
            entries[i][j] = val
            entries[j][i] = canonicalize(-val)
        omega = SymplecticSection.from_matrix(model, entries)

    momentum = None
    if "momentum" in data:
        if algebra is None:
            raise ModelFileError("[momentum] requires [algebra]")
        sec = data["momentum"]
        _check_keys("momentum", sec, {"J"})
        J = sec["J"]
        if len(J) != algebra.dim:
            raise ModelFileError("J needs dim(g) entries")
        momentum = tuple(_parse_expr(x, env, f"J[{a}]") for a, x in enumerate(J))

    connection = None
    if "connection" in data:
        if algebra is None:
            raise ModelFileError("[connection] requires [algebra]")
        sec = data["connection"]
        _check_keys("connection", sec, {"A"})
        rows = sec["A"]
        if len(rows) != algebra.dim or any(len(r) != len(coords) for r in rows):
            raise ModelFileError("A must be dim(g) rows of dim entries")
        connection = tuple(
            tuple(_parse_expr(x, env, f"A[{a}]") for x in row)
            for a, row in enumerate(rows)
        )

    triv = None
    if "trivialization" in data:
        sec = data["trivialization"]
        _check_keys("trivialization", sec,
                    {"reduced_coords", "group_coords", "frame"})
        reduced = tuple(sec["reduced_coords"])
        group = tuple(sec["group_coords"])
        if set(reduced) | set(group) != set(coords) or set(reduced) & set(group):
            raise ModelFileError("trivialization must partition the chart")
        frame = sec["frame"]
        if any(len(r) != rank for r in frame):
            raise ModelFileError("frame rows must have rank entries")
        triv = Trivialization(
            reduced, group,
            tuple(tuple(_parse_expr(x, env, "frame") for x in row)
                  for row in frame),
        )

    return LoadedModel(
        model=model, algebra=algebra, action=action, omega=omega,
        momentum=momentum, connection=connection, trivialization=triv,
        name=name, description=meta.get("description", ""),
    )


def dump_model(model: AlgebroidModel, description="") -> str:
    """Serialize an algebroid section back to the file format."""
    lines = []
    if model.name or description:
        lines.append("[fixture-meta]")
        if model.name:
            lines.append(f'name = "{model.name}"')
        if description:
            lines.append(f'description = "{description}"')
        lines.append("")
    lines.append("[algebroid]")
    coords = ", ".join(f'"{c}"' for c in model.coords)
    lines.append(f"coords = [{coords}]")
    lines.append(f"rank = {model.rank}")
    rows = []
    for row in model.rho:
        rows.append("[" + ", ".join(f'"{symexpr.to_str(x)}"' for x in row) + "]")
    lines.append("rho = [" + ", ".join(rows) + "]")
    entries = []
    for i in range(model.rank):
        for j in range(i + 1, model.rank):
            for k in range(model.rank):
                if model.C[i][j][k] != 0:
                    expr = symexpr.to_str(model.C[i][j][k])
                    entries.append(
                        "{" + f'i = {i + 1}, j = {j + 1}, k = {k + 1}, '
                        f'expr = "{expr}"' + "}"
                    )
    if entries:
        lines.append("C = [\n  " + ",\n  ".join(entries) + ",\n]")
    return "\n".join(lines) + "\n"
