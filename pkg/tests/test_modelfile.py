"""Model file format: parsing, validation, round-trips."""

import pytest

from algebroids import fixtures as fx
from algebroids.modelfile import ModelFileError, dump_model, from_dict, load

BASE = {
    "algebroid": {
        "coords": ["x1", "x2"],
        "rank": 2,
        "rho": [["1", "0"], ["0", "1"]],
        "C": [],
    }
}


def _with(**over):
    data = {k: dict(v) for k, v in BASE.items()}
    data.update(over)
    return data


def test_minimal_model_loads():
    lm = from_dict(BASE)
    assert lm.model.rank == 2
    assert lm.model.coords == ("x1", "x2")


@pytest.mark.parametrize("name", fx.FIXTURE_NAMES)
def test_all_fixture_files_load(name):
    lm = fx.load_fixture(name)
    assert lm.model.rank > 0
    assert lm.name == name


def test_unknown_section_rejected():
    with pytest.raises(ModelFileError):
        from_dict(_with(bogus={}))


def test_unknown_key_rejected():
    data = _with()
    data["algebroid"]["extra"] = 1
    with pytest.raises(ModelFileError):
        from_dict(data)


def test_missing_algebroid_rejected():
    with pytest.raises(ModelFileError):
        from_dict({"fixture-meta": {"name": "x"}})


def test_bad_expression_rejected():
    data = _with()
    data["algebroid"]["rho"] = [["1", "0"], ["0", "z9"]]
    with pytest.raises(ModelFileError):
        from_dict(data)


def test_C_antisymmetry_autocompleted():
    data = _with()
    data["algebroid"]["coords"] = []
    data["algebroid"]["rho"] = [[], []]
    data["algebroid"]["C"] = []
    lm = from_dict(data)
    assert lm.model.C[0][1][0] == 0


def test_C_index_out_of_range():
    data = _with()
    data["algebroid"]["C"] = [{"i": 1, "j": 3, "k": 1, "expr": "1"}]
    with pytest.raises(ModelFileError):
        from_dict(data)


def test_action_requires_algebra():
    data = _with(action={"psi": [["1", "0"]]})
    with pytest.raises(ModelFileError):
        from_dict(data)


def test_declared_xi_M_must_match():
    data = _with(
        algebra={"dim": 1, "c": []},
        action={"psi": [["1", "0"]], "xi_M": [["0", "1"]]},
    )
    with pytest.raises(ModelFileError):
        from_dict(data)
    data["action"]["xi_M"] = [["1", "0"]]
    assert from_dict(data).action is not None


def test_trivialization_must_partition_chart():
    data = _with(
        algebra={"dim": 1, "c": []},
        action={"psi": [["1", "0"]]},
        trivialization={
            "reduced_coords": ["x1"],
            "group_coords": ["x1"],
            "frame": [["0", "1"]],
        },
    )
    with pytest.raises(ModelFileError):
        from_dict(data)


def test_dump_round_trip(tmp_path):
    model = fx.load_fixture("fix-act").model
    text = dump_model(model, description="round trip")
    path = tmp_path / "model.toml"
    path.write_text(text)
    again = load(path)
    assert again.model.coords == model.coords
    assert again.model.rank == model.rank
    assert again.model.rho == model.rho
    assert again.model.C == model.C


def test_load_invalid_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("this is [not toml")
    with pytest.raises(ModelFileError):
        load(path)
