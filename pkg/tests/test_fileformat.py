import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcprog import fileformat, models
from qcprog.cli import example_text
from qcprog.errors import DimensionMismatch, ParseError, ValidationError
from qcprog.generators import random_instance

seeds = st.integers(0, 2**32 - 1)


def bundled(name):
    return resources.files("qcprog") / "data" / f"{name}.qprog"


def flip_doc():
    return json.loads(fileformat.dumps(*models.flip()))


@pytest.mark.parametrize("name", sorted(models.BUILTIN))
def test_bundled_files_match_builders(name):
    assert bundled(name).read_text() == example_text(name)


def test_walk_file(tmp_path):
    pf = fileformat.load(str(bundled("walk")))
    p = pf.program
    assert (p.dim, p.m) == (3, 2)
    w1, w2 = models.walk_unitaries()
    assert np.array_equal(p.processes[0].kraus[0], w1)
    assert np.array_equal(p.processes[1].kraus[0], w2)
    # entries are (1/sqrt 3) {1, w, w^2}
    w = np.exp(2j * np.pi / 3)
    allowed = np.array([1, w, w**2]) / np.sqrt(3)
    for k in (w1, w2):
        assert np.all(np.min(np.abs(k[..., None] - allowed), axis=-1) < 1e-15)
    assert np.array_equal(p.m0, np.diag([0, 0, 1]))
    assert np.array_equal(pf.rho0, models.basis_state(3, 0))


def test_parse_program_returns_program():
    assert fileformat.parse_program(bundled("flip")).dim == 2


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_round_trip(seed, d, m):
    p, rho = random_instance(d, m, np.random.default_rng(seed))
    q = fileformat.loads(fileformat.dumps(p, rho))
    for a, b in zip(p.processes, q.program.processes):
        assert np.max(np.abs(a.kraus - b.kraus)) <= 1e-15
    assert np.max(np.abs(p.m0 - q.program.m0)) <= 1e-15
    assert np.max(np.abs(p.m1 - q.program.m1)) <= 1e-15
    assert np.max(np.abs(rho - q.rho0)) <= 1e-15
    assert q.program.names == p.names


def test_pure_state_input():
    doc = flip_doc()
    doc["initial_state"] = {"pure": [[0, 0], [0, 1]]}
    pf = fileformat.loads(json.dumps(doc))
    assert np.allclose(pf.rho0, np.diag([0, 1]))
    assert pf.pure is not None


def test_truncated_file():
    text = fileformat.dumps(*models.walk())
    with pytest.raises(ParseError) as info:
        fileformat.loads(text[: len(text) // 2])
    assert "line" in info.value.location


def test_completeness_violation():
    doc = flip_doc()
    eye = [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    doc["measurement"] = {"m0": eye, "m1": eye}
    with pytest.raises(ValidationError) as info:
        fileformat.loads(json.dumps(doc))
    assert info.value.failures[0]["check"] == "completeness"


def test_trace_violation():
    doc = flip_doc()
    doc["processes"][0]["kraus"] = [[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]
    with pytest.raises(ValidationError):
        fileformat.loads(json.dumps(doc))


def test_state_trace_rejected():
    doc = flip_doc()
    doc["initial_state"] = {"pure": [[0.5, 0], [0, 0]]}
    with pytest.raises(ValidationError):
        fileformat.loads(json.dumps(doc))


@pytest.mark.parametrize(
    "mutate, location",
    [
        (lambda d: d.pop("dimension"), "$"),
        (lambda d: d.__setitem__("dimension", 0), "$.dimension"),
        (lambda d: d.__setitem__("format", "other"), "$.format"),
        (lambda d: d.__setitem__("version", 2), "$.version"),
        (lambda d: d.__setitem__("processes", []), "$.processes"),
        (lambda d: d["processes"][0].__setitem__("kraus", []), "$.processes[0].kraus"),
        (lambda d: d["processes"][0]["kraus"][0][0].__setitem__(1, 3.0), "$.processes[0].kraus[0][0][1]"),
        (lambda d: d["processes"][0]["kraus"][0][0].__setitem__(1, ["1", 0]), "$.processes[0].kraus[0][0][1]"),
        (lambda d: d["processes"][0].__setitem__("name", ""), "$.processes[0].name"),
        (lambda d: d.__setitem__("initial_state", {}), "$.initial_state"),
        (lambda d: d["measurement"].pop("m1"), "$.measurement"),
        (lambda d: d.__setitem__("processes", d["processes"] * 2), "$.processes"),
    ],
)
def test_structural_errors(mutate, location):
    doc = flip_doc()
    mutate(doc)
    with pytest.raises(ParseError) as info:
        fileformat.loads(json.dumps(doc))
    assert info.value.location == location


def test_dimension_mismatch():
    doc = flip_doc()
    doc["measurement"]["m0"] = doc["measurement"]["m0"][:1]
    with pytest.raises(DimensionMismatch, match=r"\$\.measurement\.m0"):
        fileformat.loads(json.dumps(doc))


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        fileformat.load(tmp_path / "nope.qprog")


def test_dump(tmp_path):
    path = tmp_path / "walk.qprog"
    fileformat.dump(*models.walk(), path)
    assert fileformat.load(path).program.m == 2
