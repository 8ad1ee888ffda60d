import json

import networkx as nx
import pytest

from qdisco.datasets import data_path
from qdisco.errors import SchemaError
from qdisco.hardware import (
    ErrorProfile,
    Fleet,
    QpuModel,
    load_calibration,
    synthesize_topology,
)

MINIMAL_DOC = json.dumps(
    {
        "name": "tiny",
        "num_qubits": 2,
        "readout_error": [0.01, 0.02],
        "edges": [{"q": [0, 1], "gate_error": 0.005}],
    }
)


def as_nx(qpu: QpuModel) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(qpu.num_qubits))
    g.add_edges_from(qpu.edges)
    return g


class TestLoadCalibration:
    def test_minimal_two_qubit_document(self):
        qpu = load_calibration(MINIMAL_DOC)
        assert qpu.num_qubits == 2
        assert qpu.edges == ((0, 1),)
        assert qpu.gate_error[(0, 1)] == 0.005

    def test_out_of_range_gate_error(self):
        doc = json.loads(MINIMAL_DOC)
        doc["edges"][0]["gate_error"] = 1.2
        with pytest.raises(SchemaError, match="gate_error"):
            load_calibration(json.dumps(doc))

    def test_out_of_range_readout(self):
        doc = json.loads(MINIMAL_DOC)
        doc["readout_error"] = [0.01, -0.3]
        with pytest.raises(SchemaError, match="readout_error"):
            load_calibration(json.dumps(doc))

    def test_dangling_edge(self):
        doc = json.loads(MINIMAL_DOC)
        doc["edges"].append({"q": [0, 5], "gate_error": 0.004})
        with pytest.raises(SchemaError, match="missing qubit"):
            load_calibration(json.dumps(doc))

    def test_missing_field(self):
        doc = json.loads(MINIMAL_DOC)
        del doc["readout_error"]
        with pytest.raises(SchemaError, match="readout_error"):
            load_calibration(json.dumps(doc))

    def test_not_json(self):
        with pytest.raises(SchemaError):
            load_calibration("{broken")

    def test_bundled_heavy_hex_fixture(self):
        qpu = load_calibration(data_path("qpu_hex16.json").read_text())
        assert qpu.num_qubits == 16
        assert len(qpu.edges) == 18
        assert nx.is_connected(as_nx(qpu))

    def test_round_trip(self):
        for kind, kwargs in [
            ("line", {"num_qubits": 5}),
            ("ring", {"num_qubits": 6}),
            ("heavy_hex_16", {}),
            ("t_shape_7", {}),
            ("grid", {"rows": 2, "cols": 3}),
        ]:
            qpu = synthesize_topology(
                kind,
                profile=ErrorProfile.random((0.001, 0.05), (0.001, 0.02), seed=3),
                **kwargs,
            )
            assert load_calibration(qpu.serialize()) == qpu


class TestSynthesizeTopology:
    def test_line_shape_and_rates(self):
        qpu = synthesize_topology(
            "line", num_qubits=3, profile=ErrorProfile.uniform(0.01, 0.005)
        )
        assert qpu.num_qubits == 3
        assert qpu.edges == ((0, 1), (1, 2))
        assert qpu.readout_error == (0.01, 0.01, 0.01)
        assert set(qpu.gate_error.values()) == {0.005}

    def test_heavy_hex_16_qubit_count(self):
        qpu = synthesize_topology("heavy_hex_16")
        assert qpu.num_qubits == 16

    def test_t_shape_7(self):
        qpu = synthesize_topology("t_shape_7")
        assert qpu.num_qubits == 7
        assert len(qpu.edges) == 6

    def test_seeded_random_is_reproducible(self):
        profile = ErrorProfile.random((0.005, 0.02), (0.001, 0.01), seed=9)
        a = synthesize_topology("ring", num_qubits=6, profile=profile)
        b = synthesize_topology("ring", num_qubits=6, profile=profile)
        assert a == b

    def test_different_seeds_differ(self):
        a = synthesize_topology(
            "ring", num_qubits=6, profile=ErrorProfile.random((0.005, 0.02), (0.001, 0.01), 1)
        )
        b = synthesize_topology(
            "ring", num_qubits=6, profile=ErrorProfile.random((0.005, 0.02), (0.001, 0.01), 2)
        )
        assert a != b

    def test_unknown_kind(self):
        with pytest.raises(SchemaError, match="unknown topology"):
            synthesize_topology("torus", num_qubits=4)

    @pytest.mark.parametrize(
        "kind,kwargs",
        [
            ("line", {"num_qubits": 8}),
            ("ring", {"num_qubits": 9}),
            ("heavy_hex_16", {}),
            ("t_shape_7", {}),
            ("grid", {"rows": 3, "cols": 4}),
        ],
    )
    def test_every_topology_is_connected(self, kind, kwargs):
        qpu = synthesize_topology(kind, **kwargs)
        assert nx.is_connected(as_nx(qpu))


class TestFleet:
    def test_rejects_duplicate_names(self):
        a = synthesize_topology("line", num_qubits=3, name="same")
        b = synthesize_topology("ring", num_qubits=4, name="same")
        with pytest.raises(SchemaError, match="duplicate"):
            Fleet((a, b))

    def test_prior_for_unknown_name(self):
        a = synthesize_topology("line", num_qubits=3, name="a")
        with pytest.raises(SchemaError, match="unknown QPU"):
            Fleet((a,), {"ghost": 1.0})

    def test_lookup_and_priors(self):
        a = synthesize_topology("line", num_qubits=3, name="a")
        b = synthesize_topology("ring", num_qubits=4, name="b")
        fleet = Fleet((a, b), {"a": 1.2})
        assert fleet.get("b") is b
        assert fleet.prior("a") == 1.2
        assert fleet.prior("b") == 0.0
