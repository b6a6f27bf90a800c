"""Problem-document parsing, validation, and canonical serialization."""

import json

import pytest

from driftqite import hamio
from driftqite.errors import DocumentError
from driftqite.state import exact_diagonalize, expectation_sum, from_bitstring

from conftest import load_fixture

MINIMAL = """
{
  "format_version": 1,
  "n_qubits": 1,
  "reference_state": "0",
  "constant": 0.0,
  "terms": [{"coeff": 1.0, "pauli": "Z0"}]
}
"""


class TestParse:
    def test_minimal(self):
        doc = hamio.parse(MINIMAL)
        assert doc.n_qubits == 1
        assert doc.terms == [(1.0, "Z0")]
        h = doc.hamiltonian()
        assert expectation_sum(from_bitstring("0"), h) == pytest.approx(1.0)

    def test_malformed_pauli_token(self):
        bad = MINIMAL.replace("Z0", "W3")
        with pytest.raises(DocumentError) as err:
            hamio.parse(bad)
        assert "W3" in str(err.value) and "terms[0]" in str(err.value)

    def test_index_out_of_range(self):
        bad = MINIMAL.replace("Z0", "Z4")
        with pytest.raises(DocumentError):
            hamio.parse(bad)

    def test_duplicate_terms_merge(self):
        data = json.loads(MINIMAL)
        data["terms"] = [
            {"coeff": 0.25, "pauli": "Z0"},
            {"coeff": 0.5, "pauli": "Z0"},
        ]
        doc = hamio.parse(json.dumps(data))
        assert doc.terms == [(0.75, "Z0")]

    def test_merge_preserves_spectrum(self):
        data = json.loads(MINIMAL)
        data["n_qubits"] = 2
        data["reference_state"] = "00"
        data["terms"] = [
            {"coeff": 0.25, "pauli": "Z0"},
            {"coeff": 0.5, "pauli": "X0 X1"},
            {"coeff": 0.25, "pauli": "Z0"},
        ]
        merged = hamio.parse(json.dumps(data))
        data["terms"] = [
            {"coeff": 0.5, "pauli": "Z0"},
            {"coeff": 0.5, "pauli": "X0 X1"},
        ]
        direct = hamio.parse(json.dumps(data))
        g1, s1 = exact_diagonalize(merged.hamiltonian())
        g2, s2 = exact_diagonalize(direct.hamiltonian())
        assert g1 == pytest.approx(g2, abs=1e-12)

    @pytest.mark.parametrize(
        "mutate, path_hint",
        [
            (lambda d: d.pop("n_qubits"), "n_qubits"),
            (lambda d: d.update(n_qubits=0), "n_qubits"),
            (lambda d: d.update(reference_state="01x"[: d["n_qubits"]] + "x"), "reference_state"),
            (lambda d: d.update(reference_state="00"), "reference_state"),
            (lambda d: d.update(constant=float("nan")), "constant"),
            (lambda d: d.update(constant="zero"), "constant"),
            (lambda d: d.update(terms=[]), "terms"),
            (lambda d: d.update(terms=[{"coeff": float("inf"), "pauli": "Z0"}]), "coeff"),
            (lambda d: d.update(terms=[{"pauli": "Z0"}]), "coeff"),
            (lambda d: d.update(pool=[]), "pool"),
            (lambda d: d.update(format_version=99), "format_version"),
        ],
    )
    def test_error_paths(self, mutate, path_hint):
        data = json.loads(MINIMAL)
        mutate(data)
        with pytest.raises(DocumentError) as err:
            hamio.parse(json.dumps(data))
        assert path_hint in str(err.value)

    def test_invalid_json(self):
        with pytest.raises(DocumentError):
            hamio.parse("{not json")


class TestRoundTrip:
    @pytest.mark.parametrize(
        "name", ["h2_0.74.json", "h4_1.50.json", "lih_1.60.json"]
    )
    def test_fixture_round_trip(self, name):
        doc = load_fixture(name)
        text = hamio.serialize(doc)
        again = hamio.parse(text)
        assert again == doc
        assert hamio.serialize(again) == text

    def test_pool_dedup(self):
        data = json.loads(MINIMAL)
        data["pool"] = ["X0", "X0"]
        doc = hamio.parse(json.dumps(data))
        assert doc.pool == ["X0"]


class TestFixtureCorpus:
    def test_h2_ground_energy_matches_metadata(self, h2_doc):
        ground, _ = exact_diagonalize(h2_doc.hamiltonian())
        assert ground == pytest.approx(h2_doc.metadata["fci_energy"], abs=1e-6)

    def test_h2_reference_is_hf(self, h2_doc):
        e_ref = expectation_sum(
            from_bitstring(h2_doc.reference_state), h2_doc.hamiltonian()
        )
        assert e_ref == pytest.approx(h2_doc.metadata["hf_energy"], abs=1e-8)

    def test_all_fixtures_parse(self):
        from conftest import FIXTURE_DIR

        names = sorted(FIXTURE_DIR.glob("*.json"))
        assert len(names) >= 16
        for path in names:
            doc = hamio.load(path)
            assert doc.n_qubits >= 4
