"""Fixture generation: geometry -> RHF -> active space -> JW -> JSON document."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .basis import ANGSTROM_TO_BOHR
from .fci import fci_ground_energy
from .fermion import apply_letter_term, letters_to_label, qubit_hamiltonian
from .scf import freeze_core, run_rhf
from .uccsd import _masks, uccsd_pool_labels

FORMAT_VERSION = 1


@dataclass
class MoleculeSpec:
    name: str
    atoms: list  # (element, xyz in bohr)
    bond_length: float  # angstrom, metadata only
    n_frozen_core: int = 0
    charge: int = 0
    multiplicity: int = 1
    basis: str = "sto-3g"


def molecule_spec(name: str, bond_length: float, frozen_core: bool | None = None) -> MoleculeSpec:
    """Geometry builders for the bundled molecule set, bond length in angstrom."""
    r = bond_length * ANGSTROM_TO_BOHR
    name = name.lower()
    if name == "h2":
        atoms = [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]
        n_core = 0
    elif name == "h4":
        atoms = [("H", (0.0, 0.0, k * r)) for k in range(4)]
        n_core = 0
    elif name == "lih":
        atoms = [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]
        n_core = 1
    elif name == "beh2":
        atoms = [("H", (0.0, 0.0, -r)), ("Be", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]
        n_core = 1
    elif name == "n2":
        atoms = [("N", (0.0, 0.0, 0.0)), ("N", (0.0, 0.0, r))]
        n_core = 2
    else:
        raise ValueError(f"unknown molecule {name!r}")
    if frozen_core is False:
        n_core = 0
    return MoleculeSpec(name=name, atoms=atoms, bond_length=bond_length, n_frozen_core=n_core)


def generate(spec: MoleculeSpec) -> dict:
    """Build the full problem document as a plain dict."""
    if spec.charge != 0 or spec.multiplicity != 1:
        raise ValueError("only neutral closed-shell molecules are supported")
    scf = run_rhf(spec.atoms)
    active = freeze_core(scf, spec.n_frozen_core)
    n_qubits = 2 * active.n_orbitals

    terms, constant = qubit_hamiltonian(active.h1, active.eri, active.constant)
    fci = fci_ground_energy(active.h1, active.eri, active.constant, active.n_electrons)

    ordered = sorted(
        terms.items(),
        key=lambda kv: (sum(l != "I" for l in kv[0]), _masks(kv[0])[1], _masks(kv[0])[0]),
    )
    reference = "1" * active.n_electrons + "0" * (n_qubits - active.n_electrons)
    pool = uccsd_pool_labels(n_qubits, active.n_electrons)

    return {
        "format_version": FORMAT_VERSION,
        "n_qubits": n_qubits,
        "reference_state": reference,
        "constant": constant,
        "terms": [{"coeff": c, "pauli": letters_to_label(t)} for t, c in ordered],
        "pool": pool,
        "metadata": {
            "molecule": spec.name,
            "basis": spec.basis,
            "bond_length": spec.bond_length,
            "hf_energy": scf.e_total,
            "fci_energy": fci,
        },
    }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return json.dumps(value)


def document_text(doc: dict) -> str:
    """Emit the canonical JSON layout of the interchange schema."""
    lines = ["{"]
    lines.append(f'  "format_version": {doc["format_version"]},')
    lines.append(f'  "n_qubits": {doc["n_qubits"]},')
    lines.append(f'  "reference_state": {json.dumps(doc["reference_state"])},')
    lines.append(f'  "constant": {_fmt(doc["constant"])},')
    term_lines = [
        f'    {{"coeff": {_fmt(t["coeff"])}, "pauli": {json.dumps(t["pauli"])}}}'
        for t in doc["terms"]
    ]
    lines.append('  "terms": [')
    lines.append(",\n".join(term_lines))
    lines.append("  ],")
    pool_lines = [f"    {json.dumps(lbl)}" for lbl in doc["pool"]]
    lines.append('  "pool": [')
    lines.append(",\n".join(pool_lines))
    lines.append("  ],")
    meta = doc["metadata"]
    meta_lines = [f"    {json.dumps(k)}: {_fmt(meta[k])}" for k in
                  ("molecule", "basis", "bond_length", "hf_energy", "fci_energy")]
    lines.append('  "metadata": {')
    lines.append(",\n".join(meta_lines))
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_document(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(document_text(doc))


@dataclass
class VerifyReport:
    hf_match: bool
    fci_match: bool
    hf_delta: float
    fci_delta: float
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.hf_match and self.fci_match and not self.problems


def verify(path, hf_tol: float = 1e-8, fci_tol: float = 1e-6) -> VerifyReport:
    """Re-parse an emitted file and re-derive its metadata energies.

    The reference energy is recomputed from the letter terms, and the ground
    energy from an independent (sparse) diagonalization of the qubit
    Hamiltonian; both must match the recorded metadata.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    n = doc["n_qubits"]
    dim = 1 << n
    letter_terms = []
    for item in doc["terms"]:
        letters = ["I"] * n
        if item["pauli"] != "I":
            for token in item["pauli"].split():
                letters[int(token[1:])] = token[0]
        letter_terms.append((item["coeff"], tuple(letters)))
    constant = doc["constant"]

    def ham_apply(vec):
        vec = np.asarray(vec, dtype=complex).reshape(dim)
        out = constant * vec
        for coeff, letters in letter_terms:
            out = out + coeff * apply_letter_term(vec, letters)
        return out

    ref_index = sum(1 << q for q, ch in enumerate(doc["reference_state"]) if ch == "1")
    ref = np.zeros(dim, dtype=complex)
    ref[ref_index] = 1.0
    hf = float(np.vdot(ref, ham_apply(ref)).real)

    if n <= 10:
        dense = np.zeros((dim, dim), dtype=complex)
        basis = np.eye(dim, dtype=complex)
        for col in range(dim):
            dense[:, col] = ham_apply(basis[:, col])
        ground = float(np.linalg.eigvalsh(dense)[0])
    else:
        op = LinearOperator((dim, dim), matvec=ham_apply, dtype=complex)
        ground = float(eigsh(op, k=1, which="SA", maxiter=5000)[0][0])

    hf_delta = abs(hf - doc["metadata"]["hf_energy"])
    fci_delta = abs(ground - doc["metadata"]["fci_energy"])
    problems = []
    if doc.get("format_version") != FORMAT_VERSION:
        problems.append("format_version mismatch")
    return VerifyReport(
        hf_match=hf_delta < hf_tol,
        fci_match=fci_delta < fci_tol,
        hf_delta=hf_delta,
        fci_delta=fci_delta,
        problems=problems,
    )
