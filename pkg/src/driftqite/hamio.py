"""Problem-document file format: parse, validate, serialize.

The interchange format is JSON with a fixed canonical key order and
17-significant-digit coefficients, so that ``parse(serialize(doc))``
round-trips bit-exactly.  ``reference_state`` character position q is
qubit q (little-endian with respect to amplitude indices).

Schema (format_version 1):

    {
      "format_version": 1,
      "n_qubits": <int>,
      "reference_state": "<bitstring, length n_qubits>",
      "constant": <real>,
      "terms": [{"coeff": <real>, "pauli": "<label>"}, ...],
      "pool": ["<label>", ...],            # optional
      "metadata": {                        # optional, free-form scalars
        "molecule": ..., "basis": ..., "bond_length": ...,
        "hf_energy": ..., "fci_energy": ...
      }
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import DocumentError
from .paulis import PauliString, PauliSum

FORMAT_VERSION = 1

_METADATA_KEY_ORDER = ("molecule", "basis", "bond_length", "hf_energy", "fci_energy")


@dataclass
class ProblemDocument:
    """Validated qubit Hamiltonian plus reference state and optional pool."""

    n_qubits: int
    reference_state: str
    constant: float
    terms: list[tuple[float, str]]
    pool: list[str] | None = None
    metadata: dict = field(default_factory=dict)

    def hamiltonian(self) -> PauliSum:
        return PauliSum(
            self.n_qubits,
            [(c, PauliString.from_label(lbl, self.n_qubits)) for c, lbl in self.terms],
            constant=self.constant,
        )

    def pool_strings(self) -> list[PauliString]:
        if not self.pool:
            return []
        return [PauliString.from_label(lbl, self.n_qubits) for lbl in self.pool]


def _expect(cond, message, path):
    if not cond:
        raise DocumentError(message, path)


def _canonical_label(raw: str, n_qubits: int, path: str) -> str:
    if not isinstance(raw, str):
        raise DocumentError(f"expected string Pauli label, got {type(raw).__name__}", path)
    try:
        return PauliString.from_label(raw, n_qubits).to_label()
    except ValueError as exc:
        raise DocumentError(str(exc), path) from exc


def parse(text: str) -> ProblemDocument:
    """Parse and validate a document; duplicate Hamiltonian terms merge."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}", "$") from exc
    _expect(isinstance(data, dict), "document root must be an object", "$")
    version = data.get("format_version")
    _expect(version == FORMAT_VERSION, f"unsupported format_version {version!r}", "$.format_version")

    n = data.get("n_qubits")
    _expect(isinstance(n, int) and n > 0, f"n_qubits must be a positive integer, got {n!r}", "$.n_qubits")

    ref = data.get("reference_state")
    _expect(isinstance(ref, str), "reference_state must be a string", "$.reference_state")
    _expect(len(ref) == n, f"reference_state length {len(ref)} != n_qubits {n}", "$.reference_state")
    _expect(set(ref) <= {"0", "1"}, "reference_state must be a bitstring", "$.reference_state")

    constant = data.get("constant")
    _expect(isinstance(constant, (int, float)) and not isinstance(constant, bool),
            "constant must be a number", "$.constant")
    _expect(math.isfinite(constant), "constant must be finite", "$.constant")

    raw_terms = data.get("terms")
    _expect(isinstance(raw_terms, list) and raw_terms, "terms must be a nonempty list", "$.terms")
    merged: dict[str, float] = {}
    order: list[str] = []
    for i, item in enumerate(raw_terms):
        path = f"$.terms[{i}]"
        _expect(isinstance(item, dict), "term must be an object", path)
        coeff = item.get("coeff")
        _expect(isinstance(coeff, (int, float)) and not isinstance(coeff, bool),
                "coeff must be a number", path + ".coeff")
        _expect(math.isfinite(coeff), "coeff must be finite", path + ".coeff")
        label = _canonical_label(item.get("pauli"), n, path + ".pauli")
        if label not in merged:
            merged[label] = 0.0
            order.append(label)
        merged[label] += float(coeff)
    terms = [(merged[lbl], lbl) for lbl in order]

    pool = None
    if "pool" in data and data["pool"] is not None:
        raw_pool = data["pool"]
        _expect(isinstance(raw_pool, list), "pool must be a list", "$.pool")
        _expect(len(raw_pool) > 0, "pool must be nonempty when present", "$.pool")
        pool = []
        seen = set()
        for i, lbl in enumerate(raw_pool):
            canon = _canonical_label(lbl, n, f"$.pool[{i}]")
            if canon not in seen:
                seen.add(canon)
                pool.append(canon)

    metadata = {}
    if "metadata" in data and data["metadata"] is not None:
        raw_meta = data["metadata"]
        _expect(isinstance(raw_meta, dict), "metadata must be an object", "$.metadata")
        for key, value in raw_meta.items():
            _expect(isinstance(key, str), "metadata keys must be strings", "$.metadata")
            _expect(value is None or isinstance(value, (str, int, float, bool)),
                    f"metadata value for {key!r} must be scalar", f"$.metadata.{key}")
            metadata[key] = value

    return ProblemDocument(
        n_qubits=n,
        reference_state=ref,
        constant=float(constant),
        terms=terms,
        pool=pool,
        metadata=metadata,
    )


def _fmt_number(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    # 17 significant digits round-trips IEEE float64 exactly
    return format(float(value), ".17g")


def _fmt_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    return _fmt_number(value)


def serialize(doc: ProblemDocument) -> str:
    """Canonical text form (fixed key order, 17-digit coefficients)."""
    lines = ["{"]
    lines.append(f'  "format_version": {FORMAT_VERSION},')
    lines.append(f'  "n_qubits": {doc.n_qubits},')
    lines.append(f'  "reference_state": {json.dumps(doc.reference_state)},')
    lines.append(f'  "constant": {_fmt_number(doc.constant)},')
    term_lines = [
        f'    {{"coeff": {_fmt_number(c)}, "pauli": {json.dumps(lbl)}}}'
        for c, lbl in doc.terms
    ]
    lines.append('  "terms": [')
    lines.append(",\n".join(term_lines))
    tail_comma = "," if (doc.pool or doc.metadata) else ""
    lines.append(f"  ]{tail_comma}")
    if doc.pool:
        pool_lines = [f"    {json.dumps(lbl)}" for lbl in doc.pool]
        lines.append('  "pool": [')
        lines.append(",\n".join(pool_lines))
        lines.append("  ]" + ("," if doc.metadata else ""))
    if doc.metadata:
        known = [k for k in _METADATA_KEY_ORDER if k in doc.metadata]
        extra = sorted(k for k in doc.metadata if k not in _METADATA_KEY_ORDER)
        meta_lines = [
            f"    {json.dumps(k)}: {_fmt_scalar(doc.metadata[k])}" for k in known + extra
        ]
        lines.append('  "metadata": {')
        lines.append(",\n".join(meta_lines))
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load(path) -> ProblemDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def dump(doc: ProblemDocument, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(doc))
