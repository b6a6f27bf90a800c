"""Exact algebra on n-qubit Pauli strings and real-weighted Pauli sums.

A Pauli string is stored symplectically as a pair of bit masks plus a
quarter-phase exponent:

    P = i^phase_exp * (tensor product over qubits of I, X, Y, Z)

where qubit q carries X iff bit q of ``x_mask`` is set and bit q of
``z_mask`` is clear, Z for the converse, Y when both are set, and I when
both are clear.  Qubit 0 is the least-significant bit of basis-state
indices; this convention is shared by the statevector engine and the
file format.

Internally a string is normalised as ``i^phase_exp * i^(3*|x&z|) * Z^z X^x``
(one factor ``Y = -i Z X`` per Y site), which makes products, phases, and
matrix actions pure mask arithmetic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, OracleSizeError

DEFAULT_ORACLE_CAP = 10

# coefficient merge floor for PauliSum canonicalization
COEFF_EPS = 1e-14

_LABEL_TOKEN = re.compile(r"^([IXYZ])(\d+)$")


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """Immutable n-qubit Pauli operator with exact quarter-phase."""

    n_qubits: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits <= 0:
            raise DimensionError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise DimensionError("mask exceeds qubit count")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0, 0)

    @classmethod
    def from_label(cls, label: str, n_qubits: int) -> "PauliString":
        """Parse the interchange form, e.g. ``"X0 Z2 Y5"`` or ``"I"``."""
        label = label.strip()
        if label == "I" or label == "":
            return cls.identity(n_qubits)
        x = z = 0
        seen = set()
        for token in label.split():
            m = _LABEL_TOKEN.match(token)
            if not m:
                raise ValueError(f"malformed Pauli token {token!r}")
            letter, q = m.group(1), int(m.group(2))
            if q >= n_qubits:
                raise ValueError(
                    f"qubit index {q} out of range for {n_qubits} qubits"
                )
            if q in seen:
                raise ValueError(f"duplicate qubit index {q} in {label!r}")
            if letter == "I":
                raise ValueError("identity letters are not written per qubit")
            seen.add(q)
            if letter in ("X", "Y"):
                x |= 1 << q
            if letter in ("Z", "Y"):
                z |= 1 << q
        return cls(n_qubits, x, z, 0)

    # -- inspection --------------------------------------------------------

    def letter(self, q: int) -> str:
        xb = (self.x_mask >> q) & 1
        zb = (self.z_mask >> q) & 1
        return ("I", "X", "Z", "Y")[xb + 2 * zb]

    def support(self) -> tuple[int, ...]:
        """Qubits carrying a non-identity letter, ascending."""
        mask = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n_qubits) if (mask >> q) & 1)

    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    def to_label(self) -> str:
        """Interchange rendering of the letter content (phase not included)."""
        if self.is_identity():
            return "I"
        return " ".join(f"{self.letter(q)}{q}" for q in self.support())

    def __str__(self):
        prefix = ("", "i ", "- ", "-i ")[self.phase_exp]
        return prefix + self.to_label()

    def __repr__(self):
        return f"PauliString({self.n_qubits}, {str(self)!r})"

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def hermitian_base(self) -> tuple["PauliString", float]:
        """Split off the real sign: returns (phase-0 string, +/-1).

        Only valid for Hermitian strings (phase_exp in {0, 2}).
        """
        if not self.is_hermitian():
            raise ValueError(f"{self} is not Hermitian")
        sign = 1.0 if self.phase_exp == 0 else -1.0
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, 0), sign

    def apply_phase_factor(self) -> complex:
        """Scalar ``i^phase_exp * i^(3*|x&z|)`` of the Z^z X^x normal form."""
        k = (self.phase_exp + 3 * _popcount(self.x_mask & self.z_mask)) % 4
        return (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)[k]


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Operator product p*q with exact i^k phase accumulation."""
    if p.n_qubits != q.n_qubits:
        raise DimensionError(
            f"qubit counts differ: {p.n_qubits} vs {q.n_qubits}"
        )
    x = p.x_mask ^ q.x_mask
    z = p.z_mask ^ q.z_mask
    phase = (
        p.phase_exp
        + q.phase_exp
        + 3 * (_popcount(p.x_mask & p.z_mask) + _popcount(q.x_mask & q.z_mask))
        + 2 * _popcount(p.x_mask & q.z_mask)
        + _popcount(x & z)
    ) % 4
    return PauliString(p.n_qubits, x, z, phase)


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff pq = qp (symplectic overlap parity is even)."""
    if p.n_qubits != q.n_qubits:
        raise DimensionError(
            f"qubit counts differ: {p.n_qubits} vs {q.n_qubits}"
        )
    return (
        _popcount(p.x_mask & q.z_mask) + _popcount(p.z_mask & q.x_mask)
    ) % 2 == 0


def to_dense(op, oracle_cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Exact 2^n x 2^n matrix of a PauliString or PauliSum.

    Capped at ``oracle_cap`` qubits; this is oracle support, not the
    simulation path.
    """
    if isinstance(op, PauliSum):
        dim = 1 << op.n_qubits
        _check_cap(op.n_qubits, oracle_cap)
        m = np.zeros((dim, dim), dtype=complex)
        for coeff, string in op.terms:
            m += coeff * to_dense(string, oracle_cap)
        m += op.constant * np.eye(dim)
        return m
    p: PauliString = op
    _check_cap(p.n_qubits, oracle_cap)
    dim = 1 << p.n_qubits
    idx = np.arange(dim, dtype=np.int64)
    rows = idx ^ p.x_mask
    signs = 1.0 - 2.0 * (np.bitwise_count(rows & np.int64(p.z_mask)) & 1)
    m = np.zeros((dim, dim), dtype=complex)
    m[rows, idx] = p.apply_phase_factor() * signs
    return m


def _check_cap(n_qubits: int, oracle_cap: int):
    if n_qubits > oracle_cap:
        raise OracleSizeError(
            f"{n_qubits} qubits exceeds dense-oracle cap {oracle_cap}"
        )


class PauliSum:
    """Real-weighted sum of Hermitian Pauli strings plus an identity offset.

    Canonical form: duplicate strings merged, coefficients below
    ``COEFF_EPS`` dropped, every stored string phase-0 (a phase-2 input
    folds its sign into the coefficient), first-occurrence order kept.
    """

    __slots__ = ("n_qubits", "terms", "constant")

    def __init__(self, n_qubits: int, terms=(), constant: float = 0.0):
        self.n_qubits = n_qubits
        merged: dict[tuple[int, int], float] = {}
        order: list[tuple[int, int]] = []
        for coeff, string in terms:
            if string.n_qubits != n_qubits:
                raise DimensionError("term qubit count mismatch")
            base, sign = string.hermitian_base()
            if base.is_identity():
                constant += sign * coeff
                continue
            key = (base.x_mask, base.z_mask)
            if key not in merged:
                merged[key] = 0.0
                order.append(key)
            merged[key] += sign * coeff
        self.terms: list[tuple[float, PauliString]] = [
            (merged[k], PauliString(n_qubits, k[0], k[1], 0))
            for k in order
            if abs(merged[k]) > COEFF_EPS
        ]
        self.constant = float(constant)

    def l1_norm(self) -> float:
        """Sum of |coefficients|, identity offset excluded."""
        return float(sum(abs(c) for c, _ in self.terms))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and self.constant == other.constant
            and self.terms == other.terms
        )

    def map_coeffs(self, fn) -> "PauliSum":
        return PauliSum(
            self.n_qubits,
            [(fn(c), s) for c, s in self.terms],
            constant=self.constant,
        )

    def sorted(self) -> "PauliSum":
        """Copy with terms ordered by (weight, z_mask, x_mask)."""
        ordered = sorted(
            self.terms, key=lambda t: (t[1].weight(), t[1].z_mask, t[1].x_mask)
        )
        return PauliSum(self.n_qubits, ordered, constant=self.constant)

    def __repr__(self):
        body = " + ".join(f"{c:+g}*{s.to_label()}" for c, s in self.terms[:4])
        more = f" + ... ({len(self.terms)} terms)" if len(self.terms) > 4 else ""
        return f"PauliSum({self.n_qubits}, {body}{more}, const={self.constant:g})"
