"""Pauli operator pools restricting the evolution generator.

Pools are either loaded from the problem document or generated as the
Jordan-Wigner image of coupled-cluster single and double excitation
generators.  Spin-orbital ordering is interleaved: spatial orbital i maps
to qubit 2i (alpha) and 2i+1 (beta).  Electrons fill spin-orbitals
0..n_electrons-1.  The pool is a basis, so excitation coefficients are
discarded; only the distinct Hermitian strings are kept, in a stable
deterministic order (singles then doubles, index-lexicographic, strings
sorted within each generator).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import ConfigurationError
from .hamio import ProblemDocument
from .paulis import PauliString, multiply

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


@dataclass(frozen=True)
class OperatorPool:
    """Ordered set of distinct Hermitian Pauli strings (no identity)."""

    n_qubits: int
    paulis: tuple[PauliString, ...]
    provenance: str  # "file" | "uccsd_generated"

    def __post_init__(self):
        if len(self.paulis) == 0:
            raise ConfigurationError("operator pool must be nonempty")
        seen = set()
        for p in self.paulis:
            if p.n_qubits != self.n_qubits:
                raise ConfigurationError("pool string qubit count mismatch")
            if p.is_identity():
                raise ConfigurationError("identity string not allowed in pool")
            if p.phase_exp != 0:
                raise ConfigurationError("pool strings must be phase-0 Hermitian")
            key = (p.x_mask, p.z_mask)
            if key in seen:
                raise ConfigurationError(f"duplicate pool string {p.to_label()}")
            seen.add(key)

    def __len__(self):
        return len(self.paulis)

    def labels(self) -> list[str]:
        return [p.to_label() for p in self.paulis]


def _ladder(n_qubits: int, p: int, dagger: bool) -> list[tuple[complex, PauliString]]:
    """JW image of a_p (or a_p^dagger): (X_p -/+ iY_p)/2 times the Z chain."""
    zchain = (1 << p) - 1
    x_part = PauliString(n_qubits, 1 << p, zchain, 0)
    y_part = PauliString(n_qubits, 1 << p, zchain | (1 << p), 0)
    sy = -0.5j if dagger else 0.5j
    return [(0.5 + 0.0j, x_part), (sy, y_part)]


def _product(factors) -> dict[tuple[int, int], complex]:
    """Expand a product of ladder-operator sums into phase-0 strings."""
    acc = None
    for factor in factors:
        if acc is None:
            acc = {(p.x_mask, p.z_mask): c * _PHASES[p.phase_exp] for c, p in factor}
            continue
        nxt: dict[tuple[int, int], complex] = {}
        for (x1, z1), c1 in acc.items():
            p1 = PauliString(factor[0][1].n_qubits, x1, z1, 0)
            for c2, p2 in factor:
                r = multiply(p1, p2)
                key = (r.x_mask, r.z_mask)
                nxt[key] = nxt.get(key, 0.0) + c1 * c2 * _PHASES[r.phase_exp]
        acc = nxt
    return acc


def excitation_generator_strings(
    n_qubits: int, creations: tuple[int, ...], annihilations: tuple[int, ...]
) -> list[PauliString]:
    """Distinct strings of i(T - T^dagger) for T = a^dag_c1 .. a_a1 ..

    Coefficients are discarded; strings come back sorted by (z, x) masks.
    """
    fwd = [_ladder(n_qubits, c, True) for c in creations]
    fwd += [_ladder(n_qubits, a, False) for a in annihilations]
    rev = [_ladder(n_qubits, a, True) for a in reversed(annihilations)]
    rev += [_ladder(n_qubits, c, False) for c in reversed(creations)]
    t = _product(fwd)
    tdag = _product(rev)
    strings = []
    for key in set(t) | set(tdag):
        coeff = 1j * (t.get(key, 0.0) - tdag.get(key, 0.0))
        if abs(coeff) > 1e-12:
            if abs(coeff.imag) > 1e-12:
                raise AssertionError("excitation generator is not Hermitian")
            strings.append(key)
    return [
        PauliString(n_qubits, x, z, 0) for x, z in sorted(strings, key=lambda k: (k[1], k[0]))
    ]


def build_uccsd_pool(n_spin_orbitals: int, n_electrons: int) -> OperatorPool:
    """Pool from spin-conserving single and double excitation generators."""
    if not 0 < n_electrons < n_spin_orbitals:
        raise ConfigurationError(
            f"need 0 < n_electrons < n_spin_orbitals, got {n_electrons}/{n_spin_orbitals}"
        )
    occ = list(range(n_electrons))
    virt = list(range(n_electrons, n_spin_orbitals))
    spin = lambda so: so % 2  # interleaved: even alpha, odd beta

    ordered: list[PauliString] = []
    seen: set[tuple[int, int]] = set()

    def extend(strings):
        for s in strings:
            key = (s.x_mask, s.z_mask)
            if key not in seen:
                seen.add(key)
                ordered.append(s)

    for i in occ:
        for a in virt:
            if spin(i) == spin(a):
                extend(excitation_generator_strings(n_spin_orbitals, (a,), (i,)))
    for i, j in combinations(occ, 2):
        for a, b in combinations(virt, 2):
            if spin(i) + spin(j) == spin(a) + spin(b):
                extend(excitation_generator_strings(n_spin_orbitals, (a, b), (i, j)))

    return OperatorPool(n_spin_orbitals, tuple(ordered), "uccsd_generated")


def load_pool(document: ProblemDocument) -> OperatorPool:
    """Pool from the document's pool block (already deduplicated by parse)."""
    strings = document.pool_strings()
    if not strings:
        raise ConfigurationError("document carries no pool block")
    return OperatorPool(document.n_qubits, tuple(strings), "file")


def pool_for(document: ProblemDocument, n_electrons: int | None = None) -> OperatorPool:
    """File pool when present, else a UCCSD pool from the reference state."""
    if document.pool:
        return load_pool(document)
    n_elec = n_electrons if n_electrons is not None else document.reference_state.count("1")
    return build_uccsd_pool(document.n_qubits, n_elec)
