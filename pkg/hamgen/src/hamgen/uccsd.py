"""UCCSD excitation-generator pool block (letter-based JW path).

Same convention as the consumer: interleaved spins, electrons fill
spin-orbitals 0..n_elec-1, spin-conserving singles and doubles, singles
first, index-lexicographic enumeration, strings within one generator
ordered by (z_mask, x_mask).  Coefficients are discarded.
"""

from __future__ import annotations

from itertools import combinations

from .fermion import LetterSum, _ladder_product, letters_to_label


def _masks(letters) -> tuple[int, int]:
    x = z = 0
    for q, letter in enumerate(letters):
        if letter in ("X", "Y"):
            x |= 1 << q
        if letter in ("Z", "Y"):
            z |= 1 << q
    return x, z


def _generator_labels(n_qubits: int, creations, annihilations) -> list[str]:
    """Distinct strings of i(T - T^dag), sorted by (z, x) masks."""
    ops_t = [(c, True) for c in creations] + [(a, False) for a in annihilations]
    ops_tdag = [(a, True) for a in reversed(annihilations)]
    ops_tdag += [(c, False) for c in reversed(creations)]
    t = _ladder_product(n_qubits, ops_t)
    tdag = _ladder_product(n_qubits, ops_tdag)
    gen = LetterSum(n_qubits)
    gen.add_scaled(t, 1j)
    gen.add_scaled(tdag, -1j)
    gen = gen.cleaned()
    keyed = sorted(gen.terms, key=lambda letters: (_masks(letters)[1], _masks(letters)[0]))
    return [letters_to_label(letters) for letters in keyed]


def uccsd_pool_labels(n_spin_orbitals: int, n_electrons: int) -> list[str]:
    occ = list(range(n_electrons))
    virt = list(range(n_electrons, n_spin_orbitals))
    spin = lambda so: so % 2

    labels: list[str] = []
    seen: set[str] = set()

    def extend(new):
        for lbl in new:
            if lbl not in seen:
                seen.add(lbl)
                labels.append(lbl)

    for i in occ:
        for a in virt:
            if spin(i) == spin(a):
                extend(_generator_labels(n_spin_orbitals, (a,), (i,)))
    for i, j in combinations(occ, 2):
        for a, b in combinations(virt, 2):
            if spin(i) + spin(j) == spin(a) + spin(b):
                extend(_generator_labels(n_spin_orbitals, (a, b), (i, j)))
    return labels
