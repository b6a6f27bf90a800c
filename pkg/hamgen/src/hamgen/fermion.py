"""Second-quantized Hamiltonian assembly and a letter-based Jordan-Wigner map.

Spin-orbital convention matches the fixture contract: spatial orbital p maps
to qubit 2p (alpha) and 2p+1 (beta); qubit q is character q of the reference
bitstring.  The Pauli representation here is a per-qubit letter tuple, kept
deliberately different from the consumer's bit-mask algebra so the two
implementations only meet at the JSON boundary.
"""

from __future__ import annotations

import numpy as np

# single-qubit products: (phase, letter) with phase in {1, i, -1, -i}
_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


class LetterSum:
    """Complex-weighted sum of letter-tuple Pauli terms."""

    def __init__(self, n_qubits: int, terms=None):
        self.n_qubits = n_qubits
        self.terms: dict[tuple[str, ...], complex] = dict(terms or {})

    @classmethod
    def ladder(cls, n_qubits: int, so: int, dagger: bool) -> "LetterSum":
        """a_so or a_so^dag: Z-string on lower qubits, (X -/+ iY)/2 on qubit so."""
        base = ["Z"] * so + ["I"] * (n_qubits - so)
        x_term = tuple(base[:so] + ["X"] + base[so + 1:])
        y_term = tuple(base[:so] + ["Y"] + base[so + 1:])
        sy = -0.5j if dagger else 0.5j
        return cls(n_qubits, {x_term: 0.5, y_term: sy})

    def __mul__(self, other: "LetterSum") -> "LetterSum":
        out: dict[tuple[str, ...], complex] = {}
        for t1, c1 in self.terms.items():
            for t2, c2 in other.terms.items():
                phase = 1 + 0j
                letters = []
                for a, b in zip(t1, t2):
                    ph, letter = _MUL[(a, b)]
                    phase *= ph
                    letters.append(letter)
                key = tuple(letters)
                out[key] = out.get(key, 0.0) + c1 * c2 * phase
        return LetterSum(self.n_qubits, out)

    def add_scaled(self, other: "LetterSum", scale: complex):
        for t, c in other.terms.items():
            self.terms[t] = self.terms.get(t, 0.0) + scale * c

    def cleaned(self, eps: float = 1e-12) -> "LetterSum":
        return LetterSum(
            self.n_qubits, {t: c for t, c in self.terms.items() if abs(c) > eps}
        )


def _ladder_product(n_qubits: int, ops: list[tuple[int, bool]]) -> LetterSum:
    """Product of ladder operators given as (spin_orbital, dagger)."""
    acc = None
    for so, dag in ops:
        term = LetterSum.ladder(n_qubits, so, dag)
        acc = term if acc is None else acc * term
    return acc


def qubit_hamiltonian(h1: np.ndarray, eri: np.ndarray, constant: float, eps: float = 1e-12):
    """JW-transform H = const + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q.

    Spatial indices run over the active space; spins are summed.  Returns
    (terms, total_constant) where terms maps letter tuples to real weights.
    """
    n_spatial = h1.shape[0]
    n_qubits = 2 * n_spatial
    acc = LetterSum(n_qubits)

    for p in range(n_spatial):
        for q in range(n_spatial):
            if abs(h1[p, q]) < eps:
                continue
            for sigma in (0, 1):
                term = _ladder_product(
                    n_qubits, [(2 * p + sigma, True), (2 * q + sigma, False)]
                )
                acc.add_scaled(term, h1[p, q])

    for p in range(n_spatial):
        for q in range(n_spatial):
            for r in range(n_spatial):
                for s in range(n_spatial):
                    coeff = eri[p, q, r, s]
                    if abs(coeff) < eps:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            i, j = 2 * p + sigma, 2 * r + tau
                            k, l = 2 * s + tau, 2 * q + sigma
                            if i == j or k == l:
                                continue  # a+_i a+_i = a_k a_k = 0
                            term = _ladder_product(
                                n_qubits,
                                [(i, True), (j, True), (k, False), (l, False)],
                            )
                            acc.add_scaled(term, 0.5 * coeff)

    acc = acc.cleaned(eps)
    identity = tuple(["I"] * n_qubits)
    total_constant = constant + acc.terms.pop(identity, 0.0).real

    real_terms: dict[tuple[str, ...], float] = {}
    for letters, coeff in acc.terms.items():
        if abs(coeff.imag) > 1e-9:
            raise AssertionError(f"non-Hermitian JW output at {letters}: {coeff}")
        real_terms[letters] = coeff.real
    return real_terms, float(total_constant)


def letters_to_label(letters: tuple[str, ...]) -> str:
    parts = [f"{l}{q}" for q, l in enumerate(letters) if l != "I"]
    return " ".join(parts) if parts else "I"


def apply_letter_term(amps: np.ndarray, letters: tuple[str, ...]) -> np.ndarray:
    """Dense action of one letter term on a statevector (verification path)."""
    n = len(letters)
    out = amps
    for q, letter in enumerate(letters):
        if letter == "I":
            continue
        idx = np.arange(out.size)
        bit = (idx >> q) & 1
        if letter == "Z":
            out = out * (1.0 - 2.0 * bit)
        elif letter == "X":
            out = out[idx ^ (1 << q)]
        else:  # Y: |0> -> i|1>, |1> -> -i|0>
            out = out[idx ^ (1 << q)] * (1j * (2.0 * bit - 1.0))
    return out
