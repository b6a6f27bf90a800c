"""Molecular qubit-Hamiltonian fixture generator."""

from .generate import MoleculeSpec, generate, molecule_spec, verify, write_document

__all__ = ["MoleculeSpec", "molecule_spec", "generate", "write_document", "verify"]

__version__ = "0.1.0"
