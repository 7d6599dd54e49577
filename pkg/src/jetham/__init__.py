"""Symbolic jet-bundle and polysymplectic Hamiltonian field theory toolkit."""

__version__ = "0.1.0"
