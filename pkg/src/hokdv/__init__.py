"""Fifth-order Hamiltonian KdV-BBM model for unidirectional water waves."""

__version__ = "0.1.0"
