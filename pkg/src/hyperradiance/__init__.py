"""Steady-state simulation of one or two qubits coupled to a cavity mode and a
mechanical mode through a tripartite photon-phonon pair interaction."""

__version__ = "0.1.0"
