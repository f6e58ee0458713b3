"""Trojan-horse side-channel analysis for phase-encoded BB84.

Modules:
    gaussian: Gaussian states, symplectic operations and their fidelity.
    fock: truncated Fock-space density matrices, used as a brute-force reference.
    attack: Eve's returned states and their distinguishability.
    keyrate: detector statistics, key rates and the thermal-noise defence.
    separable: distinguishability bound for arbitrary separable probes.
    shutter: reflection counting and key rates for the shutter defence.
    cli: CSV datasets from the command line.
"""

__version__ = "0.1.0"
