"""Linear-optics simulation of heralded KLM-style CNOT gates.

Layers, bottom up: :mod:`fock` (modes and sparse Fock states),
:mod:`circuit` (elements and mode unitaries), :mod:`evolve` (permanent and
element-by-element propagation), :mod:`measure` (detectors and heralding),
:mod:`gates` (NS and CNOT builders), :mod:`noise` (imperfections),
:mod:`analysis` (truth tables and fidelities) and :mod:`cli`.
"""

__version__ = "0.1.0"
