"""Multi-qubit phase gates on excitation-blockaded registers driven by sechyp pulses."""

__version__ = "0.1.0"
