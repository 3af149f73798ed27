"""Weighted MaxCut on simulated neutral-atom arrays.

Subpackages: problem graphs and the exact oracle (graph), MATPOWER ingestion
(gridparse), the state-vector simulator (rydsim), force-directed embedding
(embed), adiabatic pulse shaping (pulseopt), local-detuning QAOA (qaoa),
fidelity benchmarking (bench), and the command-line interface (cli).
"""

__version__ = "0.1.0"
