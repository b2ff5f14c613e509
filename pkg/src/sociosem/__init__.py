"""Socio-semantic network analytics.

Turns forum posts into per-author language metrics, an interaction
network with centralities, dyadic similarity matrices, and QAP/MRQAP
permutation statistics.
"""

__version__ = "0.1.0"
