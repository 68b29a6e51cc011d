"""incsim: a deterministic simulator for in-network collective operations.

Compares endpoint collective algorithms (ring, binomial, pipelined and
Fibonacci broadcast, pairwise alltoall) against switch-based reduction
trees on multi-level fat trees: link load, host-memory traffic, numerical
fidelity under low-precision arithmetic, and modeled completion time.
"""

__version__ = "0.1.0"
