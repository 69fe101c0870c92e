"""Numerical toolkit for degenerate parabolic equations on the half-space x >= 0.

Solves u_t = Lu + g for operators that degenerate at x = 0 but satisfy a
transport condition there, and provides a verification harness for the
a-priori estimates that govern such equations: maximum principle and
ABP-type bounds, Harnack quotients, oscillation decay and Hoelder exponents,
gradient and Schauder-type bounds, polynomial approximation rates, and
certified barrier functions.
"""

__version__ = "0.1.0"
