"""Numerical engines: grid calculus, coefficients, potentials, symbols and the time stepper."""
