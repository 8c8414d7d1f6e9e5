"""Test package for order-params.

Unit tests cover each subpackage in isolation; integration tests drive the
command line and reproduce the full experiments.

Structure:
    - unit/: Individual function and class tests
    - integration/: CLI runs and slow experiment reproductions
    - data/: Small JSON fixtures

Leverages pytest with pytest-check for soft assertions and hypothesis for
randomized programs.
"""
