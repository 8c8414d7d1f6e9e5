"""Unit tests for individual components in isolation.

Ensures fast execution on tiny networks.

Coverage:
    - irreps/harmonics: conventions, coupling tables, sphere signals
    - autodiff: gradients against finite differences
    - network/symmetry: equivariance, stabilizers, checks
    - training/scenarios: losses, loops, task construction
"""
