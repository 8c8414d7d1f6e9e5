"""order-params - Euclidean-equivariant networks for symmetry-breaking order parameters.

Learns per-point geometric deformations with an O(3)-equivariant network and,
where the deformation lowers symmetry, discovers the input order parameters
that break it.

Components:
    - irreps: signatures, group elements, Wigner 3j and D matrices
    - harmonics: spherical harmonics, sphere signals and their peaks
    - autodiff: reverse-mode gradients over a graph of array ops
    - network: neighbor lists and equivariant convolution layers
    - symmetry: candidate groups, stabilizers and symmetry checks
    - training: losses, Adam, training and order-parameter discovery
    - scenarios: square/rectangle and perovskite tilt tasks
    - models: structures and result-file schemas
    - cli: run / check / tables
"""

__version__ = "0.1.0"
