"""Equivariant model: stacked convolution layers and a linear readout.

The model maps per-site input features (species scalars followed by the
order-parameter slot) to one sphere signal per site on the natural-parity
ladder. All weights live in one flat vector whose order is fixed by the
ParameterLayout built at construction.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.autodiff import Node, ops
from src.harmonics import ladder
from src.irreps import GeometricTensor, IrrepsSignature, SignatureMismatchError
from src.models.structure import Structure
from src.network.geometry import EdgeGeometry, NetworkError
from src.network.layers import Layer, ParameterLayout, Readout, merge_blocks, split_blocks

logger = logging.getLogger(__name__)

_GEOMETRY_CACHE_SIZE = 8


class ModelConfig(BaseModel):
    """Network hyperparameters.

    Attributes:
        output_lmax: Top degree of the output ladder.
        hidden_lmax: Top degree of the hidden blocks (both parities).
        hidden_mul: Multiplicity of every hidden (L, parity) block.
        filter_lmax: Top degree of the filter harmonics.
        n_layers: Number of convolution layers.
        n_basis: Radial basis size.
        radial_hidden: Width of the radial perceptron.
        r_cut: Neighbor cutoff radius.
    """

    model_config = ConfigDict(extra="forbid")

    output_lmax: int = Field(default=5, ge=0, le=6)
    hidden_lmax: int = Field(default=5, ge=0, le=6)
    hidden_mul: int = Field(default=4, ge=1)
    filter_lmax: int = Field(default=5, ge=0, le=6)
    n_layers: int = Field(default=3, ge=1)
    n_basis: int = Field(default=10, ge=1)
    radial_hidden: int = Field(default=16, ge=1)
    r_cut: float = Field(default=2.5, gt=0)


class Model:
    """Layered equivariant network with a flat parameter vector.

    Attributes:
        input_signature: Per-site input layout.
        hidden_signature: Gated output of every convolution layer.
        output_signature: Natural-parity ladder up to ``config.output_lmax``.
        layout: Offsets of every named parameter block.
        weights: Current flat parameter vector.
    """

    def __init__(self, input_signature: IrrepsSignature, config: ModelConfig) -> None:
        if input_signature.dim == 0:
            raise NetworkError("Model input signature is empty")
        self.config = config
        self.input_signature = input_signature
        self.hidden_signature = IrrepsSignature.all_parities(
            0, config.hidden_lmax, mul=config.hidden_mul
        )
        self.output_signature = ladder(config.output_lmax)
        self.layout = ParameterLayout()

        self.layers: list[Layer] = []
        signature = input_signature
        for index in range(config.n_layers):
            layer = Layer(
                index,
                signature,
                self.hidden_signature,
                config.filter_lmax,
                config.n_basis,
                config.radial_hidden,
                self.layout,
            )
            self.layers.append(layer)
            signature = layer.out_signature
        self.readout = Readout(signature, self.output_signature, self.layout)
        self.weights = np.zeros(self.layout.size)
        self._geometries: dict[int, EdgeGeometry] = {}
        logger.info(
            "Model %s -> %s: %d layers, %d parameters",
            input_signature,
            self.output_signature,
            len(self.layers),
            self.n_parameters,
        )

    @property
    def n_parameters(self) -> int:
        return self.layout.size

    def initialize(self, rng: np.random.Generator) -> np.ndarray:
        self.weights = self.layout.initialize(rng)
        return self.weights

    def set_weights(self, weights: np.ndarray) -> None:
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if weights.shape[0] != self.n_parameters:
            raise NetworkError(f"{weights.shape[0]} weights for a model with {self.n_parameters}")
        self.weights = weights.copy()

    def geometry(self, structure: Structure) -> EdgeGeometry:
        """Edge constants for ``structure``, cached per structure instance."""
        key = id(structure)
        cached = self._geometries.get(key)
        if cached is None or cached.structure is not structure:
            cached = EdgeGeometry(
                structure, self.config.r_cut, self.config.n_basis, self.config.filter_lmax
            )
            if len(self._geometries) >= _GEOMETRY_CACHE_SIZE:
                self._geometries.pop(next(iter(self._geometries)))
            self._geometries[key] = cached
        return cached

    def apply(self, weights: Node, features: Node, geometry: EdgeGeometry) -> Node:
        """Graph of the forward pass: (N, input dim) -> (N, output dim)."""
        if features.shape != (geometry.n_sites, self.input_signature.dim):
            raise SignatureMismatchError(
                f"Features of shape {features.shape} for {geometry.n_sites} sites "
                f"with signature {self.input_signature}"
            )
        blocks = split_blocks(features, self.input_signature)
        for layer in self.layers:
            blocks = layer.apply(self.layout, weights, blocks, geometry)
        return merge_blocks(self.readout.apply(self.layout, weights, blocks))

    def forward(
        self, structure: Structure, features: np.ndarray, weights: np.ndarray | None = None
    ) -> np.ndarray:
        """Numeric forward pass with the current (or given) weights."""
        weights = self.weights if weights is None else weights
        features = np.asarray(features, dtype=np.float64).reshape(structure.n_sites, -1)
        output = self.apply(ops.lift(weights), ops.lift(features), self.geometry(structure))
        return output.value


def layer_forward(
    model: Model,
    layer: Layer,
    features: np.ndarray,
    geometry: EdgeGeometry,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """One layer on per-site features of shape (N, layer input dim)."""
    weights = model.weights if weights is None else weights
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (geometry.n_sites, layer.in_signature.dim):
        raise SignatureMismatchError(
            f"Features of shape {features.shape} do not match {layer.in_signature}"
        )
    blocks = split_blocks(ops.lift(features), layer.in_signature)
    return merge_blocks(layer.apply(model.layout, ops.lift(weights), blocks, geometry)).value


def model_forward(
    model: Model, structure: Structure, features: np.ndarray
) -> list[GeometricTensor]:
    """Per-site output signals."""
    output = model.forward(structure, features)
    return [
        GeometricTensor(signature=model.output_signature, coefficients=row) for row in output
    ]
