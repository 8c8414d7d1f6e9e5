"""Building blocks of the equivariant network.

- ParameterLayout: named views into one flat float64 weight vector
- enumerate_paths: coupling paths (l_in, l_filter, l_out) grouped per
  (input block, output block)
- RadialNet: basis values -> path weights, one hidden tanh layer
- Gate: tanh on scalars, sigmoid-gated non-scalar blocks
- Layer: tensor-product convolution + self-interaction + gate
- Readout: per-irrep linear projection onto the output signature

Features travel as one node per irrep block, shaped (N, mul, 2L+1).
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.autodiff import Node, ops
from src.irreps import Irrep, IrrepsSignature, MulIrrep, Parity, satisfies_triangle
from src.network.geometry import EdgeGeometry, NetworkError

logger = logging.getLogger(__name__)

SCALAR_EVEN = Irrep(degree=0, parity=Parity.EVEN)


class ParameterBlock(BaseModel):
    """One named tensor inside the flat weight vector.

    ``fan_in`` of None marks a bias, initialized to zero.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    shape: tuple[int, ...]
    offset: int
    fan_in: int | None = None

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


class ParameterLayout:
    """Ordered registry of parameter blocks; defines the flat weight order."""

    def __init__(self) -> None:
        self.blocks: dict[str, ParameterBlock] = {}
        self.size = 0

    def add(self, name: str, shape: tuple[int, ...], fan_in: int | None = None) -> str:
        if name in self.blocks:
            raise NetworkError(f"Duplicate parameter block {name}")
        block = ParameterBlock(name=name, shape=shape, offset=self.size, fan_in=fan_in)
        self.blocks[name] = block
        self.size += block.size
        return name

    def initialize(self, rng: np.random.Generator) -> np.ndarray:
        """Normal entries scaled by 1/sqrt(fan_in); biases zero."""
        weights = np.zeros(self.size)
        for block in self.blocks.values():
            if block.fan_in is None:
                continue
            stop = block.offset + block.size
            weights[block.offset : stop] = rng.standard_normal(block.size) / np.sqrt(block.fan_in)
        return weights

    def view(self, weights: Node, name: str) -> Node:
        block = self.blocks[name]
        part = ops.take(weights, slice(block.offset, block.offset + block.size))
        return ops.reshape(part, block.shape)

    def unpack(self, weights: np.ndarray, name: str) -> np.ndarray:
        block = self.blocks[name]
        return weights[block.offset : block.offset + block.size].reshape(block.shape)


class PathGroup(BaseModel):
    """All filter degrees coupling one input block to one output block."""

    model_config = ConfigDict(frozen=True)

    in_entry: int
    out_entry: int
    l_in: int
    l_out: int
    filter_degrees: tuple[int, ...]
    mul_in: int
    mul_out: int
    weight_offset: int

    @property
    def n_weights(self) -> int:
        return len(self.filter_degrees) * self.mul_in * self.mul_out


def path_allowed(source: Irrep, filter_degree: int, target: Irrep) -> bool:
    """Triangle rule plus parity(out) = parity(in) * (-1)^l_filter."""
    parity = source.parity * (-1) ** filter_degree
    triangle = satisfies_triangle(source.degree, filter_degree, target.degree)
    return triangle and parity == target.parity


def enumerate_paths(
    in_signature: IrrepsSignature, out_signature: IrrepsSignature, filter_lmax: int
) -> list[PathGroup]:
    groups: list[PathGroup] = []
    offset = 0
    for a, source in enumerate(in_signature.entries):
        for b, target in enumerate(out_signature.entries):
            degrees = tuple(
                l_f
                for l_f in range(filter_lmax + 1)
                if path_allowed(source.irrep, l_f, target.irrep)
            )
            if not degrees:
                continue
            group = PathGroup(
                in_entry=a,
                out_entry=b,
                l_in=source.irrep.degree,
                l_out=target.irrep.degree,
                filter_degrees=degrees,
                mul_in=source.mul,
                mul_out=target.mul,
                weight_offset=offset,
            )
            offset += group.n_weights
            groups.append(group)
    return groups


def split_blocks(features: Node, signature: IrrepsSignature) -> list[Node]:
    """(N, dim) node -> one (N, mul, 2L+1) node per signature entry."""
    n_sites = features.shape[0]
    blocks = []
    for block_slice, entry in zip(signature.slices(), signature.entries, strict=True):
        part = ops.take(features, (slice(None), block_slice))
        blocks.append(ops.reshape(part, (n_sites, entry.mul, entry.irrep.dim)))
    return blocks


def merge_blocks(blocks: list[Node]) -> Node:
    n_sites = blocks[0].shape[0]
    flat = [ops.reshape(block, (n_sites, block.shape[1] * block.shape[2])) for block in blocks]
    return ops.concat(flat, axis=-1)


class RadialNet:
    """Two-layer perceptron from radial basis values to path weights.

    Attributes:
        n_basis: Number of basis functions B.
        hidden: Width of the tanh layer.
        n_out: Number of path weights produced per edge.
    """

    def __init__(
        self, prefix: str, n_basis: int, hidden: int, n_out: int, layout: ParameterLayout
    ) -> None:
        self.n_basis = n_basis
        self.hidden = hidden
        self.n_out = n_out
        self.w1 = layout.add(f"{prefix}.radial.w1", (n_basis, hidden), fan_in=n_basis)
        self.b1 = layout.add(f"{prefix}.radial.b1", (hidden,))
        self.w2 = layout.add(f"{prefix}.radial.w2", (hidden, n_out), fan_in=hidden)

    def apply(self, layout: ParameterLayout, weights: Node, basis: np.ndarray) -> Node:
        """Per-edge path weights, shape (E, n_out)."""
        ones = np.ones(basis.shape[0])
        pre = ops.add(
            ops.contract("eb,bh->eh", basis, layout.view(weights, self.w1)),
            ops.contract("e,h->eh", ones, layout.view(weights, self.b1)),
        )
        return ops.contract("eh,hw->ew", ops.tanh(pre), layout.view(weights, self.w2))

    def evaluate(
        self, layout: ParameterLayout, weights: np.ndarray, basis: np.ndarray
    ) -> np.ndarray:
        hidden = np.tanh(basis @ layout.unpack(weights, self.w1) + layout.unpack(weights, self.b1))
        return hidden @ layout.unpack(weights, self.w2)


class Gate:
    """Equivariant nonlinearity.

    Scalar blocks (either parity) pass through tanh, which is odd and so keeps
    parity. Every non-scalar channel is multiplied by the sigmoid of its own
    extra even scalar; those gate scalars are appended to the 0e block of the
    pre-gate signature.
    """

    def __init__(self, out_signature: IrrepsSignature) -> None:
        self.out_signature = out_signature
        self.n_gates = sum(e.mul for e in out_signature.entries if not e.irrep.is_scalar)
        entries = list(out_signature.entries)
        even = [i for i, e in enumerate(entries) if e.irrep == SCALAR_EVEN]
        if even:
            self.gate_entry = even[0]
            self.n_even = entries[self.gate_entry].mul
            entries[self.gate_entry] = MulIrrep(mul=self.n_even + self.n_gates, irrep=SCALAR_EVEN)
            self.offset = 0
        else:
            self.gate_entry = 0
            self.n_even = 0
            entries.insert(0, MulIrrep(mul=self.n_gates, irrep=SCALAR_EVEN))
            self.offset = 1
        self.pregate_signature = IrrepsSignature(entries=tuple(entries))

    def apply(self, blocks: list[Node]) -> list[Node]:
        gate_block = blocks[self.gate_entry]
        gates = ops.sigmoid(
            ops.take(gate_block, (slice(None), slice(self.n_even, self.n_even + self.n_gates)))
        )
        outputs: list[Node] = []
        used = 0
        for i, entry in enumerate(self.out_signature.entries):
            block = blocks[i + self.offset]
            if entry.irrep.is_scalar:
                if i + self.offset == self.gate_entry:
                    block = ops.take(block, (slice(None), slice(0, self.n_even)))
                outputs.append(ops.tanh(block))
                continue
            gate = ops.take(gates, (slice(None), slice(used, used + entry.mul)))
            used += entry.mul
            outputs.append(ops.multiply(block, gate))
        return outputs


class Layer:
    """Tensor-product convolution with self-interaction and gate.

    For every center, sums over neighbors the path contractions
    ``3j(l_in, l_f, l_out) . R(|r|) . Y_lf(r_hat) . x_neighbor``, divided by
    sqrt(average neighbor count) and by sqrt(number of incoming channels),
    adds a linear mix of the center's own blocks of identical irrep, then
    gates.
    """

    def __init__(
        self,
        index: int,
        in_signature: IrrepsSignature,
        out_signature: IrrepsSignature,
        filter_lmax: int,
        n_basis: int,
        radial_hidden: int,
        layout: ParameterLayout,
    ) -> None:
        self.index = index
        self.in_signature = in_signature
        self.out_signature = out_signature
        self.filter_lmax = filter_lmax
        self.gate = Gate(out_signature)
        self.pregate_signature = self.gate.pregate_signature
        self.paths = enumerate_paths(in_signature, self.pregate_signature, filter_lmax)
        prefix = f"layer{index}"
        n_weights = sum(group.n_weights for group in self.paths)
        self.radial = RadialNet(prefix, n_basis, radial_hidden, n_weights, layout)

        self.fan_in = [0] * len(self.pregate_signature)
        for group in self.paths:
            self.fan_in[group.out_entry] += len(group.filter_degrees) * group.mul_in

        self.mixes: list[tuple[int, int, str]] = []
        for a, source in enumerate(in_signature.entries):
            for b, target in enumerate(self.pregate_signature.entries):
                if source.irrep == target.irrep:
                    name = layout.add(
                        f"{prefix}.mix.{a}.{b}", (source.mul, target.mul), fan_in=source.mul
                    )
                    self.mixes.append((a, b, name))
        logger.debug(
            "Layer %d: %s -> %s, %d path groups, %d radial outputs",
            index,
            in_signature,
            out_signature,
            len(self.paths),
            n_weights,
        )

    def pregate(
        self,
        layout: ParameterLayout,
        weights: Node,
        blocks: list[Node],
        geometry: EdgeGeometry,
    ) -> list[Node]:
        """Convolution plus self-interaction, before the gate."""
        n_sites = geometry.n_sites
        n_edges = len(geometry.centers)
        contributions: list[list[Node]] = [[] for _ in self.pregate_signature.entries]

        if n_edges and self.paths:
            path_weights = self.radial.apply(layout, weights, geometry.radial)
            degree_norm = 1.0 / np.sqrt(max(geometry.average_degree, 1e-12))
            neighbor_blocks = [ops.gather(block, geometry.neighbors) for block in blocks]
            messages: list[list[Node]] = [[] for _ in self.pregate_signature.entries]
            for group in self.paths:
                stop = group.weight_offset + group.n_weights
                w = ops.reshape(
                    ops.take(path_weights, (slice(None), slice(group.weight_offset, stop))),
                    (n_edges, len(group.filter_degrees), group.mul_in, group.mul_out),
                )
                coupling = geometry.coupling(group.l_in, group.filter_degrees, group.l_out)
                coupling = coupling * (degree_norm / np.sqrt(self.fan_in[group.out_entry]))
                messages[group.out_entry].append(
                    ops.contract("efuv,eui,efik->evk", w, neighbor_blocks[group.in_entry], coupling)
                )
            for b, parts in enumerate(messages):
                if parts:
                    summed = parts[0] if len(parts) == 1 else ops.add(*parts)
                    contributions[b].append(ops.scatter_sum(summed, geometry.centers, n_sites))

        for a, b, name in self.mixes:
            contributions[b].append(
                ops.contract("nui,uv->nvi", blocks[a], layout.view(weights, name))
            )

        outputs = []
        for b, entry in enumerate(self.pregate_signature.entries):
            parts = contributions[b]
            if not parts:
                outputs.append(ops.lift(np.zeros((n_sites, entry.mul, entry.irrep.dim))))
            else:
                outputs.append(parts[0] if len(parts) == 1 else ops.add(*parts))
        return outputs

    def apply(
        self,
        layout: ParameterLayout,
        weights: Node,
        blocks: list[Node],
        geometry: EdgeGeometry,
    ) -> list[Node]:
        return self.gate.apply(self.pregate(layout, weights, blocks, geometry))


class Readout:
    """Linear projection of hidden blocks onto the output signature."""

    def __init__(
        self,
        in_signature: IrrepsSignature,
        out_signature: IrrepsSignature,
        layout: ParameterLayout,
    ) -> None:
        self.in_signature = in_signature
        self.out_signature = out_signature
        self.mixes: list[tuple[int, int, str]] = []
        for b, target in enumerate(out_signature.entries):
            sources = [a for a, e in enumerate(in_signature.entries) if e.irrep == target.irrep]
            if not sources:
                raise NetworkError(f"No hidden block carries {target.irrep} for the readout")
            for a in sources:
                mul_in = in_signature.entries[a].mul
                name = layout.add(f"readout.{a}.{b}", (mul_in, target.mul), fan_in=mul_in)
                self.mixes.append((a, b, name))

    def apply(self, layout: ParameterLayout, weights: Node, blocks: list[Node]) -> list[Node]:
        outputs: list[list[Node]] = [[] for _ in self.out_signature.entries]
        for a, b, name in self.mixes:
            outputs[b].append(ops.contract("nui,uv->nvi", blocks[a], layout.view(weights, name)))
        return [parts[0] if len(parts) == 1 else ops.add(*parts) for parts in outputs]
