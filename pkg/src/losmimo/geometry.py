"""Node-cluster geometry: sampling, projection, and the parabolic range expansion.

Clusters live in a local frame with the x axis along the line of sight;
the (y, z) plane is transverse. Sampling is uniform by rejection from the
bounding cube/square, which is exact and keeps the draw order deterministic
for a given generator state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation
from .util import derive_rng

#: Required ratio of link range to cluster extent for the parabolic
#: internode-distance expansion.
MIN_RANGE_RATIO = 100.0


@dataclass(frozen=True)
class NodeCluster:
    """Ordered 3-D node positions confined to a ball of radius `radius_m`."""

    nodes: np.ndarray
    radius_m: float

    def __post_init__(self) -> None:
        nodes = np.ascontiguousarray(np.atleast_2d(np.asarray(self.nodes, dtype=np.float64)))
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 2 or nodes.shape[1] != 3 or nodes.shape[0] < 1:
            raise InvariantViolation("NodeCluster.nodes must be a non-empty (M, 3) array")
        if self.radius_m <= 0:
            raise InvariantViolation("NodeCluster.radius_m must be positive")
        norms = np.linalg.norm(nodes, axis=1)
        if np.any(norms > self.radius_m * (1 + 1e-12)):
            raise InvariantViolation("NodeCluster invariant: every node must lie within the ball")

    @property
    def count(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class DiscCluster:
    """Ordered 2-D node positions confined to a disc of radius `disc_radius_m`."""

    nodes: np.ndarray
    disc_radius_m: float

    def __post_init__(self) -> None:
        nodes = np.ascontiguousarray(np.atleast_2d(np.asarray(self.nodes, dtype=np.float64)))
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or nodes.shape[0] < 1:
            raise InvariantViolation("DiscCluster.nodes must be a non-empty (M, 2) array")
        if self.disc_radius_m <= 0:
            raise InvariantViolation("DiscCluster.disc_radius_m must be positive")
        norms = np.linalg.norm(nodes, axis=1)
        if np.any(norms > self.disc_radius_m * (1 + 1e-12)):
            raise InvariantViolation("DiscCluster invariant: every node must lie within the disc")

    @property
    def count(self) -> int:
        return self.nodes.shape[0]

    @property
    def area_m2(self) -> float:
        return float(np.pi * self.disc_radius_m**2)


def _rejection_sample(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform points in the unit ball/disc by rejection from [-1, 1]^dim."""
    out = np.empty((count, dim), dtype=np.float64)
    filled = 0
    while filled < count:
        cand = rng.uniform(-1.0, 1.0, size=(2 * (count - filled) + 8, dim))
        keep = cand[np.einsum("ij,ij->i", cand, cand) <= 1.0]
        take = min(count - filled, keep.shape[0])
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def sample_ball_cluster(radius_m: float, count: int, seed: int, counter: int = 0) -> NodeCluster:
    """Draw `count` i.i.d. points uniform in the ball of radius `radius_m`.

    The stream is fully determined by (seed, counter); distinct counters give
    independent clusters regardless of the order they are drawn in.
    """
    if count < 1:
        raise InvariantViolation("sample_ball_cluster requires count >= 1")
    rng = derive_rng(seed, counter)
    pts = radius_m * _rejection_sample(rng, count, 3)
    return NodeCluster(nodes=pts, radius_m=radius_m)


def sample_disc_cluster(radius_m: float, count: int, seed: int, counter: int = 0) -> DiscCluster:
    """Draw `count` i.i.d. points uniform in the disc of radius `radius_m`."""
    if count < 1:
        raise InvariantViolation("sample_disc_cluster requires count >= 1")
    rng = derive_rng(seed, counter)
    pts = radius_m * _rejection_sample(rng, count, 2)
    return DiscCluster(nodes=pts, disc_radius_m=radius_m)


def sample_disc_points(rng: np.random.Generator, count: int, radius_m: float = 1.0) -> np.ndarray:
    """Flat uniform-disc draw for batched Monte Carlo; caller owns the generator."""
    return radius_m * _rejection_sample(rng, count, 2)


def project_to_disc(cluster: NodeCluster) -> DiscCluster:
    """Drop the line-of-sight coordinate, keeping (y, z) and the node order."""
    return DiscCluster(nodes=cluster.nodes[:, 1:3].copy(), disc_radius_m=cluster.radius_m)


def fresnel_distance(u_t: np.ndarray, v_r: np.ndarray, d: float) -> float:
    """Parabolic internode-distance deviation from the common separation d.

    Returns (x_R - x_T) + ((y_R - y_T)^2 + (z_R - z_T)^2) / (2 d). Only this
    deviation enters phase terms; the separation d itself is carried
    externally. Requires d >= 100 * max(|u_t|, |v_r|).
    """
    u_t = np.asarray(u_t, dtype=np.float64)
    v_r = np.asarray(v_r, dtype=np.float64)
    big = max(float(np.linalg.norm(u_t)), float(np.linalg.norm(v_r)))
    if d < MIN_RANGE_RATIO * big:
        raise InvariantViolation(
            f"parabolic range expansion requires d >= {MIN_RANGE_RATIO:g} * max node offset "
            f"(d = {d:g}, max offset = {big:g})"
        )
    dy = v_r[1] - u_t[1]
    dz = v_r[2] - u_t[2]
    return float((v_r[0] - u_t[0]) + (dy * dy + dz * dz) / (2.0 * d))


def check_range_ratio(tx: NodeCluster, rx: NodeCluster, d: float) -> None:
    """Raise unless d is at least MIN_RANGE_RATIO times every node offset."""
    big = max(
        float(np.linalg.norm(tx.nodes, axis=1).max()),
        float(np.linalg.norm(rx.nodes, axis=1).max()),
    )
    if d < MIN_RANGE_RATIO * big:
        raise InvariantViolation(
            f"parabolic range expansion requires d >= {MIN_RANGE_RATIO:g} * max node offset "
            f"(d = {d:g}, max offset = {big:g})"
        )
