"""Control-overhead relationship graph (CORG) over an overlap region.

Nodes are the region's LEOs plus one virtual node per competing controller;
edge weights combine pairwise flow, synchronization and mobility costs.
The weights feed a Gaussian-kernel similarity matrix for spectral clustering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import NetworkSnapshot, Role
from .overhead import OverheadParams, hop_cost
from .traffic import TrafficMatrix
from .visibility import FovDomain, OverlapRegion

DEFAULT_ALPHA = 0.5
DEFAULT_BETA = 0.3


@dataclass(frozen=True)
class CorgWeights:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    mig_unit_s: float = 1.0  # scale of the velocity-divergence mobility penalty

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta > 1.0:
            raise ValueError(
                f"weights must satisfy alpha, beta >= 0 and alpha + beta <= 1, "
                f"got alpha={self.alpha}, beta={self.beta}"
            )


@dataclass
class Corg:
    node_ids: tuple[int, ...]
    edges: dict[tuple[int, int], float]  # (low id, high id) -> xi, seconds
    virtual_flags: dict[int, bool]

    def xi(self, a: int, b: int) -> float | None:
        return self.edges.get((a, b) if a < b else (b, a))

    @property
    def virtual_ids(self) -> tuple[int, ...]:
        return tuple(i for i in self.node_ids if self.virtual_flags[i])

    def edge_list(self) -> list[tuple[int, int, float]]:
        """(node, node, weight) rows, sorted, for debugging dumps."""
        return [(a, b, xi) for (a, b), xi in sorted(self.edges.items())]


@dataclass
class SimilarityMatrix:
    node_ids: tuple[int, ...]
    values: np.ndarray  # symmetric, unit diagonal, zeros for absent pairs
    sigma: float


def _velocity_divergence(snapshot: NetworkSnapshot, a: int, b: int) -> float:
    """Half the distance between unit velocity vectors: 0 when co-moving,
    1 when flying in opposite directions."""
    va, vb = snapshot.velocities[a], snapshot.velocities[b]
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.linalg.norm(va / na - vb / nb)) / 2.0


def pairwise_costs(
    a: int,
    b: int,
    traffic: TrafficMatrix,
    snapshot: NetworkSnapshot,
    params: OverheadParams,
    weights: CorgWeights,
) -> tuple[float, float, float]:
    """(flow, sync, mobility) cost components for one CORG edge.

    Between two switches the flow term carries their mutual flow rate. For a
    controller attachment edge it carries the switch's total flow rate, since
    every flow-table update for that switch would traverse the link.
    """
    roles = snapshot.roles
    if roles[a] is Role.LEO and roles[b] is Role.LEO:
        lam = traffic.rate(a, b) + traffic.rate(b, a)
    else:
        leo = a if roles[a] is Role.LEO else b
        lam = traffic.node_rate(leo)
    w_flow = lam * hop_cost(snapshot, params, a, b, params.m_fl_bytes)
    w_sync = params.f_sync_hz * hop_cost(snapshot, params, a, b, params.m_sync_bytes)
    if Role.GS in (roles[a], roles[b]):
        w_mig = 0.0
    else:
        w_mig = _velocity_divergence(snapshot, a, b) * weights.mig_unit_s
    return w_flow, w_sync, w_mig


def edge_weight(costs: tuple[float, float, float], weights: CorgWeights) -> float:
    """Weighted combination alpha*flow + beta*sync + (1 - alpha - beta)*mobility."""
    w_flow, w_sync, w_mig = costs
    return (
        weights.alpha * w_flow
        + weights.beta * w_sync
        + (1.0 - weights.alpha - weights.beta) * w_mig
    )


def build_corg(
    region: OverlapRegion,
    traffic: TrafficMatrix,
    snapshot: NetworkSnapshot,
    params: OverheadParams,
    fov_domains: list[FovDomain],
    weights: CorgWeights | None = None,
) -> Corg:
    """CORG over one overlap region: ISL edges between member LEOs and a
    virtual-controller edge for every in-FOV (controller, member) pair."""
    w = weights or CorgWeights()
    leos = sorted(region.leo_ids)
    ctrls = list(region.controller_ids)
    fov = {d.controller_id: d.member_leo_ids for d in fov_domains}

    edges: dict[tuple[int, int], float] = {}
    leo_set = set(leos)
    for a, b in sorted(snapshot.isl_edges):
        if a in leo_set and b in leo_set:
            edges[(a, b)] = edge_weight(
                pairwise_costs(a, b, traffic, snapshot, params, w), w
            )
    for k in ctrls:
        for leo in leos:
            if leo in fov[k]:
                key = (leo, k) if leo < k else (k, leo)
                edges[key] = edge_weight(
                    pairwise_costs(leo, k, traffic, snapshot, params, w), w
                )

    node_ids = tuple(leos + ctrls)
    virtual_flags = {i: False for i in leos} | {k: True for k in ctrls}
    return Corg(node_ids=node_ids, edges=edges, virtual_flags=virtual_flags)


def similarity(corg: Corg, sigma: float | None = None) -> SimilarityMatrix:
    """Gaussian-kernel similarity exp(-xi / (2 sigma^2)); absent pairs are 0,
    the diagonal is 1. Sigma defaults to the median positive edge weight."""
    if not corg.node_ids:
        raise ValueError("similarity of an empty graph")
    if sigma is None:
        positive = [x for x in corg.edges.values() if x > 0.0]
        sigma = float(np.median(positive)) if positive else 1.0
    n = len(corg.node_ids)
    index = {node: i for i, node in enumerate(corg.node_ids)}
    values = np.zeros((n, n))
    np.fill_diagonal(values, 1.0)
    for (a, b), xi in corg.edges.items():
        s = float(np.exp(-xi / (2.0 * sigma**2)))
        values[index[a], index[b]] = s
        values[index[b], index[a]] = s
    return SimilarityMatrix(node_ids=corg.node_ids, values=values, sigma=sigma)
