"""Model parameters, derived quantities, and relay/user deployment.

Relays sit at crossroads with probability p; users form an independent
one-dimensional Poisson process on every street. Reproducibility comes from
labelled substreams of a single 64-bit master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError
from .geometry import StreetSystem

_MASK64 = (1 << 64) - 1

# Substream labels for the three independent randomness sources.
LABEL_POINTS = "points"
LABEL_RELAYS = "relays"
LABEL_USERS = "users"


def _fnv1a64(label: str) -> int:
    h = 0xCBF29CE484222325
    for byte in label.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def _splitmix64(x: int) -> int:
    """SplitMix64 avalanche finalizer (Steele/Lea/Flood constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def substream_seed(master_seed: int, label: str, index: int = 0) -> int:
    """Independent 64-bit seed for (master, label, replication index).

    The master/label mix is finalized before the index is added, so nearby
    master seeds (or indices) never produce overlapping substream families.
    """
    base = _splitmix64((master_seed ^ _fnv1a64(label)) & _MASK64)
    return _splitmix64((base + index) & _MASK64)


def substream(master_seed: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(substream_seed(master_seed, label, index))


@dataclass(frozen=True)
class NetworkParams:
    """All physical and model parameters.

    Units: metres, milliwatts; ratios dimensionless. ``street_intensity``
    drives the Voronoi street system (points per m^2), ``user_intensity``
    is linear (users per metre of street).
    """

    street_intensity: float         # lambda_S, m^-2
    user_intensity: float           # lambda, m^-1
    relay_prob: float = 1.0         # p
    power: float = 1.0              # P, mW
    noise: float = 1e-8             # N, mW
    sinr_threshold: float = 1.0     # tau
    interference_factor: float = 0.004  # theta
    pathloss_exponent: float = 2.0  # beta
    pathloss_scale: float = 99.99   # kappa, m^-1

    def __post_init__(self):
        if self.street_intensity <= 0:
            raise ParameterError(f"street_intensity must be > 0, got {self.street_intensity}")
        if self.user_intensity < 0:
            raise ParameterError(f"user_intensity must be >= 0, got {self.user_intensity}")
        if not 0.0 <= self.relay_prob <= 1.0:
            raise ParameterError(f"relay_prob must be in [0, 1], got {self.relay_prob}")
        if self.power <= 0:
            raise ParameterError(f"power must be > 0, got {self.power}")
        if self.noise < 0:
            raise ParameterError(f"noise must be >= 0, got {self.noise}")
        if self.sinr_threshold <= 0:
            raise ParameterError(f"sinr_threshold must be > 0, got {self.sinr_threshold}")
        if self.interference_factor < 0:
            raise ParameterError(
                f"interference_factor must be >= 0, got {self.interference_factor}")
        if self.pathloss_exponent <= 0:
            raise ParameterError(
                f"pathloss_exponent must be > 0, got {self.pathloss_exponent}")
        if self.pathloss_scale < 0:
            raise ParameterError(f"pathloss_scale must be >= 0, got {self.pathloss_scale}")
        # Admissibility: unit gain at distance zero must beat the scaled noise,
        # otherwise no link can ever open.
        if self.sinr_threshold * self.noise / self.power >= 1.0:
            raise ParameterError(
                "inadmissible configuration: tau * N / P must be < 1 "
                f"(got {self.sinr_threshold * self.noise / self.power})")

    def with_(self, **kwargs) -> "NetworkParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class DerivedParams:
    """Closed-form quantities derived from NetworkParams."""

    noise_ratio: float          # N/P
    mean_street_length: float   # ell1 = 2 / (3 sqrt(lambda_S)), m
    line_intensity: float       # gamma = 2 sqrt(lambda_S), m^-1
    vertex_intensity: float     # 2 lambda_S, m^-2
    users_per_street: float     # U = lambda * ell1
    gilbert_radius: float       # r with pathloss(r) = (N/P) * tau, m
    hops_per_street: float      # H = ell1 / r


def gilbert_radius(noise_ratio: float, tau: float, kappa: float, beta: float) -> float:
    """Distance at which the path-loss gain falls to noise_ratio * tau."""
    target = noise_ratio * tau
    if target >= 1.0:
        raise ParameterError(
            f"no positive Gilbert radius: tau * N / P = {target} >= 1")
    if target == 0.0 or kappa == 0.0:
        return math.inf
    return (target ** (-1.0 / beta) - 1.0) / kappa


def derive_parameters(params: NetworkParams) -> DerivedParams:
    nbar = params.noise / params.power
    ell1 = 2.0 / (3.0 * math.sqrt(params.street_intensity))
    gamma = 2.0 * math.sqrt(params.street_intensity)
    r = gilbert_radius(nbar, params.sinr_threshold,
                       params.pathloss_scale, params.pathloss_exponent)
    return DerivedParams(
        noise_ratio=nbar,
        mean_street_length=ell1,
        line_intensity=gamma,
        vertex_intensity=2.0 * params.street_intensity,
        users_per_street=params.user_intensity * ell1,
        gilbert_radius=r,
        hops_per_street=ell1 / r,
    )


@dataclass(frozen=True)
class Deployment:
    """One realization of relays and users on a street system.

    ``relay_present[v]`` flags a relay at vertex v; ``user_offsets[s]`` is
    the sorted array of user distances (metres) from street s's first
    endpoint.
    """

    relay_present: np.ndarray
    user_offsets: tuple

    @property
    def n_relays(self) -> int:
        return int(self.relay_present.sum())

    @property
    def n_users(self) -> int:
        return sum(len(o) for o in self.user_offsets)


def place_relays(system: StreetSystem, relay_prob: float, rng) -> np.ndarray:
    """Independent Bernoulli(p) relay flag per crossroads."""
    if not 0.0 <= relay_prob <= 1.0:
        raise ParameterError(f"relay probability must be in [0, 1], got {relay_prob}")
    rng = np.random.default_rng(rng)
    return rng.random(system.n_vertices) < relay_prob


def place_users(system: StreetSystem, user_intensity: float, rng) -> tuple:
    """Poisson(lambda * length) users per street with sorted uniform offsets."""
    if user_intensity < 0:
        raise ParameterError(f"user intensity must be >= 0, got {user_intensity}")
    rng = np.random.default_rng(rng)
    offsets = []
    for length in system.lengths:
        n = rng.poisson(user_intensity * length)
        offsets.append(np.sort(rng.uniform(0.0, length, n)))
    return tuple(offsets)


def deploy(system: StreetSystem, params: NetworkParams,
           master_seed: int, replication_index: int = 0) -> Deployment:
    """Place relays and users from disjoint substreams of the master seed."""
    relays = place_relays(system, params.relay_prob,
                          substream(master_seed, LABEL_RELAYS, replication_index))
    users = place_users(system, params.user_intensity,
                        substream(master_seed, LABEL_USERS, replication_index))
    return Deployment(relay_present=relays, user_offsets=users)


def user_positions(system: StreetSystem, street_id: int,
                   offsets: np.ndarray) -> np.ndarray:
    """Planar positions of users at the given offsets along a street."""
    pa, pb = system.street_endpoints(street_id)
    length = system.lengths[street_id]
    if len(offsets) == 0:
        return np.empty((0, 2))
    return pa + (np.asarray(offsets) / length)[:, None] * (pb - pa)


def deployment_to_dict(system: StreetSystem, deployment: Deployment) -> dict:
    """JSON-ready dump: relay vertex ids and per-street user offsets."""
    return {
        "relays": [int(v) for v in np.nonzero(deployment.relay_present)[0]],
        "users": [
            {"street_id": sid, "offset": float(off)}
            for sid, offs in enumerate(deployment.user_offsets)
            for off in offs
        ],
    }
