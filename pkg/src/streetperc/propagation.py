"""Path loss, SINR with line-of-sight interference, and street verdicts.

Nodes are identified by lightweight keys: ``("relay", vertex_id)`` or
``("user", street_id, index)``. Every deployed node transmits at all times.
A transmission travels along one street, and the interference it competes
against is the aggregate power of the other nodes of that same street (the
per-street interference pool); a relay therefore carries one interference
total per incident street. All threshold checks use the division-free form
``P_sig >= tau * (N + theta * I)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BruteForceLimitError, VisibilityError
from .geometry import StreetSystem
from .placement import Deployment, NetworkParams, user_positions

STATUS_OPEN_DIRECT = "open-direct"
STATUS_OPEN_CHAIN = "open-chain"
STATUS_CLOSED = "closed"

REASON_MISSING_RELAY = "missing-relay"
REASON_INSUFFICIENT_SINR = "insufficient-sinr"

MAX_BRUTEFORCE_USERS = 12


@dataclass(frozen=True)
class StreetVerdict:
    street_id: int
    status: str
    reason: str | None = None

    @property
    def is_open(self) -> bool:
        return self.status != STATUS_CLOSED


def path_loss(distance, kappa: float, beta: float):
    """Non-singular gain 1 / (1 + kappa * d)^beta; unit gain at d = 0."""
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be >= 0")
    out = (1.0 + kappa * d) ** (-beta)
    return out if out.ndim else float(out)


def received_power(distance, params: NetworkParams):
    """Power (mW) received over the given distance at transmit power P."""
    return params.power * path_loss(distance, params.pathloss_scale,
                                    params.pathloss_exponent)


class SinrContext:
    """Per-realization propagation state with cached interference totals.

    For every street, caches the total power each of its nodes receives
    from the street's other nodes; a single SINR query then only subtracts
    the intended transmitter. All query paths (street verdicts, pairwise
    SINR, the brute-force oracle) share these totals, so their arithmetic
    is identical.
    """

    def __init__(self, system: StreetSystem, deployment: Deployment,
                 params: NetworkParams):
        self.system = system
        self.deployment = deployment
        self.params = params
        self.noise_ratio = params.noise / params.power
        self.tau = params.sinr_threshold
        self.theta = params.interference_factor
        self._kappa = params.pathloss_scale
        self._beta = params.pathloss_exponent

        self.user_pos = [
            user_positions(system, sid, offs)
            for sid, offs in enumerate(deployment.user_offsets)
        ]
        # Interference totals at a street's first/second endpoint relay, from
        # that street's nodes only. NaN where the relay is absent.
        ns = system.n_streets
        self.relay_total_a = np.full(ns, np.nan)
        self.relay_total_b = np.full(ns, np.nan)
        self.user_total = []
        for sid in range(ns):
            self._accumulate_street(sid)
        self.user_total = tuple(self.user_total)

    def _accumulate_street(self, sid: int) -> None:
        va, vb = self.system.streets[sid]
        upos = self.user_pos[sid]
        k = len(upos)
        has_a = bool(self.deployment.relay_present[va])
        has_b = bool(self.deployment.relay_present[vb])
        rows = []
        if has_a:
            rows.append(self.system.vertices[va][None, :])
        rows.append(upos)
        if has_b:
            rows.append(self.system.vertices[vb][None, :])
        pos = np.concatenate(rows, axis=0)
        if len(pos) == 0:
            self.user_total.append(np.zeros(0))
            return
        dist = np.hypot(pos[:, 0][:, None] - pos[:, 0][None, :],
                        pos[:, 1][:, None] - pos[:, 1][None, :])
        power = (1.0 + self._kappa * dist) ** (-self._beta)
        np.fill_diagonal(power, 0.0)
        totals = power.sum(axis=1)

        i = 0
        if has_a:
            self.relay_total_a[sid] = totals[0]
            i = 1
        self.user_total.append(totals[i:i + k])
        if has_b:
            self.relay_total_b[sid] = totals[i + k]

    # -- node helpers ------------------------------------------------------

    def node_exists(self, node) -> bool:
        if node[0] == "relay":
            return bool(self.deployment.relay_present[node[1]])
        _, sid, idx = node
        return 0 <= idx < len(self.deployment.user_offsets[sid])

    def position(self, node) -> np.ndarray:
        if node[0] == "relay":
            return self.system.vertices[node[1]]
        return self.user_pos[node[1]][node[2]]

    def visible_nodes(self, node) -> set:
        """Nodes sharing at least one street with ``node`` (excluding it)."""
        if node[0] == "user":
            streets = (node[1],)
        else:
            streets = self.system.adjacency[node[1]]
        out = set()
        for sid in streets:
            va, vb = self.system.streets[sid]
            if self.deployment.relay_present[va]:
                out.add(("relay", int(va)))
            if self.deployment.relay_present[vb]:
                out.add(("relay", int(vb)))
            out.update(("user", sid, i)
                       for i in range(len(self.deployment.user_offsets[sid])))
        out.discard(node)
        return out

    def shared_street(self, a, b) -> int | None:
        """A street carrying both nodes, or None."""
        if a[0] == "user" and b[0] == "user":
            return a[1] if a[1] == b[1] else None
        if a[0] == "user":
            a, b = b, a
        if b[0] == "user":  # a is a relay
            va, vb = self.system.streets[b[1]]
            return b[1] if a[1] in (va, vb) else None
        for sid in self.system.adjacency[b[1]]:
            if a[1] in self.system.streets[sid]:
                return sid
        return None

    def street_total(self, node, street_id: int) -> float:
        """Power received by ``node`` from the other nodes of one street."""
        if node[0] == "user":
            if node[1] != street_id:
                raise VisibilityError(f"{node} is not on street {street_id}")
            return float(self.user_total[street_id][node[2]])
        va, vb = self.system.streets[street_id]
        if node[1] == va:
            return float(self.relay_total_a[street_id])
        if node[1] == vb:
            return float(self.relay_total_b[street_id])
        raise VisibilityError(f"{node} is not an endpoint of street {street_id}")

    # -- SINR queries ------------------------------------------------------

    def signal(self, tx, rx) -> float:
        ptx = self.position(tx)
        prx = self.position(rx)
        dist = np.hypot(ptx[0] - prx[0], ptx[1] - prx[1])
        return float((1.0 + self._kappa * dist) ** (-self._beta))

    def sinr(self, tx, rx) -> float:
        """SINR at rx for the signal from tx along their shared street."""
        if not (self.node_exists(tx) and self.node_exists(rx)):
            raise VisibilityError(f"node does not exist in this deployment: {tx}, {rx}")
        street = None if tx == rx else self.shared_street(tx, rx)
        if street is None:
            raise VisibilityError(f"{tx} is not visible to {rx}")
        sig = self.signal(tx, rx)
        interference = self.street_total(rx, street) - sig
        denom = self.noise_ratio + self.theta * interference
        if denom == 0.0:
            return np.inf
        return sig / denom

    def _hop_ok(self, sig: float, rx_total: float) -> bool:
        return sig >= self.tau * (self.noise_ratio + self.theta * (rx_total - sig))

    def link_open(self, a, b) -> bool:
        """Bidirectional threshold check between two nodes on a shared street."""
        street = None if a == b else self.shared_street(a, b)
        if street is None:
            raise VisibilityError(f"{a} and {b} share no street")
        sig = self.signal(a, b)
        return (self._hop_ok(sig, self.street_total(b, street))
                and self._hop_ok(sig, self.street_total(a, street)))

    # -- street verdicts ---------------------------------------------------

    def street_verdict(self, street_id: int) -> StreetVerdict:
        va, vb = self.system.streets[street_id]
        present = self.deployment.relay_present
        if not (present[va] and present[vb]):
            return StreetVerdict(street_id, STATUS_CLOSED, REASON_MISSING_RELAY)

        total_a = self.relay_total_a[street_id]
        total_b = self.relay_total_b[street_id]
        pa = self.system.vertices[va]
        pb = self.system.vertices[vb]
        sig = float((1.0 + self._kappa * np.hypot(pa[0] - pb[0], pa[1] - pb[1]))
                    ** (-self._beta))
        if self._hop_ok(sig, total_b) and self._hop_ok(sig, total_a):
            return StreetVerdict(street_id, STATUS_OPEN_DIRECT)

        upos = self.user_pos[street_id]
        if len(upos) == 0:
            return StreetVerdict(street_id, STATUS_CLOSED, REASON_INSUFFICIENT_SINR)

        pos = np.concatenate([pa[None, :], upos, pb[None, :]], axis=0)
        totals = np.concatenate([[total_a], self.user_total[street_id], [total_b]])

        # Maximum-hop rule: the street is open via relaying iff the full
        # consecutive chain relayA -> u1 -> ... -> uk -> relayB clears the
        # bidirectional threshold on every hop. This is the intended
        # reduction (any subset route is no better than the full chain);
        # see street_open_bruteforce for the exhaustive-subset oracle.
        gaps = np.hypot(np.diff(pos[:, 0]), np.diff(pos[:, 1]))
        sigs = (1.0 + self._kappa * gaps) ** (-self._beta)
        thr_fwd = self.tau * (self.noise_ratio + self.theta * (totals[1:] - sigs))
        thr_bwd = self.tau * (self.noise_ratio + self.theta * (totals[:-1] - sigs))
        if np.all(sigs >= thr_fwd) and np.all(sigs >= thr_bwd):
            return StreetVerdict(street_id, STATUS_OPEN_CHAIN)
        return StreetVerdict(street_id, STATUS_CLOSED, REASON_INSUFFICIENT_SINR)

    def all_verdicts(self) -> list:
        return [self.street_verdict(sid) for sid in range(self.system.n_streets)]


def street_open(street_id: int, deployment: Deployment, system: StreetSystem,
                params: NetworkParams) -> StreetVerdict:
    """Verdict for a single street (builds a fresh context; see SinrContext)."""
    return SinrContext(system, deployment, params).street_verdict(street_id)


def street_open_bruteforce(street_id: int, ctx: SinrContext) -> bool:
    """Exhaustive relay-to-relay reachability through any subset of users.

    Interference always comes from the full deployment; choosing a relaying
    subset does not silence anyone. Large subsets are tried first since the
    all-users chain is the most permissive route.
    """
    va, vb = ctx.system.streets[street_id]
    if not (ctx.deployment.relay_present[va] and ctx.deployment.relay_present[vb]):
        return False
    k = len(ctx.deployment.user_offsets[street_id])
    if k > MAX_BRUTEFORCE_USERS:
        raise BruteForceLimitError(
            f"street {street_id} has {k} users (> {MAX_BRUTEFORCE_USERS})")
    relay_a = ("relay", int(va))
    relay_b = ("relay", int(vb))
    for size in range(k, -1, -1):
        for subset in itertools.combinations(range(k), size):
            chain = [relay_a] + [("user", street_id, i) for i in subset] + [relay_b]
            if all(ctx.link_open(chain[i], chain[i + 1])
                   for i in range(len(chain) - 1)):
                return True
    return False


def max_incoming_links(ctx: SinrContext) -> int:
    """Largest number of above-threshold incoming signals at any receiver.

    Bounded by 1 + 1/(theta * tau) whenever theta > 0.
    """
    best = 0
    nodes = [("relay", v) for v in range(ctx.system.n_vertices)
             if ctx.deployment.relay_present[v]]
    nodes += [("user", sid, i)
              for sid in range(ctx.system.n_streets)
              for i in range(len(ctx.deployment.user_offsets[sid]))]
    for rx in nodes:
        count = sum(1 for tx in ctx.visible_nodes(rx) if ctx.sinr(tx, rx) >= ctx.tau)
        best = max(best, count)
    return best


def verdicts_to_list(verdicts) -> list:
    return [{"street_id": v.street_id, "status": v.status, "reason": v.reason}
            for v in verdicts]
