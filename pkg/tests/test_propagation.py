"""Path loss, SINR queries, link/street verdicts, and the subset oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streetperc import (NetworkParams, SinrContext, Window,
                        build_street_system, deploy, derive_parameters,
                        path_loss, received_power, sample_poisson_points,
                        street_open, street_open_bruteforce)
from streetperc.errors import BruteForceLimitError, VisibilityError
from streetperc.propagation import (REASON_INSUFFICIENT_SINR,
                                    REASON_MISSING_RELAY, STATUS_CLOSED,
                                    STATUS_OPEN_CHAIN, STATUS_OPEN_DIRECT,
                                    max_incoming_links)
from conftest import cross_system, line_system, make_deployment


class TestPathLoss:
    def test_reference_values(self):
        assert path_loss(100.0, 100.0, 2.0) == pytest.approx(9.998e-9, rel=1e-3)
        assert path_loss(50.0, 99.99, 2.0) == pytest.approx(3.999e-8, rel=1e-3)
        assert path_loss(0.0, 99.99, 2.0) == 1.0

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            path_loss(-1.0, 99.99, 2.0)

    @given(st.floats(0.0, 1e4), st.floats(0.0, 1e4))
    @settings(max_examples=200, deadline=None)
    def test_strictly_decreasing(self, d1, d2):
        lo, hi = sorted((d1, d2))
        if hi - lo > 1e-9:  # below float resolution of 1 + kappa*d the
            # gains are indistinguishable
            assert path_loss(hi, 99.99, 2.0) < path_loss(lo, 99.99, 2.0)

    def test_scale_covariance(self):
        # Rescaling distances by c while dividing kappa by c leaves the
        # gain unchanged; rescaling distances alone does not.
        c = 2.0
        assert path_loss(c * 80.0, 99.99 / c, 2.0) == pytest.approx(
            path_loss(80.0, 99.99, 2.0), rel=1e-12)
        assert path_loss(c * 80.0, 99.99, 2.0) != path_loss(80.0, 99.99, 2.0)

    def test_received_power_scales_with_transmit_power(self, params):
        assert received_power(50.0, params.with_(power=2.0)) == pytest.approx(
            2.0 * received_power(50.0, params))


class TestSinrQueries:
    def test_two_relays_50m(self, params):
        ctx = SinrContext(line_system(50.0),
                          make_deployment(line_system(50.0), [()]), params)
        assert ctx.sinr(("relay", 0), ("relay", 1)) == pytest.approx(4.0, rel=1e-3)
        assert ctx.link_open(("relay", 0), ("relay", 1))

    def test_two_relays_150m_below_threshold(self, params):
        system = line_system(150.0)
        ctx = SinrContext(system, make_deployment(system, [()]), params)
        assert ctx.sinr(("relay", 0), ("relay", 1)) == pytest.approx(0.444, rel=1e-2)
        assert not ctx.link_open(("relay", 0), ("relay", 1))

    def test_zero_theta_reduces_to_snr(self, params):
        system = line_system(100.0)
        dep = make_deployment(system, [(25.0, 60.0)])
        ctx = SinrContext(system, dep, params.with_(interference_factor=0.0))
        d = derive_parameters(params)
        expected = path_loss(25.0, params.pathloss_scale,
                             params.pathloss_exponent) / d.noise_ratio
        assert ctx.sinr(("relay", 0), ("user", 0, 0)) == pytest.approx(expected)

    def test_symmetric_street_sinr_equal_from_both_sides(self, params):
        system = line_system(120.0)
        dep = make_deployment(system, [(60.0,)])
        ctx = SinrContext(system, dep, params)
        left = ctx.sinr(("relay", 0), ("user", 0, 0))
        right = ctx.sinr(("relay", 1), ("user", 0, 0))
        assert left == pytest.approx(right, rel=1e-12)

    def test_unshared_nodes_raise(self, params):
        system = cross_system(80.0)
        dep = make_deployment(system, [(40.0,), (), (), ()])
        ctx = SinrContext(system, dep, params)
        # arm-end relays of different streets share no street
        with pytest.raises(VisibilityError):
            ctx.sinr(("relay", 1), ("relay", 3))
        # a user is invisible to relays of other streets
        with pytest.raises(VisibilityError):
            ctx.sinr(("user", 0, 0), ("relay", 3))

    def test_visible_nodes_counts(self, params):
        system = cross_system(80.0)
        dep = make_deployment(system, [(40.0,), (10.0, 20.0), (), ()])
        ctx = SinrContext(system, dep, params)
        # user on street 0 sees its street's other nodes: 2 relays
        assert ctx.visible_nodes(("user", 0, 0)) == {("relay", 0), ("relay", 1)}
        # central relay sees everything on its four streets
        visible = ctx.visible_nodes(("relay", 0))
        assert visible == {("relay", 1), ("relay", 2), ("relay", 3),
                           ("relay", 4), ("user", 0, 0), ("user", 1, 0),
                           ("user", 1, 1)}
        # arm-end relay sees only its own street
        assert ctx.visible_nodes(("relay", 3)) == {("relay", 0)}

    def test_interference_is_street_local(self, params):
        # Users on another street do not change a street's verdictss or
        # its internal SINR values.
        system = cross_system(80.0)
        quiet = SinrContext(system, make_deployment(system, [(40.0,), (), (), ()]),
                            params)
        crowded = SinrContext(
            system, make_deployment(system, [(40.0,), (10.0, 11.0, 70.0), (), ()]),
            params)
        assert quiet.sinr(("relay", 0), ("user", 0, 0)) == pytest.approx(
            crowded.sinr(("relay", 0), ("user", 0, 0)), rel=1e-12)
        assert (quiet.street_verdict(0).status
                == crowded.street_verdict(0).status)


class TestStreetVerdicts:
    def test_missing_relay_closes_street(self, params):
        system = line_system(50.0)
        dep = make_deployment(system, [(25.0,)], relays=[True, False])
        verdict = street_open(0, dep, system, params)
        assert verdict.status == STATUS_CLOSED
        assert verdict.reason == REASON_MISSING_RELAY
        assert not verdict.is_open

    def test_short_street_opens_directly(self, params):
        system = line_system(50.0)
        verdict = street_open(0, make_deployment(system, [()]), system, params)
        assert verdict.status == STATUS_OPEN_DIRECT

    def test_long_empty_street_closes(self, params):
        system = line_system(150.0)
        verdict = street_open(0, make_deployment(system, [()]), system, params)
        assert verdict.status == STATUS_CLOSED
        assert verdict.reason == REASON_INSUFFICIENT_SINR

    def test_midpoint_user_opens_chain_without_interference(self, params):
        system = line_system(150.0)
        dep = make_deployment(system, [(75.0,)])
        verdict = street_open(0, dep, system,
                              params.with_(interference_factor=0.0))
        assert verdict.status == STATUS_OPEN_CHAIN

    def test_full_chain_rule_is_order_sensitive(self, params):
        # The street verdict walks the full user chain in offset order; a
        # tight pair of users can fail the chain even though a subset
        # route skipping one of them would get through. The exhaustive
        # oracle below reports that route, so the two can disagree.
        system = line_system(110.0)
        dep = make_deployment(system, [(30.0, 50.0, 50.5, 80.0)])
        ctx = SinrContext(system, dep, params)
        assert ctx.street_verdict(0).status == STATUS_CLOSED
        assert street_open_bruteforce(0, ctx) is True

    def test_verdict_matches_oracle_without_interference(self, params):
        # With theta = 0 a subset route is never better than the full
        # chain (larger gaps, same noise), so the two agree exactly.
        rng = np.random.default_rng(7)
        for _ in range(300):
            length = rng.uniform(30, 300)
            offs = np.sort(rng.uniform(0, length, rng.integers(0, 9)))
            p = params.with_(interference_factor=0.0,
                             sinr_threshold=rng.uniform(0.5, 1.5),
                             pathloss_scale=rng.uniform(20, 200),
                             pathloss_exponent=rng.uniform(1.5, 2.5))
            system = line_system(length)
            ctx = SinrContext(system, make_deployment(system, [offs]), p)
            assert ctx.street_verdict(0).is_open == street_open_bruteforce(0, ctx)

    def test_oracle_refuses_large_streets(self, params):
        system = line_system(200.0)
        dep = make_deployment(system, [np.linspace(10, 190, 13)])
        ctx = SinrContext(system, dep, params)
        with pytest.raises(BruteForceLimitError):
            street_open_bruteforce(0, ctx)

    def test_oracle_false_without_relay(self, params):
        system = line_system(50.0)
        dep = make_deployment(system, [()], relays=[False, True])
        assert street_open_bruteforce(0, SinrContext(system, dep, params)) is False

    def test_gilbert_rule_equivalence_on_realization(self, params, small_window):
        # theta = 0: street open iff direct gap <= r, or every chain gap
        # <= r, with r the noise-limited radius.
        p0 = params.with_(interference_factor=0.0)
        pts = sample_poisson_points(p0.street_intensity, small_window, 11)
        system = build_street_system(pts, small_window)
        dep = deploy(system, p0, master_seed=11)
        ctx = SinrContext(system, dep, p0)
        r = derive_parameters(p0).gilbert_radius
        for sid in range(system.n_streets):
            verdict = ctx.street_verdict(sid)
            va, vb = system.streets[sid]
            if not (dep.relay_present[va] and dep.relay_present[vb]):
                expected = False
            elif system.lengths[sid] <= r:
                expected = True
            else:
                offs = dep.user_offsets[sid]
                gaps = np.diff(np.concatenate([[0.0], offs,
                                               [system.lengths[sid]]]))
                expected = len(offs) > 0 and bool(np.all(gaps <= r))
            assert verdict.is_open == expected

    def test_user_influence_is_local(self, params, small_window):
        # Adding one user to a street can only change that street's
        # verdict (interference pools are per-street).
        pts = sample_poisson_points(params.street_intensity, small_window, 13)
        system = build_street_system(pts, small_window)
        dep = deploy(system, params, master_seed=13)
        before = [v.status for v in SinrContext(system, dep, params).all_verdicts()]
        target = int(np.argmax(system.lengths))
        offsets = list(dep.user_offsets)
        offsets[target] = np.sort(np.append(offsets[target],
                                            0.5 * system.lengths[target]))
        bumped = make_deployment(system, offsets, relays=dep.relay_present)
        after = [v.status for v in SinrContext(system, bumped, params).all_verdicts()]
        for sid, (a, b) in enumerate(zip(before, after)):
            if sid != target:
                assert a == b

    def test_scaling_coordinates_changes_sinr(self, params):
        # With kappa and the noise held fixed, the model is not scale
        # invariant: doubling all coordinates changes SINR values.
        a = SinrContext(line_system(60.0),
                        make_deployment(line_system(60.0), [(20.0,)]), params)
        b = SinrContext(line_system(120.0),
                        make_deployment(line_system(120.0), [(40.0,)]), params)
        assert (a.sinr(("relay", 0), ("user", 0, 0))
                != b.sinr(("relay", 0), ("user", 0, 0)))


class TestPoleCapacity:
    def test_incoming_links_bounded(self, params, small_window):
        pts = sample_poisson_points(params.street_intensity, small_window, 17)
        system = build_street_system(pts, small_window)
        dep = deploy(system, params, master_seed=17)
        ctx = SinrContext(system, dep, params)
        bound = 1.0 + 1.0 / (params.interference_factor * params.sinr_threshold)
        assert max_incoming_links(ctx) <= bound
