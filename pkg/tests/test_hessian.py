"""Second-variation formulas against the finite-difference channel.

Every closed form here was frozen only after ``fd_oracle`` (and the
standalone Richardson measurements for the kinematic rates) agreed with
it; the sweeps below re-run a smaller version of that certification on
every test run.
"""

import json
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from systolica.errors import DegenerateMarginError, InconsistentSceneError
from systolica.halfplane import (
    HPoint,
    HTangent,
    geodesic_from_direction,
    geodesic_through,
    intersection_point,
    oriented_angle,
    rotate_tangent,
    translate_along,
    unit_toward,
)
from systolica.hessian import (
    ChordConfig,
    EndpointVariation,
    HalfplaneScene,
    LeafCrossing,
    TransverseWeights,
    fd_oracle,
    first_derivatives,
    hessian_form,
    hessian_margin,
    hessian_matrix,
    hessian_split,
    realize_scene,
    scene_from_json,
    scene_to_json,
    shear_kinematics,
)

# The closed chord-length-2 endpoint Hessian at d = arccosh(2), i.e.
# (1/sinh d)[[cosh d, -1], [-1, cosh d]] with sinh d = sqrt(3).
N0_DIAG = 1.1547005383792517
N0_CROSS = -0.5773502691896258

# Two-crossing reference kernel: L = 2, crossings (0.7, 1.1), (1.4, 0.6).
REF_CFG = ChordConfig(2.0, (LeafCrossing(0.7, 1.1), LeafCrossing(1.4, 0.6)))
REF_MATRIX = np.array([
    [2.4738304546629495, 1.4879591991912162, -1.9709142303266285, 1.255169005630943],
    [1.4879591991912162, 2.5498153186942383, -1.1854652182422678, 2.1508984653931407],
    [-1.9709142303266285, -1.1854652182422678, 3.7621956910836314, -1.0],
    [1.255169005630943, 2.1508984653931407, -1.0, 3.7621956910836314],
])


def random_config(rng, max_n=6, min_n=0):
    length = rng.uniform(0.8, 3.5)
    n = rng.randint(min_n, max_n)
    while True:
        ss = sorted(rng.uniform(0.05 * length, 0.95 * length) for _ in range(n))
        if all(b - a > 0.03 * length for a, b in zip(ss, ss[1:])):
            break
    crossings = tuple(
        LeafCrossing(s, rng.uniform(0.12 * math.pi, 0.88 * math.pi)) for s in ss)
    return ChordConfig(length=length, crossings=crossings)


def random_scene(rng, max_n=6, min_n=0):
    cfg = random_config(rng, max_n=max_n, min_n=min_n)
    weights = TransverseWeights(tuple(rng.uniform(-1.2, 1.2) for _ in range(cfg.n)))
    endpoints = EndpointVariation(
        u_perp=rng.uniform(-1, 1), u_par=rng.uniform(-1, 1),
        v_perp=rng.uniform(-1, 1), v_par=rng.uniform(-1, 1))
    return realize_scene(cfg, weights, endpoints)


class TestConfigValidation:
    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError):
            ChordConfig(0.0, ())

    def test_rejects_out_of_order_crossings(self):
        with pytest.raises(ValueError):
            ChordConfig(2.0, (LeafCrossing(1.4, 1.0), LeafCrossing(0.7, 1.0)))

    def test_rejects_crossing_outside_chord(self):
        with pytest.raises(ValueError):
            ChordConfig(2.0, (LeafCrossing(2.0, 1.0),))

    def test_rejects_angle_outside_range(self):
        with pytest.raises(ValueError):
            ChordConfig(2.0, (LeafCrossing(1.0, math.pi),))

    def test_rejects_nonfinite_weight(self):
        with pytest.raises(ValueError):
            TransverseWeights((math.nan,))

    def test_weight_count_must_match(self):
        with pytest.raises(ValueError):
            first_derivatives(REF_CFG, TransverseWeights((1.0,)))


class TestFirstDerivatives:
    def test_perpendicular_crossing_contributes_nothing(self):
        cfg = ChordConfig(2.0, (LeafCrossing(1.0, math.pi / 2),))
        d_metric, _ = first_derivatives(cfg, TransverseWeights((5.0,)))
        assert d_metric == 0.0

    def test_metric_part_is_linear_in_weights(self):
        cfg = ChordConfig(
            2.0, (LeafCrossing(0.8, math.pi / 2), LeafCrossing(1.3, math.pi / 3)))
        d_metric, _ = first_derivatives(cfg, TransverseWeights((1.0, 2.0)))
        assert d_metric == pytest.approx(1.0, abs=1e-15)

    def test_endpoint_part_reads_outward_components(self):
        _, d_end = first_derivatives(
            ChordConfig(1.5, ()), TransverseWeights(()),
            EndpointVariation(u_par=0.25, v_par=-0.75, u_perp=3.0, v_perp=-2.0))
        assert d_end == pytest.approx(-0.5, abs=1e-15)

    def test_against_oracle(self):
        rng = random.Random(101)
        worst = 0.0
        for _ in range(30):
            scene = random_scene(rng)
            d_shear, d_end = fd_oracle(scene, 1)
            a_shear, a_end = first_derivatives(
                scene.cfg, scene.weights, scene.endpoints)
            worst = max(worst, abs(d_shear - a_shear), abs(d_end - a_end))
        assert worst < 1e-6


class TestHessianMatrix:
    def test_endpoint_block_at_arccosh_two(self):
        d = math.acosh(2.0)
        H = hessian_matrix(ChordConfig(d, ())) / math.sinh(d)
        expected = np.array([[N0_DIAG, N0_CROSS], [N0_CROSS, N0_DIAG]])
        assert np.max(np.abs(H - expected)) < 1e-15

    def test_two_crossing_reference_kernel(self):
        assert np.max(np.abs(hessian_matrix(REF_CFG) - REF_MATRIX)) < 1e-12

    def test_single_crossing_entry_magnitudes(self):
        # s = 1 on a chord of length 2: crossing diagonal cosh(1)^2, both
        # couplings of magnitude cosh(1), endpoint corner -1.
        H = hessian_matrix(ChordConfig(2.0, (LeafCrossing(1.0, 0.9),)))
        c1 = math.cosh(1.0)
        assert H[0, 0] == pytest.approx(c1 * c1, abs=1e-15)
        assert H[0, 1] == pytest.approx(-c1, abs=1e-15)
        assert H[0, 2] == pytest.approx(c1, abs=1e-15)
        assert H[1, 2] == -1.0
        assert np.linalg.eigvalsh(H)[0] > 0

    def test_positive_definite_on_random_sweep(self):
        rng = random.Random(77)
        worst = math.inf
        for _ in range(60):
            H = hessian_matrix(random_config(rng))
            worst = min(worst, np.linalg.eigvalsh(H)[0])
        assert worst > 0

    def test_diagonal_dominates_entrywise(self):
        rng = random.Random(78)
        for _ in range(20):
            H = hessian_matrix(random_config(rng, min_n=1))
            diag = np.diag(H)
            assert (np.abs(H) <= np.minimum.outer(diag, diag) + 1e-12).all()


class TestHessianForm:
    def test_single_leaf_anchor(self):
        cfg = ChordConfig(2.0, (LeafCrossing(1.0, math.pi / 2),))
        value = hessian_form(cfg, TransverseWeights((1.0,)))
        assert value == pytest.approx(0.6565176427496656, abs=1e-12)

    def test_endpoint_anchor_two_tanh_one(self):
        value = hessian_form(
            ChordConfig(2.0, ()), TransverseWeights(()),
            EndpointVariation(u_perp=1.0, v_perp=1.0))
        assert value == pytest.approx(1.5231883119115297, abs=1e-12)

    def test_isotropic_on_chord_tangent_motion(self):
        cfg = REF_CFG
        value = hessian_form(
            cfg, TransverseWeights((0.0, 0.0)),
            EndpointVariation(u_par=0.8, v_par=-1.3))
        assert abs(value) < 1e-10

    def test_split_recomposes_form(self):
        rng = random.Random(5)
        for _ in range(25):
            scene = random_scene(rng)
            s2, mx, e2 = hessian_split(scene.cfg, scene.weights, scene.endpoints)
            total = hessian_form(scene.cfg, scene.weights, scene.endpoints)
            assert s2 + 2.0 * mx + e2 == pytest.approx(total, abs=1e-12)

    def test_against_oracle_split(self):
        rng = random.Random(202)
        worst = 0.0
        for _ in range(30):
            scene = random_scene(rng)
            f2 = fd_oracle(scene, 2)
            a2 = hessian_split(scene.cfg, scene.weights, scene.endpoints)
            worst = max(worst, max(abs(f - a) for f, a in zip(f2, a2)))
        assert worst < 1e-6

    def test_tangent_only_scene_is_flat_numerically(self):
        scene = realize_scene(
            REF_CFG, TransverseWeights((0.0, 0.0)),
            EndpointVariation(u_par=1.0, v_par=0.5))
        _, _, end2 = fd_oracle(scene, 2)
        assert abs(end2) < 1e-6

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 4.0))
    @settings(max_examples=60, deadline=None)
    def test_endpoint_form_rewrites_as_square_plus_tanh(self, a, b, d):
        # The pure-endpoint form has two equivalent closed shapes:
        # (cosh d (a^2+b^2) - 2ab)/sinh d and
        # (a-b)^2/sinh d + tanh(d/2)(a^2+b^2).
        form = hessian_form(
            ChordConfig(d, ()), TransverseWeights(()),
            EndpointVariation(u_perp=a, v_perp=b))
        rewritten = (a - b) ** 2 / math.sinh(d) + math.tanh(d / 2) * (a * a + b * b)
        assert form == pytest.approx(rewritten, abs=1e-11)

    def test_quadratic_in_weights(self):
        cfg = REF_CFG
        w = TransverseWeights((0.6, -0.9))
        w3 = TransverseWeights((1.8, -2.7))
        assert hessian_form(cfg, w3) == pytest.approx(
            9.0 * hessian_form(cfg, w), rel=1e-13)


class TestMargins:
    def test_midpoint_crossing_saturates_floor(self):
        rep = hessian_margin(ChordConfig(2.0, (LeafCrossing(1.0, 1.0),)))
        assert rep.epsilons == (1.0,)
        assert rep.bounds == (0.0,)
        assert rep.drops[0] == pytest.approx(0.838017210726572, abs=1e-14)
        assert rep.bound_p == pytest.approx(1.1752011936438014, abs=1e-14)
        assert rep.drop_p == pytest.approx(2.2191150562683877, abs=1e-14)

    def test_reference_config_margins(self):
        rep = hessian_margin(REF_CFG)
        assert rep.epsilons == pytest.approx((0.7, 0.6))
        assert rep.eps_p == pytest.approx(0.7)
        assert rep.eps_q == pytest.approx(0.6)
        assert rep.bounds[0] == pytest.approx(0.5593754905454702, abs=1e-13)
        assert rep.bounds[1] == 0.0  # margin meets the far endpoint
        assert rep.drops == pytest.approx((0.9858712554717337, 0.3989168533010977))

    def test_drops_always_positive_floors_never_negative(self):
        rng = random.Random(31)
        for _ in range(40):
            cfg = random_config(rng, min_n=1)
            rep = hessian_margin(cfg)
            assert min(rep.drops) > 0
            assert min((rep.drop_p, rep.drop_q)) > 0
            assert min(rep.bounds) >= 0

    def test_no_crossings_raises(self):
        with pytest.raises(DegenerateMarginError):
            hessian_margin(ChordConfig(2.0, ()))


class TestKinematics:
    def test_rotation_rate_anchor(self):
        cfg = ChordConfig(
            2.0, (LeafCrossing(0.5, 1.0), LeafCrossing(1.0, math.pi / 2)))
        rates = shear_kinematics(cfg, 1, 0)
        assert rates.rho_prime == pytest.approx(0.4254590641196607, abs=1e-14)

    def test_slide_rate_anchor(self):
        cfg = ChordConfig(
            2.0, (LeafCrossing(0.5, math.pi / 2), LeafCrossing(1.0, math.pi / 2)))
        rates = shear_kinematics(cfg, 1, 0)
        assert rates.f_prime == pytest.approx(0.22170472099251845, abs=1e-14)

    def test_rotation_rate_limit_near_q(self):
        cfg = ChordConfig(
            2.0, (LeafCrossing(0.4, 1.0), LeafCrossing(2.0 - 1e-7, math.pi / 2)))
        rates = shear_kinematics(cfg, 1, 0)
        assert rates.rho_prime == pytest.approx(1.0 / math.sinh(2.0), rel=1e-9)

    def test_frozen_reference_rates(self):
        rates = shear_kinematics(REF_CFG, 1, 0)
        assert rates.rho_prime == pytest.approx(0.18455742368906006, abs=1e-14)
        assert rates.f_prime == pytest.approx(0.15709279337006743, abs=1e-14)
        assert rates.dcos_theta == pytest.approx(0.20644886046988808, abs=1e-14)

    def test_watched_leaf_must_precede_sheared_leaf(self):
        with pytest.raises(ValueError):
            shear_kinematics(REF_CFG, 0, 1)
        with pytest.raises(ValueError):
            shear_kinematics(REF_CFG, 1, 1)
        with pytest.raises(ValueError):
            shear_kinematics(REF_CFG, 2, 0)

    def test_rates_against_moving_chord_measurement(self):
        rng = random.Random(909)
        worst = 0.0
        for _ in range(8):
            cfg = random_config(rng, max_n=4, min_n=2)
            h_idx = rng.randint(1, cfg.n - 1)
            l_idx = rng.randint(0, h_idx - 1)
            worst = max(worst, self._measured_gap(cfg, h_idx, l_idx))
        assert worst < 1e-6

    @staticmethod
    def _measured_gap(cfg, h_idx, l_idx):
        p = HPoint(0.0, 1.0)
        q = HPoint(0.0, math.exp(cfg.length))
        leaves = []
        for c in cfg.crossings:
            base = HPoint(0.0, math.exp(c.s))
            up = HTangent(base, 0.0, base.y)
            leaves.append(geodesic_from_direction(base, rotate_tangent(up, c.theta)))
        leaf_h, leaf_l = leaves[h_idx], leaves[l_idx]

        def state(t):
            qt = translate_along(leaf_h, t).apply(q)
            chord = geodesic_through(p, qt)
            x = intersection_point(chord, leaf_l)
            ang_p = oriented_angle(HTangent(p, 0.0, 1.0), unit_toward(p, qt))
            slide = leaf_l.param_of(x)
            cos_th = math.cos(oriented_angle(
                chord.tangent_at(chord.param_of(x)),
                leaf_l.tangent_at(slide)))
            return ang_p, slide, cos_th

        # Intersection-point noise swamps small steps, so the measurement
        # uses a coarse pair of steps and Richardson extrapolation.
        def rate(idx, h=4e-3):
            def central(hh):
                plus, minus = state(hh), state(-hh)
                return (plus[idx] - minus[idx]) / (2.0 * hh)
            return (4.0 * central(h) - central(2.0 * h)) / 3.0

        rates = shear_kinematics(cfg, h_idx, l_idx)
        return max(abs(rate(0) - rates.rho_prime),
                   abs(rate(1) - rates.f_prime),
                   abs(rate(2) - rates.dcos_theta))


class TestSceneOracle:
    def test_rejects_mismatched_length(self):
        scene = random_scene(random.Random(3), min_n=1)
        stretched = ChordConfig(scene.cfg.length + 0.5, scene.cfg.crossings)
        bad = HalfplaneScene(cfg=stretched, weights=scene.weights,
                             endpoints=scene.endpoints, p=scene.p, q=scene.q,
                             leaves=scene.leaves)
        with pytest.raises(InconsistentSceneError):
            fd_oracle(bad, 1)

    def test_rejects_clockwise_leaf(self):
        cfg = ChordConfig(2.0, (LeafCrossing(0.9, 1.2),))
        scene = realize_scene(cfg, TransverseWeights((1.0,)))
        base = HPoint(0.0, math.exp(0.9))
        up = HTangent(base, 0.0, base.y)
        mirrored = geodesic_from_direction(base, rotate_tangent(up, -1.2))
        bad = HalfplaneScene(cfg=cfg, weights=scene.weights,
                             endpoints=scene.endpoints, p=scene.p, q=scene.q,
                             leaves=(mirrored,))
        with pytest.raises(InconsistentSceneError):
            fd_oracle(bad, 2)

    def test_rejects_unknown_order(self):
        scene = random_scene(random.Random(4))
        with pytest.raises(ValueError):
            fd_oracle(scene, 3)

    def test_scene_json_round_trip(self):
        cfg = REF_CFG
        weights = TransverseWeights((0.4, -1.1))
        endpoints = EndpointVariation(u_perp=0.2, v_par=-0.6)
        blob = json.dumps(scene_to_json(cfg, weights, endpoints))
        cfg2, w2, ev2 = scene_from_json(json.loads(blob))
        assert cfg2 == cfg
        assert w2 == weights
        assert ev2 == endpoints

    def test_scene_json_missing_field(self):
        data = scene_to_json(REF_CFG, TransverseWeights((0.0, 0.0)))
        del data["weights"]
        with pytest.raises(ValueError):
            scene_from_json(data)

    def test_scene_json_weight_count_mismatch(self):
        data = scene_to_json(REF_CFG, TransverseWeights((0.0, 0.0)))
        data["weights"] = [1.0]
        with pytest.raises(ValueError):
            scene_from_json(data)
