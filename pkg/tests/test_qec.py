from __future__ import annotations

import math

import numpy as np
import pytest

from spintangle.qec import (
    QecScenario,
    disentanglement_residual,
    error_surface,
    ideal_crx,
    nuclear_trajectories,
    residual_closed_form,
    run_bitflip_code,
    sequential_theta_solution,
)
from spintangle.spin_model import (
    ConditionalRotation,
    ElectronQubitSpec,
    NuclearSpinParams,
    build_sequence,
    resonance_time,
    unit_propagator,
)

ERRORS = ("none", "electron", "nucleus1", "nucleus2")


def _tilted_crx(eps: float) -> ConditionalRotation:
    """A slightly imperfect conditional gate: axis tilted by eps toward z."""
    n = np.array([math.cos(eps), 0.0, math.sin(eps)])
    return ConditionalRotation.from_axis_angles(n, math.pi / 2.0,
                                                -n, math.pi / 2.0)


class TestThetaSolution:
    def test_linear_relations(self):
        t1, t2, t3, t4 = sequential_theta_solution()
        # electron-flip recovery: odd multiple of pi
        assert (t1 - t2 - t3 + t4) / math.pi % 2 == pytest.approx(1.0)
        # no-error path: even multiple of pi
        assert (t1 + t2 - t3 - t4) / math.pi % 2 == pytest.approx(0.0)
        # nucleus-flip corrections close modulo 2 pi
        assert (t1 + t2 + t3 + t4) % (2.0 * math.pi) == pytest.approx(0.0)
        assert (t1 - t2 + t3 - t4) % (2.0 * math.pi) == pytest.approx(0.0)

    def test_ideal_gate_angles_match(self):
        rot = ideal_crx()
        n0, phi0, _ = rot.r0.axis_angle()
        n1, phi1, _ = rot.r1.axis_angle()
        assert phi0 == pytest.approx(math.pi / 2.0, abs=1e-12)
        assert phi1 == pytest.approx(math.pi / 2.0, abs=1e-12)
        assert float(n0 @ n1) == pytest.approx(-1.0, abs=1e-12)


class TestSequentialIdeal:
    @pytest.mark.parametrize("error", ERRORS)
    def test_exact_recovery_any_single_flip(self, error):
        for gamma in np.linspace(0.0, math.pi, 7):
            for delta in np.linspace(0.0, 2.0 * math.pi, 7):
                out = run_bitflip_code(QecScenario(
                    scheme="sequential", error=error,
                    gamma=float(gamma), delta=float(delta)))
                assert out.recovery_probability == pytest.approx(1.0, abs=1e-12)
                assert out.electron_purity == pytest.approx(1.0, abs=1e-12)

    def test_final_state_normalized(self):
        out = run_bitflip_code(QecScenario(error="electron", gamma=1.1,
                                           delta=0.7))
        assert np.linalg.norm(out.final_state) == pytest.approx(1.0, abs=1e-12)

    def test_snapshots_cover_all_stages(self):
        out = run_bitflip_code(QecScenario(error="nucleus1", gamma=0.4))
        assert list(out.snapshots) == ["initial", "encoded", "error",
                                       "decoded", "corrected"]
        for psi in out.snapshots.values():
            assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


class TestMultispinIdeal:
    def test_no_error_leaves_nuclei_in_ground(self):
        out = run_bitflip_code(QecScenario(scheme="multispin", error="none",
                                           gamma=1.2, delta=0.3))
        amp = out.final_state.reshape(2, 4)
        # all amplitude sits in the |00> nuclear column
        assert np.linalg.norm(amp[:, 1:]) == pytest.approx(0.0, abs=1e-12)
        assert out.recovery_probability == pytest.approx(1.0, abs=1e-12)

    def test_electron_flip_recovered(self):
        for gamma in np.linspace(0.0, math.pi, 5):
            out = run_bitflip_code(QecScenario(scheme="multispin",
                                               error="electron",
                                               gamma=float(gamma), delta=1.0))
            assert out.recovery_probability == pytest.approx(1.0, abs=1e-12)


class TestErrorSurface:
    def test_ideal_surface_is_flat_zero(self):
        surf = error_surface(QecScenario(error="electron"),
                             np.linspace(0.0, math.pi, 6),
                             np.linspace(0.0, 2.0 * math.pi, 6))
        assert surf.shape == (6, 6)
        assert np.max(np.abs(surf)) < 1e-12

    def test_gamma_zero_row_is_delta_independent(self):
        gates = (_tilted_crx(0.02), _tilted_crx(0.03))
        surf = error_surface(QecScenario(scheme="multispin",
                                         encode_gates=gates, error="electron"),
                             [0.0], np.linspace(0.0, 2.0 * math.pi, 9))
        assert np.ptp(surf[0]) < 1e-12

    def test_imperfect_gates_give_small_error(self):
        gates = (_tilted_crx(0.02), _tilted_crx(0.03))
        surf = error_surface(QecScenario(scheme="multispin",
                                         encode_gates=gates, error="electron"),
                             np.linspace(0.0, math.pi, 8),
                             np.linspace(0.0, 2.0 * math.pi, 8))
        assert 0.0 <= np.max(surf) < 0.05
        assert np.max(surf) > 1e-6


class TestTrajectories:
    def test_paths_start_at_south_pole(self):
        traj = nuclear_trajectories(QecScenario(error="electron"), samples=16)
        assert set(traj) == {"nucleus1", "nucleus2"}
        for nuc in traj.values():
            assert set(nuc) == {"branch0", "branch1"}
            for path in nuc.values():
                assert path.shape == (32, 3)
                assert path[0] == pytest.approx((0.0, 0.0, -1.0), abs=1e-12)
                assert np.linalg.norm(path, axis=1) == pytest.approx(
                    np.ones(len(path)), abs=1e-12)

    def test_electron_flip_returns_to_south_pole(self):
        # the decode runs on the opposite branch, undoing the encode rotation
        traj = nuclear_trajectories(QecScenario(error="electron"), samples=24)
        for nuc in traj.values():
            for path in nuc.values():
                assert path[-1] == pytest.approx((0.0, 0.0, -1.0), abs=1e-12)

    def test_multispin_has_three_segments(self):
        traj = nuclear_trajectories(QecScenario(scheme="multispin"), samples=10)
        assert traj["nucleus1"]["branch0"].shape == (30, 3)


class TestScenarioValidation:
    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            QecScenario(scheme="other")

    def test_unknown_error(self):
        with pytest.raises(ValueError):
            QecScenario(error="phase")

    def test_gate_tuple_length(self):
        with pytest.raises(ValueError):
            QecScenario(encode_gates=(ideal_crx(),)).resolved_gates()


class TestDisentanglementResidual:
    def test_closed_form_matches_quaternions(self):
        electron = ElectronQubitSpec(0.0, -1.0)
        rng = np.random.default_rng(0)
        for _ in range(25):
            spin = NuclearSpinParams.from_khz(
                "r", rng.uniform(-60.0, 60.0), rng.uniform(1.0, 60.0), 432.0)
            t = rng.uniform(1e-6, 20e-6)
            rot = unit_propagator(build_sequence("cpmg", t), spin, electron)
            assert disentanglement_residual(rot) == pytest.approx(
                residual_closed_form(spin, electron, t), abs=1e-9)

    def test_quadratic_scaling_in_coupling(self):
        # log-log slope of the residual versus B must be 2 +/- 0.1
        electron = ElectronQubitSpec(0.0, -1.0)
        b_values = np.array([2.0, 4.0, 8.0, 16.0])
        res = []
        for b in b_values:
            spin = NuclearSpinParams.from_khz("s", 20.0, float(b), 2000.0)
            t = resonance_time(spin, electron, 1)
            rot = unit_propagator(build_sequence("cpmg", t), spin, electron)
            res.append(disentanglement_residual(rot))
        slope = np.polyfit(np.log(b_values), np.log(res), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)

    def test_identical_branches_have_zero_residual(self):
        rot = ConditionalRotation.from_axis_angles(
            (0.0, 0.0, 1.0), 0.8, (0.0, 0.0, 1.0), 0.8)
        assert disentanglement_residual(rot) == 0.0
