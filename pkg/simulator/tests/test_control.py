import math

import pytest

from app.core.errors import CalibrationError, ControllerFault
from app.schemas.control import CalibrationGrid, PidParams, PidState, ReferenceKind, ReferenceSignal
from app.schemas.experiment import ExperimentConfig
from app.services.control import (
    calibrate_baseline,
    evaluate_grid,
    lossless_iae,
    pid_step,
    reference,
    select_baseline,
)


def run_pid(params, errors, y=0.0):
    """Feed r = y + e for each error e at a fixed measurement y"""
    state = PidState()
    outputs = []
    for k, e in enumerate(errors):
        u, state = pid_step(params, state, y + e, y, step=k)
        outputs.append(u)
    return outputs, state


class TestPidStep:

    def test_pure_proportional(self):
        """Test ti = inf and td = 0 leave u = k (r - y)"""
        params = PidParams(k=2.5, ti=math.inf, td=0.0, h=0.01)
        state = PidState()
        for r, y in [(1.0, 0.2), (0.0, -3.0), (0.4, 0.4)]:
            u, state = pid_step(params, state, r, y)
            assert u == 2.5 * (r - y)
        assert state.integral_term == 0.0

    def test_zero_error_from_rest(self):
        """Test r = y from a zero state keeps u at zero"""
        params = PidParams()
        state = PidState()
        for _ in range(100):
            u, state = pid_step(params, state, 0.0, 0.0)
            assert u == 0.0

    def test_forward_rectangle_integral(self):
        """Test ten unit errors integrate to 1.0 and the eleventh call returns 2.0"""
        params = PidParams(k=1.0, ti=1.0, td=0.0, h=0.1)
        outputs, state = run_pid(params, [1.0] * 11)
        expected_integral = 0.0
        for k in range(10):
            assert outputs[k] == pytest.approx(1.0 + expected_integral)
            expected_integral += 0.1
        assert outputs[10] == pytest.approx(2.0)
        assert state.integral_term == pytest.approx(1.1)

    def test_no_derivative_without_td(self):
        """Test td = 0 contributes nothing however y moves"""
        params = PidParams(k=1.0, ti=math.inf, td=0.0)
        state = PidState()
        for y in (0.0, 5.0, -3.0, 100.0):
            u, state = pid_step(params, state, 0.0, y)
            assert u == -y
            assert state.derivative_state == 0.0

    def test_setpoint_step_skips_derivative(self):
        """Test a step in r with y frozen changes u only through P and I"""
        params = PidParams(k=1.5, ti=0.5, td=0.1, n_filter=10, h=0.01)
        state = PidState(integral_term=0.2, prev_measurement=0.3, derivative_state=0.0)
        u_low, _ = pid_step(params, state, 0.0, 0.3)
        u_high, next_state = pid_step(params, state, 1.0, 0.3)
        assert u_high - u_low == pytest.approx(1.5)
        assert next_state.derivative_state == 0.0

    def test_filtered_derivative(self):
        """Test the derivative state follows its first-order filter"""
        params = PidParams(k=2.0, ti=math.inf, td=0.2, n_filter=5.0, h=0.01)
        denom = 0.2 + 5.0 * 0.01
        ad, bd = 0.2 / denom, 2.0 * 0.2 * 5.0 / denom
        state = PidState()
        derivative = 0.0
        previous = 0.0
        for y in (0.1, 0.3, 0.2, 0.2):
            u, state = pid_step(params, state, 0.0, y)
            derivative = ad * derivative - bd * (y - previous)
            previous = y
            assert state.derivative_state == pytest.approx(derivative)
            assert u == pytest.approx(-2.0 * y + derivative)

    def test_deterministic(self):
        """Test identical inputs and state give identical outputs"""
        params = PidParams()
        state = PidState(0.1, 0.2, 0.3)
        assert pid_step(params, state, 1.0, 0.5) == pid_step(params, state, 1.0, 0.5)

    def test_non_finite_output(self):
        """Test a non-finite control output raises a controller fault with the step"""
        params = PidParams(k=1.0, ti=math.inf, td=0.0)
        with pytest.raises(ControllerFault) as excinfo:
            pid_step(params, PidState(), math.inf, 0.0, step=42)
        assert excinfo.value.step == 42

    def test_params_validation(self):
        """Test invalid PID parameters are rejected"""
        with pytest.raises(ValueError):
            PidParams(ti=0.0)
        with pytest.raises(ValueError):
            PidParams(td=-0.1)
        with pytest.raises(ValueError):
            PidParams(h=0.0)
        with pytest.raises(ValueError):
            PidParams(k=math.nan)
        assert PidParams(ti=math.inf).ti == math.inf


class TestReference:

    def test_constant(self):
        """Test a constant reference is offset + amplitude everywhere"""
        signal = ReferenceSignal(kind=ReferenceKind.CONSTANT, amplitude=1.0, offset=0.0)
        assert reference(signal, 0.0) == 1.0
        assert reference(signal, 123.4) == 1.0

    def test_square_wave_levels(self):
        """Test the default square wave is high then low"""
        signal = ReferenceSignal()
        assert reference(signal, 0.0) == 1.0
        assert reference(signal, 0.1) == 1.0
        assert reference(signal, 1.1) == 0.0
        assert reference(signal, 2.5) == 1.0

    def test_switch_instant_takes_new_value(self):
        """Test the half-open convention at t = period / 2 and t = period"""
        signal = ReferenceSignal()
        assert reference(signal, 1.0) == 0.0
        assert reference(signal, 2.0) == 1.0

    def test_sampled_switching(self):
        """Test sampling at k h switches exactly every 100 steps"""
        signal = ReferenceSignal()
        values = [reference(signal, k * 0.01) for k in range(1000)]
        for k, value in enumerate(values):
            assert value == (1.0 if (k // 100) % 2 == 0 else 0.0)


class TestCalibration:

    def test_default_loop_is_stable(self, discrete_plant):
        """Test the shipped PID keeps the lossless loop bounded over 100 s"""
        iae = lossless_iae(discrete_plant, PidParams(), ReferenceSignal(), 100.0)
        assert iae is not None
        assert 5.0 <= iae <= 10.0

    def test_destabilizing_gain(self, discrete_plant):
        """Test a grid of only destabilizing gains fails calibration"""
        grid = [PidParams(k=-5.0, ti=0.12, td=0.049)]
        with pytest.raises(CalibrationError) as excinfo:
            calibrate_baseline(discrete_plant, ReferenceSignal(), grid, duration=10.0)
        assert len(excinfo.value.grid) == 1

    def test_empty_grid(self, discrete_plant):
        """Test an empty grid fails calibration"""
        with pytest.raises(CalibrationError):
            calibrate_baseline(discrete_plant, ReferenceSignal(), [])

    def test_singleton_grid(self, discrete_plant):
        """Test a one-point stable grid returns that point"""
        point = PidParams()
        assert calibrate_baseline(discrete_plant, ReferenceSignal(), [point], duration=10.0) == point

    def test_select_closest_to_target(self):
        """Test selection minimises the distance to the target and skips unstable points"""
        a, b, c = PidParams(k=0.5), PidParams(k=0.7), PidParams(k=0.9)
        best, iae = select_baseline([(a, 3.0), (b, None), (c, 7.5)], target_iae=7.1)
        assert best == c and iae == 7.5

    def test_grid_points(self):
        """Test the calibration grid expands to the full product"""
        grid = CalibrationGrid(k_values="0.5, 1", ti_values=[0.1], td_values="0.01,0.02")
        points = grid.points(n_filter=10.0, h=0.01)
        assert len(points) == 4
        assert {p.k for p in points} == {0.5, 1.0}

    @pytest.mark.slow
    def test_default_grid(self, discrete_plant):
        """Test the default grid yields a PID with lossless IAE in [5, 10]"""
        grid = CalibrationGrid()
        evaluated = evaluate_grid(discrete_plant, ReferenceSignal(), grid.points(10.0, 0.01))
        best, iae = select_baseline(evaluated, grid.target_iae)
        assert 5.0 <= iae <= 10.0
        assert lossless_iae(discrete_plant, best, ReferenceSignal(), 100.0) == iae

    @pytest.mark.slow
    def test_default_grid_gives_shipped_pid(self, discrete_plant):
        """Test calibrating over the default grid returns the shipped [pid] values"""
        config = ExperimentConfig()
        grid = config.calibration.points(config.pid.n_filter, config.sim.h)
        best = calibrate_baseline(discrete_plant, config.reference, grid, config.calibration.target_iae)
        assert best == config.pid_params()
