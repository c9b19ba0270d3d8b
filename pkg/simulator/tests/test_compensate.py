import numpy as np
import pytest

from app.core.errors import ColdStartError, ConfigError
from app.schemas.compensation import HistoryBuffer, Predictor, PredictorKind
from app.schemas.control import PidParams, PidState
from app.services.compensate import (
    COLD_START_VALUE,
    actuator_step,
    empty_history,
    predict,
    predict_hold,
    predict_moving_average,
    predict_weighted,
)
from app.services.control import pid_step

HOLD = Predictor(kind=PredictorKind.HOLD)
WEIGHTED = Predictor(kind=PredictorKind.WEIGHTED, alpha=0.7)


def history(*values, capacity=None):
    """Newest first"""
    return HistoryBuffer(capacity=capacity or max(len(values), 2), values=tuple(values))


def brute_mean(values, m):
    window = list(values)[: min(m, len(values))]
    total = 0.0
    for v in window:
        total += v
    return total / len(window)


class TestHistoryBuffer:

    def test_push_newest_first(self):
        """Test pushes go to the front"""
        buf = HistoryBuffer(capacity=3).push(1.0).push(2.0)
        assert buf.values == (2.0, 1.0)

    def test_capacity_evicts_oldest(self):
        """Test the oldest value falls off once the buffer is full"""
        buf = HistoryBuffer(capacity=3)
        for k in range(10):
            buf = buf.push(float(k))
            assert len(buf) == min(k + 1, 3)
        assert buf.values == (9.0, 8.0, 7.0)

    def test_rejects_bad_capacity(self):
        """Test capacity must be at least 1 and hold all values"""
        with pytest.raises(ValueError):
            HistoryBuffer(capacity=0)
        with pytest.raises(ValueError):
            HistoryBuffer(capacity=1, values=(1.0, 2.0))

    def test_capacity_per_predictor(self):
        """Test moving average keeps m values and everything else keeps two"""
        assert Predictor(kind=PredictorKind.MOVING_AVERAGE, m=5).buffer_capacity == 5
        assert Predictor(kind=PredictorKind.MOVING_AVERAGE, m=1).buffer_capacity == 2
        assert WEIGHTED.buffer_capacity == 2
        assert HOLD.buffer_capacity == 2
        assert len(empty_history(WEIGHTED)) == 0


class TestPredictors:

    def test_hold(self):
        """Test hold returns the newest value"""
        assert predict_hold(history(5.0)) == 5.0
        assert predict_hold(history(2.0, 9.0, -1.0)) == 2.0

    def test_moving_average(self):
        """Test the mean of the newest m values"""
        assert predict_moving_average(history(1.0, 2.0, 3.0), 3) == pytest.approx(2.0)
        assert predict_moving_average(history(1.0, 2.0, 3.0), 2) == pytest.approx(1.5)

    def test_moving_average_startup(self):
        """Test a short history averages what is available"""
        assert predict_moving_average(history(4.0, capacity=3), 3) == 4.0
        assert predict_moving_average(history(4.0, 2.0, capacity=3), 3) == pytest.approx(3.0)

    def test_weighted(self):
        """Test alpha blends the two newest values"""
        assert predict_weighted(history(2.0, 1.0), 0.7) == pytest.approx(1.7)
        assert predict_weighted(history(2.0), 0.7) == 2.0

    def test_weighted_near_hold(self):
        """Test alpha close to 1 approaches hold"""
        value = predict_weighted(history(3.0, -1.0), 0.999)
        assert abs(value - 3.0) <= 0.001 * 4.0 + 1e-12

    @pytest.mark.parametrize("c", [0.0, 1.0, -2.5, 0.1, 1234.5678, 1e-7])
    def test_constant_fixed_point(self, c):
        """Test every predictor maps a constant history to the constant exactly"""
        full = history(c, c, c, c)
        assert predict_hold(full) == c
        for m in (1, 2, 3, 4):
            assert predict_moving_average(full, m) == c
        for alpha in (0.1, 0.3, 0.7, 0.9):
            assert predict_weighted(full, alpha) == c

    def test_cold_start_errors(self):
        """Test predicting from an empty history raises"""
        empty = HistoryBuffer(capacity=3)
        with pytest.raises(ColdStartError):
            predict_hold(empty)
        with pytest.raises(ColdStartError):
            predict_moving_average(empty, 3)
        with pytest.raises(ColdStartError):
            predict_weighted(empty, 0.5)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, -0.2])
    def test_weighted_rejects_alpha(self, alpha):
        """Test alpha outside (0, 1) is a config error naming predictor.alpha"""
        with pytest.raises(ConfigError) as excinfo:
            predict_weighted(history(1.0, 2.0), alpha)
        assert excinfo.value.key == "predictor.alpha"

    def test_moving_average_rejects_m(self):
        """Test m < 1 is a config error"""
        with pytest.raises(ConfigError):
            predict_moving_average(history(1.0), 0)

    def test_none_reuses_last_value(self):
        """Test predictor none falls back to the last stored value"""
        assert predict(Predictor(), history(0.4, 0.9)) == 0.4


class TestPredictorOracles:

    def test_randomized_histories(self):
        """Test 1000 random histories against brute-force recomputation"""
        rng = np.random.default_rng(1234)
        for _ in range(1000):
            length = int(rng.integers(1, 8))
            values = tuple(float(v) for v in rng.normal(0.0, 10.0, size=length))
            buf = HistoryBuffer(capacity=8, values=values)
            m = int(rng.integers(1, 8))
            alpha = float(rng.uniform(0.01, 0.99))

            assert predict_hold(buf) == values[0]
            assert predict_moving_average(buf, 1) == predict_hold(buf)
            assert predict_moving_average(buf, m) == pytest.approx(brute_mean(values, m), rel=1e-12, abs=1e-12)
            expected = values[0] if length == 1 else alpha * values[0] + (1 - alpha) * values[1]
            assert predict_weighted(buf, alpha) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_linearity(self):
        """Test predictors are linear in the history"""
        rng = np.random.default_rng(99)
        for _ in range(200):
            h1 = rng.normal(size=4)
            h2 = rng.normal(size=4)
            a, b = rng.normal(size=2)
            combined = HistoryBuffer(4, tuple(float(v) for v in a * h1 + b * h2))
            b1 = HistoryBuffer(4, tuple(float(v) for v in h1))
            b2 = HistoryBuffer(4, tuple(float(v) for v in h2))
            for predictor in (
                HOLD,
                Predictor(kind=PredictorKind.MOVING_AVERAGE, m=3),
                Predictor(kind=PredictorKind.WEIGHTED, alpha=0.3),
            ):
                lhs = predict(predictor, combined)
                rhs = a * predict(predictor, b1) + b * predict(predictor, b2)
                assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


class TestActuatorStep:

    def test_received_path(self):
        """Test a delivered sample drives the PID and enters the history"""
        pid = PidParams()
        out = actuator_step(3.0, history(1.0), HOLD, pid, PidState(), 1.0)
        u, _ = pid_step(pid, PidState(), 1.0, 3.0)
        assert out.u == u
        assert out.y_used == 3.0
        assert out.history.values[0] == 3.0
        assert not out.predicted

    def test_hold_on_loss(self):
        """Test a loss with hold reuses the stored value"""
        out = actuator_step(None, history(3.0), HOLD, PidParams(), PidState(), 1.0)
        assert out.y_used == 3.0
        assert out.history.values[0] == 3.0
        assert out.predicted

    def test_weighted_loss_streak(self):
        """Test predictions are stored and feed the next prediction"""
        buf = history(2.0, 1.0)
        first = actuator_step(None, buf, WEIGHTED, PidParams(), PidState(), 0.0)
        assert first.y_used == pytest.approx(1.7)
        second = actuator_step(None, first.history, WEIGHTED, PidParams(), first.pid_state, 0.0)
        assert second.y_used == pytest.approx(0.7 * 1.7 + 0.3 * 2.0)

    def test_cold_start_loss(self):
        """Test a loss before any measurement uses the rest output and stores it"""
        out = actuator_step(None, empty_history(HOLD), HOLD, PidParams(), PidState(), 1.0)
        assert out.y_used == COLD_START_VALUE
        assert out.history.values == (COLD_START_VALUE,)

    def test_history_bounded(self):
        """Test the history never grows past the capacity"""
        predictor = Predictor(kind=PredictorKind.MOVING_AVERAGE, m=3)
        buf = empty_history(predictor)
        state = PidState()
        for k in range(10):
            received = None if k % 3 == 0 else float(k)
            out = actuator_step(received, buf, predictor, PidParams(), state, 1.0, step=k)
            buf, state = out.history, out.pid_state
            assert len(buf) == min(k + 1, 3)

    def test_transparent_without_loss(self):
        """Test every predictor produces identical commands when nothing is lost"""
        measurements = np.random.default_rng(5).normal(size=50)
        traces = []
        for predictor in (Predictor(), HOLD, WEIGHTED, Predictor(kind=PredictorKind.MOVING_AVERAGE, m=4)):
            buf, state, trace = empty_history(predictor), PidState(), []
            for k, y in enumerate(measurements):
                out = actuator_step(float(y), buf, predictor, PidParams(), state, 0.5, step=k)
                buf, state = out.history, out.pid_state
                trace.append(out.u)
            traces.append(trace)
        assert all(trace == traces[0] for trace in traces)
