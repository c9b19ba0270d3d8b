"""Link-layer channel model: log-normal shadowing, NCFSK bit errors, PRR/PLR.

Every function is pure given an explicit numpy Generator, so a sweep can be
reproduced from its seed and distances can be evaluated in any order.
"""

import itertools
import logging
import math
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import DomainError
from app.schemas.channel import (
    PathLossModel,
    PlrCurve,
    RadioProfile,
    RegionBounds,
    RegionSettings,
    SweepSettings,
)

logger = logging.getLogger(__name__)


def _check_distance(d: float) -> None:
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")


def mean_path_loss(model: PathLossModel, d: float) -> float:
    _check_distance(d)
    return model.pl_at_d0 + 10.0 * model.path_loss_exponent * math.log10(
        d / model.ref_distance_d0
    )


def sample_path_loss(model: PathLossModel, d: float, rng: np.random.Generator) -> float:
    """Mean path loss plus one N(0, sigma) shadowing draw.

    A draw is consumed even when sigma is 0 so that streams stay aligned
    across models.
    """
    mean = mean_path_loss(model, d)
    return mean + float(rng.normal(0.0, model.shadowing_sigma))


def snr_db(profile: RadioProfile, path_loss: float) -> float:
    return profile.tx_power - path_loss - profile.noise_floor


def ber_ncfsk(snr: float, profile: RadioProfile) -> float:
    snr_linear = 10.0 ** (snr / 10.0)
    return 0.5 * math.exp(-0.5 * snr_linear * profile.noise_bandwidth / profile.data_rate)


def snr_threshold_db(profile: RadioProfile, ber: float) -> float:
    """SNR (dB) at which ber_ncfsk equals ber; -inf when ber >= 0.5"""
    if not 0 < ber:
        raise DomainError(f"bit error rate must be positive, got {ber}")
    if ber >= 0.5:
        return -math.inf
    snr_linear = -2.0 * math.log(2.0 * ber) * profile.data_rate / profile.noise_bandwidth
    return 10.0 * math.log10(snr_linear)


def _frame_bits(profile: RadioProfile) -> Tuple[float, float]:
    return 8.0 * profile.preamble_bytes, 8.0 * profile.frame_bytes * profile.encoding_expansion


def prr(ber: float, profile: RadioProfile) -> float:
    if not 0.0 <= ber <= 1.0:
        raise DomainError(f"bit error rate must lie in [0, 1], got {ber}")
    preamble_bits, frame_bits = _frame_bits(profile)
    return (1.0 - ber) ** preamble_bits * (1.0 - ber) ** frame_bits


def plr_one_measure(
    profile: RadioProfile, model: PathLossModel, d: float, rng: np.random.Generator
) -> float:
    """One link realization: a shadowing draw held for the whole packet"""
    path_loss = sample_path_loss(model, d, rng)
    return 1.0 - prr(ber_ncfsk(snr_db(profile, path_loss), profile), profile)


def plr_measures(
    profile: RadioProfile,
    model: PathLossModel,
    d: float,
    samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorised plr_one_measure over `samples` independent draws"""
    mean = mean_path_loss(model, d)
    path_loss = mean + rng.normal(0.0, model.shadowing_sigma, size=samples)
    snr_linear = 10.0 ** ((profile.tx_power - path_loss - profile.noise_floor) / 10.0)
    ber = 0.5 * np.exp(-0.5 * snr_linear * profile.noise_bandwidth / profile.data_rate)
    preamble_bits, frame_bits = _frame_bits(profile)
    packet_ok = np.power(1.0 - ber, preamble_bits) * np.power(1.0 - ber, frame_bits)
    return np.clip(1.0 - packet_ok, 0.0, 1.0)


def sweep_distances(d_min: float, d_max: float, step: float) -> np.ndarray:
    if not (0 < d_min <= d_max) or not step > 0:
        raise DomainError(
            f"malformed sweep range d_min={d_min}, d_max={d_max}, step={step}"
        )
    count = int(math.floor((d_max - d_min) / step + 1e-9)) + 1
    return d_min + step * np.arange(count)


def distance_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream per distance so sweeps are schedule independent"""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def sweep(
    profile: RadioProfile,
    model: PathLossModel,
    d_min: float,
    d_max: float,
    step: float,
    samples: int,
    seed: int,
) -> PlrCurve:
    if samples < 1:
        raise DomainError(f"samples must be at least 1, got {samples}")
    distances = sweep_distances(d_min, d_max, step)
    rows = []
    for index, d in enumerate(distances):
        row = plr_measures(profile, model, float(d), samples, distance_rng(seed, index))
        logger.debug(
            f"d={d:g} m: PLR mean {row.mean():.4f}, min {row.min():.4f}, max {row.max():.4f}"
        )
        rows.append(row.tolist())
    return PlrCurve(
        distances=distances.tolist(),
        samples_per_distance=samples,
        plr_samples=rows,
    )


def sweep_from_settings(
    profile: RadioProfile, model: PathLossModel, sweep_settings: SweepSettings
) -> PlrCurve:
    return sweep(
        profile,
        model,
        sweep_settings.d_min,
        sweep_settings.d_max,
        sweep_settings.step,
        sweep_settings.samples,
        sweep_settings.seed,
    )


def _distance_for_path_loss(model: PathLossModel, path_loss: float) -> float:
    exponent = (path_loss - model.pl_at_d0) / (10.0 * model.path_loss_exponent)
    if exponent > 300:
        return math.inf
    return model.ref_distance_d0 * 10.0 ** exponent


def classify_regions(
    profile: RadioProfile,
    model: PathLossModel,
    ber_threshold_high: float,
    ber_threshold_low: float,
    k_sigma: float,
) -> RegionBounds:
    """Analytic region bounds at a k_sigma shadowing margin.

    connected_end is the farthest distance where a draw k_sigma*sigma above
    the mean still keeps the BER at or below ber_threshold_low (so PRR stays
    at or above prr(ber_threshold_low)). disconnected_start is the nearest
    distance where a draw k_sigma*sigma below the mean still has BER at or
    above ber_threshold_high. PRR falls monotonically with path loss, so
    both edges have a closed form. Edges outside the search window come
    back as None.
    """
    for name, value in (
        ("ber_threshold_high", ber_threshold_high),
        ("ber_threshold_low", ber_threshold_low),
    ):
        if not 0 < value < 1:
            raise DomainError(f"{name} must lie in (0, 1), got {value}")
    if k_sigma < 0:
        raise DomainError(f"k_sigma must be non-negative, got {k_sigma}")
    if ber_threshold_low >= ber_threshold_high:
        raise DomainError("ber_threshold_low must be below ber_threshold_high")

    margin = k_sigma * model.shadowing_sigma
    budget = profile.tx_power - profile.noise_floor
    lo, hi = settings.REGION_SEARCH_MIN_M, settings.REGION_SEARCH_MAX_M

    connected_end: Optional[float] = None
    snr_good = snr_threshold_db(profile, ber_threshold_low)
    d_good = _distance_for_path_loss(model, budget - snr_good - margin)
    if d_good >= lo:
        connected_end = min(d_good, hi)

    disconnected_start: Optional[float] = None
    snr_bad = snr_threshold_db(profile, ber_threshold_high)
    if math.isfinite(snr_bad):
        d_bad = _distance_for_path_loss(model, budget - snr_bad + margin)
        if d_bad <= hi:
            disconnected_start = max(d_bad, lo)

    if connected_end is not None and disconnected_start is not None:
        if connected_end >= disconnected_start:
            # both edges clamped onto the same window boundary
            connected_end = None
    return RegionBounds(
        connected_end=connected_end,
        disconnected_start=disconnected_start,
        eps_connected=1.0 - prr(ber_threshold_low, profile),
        eps_disconnected=prr(ber_threshold_high, profile),
    )


def classify_from_settings(
    profile: RadioProfile, model: PathLossModel, region_settings: RegionSettings
) -> RegionBounds:
    return classify_regions(
        profile,
        model,
        region_settings.ber_threshold_high,
        region_settings.ber_threshold_low,
        region_settings.k_sigma,
    )


def empirical_regions(
    curve: PlrCurve, low: float = 0.01, high: float = 0.99
) -> Tuple[Optional[float], Optional[float]]:
    """Regions read off a sampled curve.

    Returns (largest distance up to which every sample is <= low,
    smallest distance from which every sample is >= high); None when the
    curve never shows that region.
    """
    samples = np.asarray(curve.plr_samples)
    good = np.all(samples <= low, axis=1)
    bad = np.all(samples >= high, axis=1)

    connected_end = None
    for d, ok in zip(curve.distances, good):
        if not ok:
            break
        connected_end = d

    disconnected_start = None
    for d, dead in zip(reversed(curve.distances), reversed(bad)):
        if not dead:
            break
        disconnected_start = d
    return connected_end, disconnected_start


# Region boundaries the default channel is tuned to reproduce, meters
CALIBRATION_TARGETS = {"connected_0dbm": 3.0, "disconnected_0dbm": 14.0, "disconnected_m10dbm": 8.0}

# Sweep checks the calibrated defaults must pass robustly: distance, power, expect
ROBUST_SWEEP_CHECKS = ((3.0, 0.0, "connected"), (14.0, 0.0, "disconnected"), (8.0, -10.0, "disconnected"))


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _robust(
    profile: RadioProfile, model: PathLossModel, margin_sigmas: float
) -> bool:
    # PLR <= 0.01 at the connected edge and >= 0.99 at the disconnected edge
    snr_connected = snr_threshold_db(profile, 1.0 - 0.99 ** (1.0 / sum(_frame_bits(profile))))
    snr_disconnected = snr_threshold_db(profile, 1.0 - 0.01 ** (1.0 / sum(_frame_bits(profile))))
    spread = margin_sigmas * model.shadowing_sigma
    for d, power, expect in ROBUST_SWEEP_CHECKS:
        mean_snr = snr_db(profile.model_copy(update={"tx_power": power}), mean_path_loss(model, d))
        if expect == "connected" and mean_snr - spread < snr_connected:
            return False
        if expect == "disconnected" and mean_snr + spread > snr_disconnected:
            return False
    return True


def calibration_score(
    profile: RadioProfile, model: PathLossModel, region_settings: RegionSettings
) -> float:
    """Sum of distances between the analytic bounds and CALIBRATION_TARGETS"""
    high = classify_from_settings(profile.model_copy(update={"tx_power": 0.0}), model, region_settings)
    low = classify_from_settings(profile.model_copy(update={"tx_power": -10.0}), model, region_settings)
    found = {
        "connected_0dbm": high.connected_end,
        "disconnected_0dbm": high.disconnected_start,
        "disconnected_m10dbm": low.disconnected_start,
    }
    if any(v is None for v in found.values()):
        return math.inf
    return sum(abs(found[key] - target) for key, target in CALIBRATION_TARGETS.items())


def calibrate_channel(
    profile: RadioProfile,
    region_settings: RegionSettings,
    exponents: Iterable[float] = tuple(_grid(2.0, 6.0, 0.5)),
    pl_values: Iterable[float] = tuple(_grid(40.0, 70.0, 0.5)),
    sigmas: Iterable[float] = tuple(_grid(2.0, 6.0, 0.5)),
    ref_distance_d0: float = 1.0,
    margin_sigmas: float = 3.5,
) -> Tuple[PathLossModel, float]:
    """Grid search for (exponent, pl_at_d0, sigma) matching CALIBRATION_TARGETS.

    Points whose 80-sample sweep would not be reliably all-zero at 3 m and
    all-one at 14 m (0 dBm) and 8 m (-10 dBm) are rejected.
    """
    best: Optional[PathLossModel] = None
    best_score = math.inf
    tried = 0
    for exponent, pl_at_d0, sigma in itertools.product(exponents, pl_values, sigmas):
        tried += 1
        model = PathLossModel(
            ref_distance_d0=ref_distance_d0,
            pl_at_d0=float(pl_at_d0),
            path_loss_exponent=float(exponent),
            shadowing_sigma=float(sigma),
        )
        if not _robust(profile, model, margin_sigmas):
            continue
        score = calibration_score(profile, model, region_settings)
        # ties go to the larger sigma, which widens the transitional region
        if score < best_score - 1e-12 or (
            best is not None
            and abs(score - best_score) <= 1e-12
            and model.shadowing_sigma > best.shadowing_sigma
        ):
            best, best_score = model, score
    if best is None:
        raise DomainError(f"no robust channel parameters among {tried} grid points")
    logger.info(
        f"Channel calibration: n={best.path_loss_exponent:g}, PL(d0)={best.pl_at_d0:g} dB, "
        f"sigma={best.shadowing_sigma:g} dB, score={best_score:.3f} m over {tried} points"
    )
    return best, best_score


def region_table(
    profile: RadioProfile,
    model: PathLossModel,
    region_settings: RegionSettings,
    curve: Optional[PlrCurve] = None,
) -> Dict[str, Tuple[Optional[float], Optional[float]]]:
    analytic = classify_from_settings(profile, model, region_settings)
    table = {"analytic": (analytic.connected_end, analytic.disconnected_start)}
    if curve is not None:
        table["empirical"] = empirical_regions(curve)
    return table
