"""CSV, SVG and text outputs of the CLI commands.

Numbers are written once, to CSV. Charts and tables are rendered from the
CSV read back from disk, so plotting can never change a reported value.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from app.core.config import settings  # noqa: E402
from app.schemas.channel import PlrCurve  # noqa: E402
from app.schemas.control import PidParams  # noqa: E402
from app.schemas.simulation import BatchSummary, RunResult  # noqa: E402

logger = logging.getLogger(__name__)

# fixed ids inside the SVG so reruns are byte identical
matplotlib.rcParams["svg.hashsalt"] = "lossyloop"
matplotlib.rcParams["svg.fonttype"] = "none"

TIMESERIES_COLUMNS = ["t", "r", "y", "y_ctrl", "u", "lost"]
SWEEP_COLUMNS = ["distance_m", "sample_idx", "plr"]
SUMMARY_COLUMNS = ["seed", "iae", "observed_plr"]
COMPARE_COLUMNS = [
    "bar",
    "predictor",
    "p",
    "median_iae",
    "mean_iae",
    "min_iae",
    "max_iae",
    "observed_plr_mean",
    "n_failed",
]
REGION_COLUMNS = ["source", "connected_end_m", "disconnected_start_m"]
CALIBRATION_COLUMNS = ["k", "ti", "td", "n_filter", "iae"]


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path,
        index=False,
        float_format=settings.CSV_FLOAT_FORMAT,
        lineterminator="\n",
    )
    logger.info(f"Wrote {path}")
    return path


def timeseries_frame(result: RunResult) -> pd.DataFrame:
    frame = pd.DataFrame.from_records(result.timeseries, columns=TIMESERIES_COLUMNS)
    frame["lost"] = frame["lost"].astype(int)
    return frame


def sweep_frame(curve: PlrCurve) -> pd.DataFrame:
    records = [
        (d, idx, plr)
        for d, row in zip(curve.distances, curve.plr_samples)
        for idx, plr in enumerate(row)
    ]
    return pd.DataFrame.from_records(records, columns=SWEEP_COLUMNS)


def summary_frame(summary: BatchSummary) -> pd.DataFrame:
    return pd.DataFrame(
        {"seed": summary.seeds, "iae": summary.iae, "observed_plr": summary.observed_plr},
        columns=SUMMARY_COLUMNS,
    )


def compare_frame(rows: Sequence[Tuple[str, str, float, BatchSummary]]) -> pd.DataFrame:
    records = [
        (
            bar,
            predictor,
            p,
            s.median,
            s.mean,
            s.min,
            s.max,
            s.observed_plr_mean,
            s.n_failed,
        )
        for bar, predictor, p, s in rows
    ]
    return pd.DataFrame.from_records(records, columns=COMPARE_COLUMNS)


def regions_frame(table: Dict[str, Tuple[Optional[float], Optional[float]]]) -> pd.DataFrame:
    # pandas writes None as an empty field: the edge is unbounded
    records = [(source, ends[0], ends[1]) for source, ends in table.items()]
    return pd.DataFrame.from_records(records, columns=REGION_COLUMNS)


def calibration_frame(evaluated: List[Tuple[PidParams, Optional[float]]]) -> pd.DataFrame:
    records = [(p.k, p.ti, p.td, p.n_filter, iae) for p, iae in evaluated]
    return pd.DataFrame.from_records(records, columns=CALIBRATION_COLUMNS)


def text_table(frame: pd.DataFrame) -> str:
    return frame.to_string(index=False, float_format=lambda v: f"{v:.6g}") + "\n"


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path


def plot_sweep(csv_path: Path, svg_path: Path, title: str) -> Path:
    """PLR against distance, one dot per measure"""
    data = pd.read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(data["distance_m"], data["plr"], s=6, color="tab:blue")
    ax.set_xlabel("Distance (m)")
    ax.set_ylabel("Packet loss rate")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, svg_path)


def plot_timeseries(csv_path: Path, svg_path: Path, title: str) -> Path:
    data = pd.read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.step(data["t"], data["r"], where="post", label="r", color="tab:gray", linewidth=1)
    ax.plot(data["t"], data["y"], label="y", color="tab:blue", linewidth=1)
    ax.set_xlabel("Time (s)")
    ax.set_ylabel("Output")
    ax.set_title(title)
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    return _save(fig, svg_path)


def plot_compare(csv_path: Path, svg_path: Path, title: str) -> Path:
    """Median IAE per bar"""
    data = pd.read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(data["bar"], data["median_iae"], color="tab:blue")
    ax.bar_label(bars, fmt="%.1f")
    ax.set_ylabel("Accumulated IAE (median)")
    ax.set_title(title)
    return _save(fig, svg_path)
