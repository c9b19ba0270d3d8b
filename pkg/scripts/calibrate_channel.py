#!/usr/bin/env python3
"""
Channel Calibration Script
==========================
Grid-searches the log-normal shadowing parameters so the analytic region
boundaries land where the default channel is tuned to put them, and prints
the [path_loss] section to paste into a config file.
"""

import os
import sys
import logging

# Add the simulator directory to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'simulator'))

from app.core.logging import configure_logging
from app.schemas.channel import RadioProfile, RegionSettings
from app.services.channel import CALIBRATION_TARGETS, calibrate_channel, region_table
from app.services.config_loader import render_section

logger = logging.getLogger(__name__)


def _meters(value):
    return "n/a" if value is None else f"{value:.2f} m"


def main() -> int:
    configure_logging()
    logger.info(f"Calibrating channel against {CALIBRATION_TARGETS}")

    region_settings = RegionSettings()
    model, score = calibrate_channel(RadioProfile(), region_settings)

    for tx_power in (0.0, -10.0):
        table = region_table(RadioProfile(tx_power=tx_power), model, region_settings)
        connected_end, disconnected_start = table["analytic"]
        logger.info(
            f"{tx_power:g} dBm: connected up to {_meters(connected_end)}, "
            f"disconnected from {_meters(disconnected_start)}"
        )

    print(
        render_section(
            "path_loss",
            model.model_dump(),
            comment=f"channel calibration, total boundary error {score:.3f} m",
        ),
        end="",
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
