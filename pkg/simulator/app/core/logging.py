import logging
from typing import Optional

from app.core.config import settings


def configure_logging(level: Optional[str] = None) -> None:
    """Install one stream handler on the root logger"""
    resolved = (level or settings.LOG_LEVEL).upper()
    logging.basicConfig(level=resolved, format=settings.LOG_FORMAT, force=True)
    # matplotlib is chatty at DEBUG about font discovery
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
