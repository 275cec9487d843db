"""Collects the warnings and skips that pipeline stages report instead of raising."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List

logger = logging.getLogger("sesh")


@dataclass
class Diagnostics:
    warnings: List[str] = field(default_factory=list)
    skipped: Dict[str, str] = field(default_factory=dict)
    counts: Counter = field(default_factory=Counter)

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)

    def skip(self, key: str, reason: str) -> None:
        logger.warning("skipping %s: %s", key, reason)
        self.skipped[key] = reason
