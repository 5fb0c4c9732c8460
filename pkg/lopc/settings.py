"""
Environment-driven configuration.

Provides:
- get_log_level: logging level for the CLI
- get_max_joint_outcomes: engine enumeration limit
- get_catalyst_bounds: default catalyst search bounds
- get_default_seed: seed for sampled demos
"""

import os
from typing import Tuple

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def get_log_level() -> str:
    """
    Get the logging level name from environment variables.

    Returns:
        str: Level name such as "INFO" or "DEBUG".
    """
    return os.getenv("LOPC_LOG_LEVEL", "INFO").upper()


def get_max_joint_outcomes() -> int:
    """
    Get the largest number of joint outcomes the engine will enumerate.

    Returns:
        int: Outcome limit (default 262144).
    """
    return int(os.getenv("LOPC_MAX_JOINT_OUTCOMES", "262144"))


def get_catalyst_bounds() -> Tuple[int, int]:
    """
    Get the default (max_dim, denom_bound) for catalyst search.

    Returns:
        Tuple[int, int]: Search bounds.
    """
    max_dim = int(os.getenv("LOPC_CATALYST_MAX_DIM", "3"))
    denom_bound = int(os.getenv("LOPC_CATALYST_DENOM_BOUND", "10"))
    return max_dim, denom_bound


def get_default_seed() -> int:
    """
    Get the seed used by sampled demos when none is given on the command line.

    Returns:
        int: Seed value.
    """
    return int(os.getenv("LOPC_DEFAULT_SEED", "0"))
