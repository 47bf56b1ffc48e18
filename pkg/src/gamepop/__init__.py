"""Population-based solving of two-player zero-sum games.

Grows per-player policy populations by iterated best-response training
against meta-strategy mixtures, with policy initialization by
meta-strategy-weighted parameter fusion of the historical population.
"""

__version__ = "0.1.0"

from .engine import PsroConfig, RunHistory, run_psro  # noqa: F401
from .games import make_game  # noqa: F401
