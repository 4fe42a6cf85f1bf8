"""Weakly semi-supervised video object detection on a toy grid detector.

Thin re-export of the compiled core: detector forward/decode, losses,
EMA schedules, pseudo-label generation, synthetic data, and the two-stage
training loops.
"""

from wsvod._core import *  # noqa: F401,F403
from wsvod._core import __doc__ as _core_doc  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
