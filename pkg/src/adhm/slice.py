"""Alias of :mod:`adhm.slice_forms` under its short name."""
from .slice_forms import *  # noqa: F401,F403
