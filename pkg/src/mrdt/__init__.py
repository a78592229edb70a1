"""Mergeable replicated datatypes with executable correctness checks.

Submodules: ``core`` (datatype interface), ``datatypes`` (catalog),
``store`` (replicated version graph), ``lincheck`` (linearizability and
merge-partition checks), ``vcsuite`` (verification conditions as property
tests), ``fuzz`` and ``trace`` (execution fuzzing, replay, shrinking) and
``cli``.
"""

from importlib import resources

from .core import Event, MrdtSpec, apply_event, apply_sequence, canon
from .datatypes import CATALOG, catalog_lookup

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path of a shipped trace fixture such as ``"fig12"``."""
    return resources.files(__name__).joinpath("fixtures", f"{name}.trace")


__all__ = ["CATALOG", "Event", "MrdtSpec", "apply_event", "apply_sequence", "canon", "catalog_lookup",
           "fixture_path"]
