"""Three-level self-organizing-map network with injectable pathologies.

Subpackages:
  core      single-map competitive-learning kernel
  stimuli   input-pattern construction for all levels
  network   staged development of the full network
  analysis  encoder/cluster readout and categorical states
  harness   experiment runner, reports, renderings
"""

from .backend import active_backend

__version__ = "0.1.0"

__all__ = ["active_backend", "__version__"]
