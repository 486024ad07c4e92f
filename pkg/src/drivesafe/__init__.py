"""drivesafe: a desk-scale driver-context mining and mood-repair simulator.

Simulated sensor layers feed an edge node that fuses driver context,
mines association rules over it and plans content sequences that steer
the driver's affective state back toward positive valence, all over an
asynchronous layered message fabric.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from ._kernels import HAVE_COMPILED

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "HAVE_COMPILED", "__version__"]
