"""Excursion laws of stochastic fluid queues fed by local-time processes.

Thin wrapper over the C++ core: Levy models, scale functions, busy/idle/maximum
laws, and the Monte Carlo excursion simulator.
"""

from ._fluidq import *  # noqa: F401,F403
from ._fluidq import __version__  # noqa: F401
