"""2-D chemotaxis-Stokes finite-difference simulator and verification harness."""

from chemostokes._core import *  # noqa: F401,F403
from chemostokes._core import __doc__  # noqa: F401
