"""Deformable multibody inertia prediction and convex force MPC."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401
