"""Dynamical renormalization of a two-level system coupled to a bosonic bath."""

__version__ = "0.1.0"

from .bath import *  # noqa: E402,F401,F403
from .dynamics import *  # noqa: E402,F401,F403
from .errors import *  # noqa: E402,F401,F403
from .flow import *  # noqa: E402,F401,F403
from .oracle import *  # noqa: E402,F401,F403
from .reference import *  # noqa: E402,F401,F403
from .se_exact import *  # noqa: E402,F401,F403
