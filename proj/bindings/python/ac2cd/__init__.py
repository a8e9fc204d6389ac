from ._ac2cd import *  # noqa: F401,F403
from ._ac2cd import __doc__, __version__  # noqa: F401
