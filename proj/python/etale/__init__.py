from ._etale import *  # noqa: F401,F403
from ._etale import __doc__  # noqa: F401
