# Package dissipa
from .config import config
from .exceptions import DissipaError

__version__ = "1.0.0"

__all__ = ["config", "DissipaError", "__version__"]
