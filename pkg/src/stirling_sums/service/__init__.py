from . import api, models

__all__ = ["api", "models"]
