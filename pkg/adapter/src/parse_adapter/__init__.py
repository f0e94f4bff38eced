"""Convert raw policy text or HTML into the annotated format tplcheck reads."""

from .config import AdapterConfig, BackendMissing, EncodingError
from .core import adapt

__all__ = ["AdapterConfig", "BackendMissing", "EncodingError", "adapt"]
