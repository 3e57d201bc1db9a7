"""Reference vision-language provider speaking the emoship wire protocol."""

from .backend import Backend, load_backend

__all__ = ["Backend", "load_backend"]
__version__ = "0.1.0"
