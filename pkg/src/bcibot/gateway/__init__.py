"""Network service and CLI exposing the simulated assistant."""

from .server import create_app

__all__ = ["create_app"]
