"""HTTP service wrapping the auction library."""

from .app import app, create_app

__all__ = ["app", "create_app"]
