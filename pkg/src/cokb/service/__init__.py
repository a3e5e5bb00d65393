"""HTTP API over the engine (FastAPI + pydantic models)."""

from .app import create_app

__all__ = ["create_app"]
