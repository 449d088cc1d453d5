"""HTTP service exposing the monitoring views and the alert push channel."""

from .app import create_app
from .config import ApiConfig, load_config

__all__ = ["ApiConfig", "create_app", "load_config"]
