"""Configuration module."""

from .settings import KEYS, Settings, configure_settings, get_settings, parse_config_text

__all__ = ["KEYS", "Settings", "configure_settings", "get_settings", "parse_config_text"]
