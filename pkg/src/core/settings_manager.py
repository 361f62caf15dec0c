import json
import os
from pathlib import Path

from utils.logger import logger


def _default_threads():
    raw = os.environ.get("SAPERS_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring SAPERS_THREADS={raw!r}: not an integer")
    return 1


class SettingsManager:
    _instance = None

    DEFAULT_SETTINGS = {
        "field": "gf2",
        "ell": 0,
        "threads": 1,
        "seed": 0,
        "samples": 20,
        "plot_grid": 21,
        "caps": {
            "max_fiber_dim": 2,
            "max_params": 2,
            "max_ell": 1,
            "max_exact_pn": 4,
            "max_search_dim": 8,
            "search_budget": 200000,
            "max_shear_retries": 6,
            "shear_bound": 1,
        },
    }

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(SettingsManager, cls).__new__(cls)
            cls._instance.initialized = False
        return cls._instance

    def __init__(self):
        if self.initialized:
            return

        self.settings = default_settings()

        # Determine config path: ~/.sapers/config.json
        self.config_dir = Path.home() / ".sapers"
        self.config_file = self.config_dir / "config.json"

        self.load_settings()
        self.initialized = True

    def load_settings(self):
        """Load settings from the JSON file. If file doesn't exist or is corrupt, use defaults."""
        if not self.config_file.exists():
            return

        try:
            with open(self.config_file, 'r') as f:
                merge_settings(self.settings, json.load(f))
        except (json.JSONDecodeError, OSError) as e:
            logger.warning(f"Error loading settings from {self.config_file}: {e}. Using defaults.")

    def get(self, key, default=None):
        """Get a setting value."""
        return self.settings.get(key, default)

    def get_all(self):
        """Return a copy of all settings."""
        return json.loads(json.dumps(self.settings))


def default_settings():
    """A fresh copy of the defaults, with the thread count taken from SAPERS_THREADS when set."""
    settings = json.loads(json.dumps(SettingsManager.DEFAULT_SETTINGS))
    settings["threads"] = _default_threads()
    return settings


def merge_settings(settings, overrides):
    """Shallow update, except ``caps`` which is merged key by key. Unknown caps are ignored with a warning."""
    for key, value in (overrides or {}).items():
        if key == "caps":
            for cap, limit in (value or {}).items():
                if cap not in SettingsManager.DEFAULT_SETTINGS["caps"]:
                    logger.warning(f"Ignoring unknown cap {cap!r}")
                    continue
                settings["caps"][cap] = limit
        else:
            settings[key] = value
    return settings


def build_settings(args, config, manifest=None):
    """Assemble the run settings.

    Precedence, lowest to highest: ``DEFAULT_SETTINGS`` < config file <
    manifest (``caps`` overrides plus ``field``/``ell``) < explicit CLI
    arguments. ``args`` is the parsed ``argparse.Namespace``; flags left at
    ``None`` do not override anything.
    """
    settings = default_settings()
    merge_settings(settings, config)

    if manifest is not None:
        merge_settings(settings, {"caps": manifest.caps})
        if manifest.field is not None:
            settings["field"] = manifest.field
        if manifest.ell is not None:
            settings["ell"] = manifest.ell

    cli_overrides = {
        'field': getattr(args, 'field', None),
        'ell': getattr(args, 'ell', None),
        'threads': getattr(args, 'threads', None),
        'seed': getattr(args, 'seed', None),
        'samples': getattr(args, 'samples', None),
        'plot_grid': getattr(args, 'grid', None),
    }
    for key, value in cli_overrides.items():
        if value is not None:
            settings[key] = value

    settings['threads'] = max(1, int(settings['threads']))
    return settings
