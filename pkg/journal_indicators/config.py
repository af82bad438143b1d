"""
Configuration and settings management for journal indicators.
"""

import copy
import json
import logging
from importlib import resources
from pathlib import Path

from .errors import SettingsError

logger = logging.getLogger(__name__)

SECTIONS = ("estimation", "simulation", "output")


def _bundled_defaults():
    """Read the settings.json shipped inside the package."""
    text = resources.files(__package__).joinpath("settings.json").read_text(encoding="utf-8")
    return json.loads(text)


class SettingsManager:
    """Manages loading and validation of indicator configuration."""

    def __init__(self, settings_path=None):
        self.settings_path = Path(settings_path) if settings_path else None

        # Configuration sections
        self.estimation = {}
        self.simulation = {}
        self.output = {}

        self.load_settings()
        self.validate_settings()

    def load_settings(self):
        """Load bundled defaults, then overlay the user file if one was given."""
        settings = _bundled_defaults()

        if self.settings_path is not None:
            try:
                with open(self.settings_path, "r", encoding="utf-8") as f:
                    user = json.load(f)
            except FileNotFoundError:
                logger.error(f"Settings file not found: {self.settings_path}")
                raise SettingsError(f"settings file not found: {self.settings_path}")
            except json.JSONDecodeError as e:
                logger.error(f"Error parsing settings file: {e}")
                raise SettingsError(f"cannot parse {self.settings_path}: {e}")

            if not isinstance(user, dict):
                raise SettingsError(f"{self.settings_path}: top level must be an object")

            for section, values in user.items():
                if section not in SECTIONS:
                    raise SettingsError(f"{self.settings_path}: unknown section '{section}'")
                if not isinstance(values, dict):
                    raise SettingsError(f"{self.settings_path}: section '{section}' must be an object")
                for key in values:
                    if key not in settings[section]:
                        raise SettingsError(f"{self.settings_path}: unknown key '{section}.{key}'")
                settings[section].update(values)
            logger.info(f"Settings loaded from {self.settings_path}")
        else:
            logger.debug("Using bundled default settings")

        self.estimation = settings["estimation"]
        self.simulation = settings["simulation"]
        self.output = settings["output"]

    def validate_settings(self):
        """Validate value ranges for every section."""
        est = self.estimation
        if not 0.5 < est["threshold"] < 1.0:
            raise SettingsError(f"estimation.threshold must be in (0.5, 1), got {est['threshold']}")
        for key in ("kappa_cap", "max_iterations", "default_k"):
            self._require_positive_int("estimation", key)
        for key in ("root_xtol", "root_residual"):
            if not est[key] > 0:
                raise SettingsError(f"estimation.{key} must be positive, got {est[key]}")
        if est["moment_source"] not in ("measured", "derived"):
            raise SettingsError(f"estimation.moment_source must be 'measured' or 'derived', got {est['moment_source']!r}")

        sim = self.simulation
        for key in ("n_samples", "trials", "kappa_max", "empirical_kappa_cap", "workers"):
            self._require_positive_int("simulation", key)
        if min(sim["tolerance"], sim["kappa_tolerance"], sim["h_tolerance"]) < 0:
            raise SettingsError("simulation tolerances must be non-negative")
        if not isinstance(sim["discretize"], bool):
            raise SettingsError("simulation.discretize must be true or false")

        out = self.output
        if out["format"] not in ("csv", "json"):
            raise SettingsError(f"output.format must be 'csv' or 'json', got {out['format']!r}")
        if not (isinstance(out["precision"], int) and 1 <= out["precision"] <= 17):
            raise SettingsError(f"output.precision must be an integer in [1, 17], got {out['precision']}")

    def _require_positive_int(self, section, key):
        value = getattr(self, section)[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise SettingsError(f"{section}.{key} must be a positive integer, got {value!r}")

    def as_dict(self):
        """Deep copy of the effective settings."""
        return copy.deepcopy({name: getattr(self, name) for name in SECTIONS})

    @property
    def threshold(self):
        return self.estimation["threshold"]

    @property
    def kappa_cap(self):
        return self.estimation["kappa_cap"]

    @property
    def root_xtol(self):
        return self.estimation["root_xtol"]

    @property
    def root_residual(self):
        return self.estimation["root_residual"]

    @property
    def max_iterations(self):
        return self.estimation["max_iterations"]

    @property
    def default_k(self):
        return self.estimation["default_k"]

    @property
    def moment_source(self):
        return self.estimation["moment_source"]

    @property
    def precision(self):
        return self.output["precision"]

    @property
    def output_format(self):
        return self.output["format"]
