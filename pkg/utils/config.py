# utils/config.py

import os
import logging
from dotenv import load_dotenv
from typing import Dict, Any, Optional

import yaml

# Initialize logger
logger = logging.getLogger(__name__)


def _env_float(name: str, default: str) -> float:
    return float(os.getenv(name, default))


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


def _env_optional_float(name: str) -> Optional[float]:
    value = os.getenv(name)
    if value is None or value.strip() == "" or value.lower() == "auto":
        return None
    return float(value)


class Config:
    """Centralized configuration for the singular-flux toolkit"""

    def __init__(self):
        self.config_file: Optional[str] = None
        self._load_config()

    def _load_config(self):
        """Load configuration: .env, then environment, then optional YAML overrides"""
        load_dotenv()
        self._load_app_config()
        self._load_yaml_overrides()
        self._log_config_status()

    def _load_app_config(self):
        """Load numeric knobs and feature flags"""
        self.app_config = {
            # Measure tolerances
            "EPS_MASS": _env_float("EPS_MASS", "1e-9"),
            "EPS_LOC": _env_optional_float("EPS_LOC"),
            "EPS_FLAT": _env_float("EPS_FLAT", "1e-6"),

            # Weak form / LP
            "BASIS_GRID": int(os.getenv("BASIS_GRID", "16")),
            "CE_TOL": _env_float("CE_TOL", "1e-3"),
            "EPS_CON": _env_float("EPS_CON", "1e-8"),
            "QUAD_NODES": int(os.getenv("QUAD_NODES", "4")),

            # Augmented lift
            "MOLLIFY_EPS": _env_float("MOLLIFY_EPS", "0.05"),
            "GRID_STEP": _env_float("GRID_STEP", "0.01"),
            "ODE_STEP": _env_float("ODE_STEP", "1e-3"),
            "S_MAX": _env_float("S_MAX", "4.0"),
            "N_STARTS": int(os.getenv("N_STARTS", "400")),

            # Ensembles
            "N_CURVES": int(os.getenv("N_CURVES", "200")),
            "SEED": int(os.getenv("SEED", "42")),

            # Output
            "REPORT_DIR": os.getenv("REPORT_DIR", "reports"),
            "LOG_LEVEL": os.getenv("LOG_LEVEL", "INFO").upper(),

            # Features
            "ENABLE_EXCEL_EXPORT": _env_bool("ENABLE_EXCEL_EXPORT", "true"),
        }

    def _load_yaml_overrides(self):
        """Override settings from the YAML file named by FLUX_CONFIG_FILE, if any"""
        path = os.getenv("FLUX_CONFIG_FILE")
        if not path:
            return
        if not os.path.exists(path):
            logger.warning(f"Config file {path} not found, using environment values")
            return
        try:
            with open(path, "r") as f:
                overrides = yaml.safe_load(f) or {}
        except Exception as e:
            logger.warning(f"Could not load config file {path}: {e}")
            return
        if not isinstance(overrides, dict):
            logger.warning(f"Config file {path} is not a mapping, ignored")
            return
        for key, value in overrides.items():
            key = str(key).upper()
            if key not in self.app_config:
                logger.warning(f"Unknown setting {key} in {path}, ignored")
                continue
            self.app_config[key] = value
        self.config_file = path

    def _log_config_status(self):
        """Log configuration status for debugging"""
        source = self.config_file or "environment"
        logger.debug(f"✅ Settings source: {source}")
        logger.debug(
            f"✅ Basis grid: {self.app_config['BASIS_GRID']}, "
            f"eps: {self.app_config['MOLLIFY_EPS']}, ds: {self.app_config['ODE_STEP']}"
        )

    def get_app_setting(self, key: str, default: Any = None) -> Any:
        """Get application setting"""
        value = self.app_config.get(key, default)
        return default if value is None else value

    def is_feature_enabled(self, feature: str) -> bool:
        """Check if a feature is enabled"""
        return bool(self.app_config.get(f"ENABLE_{feature.upper()}", True))

    def as_dict(self) -> Dict[str, Any]:
        return dict(self.app_config)


# Create singleton instance
config = Config()

APP_CONFIG = config.app_config


# Export all
__all__ = [
    'config',
    'Config',
    'APP_CONFIG',
]
