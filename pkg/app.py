# app.py
"""
Singular Flux Toolkit
Main entry point for the verification pipelines
"""

import logging
import sys

from utils.config import config
from utils.singular_flux.cli import run

# Configure logging
logging.basicConfig(
    level=getattr(logging, config.get_app_setting("LOG_LEVEL", "INFO"), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main():
    """Run one pipeline from the command line and exit with its status"""
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
