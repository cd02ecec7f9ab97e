"""
fcaf-lab - Entry Point
Fuzzy classification aggregation over a continuum: worked example, axiom suites, measure extraction.
"""
import logging
import sys

from fcaf.cli import main
from fcaf.config import configure_logging, load_settings

logger = logging.getLogger(__name__)


if __name__ == "__main__":
    settings = load_settings()
    configure_logging(settings)
    try:
        sys.exit(main(settings=settings))
    except KeyboardInterrupt:
        logger.info("Application terminated by user")
        sys.exit(130)
