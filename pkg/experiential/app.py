import logging

import click

from .commands import register_commands
from .config import Config


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def create_app() -> click.Group:
    """Create the command-line application"""

    @click.group()
    @click.option("--log-level", default=None, help="Overrides LOG_LEVEL")
    def app(log_level):
        """Interpretable experiential learning on a brick-breaking game"""
        configure_logging(log_level or Config.LOG_LEVEL)

    register_commands(app)
    return app


def main() -> None:
    create_app()()
