"""
Settings module for EulerPose.

Optional defaults are read from the environment (and a local .env file); command
line flags always take precedence.
"""

import os
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

AngleUnit = Literal["deg", "rad"]


class Settings(BaseModel):
    """Process-wide defaults for the command-line front end."""
    log_level: str = Field("WARNING", description="Root log level for the CLI")
    report_unit: AngleUnit = Field("deg", description="Angle unit used when rendering reports")
    progress: bool = Field(True, description="Show a progress bar while training")

    @field_validator("log_level")
    @classmethod
    def _upper(cls, value: str) -> str:
        return value.upper()


def load_settings(env_file: str | None = None) -> Settings:
    """
    Build Settings from EULERPOSE_* environment variables.

    Args:
        env_file (str, optional): Explicit .env file to load. If None, the
            nearest .env file is used when present.

    Returns:
        Settings: The resolved settings.
    """
    load_dotenv(env_file)
    return Settings(
        log_level=os.environ.get("EULERPOSE_LOG_LEVEL", "WARNING"),
        report_unit=os.environ.get("EULERPOSE_REPORT_UNIT", "deg"),
        progress=os.environ.get("EULERPOSE_PROGRESS", "1") not in ("0", "false", "no"),
    )
