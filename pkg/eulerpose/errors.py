"""
Errors module for EulerPose.

Every failure raised by the package derives from EulerPoseError so the CLI can
report it as a one-line diagnostic.
"""

from typing import Optional


class EulerPoseError(Exception):
    """Base class for all EulerPose errors."""


class DomainError(EulerPoseError, ValueError):
    """A value lies outside the domain of an operation (non-finite angle, empty list)."""


class InvalidRotationError(EulerPoseError, ValueError):
    """A matrix is not a proper rotation within tolerance."""


class DatasetError(EulerPoseError, ValueError):
    """A dataset is missing, empty or internally inconsistent."""


class ConfigError(EulerPoseError, ValueError):
    """A training or command configuration cannot be honoured."""


class PoseParseError(EulerPoseError, ValueError):
    """
    Malformed pose file content.

    Args:
        message (str): What is wrong with the content.
        line_number (int, optional): 1-based line the problem was found on.
        source (str, optional): File the content came from.
    """

    def __init__(self, message: str, line_number: Optional[int] = None, source: Optional[str] = None):
        self.message = message
        self.line_number = line_number
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        where = []
        if self.source:
            where.append(str(self.source))
        if self.line_number is not None:
            where.append(f"line {self.line_number}")
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message
