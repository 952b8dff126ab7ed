"""
Runtime configuration for enumkit.

Values come from the environment; CLI flags override them.
"""

import os
from pathlib import Path

from pydantic import BaseModel, ConfigDict, field_validator

DEFAULT_APEX = "e164.arpa"
DEFAULT_TTL = 3600
DEFAULT_QUARANTINE_DAYS = 30
DEFAULT_ACCESS_CODES = ("911", "411", "711")


class Settings(BaseModel):
    """Process-wide settings."""

    model_config = ConfigDict(frozen=True)

    state_dir: Path = Path("enumkit-state")
    apex: str = DEFAULT_APEX
    dialing_context: str = ""
    access_codes: tuple[str, ...] = DEFAULT_ACCESS_CODES
    default_ttl: int = DEFAULT_TTL
    quarantine_days: int = DEFAULT_QUARANTINE_DAYS
    log_level: str = "WARNING"

    @field_validator("dialing_context")
    @classmethod
    def _context_is_digits(cls, value: str) -> str:
        if value and not (value.isascii() and value.isdigit()):
            raise ValueError("dialing context must be decimal digits")
        return value

    @classmethod
    def from_env(cls) -> "Settings":
        codes = os.getenv("ENUMKIT_ACCESS_CODES")
        return cls(
            state_dir=Path(os.getenv("ENUMKIT_STATE", "enumkit-state")),
            apex=os.getenv("ENUMKIT_APEX", DEFAULT_APEX),
            dialing_context=os.getenv("ENUMKIT_DIALING_CONTEXT", ""),
            access_codes=(
                tuple(c.strip() for c in codes.split(",") if c.strip())
                if codes is not None
                else DEFAULT_ACCESS_CODES
            ),
            default_ttl=int(os.getenv("ENUMKIT_DEFAULT_TTL", str(DEFAULT_TTL))),
            quarantine_days=int(
                os.getenv("ENUMKIT_QUARANTINE_DAYS", str(DEFAULT_QUARANTINE_DAYS))
            ),
            log_level=os.getenv("ENUMKIT_LOG_LEVEL", "WARNING"),
        )
