"""Application configuration"""
import os
from typing import Optional

from dotenv import load_dotenv

from toposforge.core.errors import ConfigError

load_dotenv()


def _optional_int(name: str) -> Optional[int]:
    raw = os.getenv(name, "").strip()
    return int(raw) if raw else None


class Settings:
    """Application settings"""

    # Corpus
    SEED: int = int(os.getenv("TOPOSFORGE_SEED", "20171"))
    MAX_POINTS: int = int(os.getenv("TOPOSFORGE_MAX_POINTS", "6"))
    MAX_DEPTH: int = int(os.getenv("TOPOSFORGE_MAX_DEPTH", "4"))
    CORPUS_SIZE: int = int(os.getenv("TOPOSFORGE_CORPUS_SIZE", "20"))
    MAX_RING_SIZE: int = int(os.getenv("TOPOSFORGE_MAX_RING_SIZE", "64"))

    # Formulas
    SCHEMA_BOUND: Optional[int] = _optional_int("TOPOSFORGE_SCHEMA_BOUND")

    # Output
    OUTPUT_FORMAT: str = os.getenv("TOPOSFORGE_OUTPUT_FORMAT", "text")
    LOG_LEVEL: str = os.getenv("TOPOSFORGE_LOG_LEVEL", "WARNING")

    # API
    API_TITLE: str = "toposforge"
    API_VERSION: str = "0.1.0"
    API_DESCRIPTION: str = "Forcing evaluator for sheaves on finite spaces and spectra of finite rings"
    CORS_ORIGINS: list[str] = [o.strip() for o in os.getenv("TOPOSFORGE_CORS_ORIGINS", "*").split(",") if o.strip()]

    def validate(self) -> None:
        """Validate settings"""
        if not 1 <= self.MAX_POINTS <= 8:
            raise ConfigError("TOPOSFORGE_MAX_POINTS must be between 1 and 8")
        if not 0 <= self.MAX_DEPTH <= 6:
            raise ConfigError("TOPOSFORGE_MAX_DEPTH must be between 0 and 6")
        if self.CORPUS_SIZE < 1:
            raise ConfigError("TOPOSFORGE_CORPUS_SIZE must be positive")
        if self.MAX_RING_SIZE < 1:
            raise ConfigError("TOPOSFORGE_MAX_RING_SIZE must be positive")
        if self.SCHEMA_BOUND is not None and self.SCHEMA_BOUND < 0:
            raise ConfigError("TOPOSFORGE_SCHEMA_BOUND must be non-negative")
        if self.OUTPUT_FORMAT not in ("text", "json"):
            raise ConfigError("TOPOSFORGE_OUTPUT_FORMAT must be 'text' or 'json'")


settings = Settings()
