import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

from jsonschema import ValidationError, validate

from src.utils.logging import logger
from src.validation.error_handler import ConfigurationError, SchemaValidationError

# config/validation_rules/<name>_schema.json
SCHEMA_DIR = Path(__file__).resolve().parent.parent.parent / "config" / "validation_rules"
SCHEMA_NAMES = ("operator", "function", "region")


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    """Load a JSON Schema from the validation rules directory."""
    if name not in SCHEMA_NAMES:
        raise ConfigurationError("Unknown schema", name)
    schema_path = SCHEMA_DIR / f"{name}_schema.json"
    try:
        with open(schema_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (FileNotFoundError, json.JSONDecodeError, IOError) as e:
        logger.error(f"Cannot load schema file {schema_path}: {e}")
        raise ConfigurationError(f"Cannot load schema file {schema_path}", str(e)) from e


def validate_document(instance: Any, name: str, prefix: str = "") -> None:
    """
    Validate a decoded JSON document against the named schema.

    Raises:
        SchemaValidationError: naming the path of the offending field
    """
    try:
        validate(instance=instance, schema=load_schema(name))
    except ValidationError as e:
        path = '/'.join(map(str, list(e.path)))
        if prefix:
            path = f"{prefix}/{path}" if path else prefix
        logger.warning(f"{name} document rejected at '{path}': {e.message}")
        raise SchemaValidationError(f"Invalid {name} document: {e.message}", path) from e
