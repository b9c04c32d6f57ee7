"""Checked-in JSON schemas for configuration, scripts and command outputs."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath(f"schemas/{name}.json").read_text())


def validate(name: str, obj) -> None:
    """Raise ``jsonschema.ValidationError`` unless ``obj`` matches schema ``name``."""
    jsonschema.validate(obj, schema(name))
