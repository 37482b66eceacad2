"""Validation helpers shared by configuration loading and the commands."""

import json
from typing import Any, Dict, List, Optional, Sequence, Type, TypeVar

from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from app.utils.errors import ConfigError, InvalidDataError, NotFoundError

M = TypeVar("M", bound=BaseModel)


def validate_model(
    data: Dict[str, Any], model_class: Type[M], message: str = "Invalid configuration"
) -> M:
    """
    Validate a dict against a pydantic model.

    Args:
        data: Raw values
        model_class: Model to build
        message: Error message on failure

    Returns:
        Model instance

    Raises:
        ConfigError: With the pydantic error list in ``details["errors"]``

    Examples:
        >>> from app.utils.config import SeedConfig
        >>> validate_model({"fleet": 7}, SeedConfig).fleet
        7
    """
    try:
        return model_class(**data)
    except PydanticValidationError as e:
        raise ConfigError(message, details={"errors": json.loads(e.json(include_url=False))})


def validate_unique_ids(ids: Sequence[str]) -> List[str]:
    """
    Raises:
        InvalidDataError: If an id occurs more than once
    """
    seen, duplicates = set(), []
    for i in ids:
        if i in seen and i not in duplicates:
            duplicates.append(i)
        seen.add(i)
    if duplicates:
        raise InvalidDataError("Plant ids must be unique", details={"duplicates": duplicates})
    return list(ids)


def validate_plant_ids(
    requested: Optional[Sequence[str]], available: Sequence[str]
) -> List[str]:
    """
    Resolve a plant selection against the known plants.

    ``None`` or an empty selection means all plants, in their known order.

    Raises:
        NotFoundError: If a requested plant is unknown
    """
    if not requested:
        return list(available)
    for plant_id in requested:
        if plant_id not in available:
            raise NotFoundError("Plant", plant_id)
    return list(requested)
