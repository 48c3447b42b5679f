"""JSON Lines helpers shared by every interchange format.

Readers yield `(line_number, payload)` pairs with 1-based line numbers so that schema failures can name the
offending line; writers emit one compact JSON object per line with floats in their shortest round-trip form.
"""

import json
import logging
from typing import Any, Dict, IO, Iterable, Iterator, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from app.domain.exceptions import SchemaError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def iter_jsonl(stream: IO[str]) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Yield every non-blank line of `stream` parsed as a JSON object."""
    for line_number, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as err:
            raise SchemaError(line_number, f"invalid JSON: {err.msg}") from err
        if not isinstance(payload, dict):
            raise SchemaError(line_number, f"expected a JSON object, got {type(payload).__name__}")
        yield line_number, payload


def require_fields(payload: Dict[str, Any], fields: Iterable[str], line_number: int) -> None:
    missing = [name for name in fields if name not in payload]
    if missing:
        raise SchemaError(line_number, f"missing field(s) {', '.join(repr(m) for m in missing)}")


def validate_record(model: Type[ModelT], payload: Dict[str, Any], line_number: int) -> ModelT:
    """Validate `payload` against a pydantic model, turning validation failures into SchemaError."""
    try:
        return model.model_validate(payload)  # Pydantic v2
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise SchemaError(line_number, f"{where or model.__name__}: {first.get('msg')}") from e


def dumps_record(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, ensure_ascii=False, allow_nan=False, separators=(", ", ": "))


def write_jsonl(records: Iterable[Dict[str, Any]], stream: IO[str]) -> int:
    """Write one JSON object per line; return the number of records written."""
    count = 0
    for payload in records:
        stream.write(dumps_record(payload))
        stream.write("\n")
        count += 1
    return count


def load_json_file(path: str) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as err:
            raise SchemaError(err.lineno, f"invalid JSON in {path}: {err.msg}") from err
    if not isinstance(payload, dict):
        raise SchemaError(1, f"{path}: expected a JSON object")
    return payload


def dump_json_file(payload: Dict[str, Any], path: str, indent: Optional[int] = 2) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, allow_nan=False, indent=indent)
        fh.write("\n")
