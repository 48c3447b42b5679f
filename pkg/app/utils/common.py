"""Utility functions used across the pipeline.
1. get_config: Parse the application configuration.
2. with_overrides: Apply command-line values on top of a loaded configuration.
3. configure_logging: Route log records to stderr at the configured level.
4. error_record: Describe a per-document failure as a JSON-ready dict.
5. ordered_map: Map over documents with a thread pool, yielding results in input order.
"""

import dataclasses
import logging
import os
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Deque, Dict, Iterable, Iterator, Optional, TypeVar

from app.utils import configuration

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

CONFIG_ENV_VAR = "TABLESCOUT_CONFIG"


def get_config(config_file: Optional[str] = None) -> configuration.AppConfig:
    """Parse the application configuration.

    The path comes from `config_file`, else the TABLESCOUT_CONFIG environment variable. Without either,
    defaults (plus TABLESCOUT_* environment overrides) are used.
    """
    config_file = config_file or os.environ.get(CONFIG_ENV_VAR)
    if config_file:
        logger.debug("Loading configuration from %s", config_file)
        return configuration.AppConfig.from_file(config_file)
    return configuration.AppConfig.from_dict({})


def with_overrides(config: Any, **values: Any) -> Any:
    """Return a copy of the (frozen) config section with every non-None value replaced.

    Validation in the section's `__post_init__` runs again, so an invalid flag raises ValueError.
    """
    changes: Dict[str, Any] = {key: val for key, val in values.items() if val is not None}
    if not changes:
        return config
    return dataclasses.replace(config, **changes)


def configure_logging(level: str = "INFO") -> None:
    """Configure the root logger once to write to stderr."""
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level {level!r}")
    logging.basicConfig(
        level=numeric,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def error_record(doc_id: Optional[str], path: Optional[str], err: BaseException) -> Dict[str, Any]:
    """Build the {"doc_id", "path", "error", "type"} record emitted for a failed document."""
    return {
        "doc_id": doc_id,
        "path": path,
        "error": str(err),
        "type": type(err).__name__,
    }


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> Iterator[R]:
    """Apply `fn` to every item, `jobs` at a time, yielding results in input order.

    At most 2 x jobs items are in flight, so lazily produced inputs are not read ahead unboundedly.
    """
    if jobs <= 1:
        for item in items:
            yield fn(item)
        return
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        pending: Deque[Any] = deque()
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= 2 * jobs:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
