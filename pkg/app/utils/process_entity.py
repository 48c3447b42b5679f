"""Named entity tagging with the extended class set: PERSON, LOCATION, ORGANIZATION, NUMBER, TIME.

NUMBER and TIME are pattern based; PERSON, LOCATION and ORGANIZATION come from capitalization plus the bundled
gazetteers (multi-word entries are matched greedily, longest first).
"""

import logging
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from app.domain.common import CLOCK_RE, MONTH_RE, NE_NONE, NUMBER_RE, YEAR_RE
from app.utils.process_text import normalize_token, read_wordlist, resolve_data_dir

logger = logging.getLogger(__name__)

# gazetteer file -> tag; earlier files win when an entry appears in several
GAZETTEERS = (
    ("organization.txt", "ORGANIZATION"),
    ("location.txt", "LOCATION"),
    ("person.txt", "PERSON"),
)
ORG_SUFFIXES = frozenset(
    {"inc", "corp", "corporation", "ltd", "llc", "co", "university", "institute", "laboratory", "labs",
     "association", "society", "foundation", "consortium"}
)


def _is_capitalized(core: str) -> bool:
    return bool(core) and core[0].isupper()


def pattern_tag(core: str) -> Optional[str]:
    """TIME or NUMBER from the token shape alone."""
    if CLOCK_RE.match(core) or YEAR_RE.match(core) or MONTH_RE.match(core):
        return "TIME"
    if NUMBER_RE.match(core):
        return "NUMBER"
    return None


class EntityRecognizer:
    """Pattern and gazetteer based recognizer."""

    def __init__(self, gazetteer_dir: Optional[str] = None):
        directory = resolve_data_dir(gazetteer_dir, "gazetteers")
        self.entries: Dict[Tuple[str, ...], str] = {}
        for filename, tag in GAZETTEERS:
            for name in read_wordlist(directory, filename):
                self.entries.setdefault(tuple(part.lower() for part in name.split()), tag)
        self.max_len = max((len(k) for k in self.entries), default=1)
        logger.debug("Loaded %d gazetteer entries from %s", len(self.entries), directory)

    def _match(self, cores: List[str], start: int) -> Tuple[int, Optional[str]]:
        """Longest gazetteer entry starting at `start` whose tokens are all capitalized."""
        for length in range(min(self.max_len, len(cores) - start), 0, -1):
            span = cores[start:start + length]
            if not all(_is_capitalized(c) for c in span):
                continue
            tag = self.entries.get(tuple(c.lower() for c in span))
            if tag is not None:
                return length, tag
        return 0, None

    def tag(self, tokens: List[str]) -> List[str]:
        cores = [normalize_token(t) for t in tokens]
        tags = [NE_NONE] * len(tokens)
        i = 0
        while i < len(cores):
            shaped = pattern_tag(cores[i]) if cores[i] else None
            if shaped is not None:
                tags[i] = shaped
                i += 1
                continue
            length, tag = self._match(cores, i)
            if tag is not None:
                tags[i:i + length] = [tag] * length
                i += length
                continue
            i += 1

        # "Acme Corp." / "Tsinghua University": a capitalized suffix makes the preceding name an organization
        for j in range(1, len(cores)):
            if (
                cores[j].lower().rstrip(".") in ORG_SUFFIXES
                and _is_capitalized(cores[j])
                and _is_capitalized(cores[j - 1])
                and tags[j - 1] not in ("NUMBER", "TIME")
                and tags[j] == NE_NONE
            ):
                tags[j - 1] = tags[j] = "ORGANIZATION"
        return tags


@lru_cache(maxsize=8)
def get_entity_recognizer(gazetteer_dir: Optional[str] = None) -> EntityRecognizer:
    return EntityRecognizer(gazetteer_dir or None)


def tag_ne(tokens: List[str], recognizer: Optional[EntityRecognizer] = None) -> List[str]:
    """One NE tag per token (NONE when no class applies)."""
    return (recognizer or get_entity_recognizer()).tag(tokens)
