"""Lightweight part-of-speech tagging over the coarse tag set NN / VB / JJ / RB / OTHERS.

Tags come from, in order: a non-alphabetic check, a closed-class function-word list, the bundled lexicons
(adverbs, adjectives, verbs, nouns), inflected forms of lexicon entries, suffix rules, and finally NN.
"""

import logging
import re
from functools import lru_cache
from importlib.resources import files
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional

from app.domain.common import LEADING_PUNCT, TRAILING_PUNCT

logger = logging.getLogger(__name__)

_WORD_RE = re.compile(r"^[^\W\d_]+(?:['\-][^\W\d_]+)*$")
_ADJECTIVE_SUFFIXES = ("ous", "ful", "ive", "al", "able", "ible", "ic", "less")
_VERB_SUFFIXES = ("ize", "izes", "ized", "izing")


def bundled_data_dir(kind: str):
    """Directory of the packaged word lists (`lexicon` or `gazetteers`)."""
    return files("app").joinpath("data", kind)


def resolve_data_dir(directory: Optional[str], kind: str):
    return Path(directory) if directory else bundled_data_dir(kind)


def read_wordlist(directory, name: str) -> List[str]:
    """Read one entry per line, skipping blanks and `#` comments."""
    text = directory.joinpath(name).read_text(encoding="utf-8")
    return [entry.strip() for entry in text.splitlines() if entry.strip() and not entry.lstrip().startswith("#")]


def normalize_token(token: str) -> str:
    """Strip surrounding punctuation used only for tagging; the token still counts toward line totals."""
    return token.rstrip(TRAILING_PUNCT).lstrip(LEADING_PUNCT)


class PosTagger:
    """Rule and lexicon based tagger for the five coarse tags."""

    def __init__(self, lexicon_dir: Optional[str] = None):
        directory = resolve_data_dir(lexicon_dir, "lexicon")
        self.function_words = self._load(directory, "function_words.txt")
        self.adverbs = self._load(directory, "adverbs.txt")
        self.adjectives = self._load(directory, "adjectives.txt")
        self.verbs = self._load(directory, "verbs.txt")
        self.nouns = self._load(directory, "nouns.txt")
        logger.debug(
            "Loaded POS lexicons from %s: %d function words, %d adverbs, %d adjectives, %d verbs, %d nouns",
            directory, len(self.function_words), len(self.adverbs), len(self.adjectives), len(self.verbs), len(self.nouns),
        )

    @staticmethod
    def _load(directory, name: str) -> FrozenSet[str]:
        return frozenset(w.lower() for w in read_wordlist(directory, name))

    @staticmethod
    def _stems(word: str, suffix: str) -> List[str]:
        """Candidate base forms of `word` with an inflectional `suffix` removed."""
        if not word.endswith(suffix) or len(word) <= len(suffix) + 1:
            return []
        stem = word[: -len(suffix)]
        candidates = [stem, stem + "e"]
        if len(stem) > 2 and stem[-1] == stem[-2]:
            candidates.append(stem[:-1])  # stopped / running
        if suffix == "es" and stem.endswith("i"):
            candidates.append(stem[:-1] + "y")  # studies
        if suffix == "ed" and stem.endswith("i"):
            candidates.append(stem[:-1] + "y")  # applied
        return candidates

    def _inflected(self, word: str, lexicon: FrozenSet[str], suffixes: Iterable[str]) -> bool:
        return any(stem in lexicon for suffix in suffixes for stem in self._stems(word, suffix))

    def tag_token(self, token: str) -> str:
        core = normalize_token(token)
        if not core or not _WORD_RE.match(core):
            return "OTHERS"
        word = core.lower()
        if word in self.function_words:
            return "OTHERS"
        if word in self.adverbs:
            return "RB"
        if word in self.adjectives:
            return "JJ"
        if word in self.verbs:
            return "VB"
        if word in self.nouns:
            return "NN"
        if self._inflected(word, self.verbs, ("ing", "ed")):
            return "VB"
        if self._inflected(word, self.nouns, ("s", "es")):
            return "NN"
        if self._inflected(word, self.verbs, ("s", "es")):
            return "VB"
        if core[0].isupper():
            # unknown capitalized word: proper noun
            return "NN"
        if word.endswith("ly"):
            return "RB"
        if word.endswith(_ADJECTIVE_SUFFIXES):
            return "JJ"
        if word.endswith(_VERB_SUFFIXES):
            return "VB"
        return "NN"

    def tag(self, tokens: List[str]) -> List[str]:
        return [self.tag_token(token) for token in tokens]


@lru_cache(maxsize=8)
def get_pos_tagger(lexicon_dir: Optional[str] = None) -> PosTagger:
    return PosTagger(lexicon_dir or None)


def tag_pos(tokens: List[str], tagger: Optional[PosTagger] = None) -> List[str]:
    """One coarse POS tag per token."""
    return (tagger or get_pos_tagger()).tag(tokens)
