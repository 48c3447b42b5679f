import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    FiniteFloat,
    NonNegativeInt,
    PositiveFloat,
    field_validator,
    model_validator,
)

from app.domain.common import (
    FEATURE_MASKS,
    NE_TAGS,
    NUM_FEATURES,
    POS_TAGS,
    WORD_OVERLAP_EPSILON,
)

PosTag = Literal["NN", "VB", "JJ", "RB", "OTHERS"]
NeTag = Literal["PERSON", "LOCATION", "ORGANIZATION", "NUMBER", "TIME", "NONE"]
Label = Literal[1, -1]
Source = Literal["weak", "gold", "baseline", "predicted"]
Role = Literal["train", "test"]


class _Record(BaseModel):
    model_config = ConfigDict(frozen=True)


# ---------- PDF ingestion ----------
class RichChar(_Record):
    """One rendered glyph: <character, x, y, font, size> plus its page.

    `advance` is the horizontal advance from the font widths, None when the producer had no width table.
    """
    codepoint: str = Field(min_length=1)
    page: int = Field(ge=0)
    x: FiniteFloat
    y: FiniteFloat
    font_name: str
    font_size: PositiveFloat
    advance: Optional[float] = Field(default=None, ge=0.0, allow_inf_nan=False)


class Page(_Record):
    width: PositiveFloat
    height: PositiveFloat
    chars: List[RichChar] = []


class PdfDocument(_Record):
    doc_id: str
    pages: List[Page] = []

    @model_validator(mode="after")
    def chars_on_their_page(self):
        for idx, page in enumerate(self.pages):
            for ch in page.chars:
                if ch.page != idx:
                    raise ValueError(f"character {ch.codepoint!r} claims page {ch.page} but is stored on page {idx}")
        return self

    @property
    def num_chars(self) -> int:
        return sum(len(p.chars) for p in self.pages)


# ---------- layout ----------
class Word(_Record):
    text: str = Field(min_length=1)
    x0: FiniteFloat
    x1: FiniteFloat

    @field_validator("text")
    @classmethod
    def no_whitespace(cls, v: str) -> str:
        if any(c.isspace() for c in v):
            raise ValueError("word text must not contain whitespace")
        return v

    @model_validator(mode="after")
    def ordered_extent(self):
        if self.x0 > self.x1:
            raise ValueError(f"word {self.text!r} has x0 {self.x0} > x1 {self.x1}")
        return self


class Line(_Record):
    doc_id: str
    page: int = Field(ge=0)
    line_idx: int = Field(ge=0)
    y: FiniteFloat
    font_size: PositiveFloat
    words: List[Word] = Field(min_length=1)

    @model_validator(mode="after")
    def words_left_to_right(self):
        for prev, nxt in zip(self.words, self.words[1:]):
            if not prev.x0 < nxt.x0:
                raise ValueError(f"words not strictly ascending by x0: {prev.text!r}@{prev.x0}, {nxt.text!r}@{nxt.x0}")
            if prev.x1 > nxt.x0 + WORD_OVERLAP_EPSILON:
                raise ValueError(f"words overlap: {prev.text!r} ends at {prev.x1}, {nxt.text!r} starts at {nxt.x0}")
        return self

    @property
    def key(self) -> Tuple[str, int, int]:
        return (self.doc_id, self.page, self.line_idx)

    @property
    def tokens(self) -> List[str]:
        return [w.text for w in self.words]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    @property
    def width(self) -> float:
        return self.words[-1].x1 - self.words[0].x0


# ---------- features ----------
class TokenAnnotation(_Record):
    token: str
    pos: PosTag
    ne: NeTag = "NONE"


class FeatureVector(_Record):
    nam: float = Field(ge=0.0, le=1.0)
    ptd: Tuple[float, float, float, float, float]
    nep: Tuple[float, float, float, float, float]

    @field_validator("ptd", "nep")
    @classmethod
    def unit_components(cls, v):
        if any(not 0.0 <= c <= 1.0 for c in v):
            raise ValueError(f"components must lie in [0, 1]: {v}")
        return v

    @model_validator(mode="after")
    def distributions(self):
        if abs(sum(self.ptd) - 1.0) > 1e-9:
            raise ValueError(f"POS tag distribution must sum to 1, got {sum(self.ptd)}")
        if sum(self.nep) > 1.0 + 1e-9:
            raise ValueError(f"named entity percentages exceed 1: {sum(self.nep)}")
        return self

    def as_tuple(self) -> Tuple[float, ...]:
        return (self.nam,) + tuple(self.ptd) + tuple(self.nep)


class FeatureRecord(_Record):
    """A featurized line as written by the featurize command."""
    doc_id: str
    page: int = Field(ge=0)
    line_idx: int = Field(ge=0)
    features: str = "nam+ptd+nep"
    nam: float = Field(ge=0.0, le=1.0)
    ptd: Optional[Tuple[float, float, float, float, float]] = None
    nep: Optional[Tuple[float, float, float, float, float]] = None
    label: Optional[Label] = None
    source: Optional[Source] = None

    @field_validator("features")
    @classmethod
    def known_mask(cls, v: str) -> str:
        if v not in FEATURE_MASKS:
            raise ValueError(f"unknown feature mask {v!r}; expected one of {sorted(FEATURE_MASKS)}")
        return v

    @property
    def key(self) -> Tuple[str, int, int]:
        return (self.doc_id, self.page, self.line_idx)

    def available_dims(self) -> Tuple[int, ...]:
        dims = [0]
        if self.ptd is not None:
            dims += list(range(1, 1 + len(POS_TAGS)))
        if self.nep is not None:
            dims += list(range(1 + len(POS_TAGS), NUM_FEATURES))
        return tuple(dims)

    def values(self) -> Tuple[float, ...]:
        """Full 11-dim view; families that were not computed read as 0."""
        ptd = self.ptd if self.ptd is not None else (0.0,) * len(POS_TAGS)
        nep = self.nep if self.nep is not None else (0.0,) * len(NE_TAGS)
        return (self.nam,) + tuple(ptd) + tuple(nep)


# ---------- labels ----------
class LabeledLine(_Record):
    line: Line
    label: Label
    source: Source
    caption: Optional[Tuple[int, int]] = None

    @property
    def key(self) -> Tuple[str, int, int]:
        return self.line.key


class WeaklyLabeledLine(LabeledLine):
    """A weak label; `caption` is the (page, line_idx) of the caption that produced it."""
    source: Source = "weak"


# ---------- classifiers ----------
def _check_finite(values: List[float]) -> List[float]:
    if not all(math.isfinite(v) for v in values):
        raise ValueError("parameters must be finite")
    return values


class LrModel(_Record):
    dims: List[int] = Field(default_factory=lambda: list(range(NUM_FEATURES)))
    theta: List[float]
    theta0: FiniteFloat = 0.0

    @field_validator("theta")
    @classmethod
    def finite_theta(cls, v: List[float]) -> List[float]:
        return _check_finite(v)

    @model_validator(mode="after")
    def aligned(self):
        if len(self.theta) != len(self.dims):
            raise ValueError(f"{len(self.theta)} weights for {len(self.dims)} feature dims")
        return self


class SvmModel(_Record):
    dims: List[int] = Field(default_factory=lambda: list(range(NUM_FEATURES)))
    w: List[float]
    b: FiniteFloat = 0.0

    @field_validator("w")
    @classmethod
    def finite_w(cls, v: List[float]) -> List[float]:
        return _check_finite(v)

    @model_validator(mode="after")
    def aligned(self):
        if len(self.w) != len(self.dims):
            raise ValueError(f"{len(self.w)} weights for {len(self.dims)} feature dims")
        return self


class NbModel(_Record):
    dims: List[int] = Field(default_factory=lambda: list(range(NUM_FEATURES)))
    step: float = Field(gt=0.0, le=1.0)
    num_bins: int = Field(ge=1)
    class_prior: Dict[int, float]
    # one table per active dim: class -> probability of bins 1..num_bins
    cond_tables: List[Dict[int, List[float]]]

    @model_validator(mode="after")
    def normalized(self):
        if set(self.class_prior) != {1, -1}:
            raise ValueError("class_prior must have exactly the classes +1 and -1")
        if abs(sum(self.class_prior.values()) - 1.0) > 1e-9:
            raise ValueError("class priors must sum to 1")
        if len(self.cond_tables) != len(self.dims):
            raise ValueError(f"{len(self.cond_tables)} conditional tables for {len(self.dims)} dims")
        for d, table in zip(self.dims, self.cond_tables):
            if set(table) != {1, -1}:
                raise ValueError(f"dim {d}: conditional table must cover both classes")
            for y, probs in table.items():
                if len(probs) != self.num_bins:
                    raise ValueError(f"dim {d}, class {y}: {len(probs)} bins, expected {self.num_bins}")
                if any(p <= 0.0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
                    raise ValueError(f"dim {d}, class {y}: bin probabilities must be positive and sum to 1")
        return self


class FeatureConfig(_Record):
    mask: str = "nam+ptd+nep"
    step: float = Field(default=0.2, gt=0.0, le=1.0)

    @field_validator("mask")
    @classmethod
    def known_mask(cls, v: str) -> str:
        if v not in FEATURE_MASKS:
            raise ValueError(f"unknown feature mask {v!r}; expected one of {sorted(FEATURE_MASKS)}")
        return v

    @property
    def dims(self) -> List[int]:
        return list(FEATURE_MASKS[self.mask])


class TrainingMetadata(_Record):
    hyperparameters: Dict[str, Dict[str, float]] = {}
    n_examples: NonNegativeInt = 0
    n_positive: NonNegativeInt = 0
    n_negative: NonNegativeInt = 0


class EnsembleModel(_Record):
    version: int
    feature_config: FeatureConfig
    lr: LrModel
    svm: SvmModel
    nb: NbModel
    training: Optional[TrainingMetadata] = None

    @model_validator(mode="after")
    def consistent_members(self):
        dims = self.feature_config.dims
        for name, member in (("lr", self.lr), ("svm", self.svm), ("nb", self.nb)):
            if list(member.dims) != dims:
                raise ValueError(f"{name} was trained on dims {member.dims}, feature config says {dims}")
        if abs(self.nb.step - self.feature_config.step) > 1e-12:
            raise ValueError(f"naive bayes step {self.nb.step} differs from feature config step {self.feature_config.step}")
        return self


# ---------- baseline ----------
class DocumentStats(_Record):
    avg_line_width: float = Field(ge=0.0)
    avg_word_gap: float = Field(ge=0.0)


# ---------- evaluation ----------
class ConfusionCounts(_Record):
    tp: NonNegativeInt = 0
    fp: NonNegativeInt = 0
    fn: NonNegativeInt = 0
    tn: NonNegativeInt = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


class MetricsReport(_Record):
    dataset_id: str = ""
    model_id: str = ""
    counts: ConfusionCounts
    accuracy: float = Field(ge=0.0, le=1.0)
    # None means undefined (reported as "n/a")
    precision: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    recall: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    f1: Optional[float] = Field(default=None, ge=0.0, le=1.0)


# ---------- corpus ----------
class DocumentEntry(_Record):
    doc_id: str
    path: str
    role: Role


class CorpusManifest(_Record):
    name: str
    documents: List[DocumentEntry] = []
    line_counts: Optional[Dict[str, int]] = None

    @field_validator("documents")
    @classmethod
    def unique_ids(cls, v: List[DocumentEntry]) -> List[DocumentEntry]:
        seen = set()
        for entry in v:
            if entry.doc_id in seen:
                raise ValueError(f"duplicate doc_id {entry.doc_id!r} in manifest")
            seen.add(entry.doc_id)
        return v

    def role(self, role: str) -> List[DocumentEntry]:
        return [d for d in self.documents if d.role == role]
