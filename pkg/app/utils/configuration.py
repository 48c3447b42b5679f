"""The definition of the application configuration."""

import logging

from app.domain.common import DEFAULT_MASK, FEATURE_MASKS

from .configuration_wizard import ConfigWizard, configclass, configfield

logger = logging.getLogger(__name__)


@configclass
class LayoutConfig(ConfigWizard):
    """Grouping of characters into words and lines.

    :cvar line_tolerance: chars share a line when their baselines differ by at most this times the larger font size
    :cvar word_gap_ratio: a gap wider than this times the dominant font size starts a new word
    :cvar glyph_width_ratio: glyph advance as a fraction of the font size, used when a char has no font-width advance
    """

    line_tolerance: float = configfield(
        "line_tolerance",
        default=0.4,
        help_txt="Baseline tolerance as a fraction of the larger font size",
    )
    word_gap_ratio: float = configfield(
        "word_gap_ratio",
        default=0.3,
        help_txt="Word break threshold as a fraction of the dominant font size",
    )
    glyph_width_ratio: float = configfield(
        "glyph_width_ratio",
        default=0.5,
        help_txt="Fallback glyph advance (fraction of the font size) when font widths are unknown",
    )

    def __post_init__(self) -> None:
        for name in ("line_tolerance", "word_gap_ratio", "glyph_width_ratio"):
            if getattr(self, name) <= 0:
                raise ValueError(f"layout.{name} must be > 0, got {getattr(self, name)}")


@configclass
class WeakLabelConfig(ConfigWizard):
    """Distant supervision around table captions.

    :cvar k: number of lines taken above and below each caption
    :cvar min_group_size: captions whose smaller context group is below this are skipped
    :cvar require_numeral: the caption word must be followed by a numeral token
    """

    k: int = configfield(
        "k",
        default=8,
        help_txt="Context window in lines above and below a caption",
    )
    min_group_size: int = configfield(
        "min_group_size",
        default=2,
        help_txt="Minimum lines in each context group",
    )
    require_numeral: bool = configfield(
        "require_numeral",
        default=True,
        help_txt="Require a numeral after 'Table' / 'Tab.'",
    )

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"weakLabel.k must be >= 1, got {self.k}")
        if self.min_group_size < 1:
            raise ValueError(f"weakLabel.minGroupSize must be >= 1, got {self.min_group_size}")


@configclass
class FeaturesConfig(ConfigWizard):
    """Feature extraction and discretization.

    :cvar mask: active feature families
    :cvar step: Naive Bayes bin width
    :cvar lexicon_dir: directory of POS lexicons, empty for the bundled ones
    :cvar gazetteer_dir: directory of NE gazetteers, empty for the bundled ones
    """

    mask: str = configfield(
        "mask",
        default=DEFAULT_MASK,
        help_txt="Feature families: nam, nam+ptd or nam+ptd+nep",
    )
    step: float = configfield(
        "step",
        default=0.2,
        help_txt="Discretization step for Naive Bayes",
    )
    lexicon_dir: str = configfield(
        "lexicon_dir",
        default="",
        help_txt="Directory with nouns/verbs/adjectives/adverbs/function_words.txt",
    )
    gazetteer_dir: str = configfield(
        "gazetteer_dir",
        default="",
        help_txt="Directory with person/location/organization.txt",
    )

    def __post_init__(self) -> None:
        if self.mask not in FEATURE_MASKS:
            raise ValueError(f"features.mask must be one of {sorted(FEATURE_MASKS)}, got {self.mask!r}")
        if not 0.0 < self.step <= 1.0:
            raise ValueError(f"features.step must lie in (0, 1], got {self.step}")


@configclass
class LogisticRegressionConfig(ConfigWizard):
    """Logistic regression trainer."""

    l2: float = configfield(
        "l2",
        default=1e-3,
        help_txt="L2 penalty on the weights (bias is not penalized)",
    )
    max_iters: int = configfield(
        "max_iters",
        default=500,
        help_txt="Maximum gradient ascent iterations",
    )
    tol: float = configfield(
        "tol",
        default=1e-6,
        help_txt="Stop when the gradient max-norm falls below this",
    )

    def __post_init__(self) -> None:
        if self.l2 < 0:
            raise ValueError(f"logisticRegression.l2 must be >= 0, got {self.l2}")
        if self.max_iters < 1:
            raise ValueError(f"logisticRegression.maxIters must be >= 1, got {self.max_iters}")
        if self.tol <= 0:
            raise ValueError(f"logisticRegression.tol must be > 0, got {self.tol}")


@configclass
class SvmConfig(ConfigWizard):
    """Linear soft-margin SVM trainer."""

    c: float = configfield(
        "c",
        default=1.0,
        help_txt="Soft-margin penalty C",
    )
    epochs: int = configfield(
        "epochs",
        default=20,
        help_txt="Passes over the training data",
    )

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError(f"svm.c must be > 0, got {self.c}")
        if self.epochs < 1:
            raise ValueError(f"svm.epochs must be >= 1, got {self.epochs}")


@configclass
class NaiveBayesConfig(ConfigWizard):
    """Discretized Naive Bayes trainer."""

    alpha: float = configfield(
        "alpha",
        default=1.0,
        help_txt="Laplace smoothing constant",
    )

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"naiveBayes.alpha must be > 0, got {self.alpha}")


@configclass
class CorpusConfig(ConfigWizard):
    """Train/test split of a corpus directory."""

    split_ratio: float = configfield(
        "split_ratio",
        default=0.75,
        help_txt="Fraction of documents assigned to the train role",
    )
    seed: int = configfield(
        "seed",
        default=7,
        help_txt="Shuffle seed for the split",
    )

    def __post_init__(self) -> None:
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError(f"corpus.splitRatio must lie in (0, 1), got {self.split_ratio}")


@configclass
class AppConfig(ConfigWizard):
    """Configuration for the table detection toolkit.

    :cvar layout: word and line assembly
    :cvar weak_label: caption-driven weak labeling
    :cvar features: feature mask, binning and tagger data
    :cvar logistic_regression: LR trainer
    :cvar svm: SVM trainer
    :cvar naive_bayes: NB trainer
    :cvar corpus: manifest split
    """

    layout: LayoutConfig = configfield(
        "layout",
        env=False,
        help_txt="Layout assembly",
        default_factory=LayoutConfig,
    )
    weak_label: WeakLabelConfig = configfield(
        "weak_label",
        env=False,
        help_txt="Weak labeling",
        default_factory=WeakLabelConfig,
    )
    features: FeaturesConfig = configfield(
        "features",
        env=False,
        help_txt="Features",
        default_factory=FeaturesConfig,
    )
    logistic_regression: LogisticRegressionConfig = configfield(
        "logistic_regression",
        env=False,
        help_txt="Logistic regression",
        default_factory=LogisticRegressionConfig,
    )
    svm: SvmConfig = configfield(
        "svm",
        env=False,
        help_txt="SVM",
        default_factory=SvmConfig,
    )
    naive_bayes: NaiveBayesConfig = configfield(
        "naive_bayes",
        env=False,
        help_txt="Naive Bayes",
        default_factory=NaiveBayesConfig,
    )
    corpus: CorpusConfig = configfield(
        "corpus",
        env=False,
        help_txt="Corpus split",
        default_factory=CorpusConfig,
    )
    jobs: int = configfield(
        "jobs",
        default=1,
        help_txt="Documents processed in parallel",
    )
    log_level: str = configfield(
        "log_level",
        default="INFO",
        help_txt="Logging level",
    )

    def __post_init__(self) -> None:
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
