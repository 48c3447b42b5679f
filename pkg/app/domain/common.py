import re

# Interchange / model format versions
MODEL_FORMAT_VERSION = 1

# Labels
POSITIVE = 1
NEGATIVE = -1
LABELS = (POSITIVE, NEGATIVE)

# Label provenance written into labeled-lines records
SOURCES = ("weak", "gold", "baseline", "predicted")

# Closed tag sets (order defines the feature vector layout)
POS_TAGS = ("NN", "VB", "JJ", "RB", "OTHERS")
NE_TAGS = ("PERSON", "LOCATION", "ORGANIZATION", "NUMBER", "TIME")
NE_NONE = "NONE"

# 11 dims: 1 NAM + 5 PTD + 5 NEP
FEATURE_NAMES = ("nam",) + tuple(f"ptd_{t}" for t in POS_TAGS) + tuple(f"nep_{t}" for t in NE_TAGS)
NUM_FEATURES = len(FEATURE_NAMES)

# Feature-subset masks (ablation rows): name -> active dimension indices
FEATURE_MASKS = {
    "nam":         (0,),
    "nam+ptd":     tuple(range(0, 6)),
    "nam+ptd+nep": tuple(range(0, NUM_FEATURES)),
}
DEFAULT_MASK = "nam+ptd+nep"

# Voters accepted by the predict command
VOTERS = ("ensemble", "lr", "svm", "nb")

# Caption indicator: line-initial, case-sensitive
CAPTION_WORDS = ("Table", "Tab.")
# token following the indicator: a digit-led token or a Roman numeral I..XLIX ("2:", "3", "IV.", "II"); a lone
# letter such as "C" or "D" names an appendix table, not a numbered one
CAPTION_NUMERAL_RE = re.compile(r"^(?:\d|(?=[IVX])(?:XL|X{0,3})(?:IX|IV|V?I{0,3})(?:[.:,)]|$))")

# Compile once at import
# integers, decimals, thousands separators, percentages, signed values
NUMBER_RE = re.compile(
    r"""^(?=.*\d)[+\-±−]?
        (?:\d{1,3}(?:,\d{3})+|\d+)?(?:\.\d+)?   # 1,234 / 12 / 0.66 / .5
        %?$""",
    re.VERBOSE,
)
CLOCK_RE = re.compile(r"^(?:[01]?\d|2[0-3]):[0-5]\d(?::[0-5]\d)?(?:[ap]\.?m\.?)?$", re.IGNORECASE)
YEAR_RE = re.compile(r"^(?:19|20)\d{2}$")
MONTH_RE = re.compile(
    r"""^(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|
        July?|Aug(?:ust)?|Sep(?:t(?:ember)?)?|Oct(?:ober)?|
        Nov(?:ember)?|Dec(?:ember)?)\.?$""",
    re.VERBOSE,
)

# Characters stripped from the end of a token before tagging
TRAILING_PUNCT = ".,;:!?)]}\"'"
LEADING_PUNCT = "([{\"'"

# Floating slack used when binning values that sit on a bin boundary (0.6 / 0.2)
BIN_EPSILON = 1e-9

# Slack allowed between consecutive words of a line (user-space units)
WORD_OVERLAP_EPSILON = 0.5
