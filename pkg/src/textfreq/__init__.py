"""textfreq: corpus-driven word and sentence frequency tooling."""

from textfreq.corpus import (
    DEFAULT_TOKENIZER,
    FrequencyTable,
    TableFormatError,
    TokenizerConfig,
    build_table,
    import_zipf_list,
    load_table,
    merge_tables,
    save_table,
    tokenize,
)
from textfreq.freq import (
    BinCounts,
    DEFAULT_SMOOTHING,
    EmptySentenceError,
    EmptyTableError,
    SentenceScore,
    SmoothingPolicy,
    bin_histogram,
    sentence_frequency,
    word_frequency,
    zipf_scale,
    zipf_to_relative,
)

__version__ = "0.1.0"

__all__ = [
    "BinCounts",
    "DEFAULT_SMOOTHING",
    "DEFAULT_TOKENIZER",
    "EmptySentenceError",
    "EmptyTableError",
    "FrequencyTable",
    "SentenceScore",
    "SmoothingPolicy",
    "TableFormatError",
    "TokenizerConfig",
    "bin_histogram",
    "build_table",
    "import_zipf_list",
    "load_table",
    "merge_tables",
    "save_table",
    "sentence_frequency",
    "tokenize",
    "word_frequency",
    "zipf_scale",
    "zipf_to_relative",
]
