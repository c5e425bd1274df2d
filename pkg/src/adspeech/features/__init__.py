"""Acoustic and transcript features and their assembly into named sets."""
from .acoustic import (ACOUSTIC_NAMES, PROSODY_NAMES, VOICE_QUALITY_NAMES, AcousticFeatures,
                       AcousticParams, InsufficientVoicingError, TooFewPeriodsError,
                       acoustic_features, f0_features, jitter_features, mean_intensity,
                       rhythm_features, shimmer_features)
from .lexical import (VOCAB_SIZE, InvTurnScaler, Vocabulary, VocabularyError, build_vocabulary,
                      first_turns, lexical_names, lexical_scores, load_lexicon,
                      normalize_inv_turns, save_lexicon)
from .vectors import (ALL_NAMES, DEMOGRAPHIC_NAMES, LEXICAL_NAMES, SELECTED_NAMES, SET_TAGS,
                      FeatureTable, FeatureTableError, FeatureVector, assemble, gender_code,
                      read_feature_csv, set_names, write_feature_csv)

__all__ = [
    "ACOUSTIC_NAMES", "PROSODY_NAMES", "VOICE_QUALITY_NAMES", "AcousticFeatures",
    "AcousticParams", "InsufficientVoicingError", "TooFewPeriodsError", "acoustic_features",
    "f0_features", "jitter_features", "mean_intensity", "rhythm_features", "shimmer_features",
    "VOCAB_SIZE", "InvTurnScaler", "Vocabulary", "VocabularyError", "build_vocabulary",
    "first_turns", "lexical_names", "lexical_scores", "load_lexicon", "normalize_inv_turns",
    "save_lexicon", "ALL_NAMES", "DEMOGRAPHIC_NAMES", "LEXICAL_NAMES", "SELECTED_NAMES",
    "SET_TAGS", "FeatureTable", "FeatureTableError", "FeatureVector", "assemble", "gender_code",
    "read_feature_csv", "set_names", "write_feature_csv",
]
