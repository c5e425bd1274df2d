"""Acoustic, lexical and assembled feature vectors."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adspeech.chat import parse_chat
from adspeech.corpus.audio import AudioClip
from adspeech.corpus.synth import SynthSpec, synth_voice
from adspeech.dsp import NucleusTrack, PeriodTrack, PitchContour
from adspeech.features import (ACOUSTIC_NAMES, ALL_NAMES, FeatureTable, InvTurnScaler, Vocabulary,
                               VocabularyError, acoustic_features, assemble, build_vocabulary,
                               f0_features, jitter_features, lexical_names, lexical_scores,
                               load_lexicon, mean_intensity, normalize_inv_turns, read_feature_csv,
                               rhythm_features, save_lexicon, set_names, shimmer_features,
                               write_feature_csv)
from adspeech.features.acoustic import InsufficientVoicingError, TooFewPeriodsError
from adspeech.features.lexical import first_turns


def _contour(f0, step=0.0033):
    f0 = np.asarray(f0, float)
    return PitchContour(np.arange(f0.size) * step, f0, 75.0, 600.0)


# ---------------------------------------------------------------- F0

def test_constant_contour():
    v, bad = f0_features(_contour([100.0] * 50))
    assert v["mean_f0"] == pytest.approx(2.0)
    assert v["std_f0"] == 0.0 and v["range_f0"] == 0.0
    assert v["slope_f0"] == 0.0 and v["slope_f0_no_jump"] == 0.0
    assert not bad


def test_two_frame_octave_jump():
    v, bad = f0_features(_contour([100.0, 1000.0], step=0.0033))
    assert v["slope_f0"] == pytest.approx(1 / 0.0033)
    assert v["slope_f0_no_jump"] == 0.0
    assert bad == {"slope_f0_no_jump"}


def test_unvoiced_gaps_break_slope_pairs():
    v, _ = f0_features(_contour([100.0, 100.0, np.nan, 200.0, 200.0]))
    assert v["slope_f0"] == 0.0
    assert v["max_f0"] == pytest.approx(np.log10(200.0))


def test_too_little_voicing():
    with pytest.raises(InsufficientVoicingError):
        f0_features(_contour([np.nan, 120.0, np.nan]))


def test_mean_intensity_is_energy_average():
    assert mean_intensity([60.0, 60.0]) == pytest.approx(60.0)
    assert mean_intensity([70.0, 0.0]) == pytest.approx(70.0 - 10 * np.log10(2))


# ---------------------------------------------------------------- rhythm

def _track(n_nuclei, pauses, phonation):
    return NucleusTrack(np.linspace(0.1, 0.9, n_nuclei), phonation, list(pauses), [])


def test_rhythm_arithmetic():
    v, bad = rhythm_features(_track(10, [(1.0, 1.5), (2.5, 3.0)], 3.0), 4.0)
    assert v == pytest.approx({"pause_ratio": 0.25, "avg_pause_len": 0.5, "speech_rate": 2.5,
                               "articulation_rate": 10 / 3, "avg_syllable_dur": 0.3,
                               "effective_dur": 3.0})
    assert not bad


def test_rhythm_without_pauses():
    v, _ = rhythm_features(_track(8, [], 4.0), 4.0)
    assert v["pause_ratio"] == 0.0
    assert v["articulation_rate"] == v["speech_rate"]


def test_rhythm_flags_empty_clip():
    v, bad = rhythm_features(_track(0, [(0.0, 2.0)], 0.0), 2.0)
    assert bad == {"avg_syllable_dur", "articulation_rate"}
    assert v["pause_ratio"] == 1.0


# ---------------------------------------------------------------- jitter / shimmer

def test_periodic_jitter_is_zero():
    v = jitter_features(PeriodTrack.from_sequences([0.005] * 20))
    assert all(x == 0.0 for x in v.values())


def test_alternating_periods():
    v = jitter_features(PeriodTrack.from_sequences([0.005, 0.0051] * 10))
    assert v["jitter_abs"] == pytest.approx(1e-4)
    assert v["jitter_loc"] == pytest.approx(0.1 / 5.05, abs=1e-5)
    assert v["jitter_rap"] == pytest.approx(0.01320, abs=1e-5)
    assert v["jitter_ddp"] == pytest.approx(0.03960, abs=1e-5)
    assert abs(v["jitter_ddp"] - 3 * v["jitter_rap"]) < 1e-12


def test_constant_amplitudes():
    v = shimmer_features(PeriodTrack.from_sequences([0.005] * 20, [0.7] * 20))
    assert all(x == 0.0 for x in v.values())


def test_alternating_amplitudes():
    v = shimmer_features(PeriodTrack.from_sequences([0.005] * 20, [1.0, 0.9] * 10))
    assert v["shimmer_loc"] == pytest.approx(0.1 / 0.95, abs=1e-5)
    assert v["shimmer_db"] == pytest.approx(abs(20 * np.log10(0.9)), abs=1e-4)
    assert v["shimmer_db"] == pytest.approx(0.91515, abs=1e-4)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 1.0), min_size=12, max_size=60))
def test_dda_is_three_apq3(amps):
    v = shimmer_features(PeriodTrack.from_sequences([0.005] * len(amps), amps))
    assert abs(v["shimmer_dda"] - 3 * v["shimmer_apq3"]) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.002, 0.012), min_size=6, max_size=60))
def test_ddp_is_three_rap(periods):
    v = jitter_features(PeriodTrack.from_sequences(periods))
    assert abs(v["jitter_ddp"] - 3 * v["jitter_rap"]) < 1e-12


def test_differences_stay_within_regions():
    # a jump between regions must not count as jitter
    pt = PeriodTrack(np.zeros(21), [0.005] * 10 + [0.008] * 10, np.ones(20), [0] * 10 + [1] * 10)
    assert jitter_features(pt)["jitter_loc"] == 0.0


def test_minimum_periods():
    with pytest.raises(TooFewPeriodsError):
        jitter_features(PeriodTrack.from_sequences([0.005] * 5))
    with pytest.raises(TooFewPeriodsError):
        shimmer_features(PeriodTrack.from_sequences([0.005] * 11))


def test_jitter_recovered_from_audio():
    r = synth_voice(SynthSpec(f0=140.0, jitter_target=0.02), seed=8)
    v = acoustic_features(r.clip)
    assert 0.018 <= v.values["jitter_loc"] <= 0.022


def test_elderly_pitch_magnitude():
    # log10 of typical elderly F0 sits near 2.2
    r = synth_voice(SynthSpec(f0=160.0, segment_plan=(1.0,)), seed=2)
    assert 2.0 < acoustic_features(r.clip).values["mean_f0"] < 2.4


def test_silent_clip_flags_everything_voiced():
    v = acoustic_features(AudioClip(np.zeros(16000), 16000))
    assert set(v.values) == set(ACOUSTIC_NAMES)
    assert {"mean_f0", "jitter_loc", "shimmer_db", "hnr_db"} <= v.invalid
    assert all(v.values[n] == 0.0 for n in v.invalid)


# ---------------------------------------------------------------- lexical

def _transcript(par_turns, inv_positions=(), n_turns=None, mor=True):
    """PAR utterances mentioning nouns; INV turns inserted at given 1-based positions."""
    lines = ["@Begin", "@Participants:\tPAR Participant, INV Investigator"]
    par = iter(par_turns)
    total = n_turns or len(par_turns) + len(inv_positions)
    for k in range(1, total + 1):
        if k in inv_positions:
            lines.append("*INV:\tmhm .")
            continue
        words = next(par, [])
        if not words:
            lines.append("*PAR:\tokay .")
            continue
        lines.append("*PAR:\t" + " ".join(words) + " .")
        if mor:
            lines.append("%mor:\t" + " ".join(f"n|{w}" for w in words) + " .")
    lines.append("@End")
    return parse_chat("\n".join(lines) + "\n")


def _vocab(words, max_turns):
    return Vocabulary(tuple((w, "noun") for w in words), tuple(1 for _ in words), max_turns)


def test_first_turn_score():
    t = _transcript([["cookie"], ["jar"]])
    s = lexical_scores(t, _vocab(["cookie", "sink"], 25))
    assert s[0] == pytest.approx(0.96)
    assert s[1] == 0.0


def test_score_clamps_at_max_turns():
    t = _transcript([[]] * 24 + [["cookie"]] + [[]] * 4 + [["jar"]])
    assert first_turns(t, _vocab(["cookie", "jar"], 25)) == [25, 30]
    np.testing.assert_array_equal(lexical_scores(t, _vocab(["cookie", "jar"], 25)), [0.0, 0.0])


def test_turn_index_counts_both_speakers():
    t = _transcript([["cookie"]], inv_positions=(1, 2))
    assert first_turns(t, _vocab(["cookie"], 10)) == [3]


def test_score_is_antitone_in_turn():
    vocab = _vocab(["cookie"], 25)
    scores = [lexical_scores(_transcript([[]] * (k - 1) + [["cookie"]]), vocab)[0]
              for k in range(1, 26)]
    assert all(a > b for a, b in zip(scores, scores[1:]))
    assert scores[-1] == 0.0


def test_surface_fallback_without_mor():
    t = _transcript([["cookie"]], mor=False)
    assert first_turns(t, _vocab(["cookie"], 5)) == [1]


def _corpus_for_vocab(extra_counts):
    words = [f"w{i:02d}" for i in range(60)]
    turns = [[w] for w in words]
    for w, c in extra_counts.items():
        turns += [[w]] * c
    return [_transcript(turns)], words


def test_dominant_word_ranks_first():
    ts, _ = _corpus_for_vocab({"cookie": 40, "w05": 10})
    vocab = build_vocabulary(ts)
    assert vocab.words[0] == ("cookie", "noun")
    assert vocab.frequencies[0] == 40


def test_rank_tie_goes_to_smaller_lemma():
    ts, words = _corpus_for_vocab({})
    vocab = build_vocabulary(ts)
    # 60 words all seen once: the 50 smallest lemmas survive
    assert [w for w, _ in vocab.words] == sorted(words)[:50]


def test_max_turns_is_training_maximum():
    # two fresh lemmas per turn so the vocabulary can be filled
    lemmas = iter(f"x{i:03d}" for i in range(200))
    ts = [_transcript([[next(lemmas), next(lemmas)] for _ in range(n)]) for n in (12, 25, 7)]
    assert [t.n_turns for t in ts] == [12, 25, 7]
    assert build_vocabulary(ts).max_turns == 25


def test_too_few_lemmas():
    with pytest.raises(VocabularyError):
        build_vocabulary([_transcript([["cookie"]])])


@pytest.mark.parametrize("count,expected", [(5, 0.5), (12, 1.0), (-3, 0.0), (0, 0.0), (10, 1.0)])
def test_inv_turn_normalization(count, expected):
    assert normalize_inv_turns([count], 0, 10)[0] == expected


def test_degenerate_inv_range_warns():
    with pytest.warns(RuntimeWarning):
        assert normalize_inv_turns([4], 3, 3)[0] == 0.0


def test_inv_scaler_fit_transform():
    ts = [_transcript([["a"]], inv_positions=tuple(range(2, 2 + k))) for k in (1, 3, 5)]
    sc = InvTurnScaler.fit(ts)
    assert (sc.train_min, sc.train_max) == (1, 5)
    assert sc.transform(ts[1]) == 0.5


def test_lexicon_round_trip(tmp_path):
    vocab, sc = _vocab(["cookie", "jar"], 9), InvTurnScaler(1, 7)
    save_lexicon(tmp_path / "lex.json", vocab, sc)
    assert load_lexicon(tmp_path / "lex.json") == (vocab, sc)


# ---------------------------------------------------------------- sets and tables

ALL_81 = (
    ["mean_f0", "std_f0", "max_f0", "min_f0", "range_f0", "slope_f0", "slope_f0_no_jump",
     "mean_intensity", "pause_ratio", "avg_pause_len", "speech_rate", "articulation_rate",
     "avg_syllable_dur", "effective_dur",
     "jitter_loc", "jitter_abs", "jitter_rap", "jitter_ppq5", "jitter_ddp",
     "shimmer_loc", "shimmer_db", "shimmer_apq3", "shimmer_apq5", "shimmer_apq11", "shimmer_dda",
     "autocorr_mean", "nhr", "hnr_db"]
    + [f"lex_w{i:02d}" for i in range(1, 51)] + ["inv_turns_norm", "age", "gender"])


@pytest.mark.parametrize("tag,size", [("pros", 16), ("vq", 16), ("pros+vq", 30), ("lex", 53),
                                      ("lex+pros", 67), ("sel", 13), ("all", 81)])
def test_set_sizes(tag, size):
    assert len(set_names(tag)) == size
    assert len(set_names(tag, demographics=False)) == size - 2


def test_all_names_exact():
    assert set_names("all") == ALL_81
    assert ALL_NAMES == ALL_81[:-2]


def _features(value=0.5):
    f = {n: 1.0 for n in ACOUSTIC_NAMES}
    f.update({n: value for n in lexical_names()})
    f["inv_turns_norm"] = 0.2
    return f


def test_sel_lexical_component_is_mean():
    v = assemble("S1", _features(0.5), "sel", age=70, gender="female")
    assert v.values[v.names.index("lex_mean")] == 0.5
    assert v.names[-2:] == ("age", "gender") and v.values[-1] == 0.0


def test_pros_canonical_order():
    v = assemble("S1", _features(), "pros", age=70, gender="male")
    assert list(v.names) == set_names("pros")
    assert v.values[-1] == 1.0


def test_missing_feature_named():
    f = _features()
    del f["jitter_abs"]
    with pytest.raises(KeyError, match="jitter_abs"):
        assemble("S1", f, "vq", age=70, gender="male")


def test_feature_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    names = set_names("all")
    table = FeatureTable(["S1", "S2"], ["AD", "nonAD"], [20, None], names,
                         rng.standard_normal((2, len(names))))
    write_feature_csv(tmp_path / "f.csv", table, header_comment="x")
    back = read_feature_csv(tmp_path / "f.csv")
    assert back.session_ids == ["S1", "S2"] and back.mmse == [20, None]
    np.testing.assert_array_equal(back.X, table.X)
    np.testing.assert_allclose(back.column("lex_mean"), table.columns(lexical_names()).mean(axis=1))
