import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emotraj.emotion import (NEUTRAL, EmotionConfig, IdfTable, VadVector, build_idf,
                             exclamation_boost, fuse_vad, label_command, label_command_detailed,
                             load_label_map, load_lexicon, load_stopwords, sentence_vad,
                             tokenize_filter, word_vad)
from emotraj.errors import EmptyCorpus, InvalidAlpha, LexiconError, UnknownLabel, ZeroMass

DATA = Path(__file__).parent / "data"
LABELS = {"joy": VadVector(0.9, 0.7, 0.6), "fear": VadVector(0.1, 0.8, 0.2),
          "neutral": VadVector(0.5, 0.3, 0.5)}
vad_st = st.tuples(*[st.floats(0, 1)] * 3).map(lambda t: VadVector(*t))


@pytest.fixture(scope="module")
def lexicon():
    return load_lexicon(DATA / "lexicon.tsv")


def test_sentence_vad():
    assert sentence_vad({"fear": 1.0}, LABELS) == LABELS["fear"]
    two = {"a": VadVector(0.2, 0.2, 0.2), "b": VadVector(0.8, 0.8, 0.8)}
    assert sentence_vad({"a": 0.4, "b": 0.4}, two) == pytest.approx((0.5, 0.5, 0.5))
    got = sentence_vad({"joy": 0.5, "fear": 0.3, "neutral": 0.2}, LABELS)
    # 0.5*joy + 0.3*fear + 0.2*neutral, by hand
    assert got == pytest.approx((0.58, 0.65, 0.46), abs=1e-12)


def test_sentence_vad_errors_and_top_k():
    with pytest.raises(ZeroMass):
        sentence_vad({"joy": 0.0}, LABELS)
    with pytest.raises(UnknownLabel):
        sentence_vad({"awe": 0.5}, LABELS)
    assert sentence_vad({"joy": 0.6, "fear": 0.3, "neutral": 0.1}, LABELS, top_k=1) == LABELS["joy"]
    assert sentence_vad({"joy": 0.6, "fear": 0.05}, LABELS, min_score=0.1) == LABELS["joy"]


@given(st.dictionaries(st.sampled_from(sorted(LABELS)), st.floats(0.01, 1), min_size=1))
def test_sentence_vad_in_hull(scores):
    got = sentence_vad(scores, LABELS)
    used = [LABELS[k] for k in scores]
    for dim in range(3):
        assert min(v[dim] for v in used) - 1e-12 <= got[dim] <= max(v[dim] for v in used) + 1e-12


def test_tokenize_filter():
    assert tokenize_filter("Stop here now!", {"here"}) == ["stop", "now"]
    assert tokenize_filter("", {"here"}) == []
    assert tokenize_filter("Park behind the red car.", {"the"}) == ["park", "behind", "red", "car"]


def test_build_idf():
    idf = build_idf(["stop the car", "park the car", "the end"], stopwords={"the"})
    assert idf.n_docs == 3
    assert idf.idf("stop") == pytest.approx(math.log(4 / 2) + 1)
    assert idf.idf("stop") == pytest.approx(1.6931471805599454)
    assert build_idf(["go now", "go left"]).idf("go") == 1.0
    assert idf.idf("unseen") == pytest.approx(math.log(4) + 1)
    assert "the" not in idf.weights
    with pytest.raises(EmptyCorpus):
        build_idf([])


def test_word_vad(lexicon):
    flat = IdfTable({}, 0)
    assert word_vad("hurry", lexicon, flat) == lexicon["hurry"]
    lex2 = {"x": VadVector(0.9, 0.8, 0.7), "y": VadVector(0.1, 0.2, 0.3)}
    assert word_vad("x y", lex2, flat) == pytest.approx((0.5, 0.5, 0.5))
    idf = IdfTable({"hurry": 2.0, "quickly": 1.5, "please": 1.0}, 10)
    # weights: hurry 2*2.0 = 4, quickly 1.5, please 1.0; total 6.5
    expected = ((4 * 0.4 + 1.5 * 0.5 + 1.0 * 0.7) / 6.5,
                (4 * 0.9 + 1.5 * 0.8 + 1.0 * 0.3) / 6.5,
                (4 * 0.6 + 1.5 * 0.5 + 1.0 * 0.4) / 6.5)
    assert word_vad("Hurry, hurry quickly please!", lexicon, idf) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx((3.05 / 6.5, 5.1 / 6.5, 3.55 / 6.5))


def test_word_vad_fallback(lexicon):
    idf = IdfTable({}, 0)
    assert word_vad("xyzzy plugh", lexicon, idf) == NEUTRAL
    assert word_vad("the", lexicon, idf, stopwords={"the"}, neutral=VadVector(0.4, 0.4, 0.4)) == (0.4, 0.4, 0.4)


@given(st.permutations(["hurry", "please", "car", "stop", "danger", "car"]))
def test_word_vad_order_invariant(words):
    lexicon = load_lexicon(DATA / "lexicon.tsv")
    idf = IdfTable({"hurry": 2.0, "car": 1.2, "danger": 3.3}, 5)
    assert word_vad(" ".join(words), lexicon, idf) == word_vad("hurry please car stop danger car", lexicon, idf)


def test_exclamation_boost():
    v = VadVector(0.3, 0.5, 0.4)
    assert exclamation_boost(v, "go left") is v
    assert exclamation_boost(v, "go left!").arousal == pytest.approx(0.55)
    assert exclamation_boost(VadVector(0.3, 0.98, 0.4), "now!!!") == (0.3, 1.0, 0.4)


def test_fuse_vad():
    g, w = VadVector(0.8, 0.6, 0.5), VadVector(0.4, 0.2, 0.3)
    assert fuse_vad(g, w, 1.0) == g
    assert fuse_vad(g, w, 0.5) == pytest.approx((0.6, 0.4, 0.4))
    assert EmotionConfig().alpha == 0.5
    with pytest.raises(InvalidAlpha):
        fuse_vad(g, w, 1.2)


@given(vad_st, vad_st)
def test_fuse_linear(g, w):
    quarter = fuse_vad(g, w, 0.25)
    mid = [(a + b) / 2 for a, b in zip(fuse_vad(g, w, 0.0), fuse_vad(g, w, 0.5))]
    assert quarter == pytest.approx(mid, abs=1e-12)


def test_label_command_neutral():
    lex = {"go": NEUTRAL}
    maps = {"neutral": NEUTRAL}
    assert label_command("go", {"neutral": 1.0}, lex, build_idf(["go"]), maps) == NEUTRAL


def test_label_command_end_to_end(lexicon):
    idf = IdfTable({"hurry": 2.0, "quickly": 1.5, "please": 1.0}, 10)
    out = label_command_detailed("Hurry, hurry quickly please!", {"joy": 0.5, "fear": 0.3, "neutral": 0.2},
                                 lexicon, idf, LABELS)
    words = (3.05 / 6.5, 5.1 / 6.5 + 0.05, 3.55 / 6.5)
    assert out.e_goe == pytest.approx((0.58, 0.65, 0.46))
    assert out.e_words == pytest.approx(words)
    assert out.vad == pytest.approx([(a + b) / 2 for a, b in zip((0.58, 0.65, 0.46), words)], abs=1e-12)


def test_exclamation_variant(lexicon):
    idf = build_idf(["please park the car", "please park the car!"])
    dist = {"caring": 0.7, "neutral": 0.3}
    maps = load_label_map(DATA / "label_map.json")
    plain = label_command("please park the car", dist, lexicon, idf, maps)
    loud = label_command("please park the car!", dist, lexicon, idf, maps)
    assert loud.valence == plain.valence and loud.dominance == plain.dominance
    assert loud.arousal > plain.arousal


def test_loaders(tmp_path):
    lex = load_lexicon(DATA / "lexicon.tsv")
    assert lex["danger"] == (0.1, 0.95, 0.3)
    assert "term" not in lex
    assert "behind" in load_stopwords(DATA / "stopwords.txt")
    bad = tmp_path / "bad.tsv"
    bad.write_text("word\t0.5\t1.7\t0.2\n")
    with pytest.raises(LexiconError):
        load_lexicon(bad)
    noheader = tmp_path / "nh.tsv"
    noheader.write_text("calm\t0.7\t0.1\t0.6\n")
    assert load_lexicon(noheader) == {"calm": (0.7, 0.1, 0.6)}
