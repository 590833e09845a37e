"""Continuous valence/arousal/dominance labels for driving commands.

A command gets two VAD estimates that are linearly fused:

* sentence level: a discrete emotion distribution (from any external
  classifier) mapped through a label -> VAD table and averaged by score;
* word level: lexicon VADs of the non-stop-word tokens averaged with
  TF-IDF weights, then an arousal boost per ``!`` in the command.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional

from .errors import EmptyCorpus, InvalidAlpha, LexiconError, UnknownLabel, ZeroMass

_TOKEN_RE = re.compile(r"[a-z]+")


class VadVector(NamedTuple):
    valence: float
    arousal: float
    dominance: float

    @classmethod
    def checked(cls, values, where: str = "") -> "VadVector":
        vals = [float(v) for v in values]
        if len(vals) != 3:
            raise LexiconError(f"VAD needs 3 components{where}, got {len(vals)}")
        if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in vals):
            raise LexiconError(f"VAD components must lie in [0, 1]{where}: {vals}")
        return cls(*vals)


NEUTRAL = VadVector(0.5, 0.5, 0.5)


@dataclass(frozen=True)
class IdfTable:
    weights: Mapping[str, float]
    n_docs: int

    def idf(self, term: str) -> float:
        w = self.weights.get(term)
        if w is None:
            return math.log(1.0 + self.n_docs) + 1.0
        return w


@dataclass(frozen=True)
class EmotionConfig:
    alpha: float = 0.5
    beta_ex: float = 0.05
    neutral: VadVector = NEUTRAL
    # restrict the sentence-level average to the k highest-scoring labels
    top_k: Optional[int] = None
    # ignore sentence-level labels scoring below this
    min_score: float = 0.0
    stopwords: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidAlpha(f"alpha must be in [0, 1], got {self.alpha}")
        if not (self.beta_ex >= 0 and math.isfinite(self.beta_ex)):
            raise InvalidAlpha(f"beta_ex must be a non-negative number, got {self.beta_ex}")
        if self.top_k is not None and self.top_k < 1:
            raise InvalidAlpha("top_k must be >= 1")


def sentence_vad(scores: Mapping[str, float], label_map: Mapping[str, VadVector],
                 top_k: Optional[int] = None, min_score: float = 0.0) -> VadVector:
    items = [(lab, float(s)) for lab, s in scores.items() if float(s) > 0.0 and float(s) >= min_score]
    if top_k is not None:
        items = sorted(items, key=lambda kv: (-kv[1], kv[0]))[:top_k]
    mass = sum(s for _, s in items)
    if mass <= 0.0:
        raise ZeroMass("emotion distribution has no positive mass")
    acc = [0.0, 0.0, 0.0]
    for lab, s in items:
        if lab not in label_map:
            raise UnknownLabel(f"label {lab!r} missing from label VAD map")
        for k, v in enumerate(label_map[lab]):
            acc[k] += (s / mass) * v
    return VadVector(*(min(1.0, max(0.0, a)) for a in acc))


def tokenize_filter(command: str, stopwords: Iterable[str] = ()) -> list[str]:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    return [t for t in _TOKEN_RE.findall(command.lower()) if t not in stop]


def build_idf(corpus: Iterable[str], stopwords: Iterable[str] = ()) -> IdfTable:
    """Smoothed IDF, ``ln((1 + N) / (1 + df)) + 1``."""
    stop = frozenset(stopwords)
    df: Counter = Counter()
    n = 0
    for doc in corpus:
        n += 1
        df.update(set(tokenize_filter(doc, stop)))
    if n == 0:
        raise EmptyCorpus("cannot build IDF from an empty corpus")
    weights = {t: math.log((1.0 + n) / (1.0 + c)) + 1.0 for t, c in df.items()}
    return IdfTable(weights, n)


def word_vad(command: str, lexicon: Mapping[str, VadVector], idf: IdfTable,
             stopwords: Iterable[str] = (), neutral: VadVector = NEUTRAL) -> VadVector:
    tf = Counter(t for t in tokenize_filter(command, stopwords) if t in lexicon)
    if not tf:
        return neutral
    terms = sorted(tf)
    weights = [tf[t] * idf.idf(t) for t in terms]
    mass = sum(weights)
    if mass <= 0.0:
        return neutral
    acc = [0.0, 0.0, 0.0]
    for term, w in zip(terms, weights):
        for k, v in enumerate(lexicon[term]):
            acc[k] += (w / mass) * v
    return VadVector(*(min(1.0, max(0.0, a)) for a in acc))


def exclamation_boost(vad: VadVector, command: str, beta_ex: float = 0.05) -> VadVector:
    n = command.count("!")
    if n == 0:
        return vad
    return vad._replace(arousal=min(1.0, vad.arousal + beta_ex * n))


def fuse_vad(e_goe: VadVector, e_words: VadVector, alpha: float = 0.5) -> VadVector:
    if not 0.0 <= alpha <= 1.0:
        raise InvalidAlpha(f"alpha must be in [0, 1], got {alpha}")
    return VadVector(*(alpha * g + (1.0 - alpha) * w for g, w in zip(e_goe, e_words)))


class LabeledCommand(NamedTuple):
    vad: VadVector
    e_goe: VadVector
    e_words: VadVector


def label_command_detailed(command: str, scores: Mapping[str, float], lexicon, idf: IdfTable,
                           label_map, config: EmotionConfig = EmotionConfig()) -> LabeledCommand:
    e_goe = sentence_vad(scores, label_map, config.top_k, config.min_score)
    e_words = word_vad(command, lexicon, idf, config.stopwords, config.neutral)
    e_words = exclamation_boost(e_words, command, config.beta_ex)
    return LabeledCommand(fuse_vad(e_goe, e_words, config.alpha), e_goe, e_words)


def label_command(command: str, scores: Mapping[str, float], lexicon, idf: IdfTable,
                  label_map, config: EmotionConfig = EmotionConfig()) -> VadVector:
    """Full labelling pipeline; the exclamation boost acts on the word-level branch."""
    return label_command_detailed(command, scores, lexicon, idf, label_map, config).vad


# --- loaders -----------------------------------------------------------------

def load_lexicon(path) -> dict[str, VadVector]:
    """Read a ``term<TAB>valence<TAB>arousal<TAB>dominance`` file.

    A first line whose numeric columns do not parse is taken as a header.
    Out-of-range values raise :class:`LexiconError`.
    """
    lexicon: dict[str, VadVector] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row or not row[0].strip():
                continue
            if len(row) < 4:
                raise LexiconError(f"{path}:{lineno}: expected 4 tab-separated columns")
            try:
                vals = [float(v) for v in row[1:4]]
            except ValueError:
                if lineno == 1:
                    continue
                raise LexiconError(f"{path}:{lineno}: non-numeric VAD value") from None
            lexicon[row[0].strip().lower()] = VadVector.checked(vals, f" at {path}:{lineno}")
    if not lexicon:
        raise LexiconError(f"{path}: lexicon is empty")
    return lexicon


def load_label_map(path) -> dict[str, VadVector]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not data:
        raise LexiconError(f"{path}: label map must be a non-empty JSON object")
    return {lab: VadVector.checked(v, f" for label {lab!r}") for lab, v in data.items()}


def load_stopwords(path) -> frozenset:
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            w = line.strip().lower()
            if w and not w.startswith("#"):
                words.add(w)
    return frozenset(words)
