"""Emotion-aware driving toolkit: VAD command labels, trajectory metrics and
shape features, preference-pair construction, spatial labels and
rank-correlation alignment reports."""

__version__ = "0.1.0"
