"""Topic classification and longitudinal topic analytics for health-forum text."""

from ohc_topics.schema import LABELS, N_LABELS, LabelSet

__all__ = ["LABELS", "N_LABELS", "LabelSet"]
__version__ = "0.1.0"
