"""trendmap: emerging research theme detection for timestamped corpora.

Clusters document embeddings into topics with from-scratch density-based
clustering, represents topics via class-based TF-IDF, tracks their yearly
evolution, and classifies each topic per period as a weak, strong, latent, or
not-strong-but-well-known signal on a topic emergence map.
"""

from .clustering import ClusterParams, Labeling, hdbscan
from .corpus import Document, PeriodScheme, RawRecord, Stoplist, build_periods, preprocess
from .dynamics import PeakSet, TimeSeries, TrendFit, detect_peaks, ols_trend, yearly_proportions
from .embedding import EmbeddingMatrix, PcaModel, builtin_embed, load_embeddings, pca_fit_transform
from .labeling import LabelerConfig, TopicLabel, aggregate_labels, heuristic_label
from .signals import SignalClass, SignalEvolution, TemMap, TemPoint, build_tem, classify, evolution_matrix
from .topics import CtfidfMatrix, TopicModel, Vocabulary, build_vocabulary, ctfidf, reduce_topics, top_terms, topic_similarity

__version__ = "0.1.0"

__all__ = [
    "ClusterParams",
    "CtfidfMatrix",
    "Document",
    "EmbeddingMatrix",
    "LabelerConfig",
    "Labeling",
    "PcaModel",
    "PeakSet",
    "PeriodScheme",
    "RawRecord",
    "SignalClass",
    "SignalEvolution",
    "Stoplist",
    "TemMap",
    "TemPoint",
    "TimeSeries",
    "TopicLabel",
    "TopicModel",
    "TrendFit",
    "Vocabulary",
    "aggregate_labels",
    "build_periods",
    "build_tem",
    "build_vocabulary",
    "builtin_embed",
    "classify",
    "ctfidf",
    "detect_peaks",
    "evolution_matrix",
    "hdbscan",
    "heuristic_label",
    "load_embeddings",
    "ols_trend",
    "pca_fit_transform",
    "preprocess",
    "reduce_topics",
    "top_terms",
    "topic_similarity",
    "yearly_proportions",
]
