"""Data ingestion, synthetic generation, splits, and caching."""
from .cache import load_samples, load_samples_meta, save_samples
from .dsads import ingest_dsads
from .dsads import default_clusters as dsads_clusters
from .oppt import ingest_oppt, load_column_map
from .oppt import default_clusters as oppt_clusters
from .samples import (ChannelStats, SampleSet, WindowedSample, apply_zscore,
                      channel_stats, empty_sample_set)
from .splits import LosoSplit, make_loso_splits
from .synth import (SynthSpec, benchmark_spec, default_templates,
                    generate_synthetic, overfit_spec, resolved_templates,
                    synth_clusters, synthetic_layout)

__all__ = [
    "ChannelStats", "LosoSplit", "SampleSet", "SynthSpec", "WindowedSample",
    "apply_zscore", "benchmark_spec", "channel_stats", "default_templates",
    "dsads_clusters", "empty_sample_set", "generate_synthetic", "ingest_dsads",
    "ingest_oppt", "load_column_map", "load_samples", "load_samples_meta",
    "make_loso_splits", "oppt_clusters", "overfit_spec", "resolved_templates",
    "save_samples", "synth_clusters", "synthetic_layout",
]
