"""Diversity-aware summarization of egocentric photo-stream events."""
from .model import (Dataset, DatasetError, Event, FrameRecord, GroundTruth, Summary,
                    Violation, parse_dataset, read_dataset, serialize_dataset,
                    validate_dataset, write_dataset)
from .informativeness import (ClassificationMetrics, FilteredEvent, classification_metrics,
                              filter_informative, threshold_sweep)
from .relevance import (CRITERIA, FusionWeights, RankedList, face_relevance, fuse_relevance,
                        object_relevance, rank_normalize, saliency_relevance)
from .diversity import (SelectionTrace, SimilarityKernel, fit_kernel, greedy_select,
                        novelty, similarity)
from .msms import (MsmsCurve, SmsCurve, auc, estimate_weights, interpolate_curve, msms,
                   sms, sms_curve)
from .synth import SynthParams, synth_dataset
from .pipeline import (PipelineConfig, PipelineError, baseline_uniform, cluster_recall,
                       run_pipeline)

__version__ = "0.1.0"
