"""Text-driven temporal composition of skeletal 3D human motion."""

__version__ = "0.1.0"

from .compose import CompositionRequest, CompositionResult, align_second, compose, slerp_stitch
from .dataset import (
    ActionPair,
    ActionSample,
    LabeledSegment,
    SequenceRecord,
    extract_pairs,
    filter_and_resample,
    synth_generate,
)
from .metrics import MetricReport, ape, ave, evaluate, transition_distance
from .model import (
    LatentDistribution,
    ModelConfig,
    SequenceGenerator,
    PastConditionedVae,
    load_checkpoint,
    save_checkpoint,
)
from .motion import FeatureStats, Motion, Pose, canonicalize
from .skeleton import Joint, Skeleton, default_skeleton, forward_kinematics
from .text import Vocabulary, tokenize_words

__all__ = [
    "ActionPair",
    "ActionSample",
    "CompositionRequest",
    "CompositionResult",
    "FeatureStats",
    "Joint",
    "LabeledSegment",
    "LatentDistribution",
    "MetricReport",
    "ModelConfig",
    "Motion",
    "Pose",
    "SequenceGenerator",
    "SequenceRecord",
    "Skeleton",
    "PastConditionedVae",
    "Vocabulary",
    "align_second",
    "ape",
    "ave",
    "canonicalize",
    "compose",
    "default_skeleton",
    "evaluate",
    "extract_pairs",
    "filter_and_resample",
    "forward_kinematics",
    "load_checkpoint",
    "save_checkpoint",
    "slerp_stitch",
    "synth_generate",
    "tokenize_words",
    "transition_distance",
]
