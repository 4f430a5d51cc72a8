"""Keyframe video summarization with co-regularized restricted Boltzmann machines.

Per-frame subject and scene descriptors are projected by a pair of jointly
trained RBMs whose hidden units are tied across modalities; keyframes are
the frames of maximum combined unit response. Uniform-sampling and k-means
baselines and per-unit visualization tools are included.
"""

__version__ = "0.1.0"

from .baselines import KMeansResult, best_of_restarts, kmeans_keyframes, lloyd, uniform_summary, uniform_timestamps
from .coreg import (
    PairedModel,
    TrainConfig,
    coreg_penalty,
    load_pair,
    read_config,
    save_pair,
    sparsify,
    sparsify_targets,
    train_pair,
    train_single,
    write_config,
)
from .features import (
    CategoryLabels,
    FeatureMatrix,
    NOMINAL_DIMS,
    check_nominal_dims,
    normalize,
    read_feature_labels,
    read_features,
    read_labels_file,
    synth_paired,
    write_features,
)
from .rbm import (
    GradientEstimate,
    Rbm,
    all_visible_states,
    cd_gradient,
    exact_gradient,
    exact_log_likelihood,
    free_energy,
    gibbs_chain,
    hidden_probs,
    init_rbm,
    load_rbm,
    save_rbm,
    visible_probs,
)
from .summary import Summary, format_summary, frame_descriptor, select_keyframes, summarize, write_summary
from .unitviz import (
    UnitReport,
    format_unit_report,
    top_categories,
    top_frames,
    unit_average_image,
    unit_report,
    write_ppm,
    write_unit_reports,
)

__all__ = [name for name in dir() if not name.startswith("_")]
