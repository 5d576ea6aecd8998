"""Networked melody-transmission simulator and analysis toolkit.

Thin python surface over the C++ core: topology construction and metrics,
melody arithmetic and the matched-noise deviation model, agent behavior,
synchronous and asynchronous experiment runners, and the clustering /
population-statistics pipeline.
"""

from ._core import (  # noqa: F401
    AgentConfig,
    BootstrapCI,
    CandidateRef,
    ClusterModel,
    Condition,
    DeviationModel,
    ExperimentConfig,
    Graph,
    KMeansResult,
    PcaResult,
    ReproductionKind,
    ReproductionModel,
    Rng,
    RunMode,
    Scorer,
    ScorerKind,
    SelectionKind,
    SelectionPolicy,
    StudyConfig,
    TopologySpec,
    TrialRecord,
    analyze_run,
    apply_matched_noise,
    avg_path_length,
    batch_seed_for,
    betweenness_centrality,
    bootstrap_mean,
    center,
    cluster_entropy,
    estimate_deviation_covariance,
    fit_cluster_model,
    fit_pca,
    init_batch,
    intervals,
    is_connected,
    kmeans,
    make_disconnected,
    make_graph,
    make_lattice,
    make_modular,
    make_random_regular,
    make_topology,
    mean_betweenness,
    neighbor_similarity,
    population_pleasantness,
    prevalence_trajectory,
    random_melody,
    rebuild,
    reproduce,
    run_asynchronous,
    run_experiment,
    run_study,
    run_synchronous,
    score,
    select,
    select_k,
    silhouette,
    softmax_probabilities,
    study_config_from_json,
)

__version__ = "0.1.0"
