#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chorusnet/analysis.hpp"
#include "chorusnet/behavior.hpp"
#include "chorusnet/engine.hpp"
#include "chorusnet/errors.hpp"
#include "chorusnet/graph.hpp"
#include "chorusnet/melody.hpp"
#include "chorusnet/serialize.hpp"
#include "chorusnet/study.hpp"

namespace py = pybind11;
using namespace chorusnet;

namespace {

StudyConfig study_config_from_json_str(const std::string& text, const std::string& base_dir) {
    return study_config_from_json(json::parse(text), base_dir);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Networked melody-transmission simulator (C++ core)";

    // graph
    py::class_<Graph>(m, "Graph")
        .def_readonly("n", &Graph::n)
        .def_readonly("edges", &Graph::edges)
        .def_readonly("adjacency", &Graph::adjacency)
        .def_readonly("kind", &Graph::kind)
        .def("degree", &Graph::degree)
        .def("has_edge", &Graph::has_edge)
        .def("__repr__", [](const Graph& g) {
            return "<Graph kind=" + (g.kind.empty() ? "custom" : g.kind) +
                   " n=" + std::to_string(g.n) + " edges=" + std::to_string(g.edge_count()) + ">";
        });
    m.def("make_graph", &make_graph, py::arg("n"), py::arg("edges"));
    m.def("make_lattice", &make_lattice, py::arg("rows"), py::arg("cols"));
    m.def("make_random_regular", &make_random_regular, py::arg("n"), py::arg("degree"),
          py::arg("seed"));
    m.def("make_modular", &make_modular, py::arg("cliques"), py::arg("clique_size"),
          py::arg("seed") = 0);
    m.def("make_disconnected", &make_disconnected, py::arg("n"));
    m.def("is_connected", &is_connected);
    m.def("avg_path_length", &avg_path_length);
    m.def("betweenness_centrality", &betweenness_centrality);
    m.def("mean_betweenness", &mean_betweenness);

    // rng + melody
    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("normal", py::overload_cast<>(&Rng::normal))
        .def("exponential", &Rng::exponential, py::arg("rate") = 1.0);

    py::class_<DeviationModel>(m, "DeviationModel")
        .def(py::init<>())
        .def_readwrite("sigma", &DeviationModel::sigma)
        .def_readwrite("mean", &DeviationModel::mean)
        .def_readwrite("sample_count", &DeviationModel::sample_count);

    m.def("random_melody", &random_melody, py::arg("rng"), py::arg("lo"), py::arg("hi"));
    m.def("intervals", &intervals);
    m.def("rebuild", &rebuild, py::arg("first_pitch"), py::arg("intervals"));
    m.def("center", &center);
    m.def("estimate_deviation_covariance", &estimate_deviation_covariance, py::arg("pairs"));
    m.def("apply_matched_noise",
          py::overload_cast<const Melody&, const DeviationModel&, Rng&>(&apply_matched_noise),
          py::arg("melody"), py::arg("model"), py::arg("rng"));

    // behavior
    py::enum_<ScorerKind>(m, "ScorerKind")
        .value("smoothness", ScorerKind::smoothness)
        .value("table", ScorerKind::table)
        .value("uniform", ScorerKind::uniform);
    py::enum_<SelectionKind>(m, "SelectionKind")
        .value("softmax", SelectionKind::softmax)
        .value("uniform", SelectionKind::uniform)
        .value("argmax", SelectionKind::argmax);
    py::enum_<ReproductionKind>(m, "ReproductionKind")
        .value("biased_singer", ReproductionKind::biased_singer)
        .value("matched_noise", ReproductionKind::matched_noise)
        .value("identity", ReproductionKind::identity);

    py::class_<Scorer>(m, "Scorer")
        .def(py::init<>())
        .def_readwrite("kind", &Scorer::kind)
        .def_readwrite("w1", &Scorer::w1)
        .def_readwrite("w2", &Scorer::w2)
        .def_readwrite("table", &Scorer::table)
        .def_readwrite("table_default", &Scorer::table_default);
    py::class_<SelectionPolicy>(m, "SelectionPolicy")
        .def(py::init<>())
        .def_readwrite("kind", &SelectionPolicy::kind)
        .def_readwrite("temperature", &SelectionPolicy::temperature);
    py::class_<ReproductionModel>(m, "ReproductionModel")
        .def(py::init<>())
        .def_readwrite("kind", &ReproductionModel::kind)
        .def_readwrite("lambda_", &ReproductionModel::lambda)
        .def_readwrite("kappa", &ReproductionModel::kappa)
        .def_readwrite("sigma", &ReproductionModel::sigma)
        .def_readwrite("sigma0", &ReproductionModel::sigma0)
        .def_readwrite("deviation", &ReproductionModel::deviation);
    py::class_<AgentConfig>(m, "AgentConfig")
        .def(py::init<>())
        .def_readwrite("scorer", &AgentConfig::scorer)
        .def_readwrite("selection", &AgentConfig::selection)
        .def_readwrite("reproduction", &AgentConfig::reproduction)
        .def_readwrite("jitter_sd", &AgentConfig::jitter_sd);

    m.def("score", &score, py::arg("scorer"), py::arg("melody"));
    m.def("softmax_probabilities", &softmax_probabilities, py::arg("scores"),
          py::arg("temperature"));
    m.def("select", &chorusnet::select, py::arg("policy"), py::arg("scorer"),
          py::arg("candidates"), py::arg("rng"));
    m.def("reproduce", &reproduce, py::arg("model"), py::arg("melody"), py::arg("rng"));

    // engine
    py::enum_<Condition>(m, "Condition")
        .value("full", Condition::full)
        .value("no_selection", Condition::no_selection)
        .value("no_reproduction", Condition::no_reproduction)
        .value("linear", Condition::linear);
    py::enum_<RunMode>(m, "RunMode")
        .value("synchronous", RunMode::synchronous)
        .value("asynchronous", RunMode::asynchronous);

    py::class_<TopologySpec>(m, "TopologySpec")
        .def(py::init<>())
        .def_readwrite("kind", &TopologySpec::kind)
        .def_readwrite("rows", &TopologySpec::rows)
        .def_readwrite("cols", &TopologySpec::cols)
        .def_readwrite("n", &TopologySpec::n)
        .def_readwrite("degree", &TopologySpec::degree)
        .def_readwrite("cliques", &TopologySpec::cliques)
        .def_readwrite("clique_size", &TopologySpec::clique_size)
        .def_readwrite("seed", &TopologySpec::seed);
    m.def("make_topology", &make_topology);

    py::class_<CandidateRef>(m, "CandidateRef")
        .def_readonly("source", &CandidateRef::source)
        .def_readonly("melody", &CandidateRef::melody);
    py::class_<TrialRecord>(m, "TrialRecord")
        .def_readonly("batch", &TrialRecord::batch)
        .def_readonly("condition", &TrialRecord::condition)
        .def_readonly("topology", &TrialRecord::topology)
        .def_readonly("iteration", &TrialRecord::iteration)
        .def_readonly("node", &TrialRecord::node)
        .def_readonly("participant", &TrialRecord::participant)
        .def_readonly("candidates", &TrialRecord::candidates)
        .def_readonly("selected", &TrialRecord::selected)
        .def_readonly("produced", &TrialRecord::produced)
        .def_readonly("t_start", &TrialRecord::t_start)
        .def_readonly("t_end", &TrialRecord::t_end);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("condition", &ExperimentConfig::condition)
        .def_readwrite("topology", &ExperimentConfig::topology)
        .def_readwrite("iterations", &ExperimentConfig::iterations)
        .def_readwrite("batch", &ExperimentConfig::batch)
        .def_readwrite("base_seed", &ExperimentConfig::base_seed)
        .def_readwrite("agent", &ExperimentConfig::agent)
        .def_readwrite("mode", &ExperimentConfig::mode)
        .def_readwrite("participants", &ExperimentConfig::participants)
        .def_readwrite("trials_per_participant", &ExperimentConfig::trials_per_participant);

    m.def("init_batch", &init_batch, py::arg("node_count"), py::arg("batch_seed"));
    m.def("batch_seed_for", &batch_seed_for, py::arg("base_seed"), py::arg("batch"));
    m.def("run_synchronous", &run_synchronous, py::arg("config"), py::arg("batch_seed"));
    m.def("run_asynchronous", &run_asynchronous, py::arg("config"), py::arg("batch_seed"));
    m.def("run_experiment", &run_experiment, py::arg("config"), py::arg("batch_seed"));

    // analysis
    py::class_<PcaResult>(m, "PcaResult")
        .def_readonly("mean", &PcaResult::mean)
        .def_readonly("components", &PcaResult::components)
        .def_readonly("eigenvalues", &PcaResult::eigenvalues)
        .def("variance_ratios", &PcaResult::variance_ratios);
    m.def("fit_pca", &fit_pca, py::arg("rows"));

    py::class_<KMeansResult>(m, "KMeansResult")
        .def_readonly("centroids", &KMeansResult::centroids)
        .def_readonly("labels", &KMeansResult::labels)
        .def_readonly("objective", &KMeansResult::objective)
        .def_readonly("objective_history", &KMeansResult::objective_history);
    m.def("kmeans", &kmeans, py::arg("points"), py::arg("k"), py::arg("seed"));
    m.def("silhouette", &silhouette, py::arg("points"), py::arg("labels"));
    m.def("select_k", &select_k, py::arg("points"), py::arg("k_min"), py::arg("k_max"),
          py::arg("seed"));

    py::class_<ClusterModel>(m, "ClusterModel")
        .def_readonly("feature_mean", &ClusterModel::feature_mean)
        .def_readonly("components", &ClusterModel::components)
        .def_readonly("explained_variance_ratio", &ClusterModel::explained_variance_ratio)
        .def_readonly("centroids", &ClusterModel::centroids)
        .def_readonly("k", &ClusterModel::k)
        .def("embed", &ClusterModel::embed)
        .def("assign", &ClusterModel::assign);
    m.def("fit_cluster_model", &fit_cluster_model, py::arg("melodies"), py::arg("seed"),
          py::arg("force_k") = std::nullopt, py::arg("k_min") = 2, py::arg("k_max") = 12);

    m.def("cluster_entropy", &cluster_entropy, py::arg("prevalence"));
    m.def("neighbor_similarity", &neighbor_similarity, py::arg("graph"), py::arg("labels"));
    m.def("prevalence_trajectory", &prevalence_trajectory, py::arg("log"), py::arg("model"));

    py::class_<BootstrapCI>(m, "BootstrapCI")
        .def_readonly("mean", &BootstrapCI::mean)
        .def_readonly("ci_lo", &BootstrapCI::ci_lo)
        .def_readonly("ci_hi", &BootstrapCI::ci_hi);
    m.def("population_pleasantness", &population_pleasantness, py::arg("log"), py::arg("scorer"),
          py::arg("burn_in"));
    m.def("bootstrap_mean", &bootstrap_mean, py::arg("values"));

    // study pipeline
    py::class_<StudyConfig>(m, "StudyConfig")
        .def(py::init<>())
        .def_readwrite("study_id", &StudyConfig::study_id)
        .def_readwrite("conditions", &StudyConfig::conditions)
        .def_readwrite("topologies", &StudyConfig::topologies)
        .def_readwrite("iterations", &StudyConfig::iterations)
        .def_readwrite("batches", &StudyConfig::batches)
        .def_readwrite("base_seed", &StudyConfig::base_seed)
        .def_readwrite("agent", &StudyConfig::agent)
        .def_readwrite("mode", &StudyConfig::mode)
        .def_readwrite("participants", &StudyConfig::participants)
        .def_readwrite("trials_per_participant", &StudyConfig::trials_per_participant)
        .def_readwrite("linear_nodes", &StudyConfig::linear_nodes);
    m.def("study_config_from_json", &study_config_from_json_str, py::arg("text"),
          py::arg("base_dir") = ".");
    m.def("run_study",
          [](const StudyConfig& config, const std::filesystem::path& out_dir) {
              const RunResult r = run_study(config, out_dir);
              return py::make_tuple(r.manifest_path, r.log_hashes);
          },
          py::arg("config"), py::arg("out_dir"));
    m.def("analyze_run",
          [](const std::filesystem::path& run_dir, const std::filesystem::path& out_dir,
             std::optional<int> force_k, int k_min, int k_max, int burn_in) {
              AnalyzeOptions options;
              options.force_k = force_k;
              options.k_min = k_min;
              options.k_max = k_max;
              options.burn_in = burn_in;
              const AnalyzeResult r = analyze_run(run_dir, out_dir, options);
              return py::make_tuple(r.model, r.metrics_csv, r.model_json, r.summary_json);
          },
          py::arg("run_dir"), py::arg("out_dir"), py::arg("force_k") = std::nullopt,
          py::arg("k_min") = 2, py::arg("k_max") = 12, py::arg("burn_in") = 3);

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<ConnectivityError>(m, "ConnectivityError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);
}
