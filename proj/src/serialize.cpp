#include "chorusnet/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "chorusnet/errors.hpp"

namespace chorusnet {

namespace {

const json& require(const json& j, const char* key, const std::string& context) {
    if (!j.is_object() || !j.contains(key))
        throw ParameterError(context + ": missing field '" + key + "'");
    return j.at(key);
}

double get_number(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_number()) throw ParameterError(context + ": field '" + key + "' must be a number");
    return v.get<double>();
}

double get_number_or(const json& j, const char* key, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ParameterError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_number_integer()) throw ParameterError(context + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_string()) throw ParameterError(context + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
    if (!out) throw DataError("write failed: " + path.string());
}

json graph_to_json(const Graph& g) {
    json edges = json::array();
    for (const auto& [u, v] : g.edges) edges.push_back(json::array({u, v}));
    return {{"n", g.n}, {"edges", edges}, {"kind", g.kind}, {"seed", g.seed}};
}

Graph graph_from_json(const json& j) {
    const int n = get_int(j, "n", "topology");
    const json& edges = require(j, "edges", "topology");
    std::vector<std::pair<int, int>> edge_list;
    for (const auto& e : edges) {
        if (!e.is_array() || e.size() != 2)
            throw ParameterError("topology: each edge must be a pair");
        edge_list.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    Graph g = make_graph(n, std::move(edge_list));
    g.kind = j.value("kind", "");
    g.seed = j.value("seed", 0ULL);
    return g;
}

json melody_to_json(const Melody& m) {
    json arr = json::array();
    for (double p : m) arr.push_back(p);
    return arr;
}

Melody melody_from_json(const json& j) {
    if (!j.is_array() || j.size() != kMelodyLength)
        throw DataError("melody must be an array of 5 numbers");
    Melody m;
    for (int i = 0; i < kMelodyLength; ++i) m[static_cast<std::size_t>(i)] = j[i].get<double>();
    return m;
}

json deviation_model_to_json(const DeviationModel& model) {
    json sigma = json::array();
    for (int r = 0; r < 4; ++r) {
        json row = json::array();
        for (int c = 0; c < 4; ++c) row.push_back(model.sigma(r, c));
        sigma.push_back(row);
    }
    json mean = json::array();
    for (int r = 0; r < 4; ++r) mean.push_back(model.mean[r]);
    return {{"sigma", sigma}, {"mean", mean}, {"sample_count", model.sample_count}};
}

DeviationModel deviation_model_from_json(const json& j) {
    const json& sigma = require(j, "sigma", "deviation model");
    if (!sigma.is_array() || sigma.size() != 4)
        throw DataError("deviation model sigma must be 4x4");
    DeviationModel model;
    for (int r = 0; r < 4; ++r) {
        if (!sigma[r].is_array() || sigma[r].size() != 4)
            throw DataError("deviation model sigma must be 4x4");
        for (int c = 0; c < 4; ++c) model.sigma(r, c) = sigma[r][c].get<double>();
    }
    if (j.contains("mean"))
        for (int r = 0; r < 4; ++r) model.mean[r] = j.at("mean")[r].get<double>();
    model.sample_count = j.value("sample_count", 0L);
    return model;
}

namespace {

std::string scorer_kind_name(ScorerKind k) {
    switch (k) {
    case ScorerKind::smoothness: return "smoothness";
    case ScorerKind::table: return "table";
    case ScorerKind::uniform: return "uniform";
    }
    return "?";
}

std::string selection_kind_name(SelectionKind k) {
    switch (k) {
    case SelectionKind::softmax: return "softmax";
    case SelectionKind::uniform: return "uniform";
    case SelectionKind::argmax: return "argmax";
    }
    return "?";
}

std::string reproduction_kind_name(ReproductionKind k) {
    switch (k) {
    case ReproductionKind::biased_singer: return "biased_singer";
    case ReproductionKind::matched_noise: return "matched_noise";
    case ReproductionKind::identity: return "identity";
    }
    return "?";
}

} // namespace

Scorer table_scorer_from_file(const std::filesystem::path& path) {
    const json j = json::parse(read_text_file(path));
    if (!j.is_array()) throw DataError("table scorer file must be a JSON list");
    Scorer s;
    s.kind = ScorerKind::table;
    for (const auto& entry : j) {
        const json& iv = require(entry, "intervals", "table scorer entry");
        if (!iv.is_array() || iv.size() != kIntervalCount)
            throw DataError("table scorer intervals must have 4 entries");
        std::array<int, kIntervalCount> key{};
        for (int i = 0; i < kIntervalCount; ++i) key[static_cast<std::size_t>(i)] = iv[i].get<int>();
        s.table[key] = get_number(entry, "score", "table scorer entry");
    }
    return s;
}

json agent_config_to_json(const AgentConfig& agent) {
    json scorer = {{"kind", scorer_kind_name(agent.scorer.kind)}};
    if (agent.scorer.kind == ScorerKind::smoothness) {
        scorer["w1"] = agent.scorer.w1;
        scorer["w2"] = agent.scorer.w2;
    }
    if (agent.scorer.kind == ScorerKind::table) {
        json entries = json::array();
        for (const auto& [iv, sc] : agent.scorer.table)
            entries.push_back({{"intervals", iv}, {"score", sc}});
        scorer["entries"] = entries;
        if (agent.scorer.table_default) scorer["default"] = *agent.scorer.table_default;
    }
    json selection = {{"kind", selection_kind_name(agent.selection.kind)},
                      {"temperature", agent.selection.temperature}};
    json reproduction = {{"kind", reproduction_kind_name(agent.reproduction.kind)}};
    if (agent.reproduction.kind == ReproductionKind::biased_singer) {
        reproduction["lambda"] = agent.reproduction.lambda;
        reproduction["kappa"] = agent.reproduction.kappa;
        reproduction["sigma"] = agent.reproduction.sigma;
        reproduction["sigma0"] = agent.reproduction.sigma0;
    }
    return {{"scorer", scorer},
            {"selection", selection},
            {"reproduction", reproduction},
            {"jitter_sd", agent.jitter_sd}};
}

AgentConfig agent_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    AgentConfig agent;
    if (j.contains("scorer")) {
        const json& s = j.at("scorer");
        const std::string kind = get_string(s, "kind", "agent.scorer");
        if (kind == "smoothness") {
            agent.scorer.kind = ScorerKind::smoothness;
            agent.scorer.w1 = get_number_or(s, "w1", 0.25);
            agent.scorer.w2 = get_number_or(s, "w2", 1.0);
        } else if (kind == "uniform") {
            agent.scorer.kind = ScorerKind::uniform;
        } else if (kind == "table") {
            if (s.contains("path")) {
                agent.scorer = table_scorer_from_file(base_dir / s.at("path").get<std::string>());
            } else if (s.contains("entries")) {
                agent.scorer.kind = ScorerKind::table;
                for (const auto& entry : s.at("entries")) {
                    std::array<int, kIntervalCount> key{};
                    for (int i = 0; i < kIntervalCount; ++i)
                        key[static_cast<std::size_t>(i)] = entry.at("intervals")[i].get<int>();
                    agent.scorer.table[key] = entry.at("score").get<double>();
                }
            } else {
                throw ParameterError("agent.scorer: table kind needs 'path' or 'entries'");
            }
            if (s.contains("default")) agent.scorer.table_default = s.at("default").get<double>();
        } else {
            throw ParameterError("agent.scorer.kind: unknown scorer '" + kind + "'");
        }
    }
    if (j.contains("selection")) {
        const json& s = j.at("selection");
        const std::string kind = get_string(s, "kind", "agent.selection");
        if (kind == "softmax") agent.selection.kind = SelectionKind::softmax;
        else if (kind == "uniform") agent.selection.kind = SelectionKind::uniform;
        else if (kind == "argmax") agent.selection.kind = SelectionKind::argmax;
        else throw ParameterError("agent.selection.kind: unknown policy '" + kind + "'");
        agent.selection.temperature = get_number_or(s, "temperature", 1.0);
        if (!(agent.selection.temperature > 0.0))
            throw ParameterError("agent.selection.temperature must be positive");
    }
    if (j.contains("reproduction")) {
        const json& r = j.at("reproduction");
        const std::string kind = get_string(r, "kind", "agent.reproduction");
        if (kind == "biased_singer") {
            agent.reproduction.kind = ReproductionKind::biased_singer;
            agent.reproduction.lambda = get_number_or(r, "lambda", 0.5);
            agent.reproduction.kappa = get_number_or(r, "kappa", 0.5);
            agent.reproduction.sigma = get_number_or(r, "sigma", 0.75);
            agent.reproduction.sigma0 = get_number_or(r, "sigma0", 1.0);
            if (agent.reproduction.lambda < 0.0 || agent.reproduction.lambda > 1.0)
                throw ParameterError("agent.reproduction.lambda must be in [0, 1]");
            if (agent.reproduction.kappa < 0.0 || agent.reproduction.kappa > 1.0)
                throw ParameterError("agent.reproduction.kappa must be in [0, 1]");
            if (agent.reproduction.sigma < 0.0 || agent.reproduction.sigma0 < 0.0)
                throw ParameterError("agent.reproduction noise must be >= 0");
        } else if (kind == "identity") {
            agent.reproduction.kind = ReproductionKind::identity;
        } else if (kind == "matched_noise") {
            agent.reproduction.kind = ReproductionKind::matched_noise;
            if (r.contains("model")) {
                const auto path = base_dir / r.at("model").get<std::string>();
                agent.reproduction.deviation =
                    deviation_model_from_json(json::parse(read_text_file(path)));
            }
        } else {
            throw ParameterError("agent.reproduction.kind: unknown model '" + kind + "'");
        }
    }
    agent.jitter_sd = get_number_or(j, "jitter_sd", 0.0);
    if (agent.jitter_sd < 0.0) throw ParameterError("agent.jitter_sd must be >= 0");
    return agent;
}

json trial_record_to_json(const TrialRecord& rec) {
    json candidates = json::array();
    for (const auto& c : rec.candidates)
        candidates.push_back({{"source", c.source}, {"melody", melody_to_json(c.melody)}});
    return {{"batch", rec.batch},
            {"condition", to_string(rec.condition)},
            {"topology", rec.topology},
            {"iteration", rec.iteration},
            {"node", rec.node},
            {"participant", rec.participant},
            {"candidates", candidates},
            {"selected", rec.selected},
            {"produced", melody_to_json(rec.produced)},
            {"t_start", rec.t_start},
            {"t_end", rec.t_end}};
}

TrialRecord trial_record_from_json(const json& j) {
    TrialRecord rec;
    rec.batch = get_int(j, "batch", "trial record");
    rec.condition = condition_from_string(get_string(j, "condition", "trial record"));
    rec.topology = get_string(j, "topology", "trial record");
    rec.iteration = get_int(j, "iteration", "trial record");
    rec.node = get_int(j, "node", "trial record");
    rec.participant = get_int(j, "participant", "trial record");
    for (const auto& c : require(j, "candidates", "trial record")) {
        CandidateRef ref;
        ref.source = get_int(c, "source", "trial candidate");
        ref.melody = melody_from_json(require(c, "melody", "trial candidate"));
        rec.candidates.push_back(std::move(ref));
    }
    rec.selected = get_int(j, "selected", "trial record");
    if (rec.selected < 0 || static_cast<std::size_t>(rec.selected) >= rec.candidates.size())
        throw DataError("trial record: selected index out of bounds");
    rec.produced = melody_from_json(require(j, "produced", "trial record"));
    rec.t_start = get_number_or(j, "t_start", 0.0);
    rec.t_end = get_number_or(j, "t_end", 0.0);
    return rec;
}

std::string trial_log_to_jsonl(const std::vector<TrialRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        out += trial_record_to_json(rec).dump();
        out += '\n';
    }
    return out;
}

std::vector<TrialRecord> trial_log_from_jsonl(const std::string& text, const std::string& source) {
    std::vector<TrialRecord> records;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(trial_record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw DataError(source + ":" + std::to_string(line_no) + ": bad trial record: " + e.what());
        } catch (const Error& e) {
            throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

json cluster_model_to_json(const ClusterModel& model) {
    json mean = json::array();
    for (Eigen::Index i = 0; i < model.feature_mean.size(); ++i) mean.push_back(model.feature_mean[i]);
    json components = json::array();
    for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < model.components.cols(); ++c)
            row.push_back(model.components(r, c));
        components.push_back(row);
    }
    json centroids = json::array();
    for (const auto& c : model.centroids) centroids.push_back(json::array({c[0], c[1]}));
    return {{"mean", mean},
            {"components", components},
            {"explained_variance_ratio",
             json::array({model.explained_variance_ratio[0], model.explained_variance_ratio[1]})},
            {"centroids", centroids},
            {"k", model.k},
            {"fit_seed", model.fit_seed}};
}

ClusterModel cluster_model_from_json(const json& j) {
    ClusterModel model;
    const json& mean = require(j, "mean", "cluster model");
    model.feature_mean.resize(static_cast<Eigen::Index>(mean.size()));
    for (std::size_t i = 0; i < mean.size(); ++i)
        model.feature_mean[static_cast<Eigen::Index>(i)] = mean[i].get<double>();
    const json& components = require(j, "components", "cluster model");
    if (components.size() != 2) throw DataError("cluster model expects 2 components");
    model.components.resize(2, static_cast<Eigen::Index>(components[0].size()));
    for (int r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < components[static_cast<std::size_t>(r)].size(); ++c)
            model.components(r, static_cast<Eigen::Index>(c)) =
                components[static_cast<std::size_t>(r)][c].get<double>();
    const json& evr = require(j, "explained_variance_ratio", "cluster model");
    model.explained_variance_ratio = {evr[0].get<double>(), evr[1].get<double>()};
    for (const auto& c : require(j, "centroids", "cluster model"))
        model.centroids.push_back({c[0].get<double>(), c[1].get<double>()});
    model.k = get_int(j, "k", "cluster model");
    if (model.k != static_cast<int>(model.centroids.size()))
        throw DataError("cluster model: k does not match centroid count");
    model.fit_seed = j.value("fit_seed", 0ULL);
    return model;
}

std::string metrics_to_csv(const std::vector<MetricsRecord>& records) {
    if (records.empty()) throw DataError("no metrics to write");
    const auto k = records.front().prevalence.size();
    std::string out = "batch,condition,topology,iteration,entropy,neighbor_similarity,pleasantness";
    for (std::size_t c = 0; c < k; ++c) out += ",prevalence_" + std::to_string(c);
    out += '\n';
    for (const auto& r : records) {
        if (r.prevalence.size() != k) throw DataError("inconsistent prevalence width in metrics");
        out += std::to_string(r.batch) + ',' + r.condition + ',' + r.topology + ',' +
               std::to_string(r.iteration) + ',' + format_double(r.entropy) + ',';
        if (r.neighbor_similarity) out += format_double(*r.neighbor_similarity);
        out += ',' + format_double(r.pleasantness);
        for (double p : r.prevalence) out += ',' + format_double(p);
        out += '\n';
    }
    return out;
}

std::vector<MetricsRecord> metrics_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("metrics CSV is empty");

    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string field;
        while (std::getline(hs, field, ',')) header.push_back(field);
    }
    if (header.size() < 8 || header[0] != "batch" || header[4] != "entropy")
        throw DataError("metrics CSV: unexpected header");
    const std::size_t k = header.size() - 7;

    std::vector<MetricsRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < header.size()) fields.push_back(""); // trailing empties
        if (fields.size() != header.size())
            throw DataError("metrics CSV line " + std::to_string(line_no) + ": wrong field count");
        try {
            MetricsRecord r;
            r.batch = std::stoi(fields[0]);
            r.condition = fields[1];
            r.topology = fields[2];
            r.iteration = std::stoi(fields[3]);
            r.entropy = std::stod(fields[4]);
            if (!fields[5].empty()) r.neighbor_similarity = std::stod(fields[5]);
            r.pleasantness = std::stod(fields[6]);
            for (std::size_t c = 0; c < k; ++c) r.prevalence.push_back(std::stod(fields[7 + c]));
            records.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw DataError("metrics CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (records.empty()) throw DataError("metrics CSV has no data rows");
    return records;
}

json study_config_to_json(const StudyConfig& config) {
    json conditions = json::array();
    for (Condition c : config.conditions) conditions.push_back(to_string(c));
    json topologies = json::array();
    for (const auto& t : config.topologies) {
        json spec = {{"kind", t.kind}, {"seed", t.seed}};
        if (t.kind == "lattice") { spec["rows"] = t.rows; spec["cols"] = t.cols; }
        if (t.kind == "random_regular") { spec["n"] = t.n; spec["degree"] = t.degree; }
        if (t.kind == "modular") { spec["cliques"] = t.cliques; spec["clique_size"] = t.clique_size; }
        if (t.kind == "disconnected") spec["n"] = t.n;
        topologies.push_back(spec);
    }
    json j = {{"study_id", config.study_id},
              {"conditions", conditions},
              {"topologies", topologies},
              {"iterations", config.iterations},
              {"batches", config.batches},
              {"base_seed", config.base_seed},
              {"mode", config.mode == RunMode::synchronous ? "synchronous" : "asynchronous"},
              {"participants", config.participants},
              {"trials_per_participant", config.trials_per_participant},
              {"linear_nodes", config.linear_nodes},
              {"agent", agent_config_to_json(config.agent)}};
    if (config.deviation_model_path) j["deviation_model"] = config.deviation_model_path->string();
    return j;
}

StudyConfig study_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    StudyConfig config;
    config.study_id = j.value("study_id", "study");

    const json& conditions = require(j, "conditions", "study config");
    if (!conditions.is_array() || conditions.empty())
        throw ParameterError("study config: 'conditions' must be a nonempty list");
    for (const auto& c : conditions) config.conditions.push_back(condition_from_string(c.get<std::string>()));

    if (j.contains("topologies")) {
        for (const auto& t : j.at("topologies")) {
            TopologySpec spec;
            spec.kind = get_string(t, "kind", "study topology");
            spec.seed = t.value("seed", 0ULL);
            if (spec.kind == "lattice") {
                spec.rows = t.value("rows", 7);
                spec.cols = t.value("cols", 7);
            } else if (spec.kind == "random_regular") {
                spec.n = t.value("n", 49);
                spec.degree = t.value("degree", 4);
            } else if (spec.kind == "modular") {
                spec.cliques = t.value("cliques", 7);
                spec.clique_size = t.value("clique_size", 7);
            } else if (spec.kind == "disconnected") {
                spec.n = t.value("n", 49);
            } else {
                throw ParameterError("study topology: unknown kind '" + spec.kind + "'");
            }
            config.topologies.push_back(spec);
        }
    }

    if (!j.contains("base_seed"))
        throw ParameterError("study config: missing field 'base_seed' (explicit seeds required)");
    if (!j.at("base_seed").is_number_integer())
        throw ParameterError("study config: 'base_seed' must be an integer");
    config.base_seed = j.at("base_seed").get<std::uint64_t>();

    config.iterations = j.value("iterations", 10);
    config.batches = j.value("batches", 3);
    config.linear_nodes = j.value("linear_nodes", 49);
    config.participants = j.value("participants", 8);
    config.trials_per_participant = j.value("trials_per_participant", 3);

    const std::string mode = j.value("mode", "synchronous");
    if (mode == "synchronous") config.mode = RunMode::synchronous;
    else if (mode == "asynchronous") config.mode = RunMode::asynchronous;
    else throw ParameterError("study config: unknown mode '" + mode + "'");

    if (j.contains("agent")) config.agent = agent_config_from_json(j.at("agent"), base_dir);

    if (j.contains("deviation_model") && !j.at("deviation_model").is_null()) {
        const auto path = base_dir / j.at("deviation_model").get<std::string>();
        if (!std::filesystem::exists(path))
            throw ParameterError("study config: deviation_model file does not exist: " + path.string());
        config.deviation_model_path = path;
    }

    validate_study_config(config);
    return config;
}

StudyConfig study_config_from_file(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParameterError("cannot parse study config " + path.string() + ": " + e.what());
    }
    return study_config_from_json(j, path.has_parent_path() ? path.parent_path()
                                                            : std::filesystem::path("."));
}

} // namespace chorusnet
