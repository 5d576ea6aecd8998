#include <doctest.h>

#include <filesystem>

#include "chorusnet/errors.hpp"
#include "chorusnet/serialize.hpp"
#include "chorusnet/sha256.hpp"

using namespace chorusnet;

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
}

TEST_CASE("graph JSON round trip") {
    const Graph g = make_modular(7, 7, 3);
    const Graph back = graph_from_json(graph_to_json(g));
    CHECK(back.n == g.n);
    CHECK(back.edges == g.edges);
    CHECK(back.kind == g.kind);
    CHECK(back.seed == g.seed);

    // Edges in the file are sorted ascending.
    const json j = graph_to_json(g);
    std::pair<int, int> prev{-1, -1};
    for (const auto& e : j.at("edges")) {
        const std::pair<int, int> cur{e[0].get<int>(), e[1].get<int>()};
        CHECK(prev < cur);
        prev = cur;
    }
}

TEST_CASE("melody and deviation model round trips") {
    const Melody m = {0.25, -3.125, 14.0, 0.1, -0.3};
    CHECK(melody_from_json(melody_to_json(m)) == m);
    CHECK_THROWS_AS(melody_from_json(json::array({1, 2, 3})), DataError);

    DeviationModel model;
    model.sigma << 1.0, 0.3, 0.1, 0.0,
                   0.3, 0.8, 0.2, 0.1,
                   0.1, 0.2, 0.6, 0.2,
                   0.0, 0.1, 0.2, 0.9;
    model.mean << 0.1, -0.2, 0.0, 0.05;
    model.sample_count = 123;
    const DeviationModel back = deviation_model_from_json(deviation_model_to_json(model));
    CHECK((back.sigma - model.sigma).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.mean - model.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.sample_count == 123);
}

TEST_CASE("trial log JSONL round trip and corrupt-line reporting") {
    TrialRecord rec;
    rec.batch = 1;
    rec.condition = Condition::no_selection;
    rec.topology = "lattice";
    rec.iteration = 4;
    rec.node = 12;
    rec.participant = 3;
    rec.candidates = {{12, {0.1, 0.2, 0.3, 0.4, 0.5}}, {13, {1, 2, 3, 4, 5}}};
    rec.selected = 1;
    rec.produced = {1.0, 2.0, 3.5, 4.25, 5.125};
    rec.t_start = 3.0;
    rec.t_end = 4.0;

    const std::string text = trial_log_to_jsonl({rec, rec});
    const auto back = trial_log_from_jsonl(text, "log.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].condition == Condition::no_selection);
    CHECK(back[0].candidates.size() == 2);
    CHECK(back[0].candidates[1].melody == rec.candidates[1].melody);
    CHECK(back[0].produced == rec.produced);
    CHECK(trial_log_to_jsonl(back) == text);

    const std::string corrupt = text + "{not json\n";
    try {
        trial_log_from_jsonl(corrupt, "log.jsonl");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("log.jsonl:3") != std::string::npos);
    }
}

TEST_CASE("full-precision floats survive the JSONL round trip") {
    TrialRecord rec;
    rec.topology = "lattice";
    rec.iteration = 1;
    rec.candidates = {{0, {0.1 + 0.2, 1.0 / 3.0, -14.999999999999998, 2e-13, 29.999999999999996}}};
    rec.produced = rec.candidates[0].melody;
    const auto back = trial_log_from_jsonl(trial_log_to_jsonl({rec}), "x");
    CHECK(back[0].produced == rec.produced);
}

TEST_CASE("cluster model round trip") {
    ClusterModel model;
    model.feature_mean.resize(5);
    model.feature_mean << 0.1, 0.2, 0.3, 0.4, 0.5;
    model.components.resize(2, 5);
    model.components << 1, 0, 0, 0, 0,
                        0, 1, 0, 0, 0;
    model.explained_variance_ratio = {0.4, 0.3};
    model.centroids = {{0, 0}, {1, 1}, {2, 2}};
    model.k = 3;
    model.fit_seed = 55;
    const ClusterModel back = cluster_model_from_json(cluster_model_to_json(model));
    CHECK(back.k == 3);
    CHECK(back.centroids == model.centroids);
    CHECK((back.feature_mean - model.feature_mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.components - model.components).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.fit_seed == 55);
}

TEST_CASE("metrics CSV round trip with absent similarity") {
    std::vector<MetricsRecord> rows;
    MetricsRecord a;
    a.batch = 0;
    a.condition = "full";
    a.topology = "lattice";
    a.iteration = 2;
    a.entropy = 1.25;
    a.neighbor_similarity = 0.5;
    a.pleasantness = -0.375;
    a.prevalence = {0.25, 0.75};
    MetricsRecord b = a;
    b.condition = "linear";
    b.topology = "disconnected";
    b.neighbor_similarity.reset();
    rows = {a, b};

    const std::string csv = metrics_to_csv(rows);
    CHECK(csv.rfind("batch,condition,topology,iteration,entropy,neighbor_similarity,pleasantness,"
                    "prevalence_0,prevalence_1\n", 0) == 0);
    const auto back = metrics_from_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].neighbor_similarity.has_value());
    CHECK(*back[0].neighbor_similarity == 0.5);
    CHECK_FALSE(back[1].neighbor_similarity.has_value());
    CHECK(back[1].prevalence == b.prevalence);
    CHECK(metrics_to_csv(back) == csv);

    CHECK_THROWS_AS(metrics_from_csv("batch,condition\n"), DataError);
    CHECK_THROWS_AS(metrics_from_csv(csv.substr(0, csv.find('\n') + 1)), DataError);
}

TEST_CASE("study config validation messages") {
    const json good = {
        {"study_id", "t"},
        {"conditions", json::array({"full", "linear"})},
        {"topologies", json::array({{{"kind", "lattice"}, {"rows", 7}, {"cols", 7}}})},
        {"base_seed", 42}};
    const StudyConfig config = study_config_from_json(good, ".");
    CHECK(config.conditions.size() == 2);
    CHECK(config.iterations == 10);
    CHECK(config.batches == 3);

    json missing_seed = good;
    missing_seed.erase("base_seed");
    try {
        study_config_from_json(missing_seed, ".");
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("base_seed") != std::string::npos);
    }

    json bad_condition = good;
    bad_condition["conditions"] = json::array({"full", "bogus"});
    CHECK_THROWS_AS(study_config_from_json(bad_condition, "."), ParameterError);

    json no_topologies = good;
    no_topologies["topologies"] = json::array();
    CHECK_THROWS_AS(study_config_from_json(no_topologies, "."), ParameterError);

    json duplicate = good;
    duplicate["topologies"] =
        json::array({{{"kind", "lattice"}}, {{"kind", "lattice"}, {"rows", 5}, {"cols", 5}}});
    CHECK_THROWS_AS(study_config_from_json(duplicate, "."), ParameterError);

    // Config echo round trip.
    const json echo = study_config_to_json(config);
    const StudyConfig back = study_config_from_json(echo, ".");
    CHECK(back.base_seed == config.base_seed);
    CHECK(back.conditions == config.conditions);
    CHECK(back.agent.scorer.w1 == config.agent.scorer.w1);
}

TEST_CASE("agent config parsing applies spec defaults") {
    const AgentConfig agent = agent_config_from_json(json::object(), ".");
    CHECK(agent.scorer.kind == ScorerKind::smoothness);
    CHECK(agent.scorer.w1 == 0.25);
    CHECK(agent.scorer.w2 == 1.0);
    CHECK(agent.selection.kind == SelectionKind::softmax);
    CHECK(agent.selection.temperature == 1.0);
    CHECK(agent.reproduction.kind == ReproductionKind::biased_singer);
    CHECK(agent.reproduction.lambda == 0.5);
    CHECK(agent.reproduction.kappa == 0.5);
    CHECK(agent.reproduction.sigma == 0.75);
    CHECK(agent.reproduction.sigma0 == 1.0);
    CHECK(agent.jitter_sd == 0.0);

    CHECK_THROWS_AS(
        agent_config_from_json({{"selection", {{"kind", "softmax"}, {"temperature", 0.0}}}}, "."),
        ParameterError);
    CHECK_THROWS_AS(
        agent_config_from_json({{"reproduction", {{"kind", "biased_singer"}, {"lambda", 2.0}}}}, "."),
        ParameterError);
}

TEST_CASE("table scorer file loading") {
    const auto dir = std::filesystem::temp_directory_path() / "chorusnet_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / "table_scorer.json";
    write_text_file(path, R"([
      {"intervals": [2, 2, 1, 2], "score": 0.9},
      {"intervals": [0, 0, 0, 0], "score": 0.1}
    ])");
    const Scorer s = table_scorer_from_file(path);
    CHECK(s.kind == ScorerKind::table);
    CHECK(s.table.size() == 2);
    CHECK(s.table.at({2, 2, 1, 2}) == 0.9);

    write_text_file(path, R"({"not": "a list"})");
    CHECK_THROWS_AS(table_scorer_from_file(path), DataError);
}

TEST_CASE("format_double emits shortest round-trip decimals") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}
