#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "chorusnet/analysis.hpp"
#include "chorusnet/engine.hpp"
#include "chorusnet/graph.hpp"
#include "chorusnet/melody.hpp"
#include "chorusnet/study.hpp"

namespace chorusnet {

using json = nlohmann::json;

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

json graph_to_json(const Graph& g);
Graph graph_from_json(const json& j);

json melody_to_json(const Melody& m);
Melody melody_from_json(const json& j);

json deviation_model_to_json(const DeviationModel& model);
DeviationModel deviation_model_from_json(const json& j);

// Agent config block. Paths inside (table scorer, deviation model) are
// resolved relative to base_dir.
json agent_config_to_json(const AgentConfig& agent);
AgentConfig agent_config_from_json(const json& j, const std::filesystem::path& base_dir);

Scorer table_scorer_from_file(const std::filesystem::path& path);

json trial_record_to_json(const TrialRecord& rec);
TrialRecord trial_record_from_json(const json& j);

std::string trial_log_to_jsonl(const std::vector<TrialRecord>& records);
// `source` names the log in parse errors (reported with the line number).
std::vector<TrialRecord> trial_log_from_jsonl(const std::string& text, const std::string& source);

json cluster_model_to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const json& j);

std::string metrics_to_csv(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> metrics_from_csv(const std::string& text);

json study_config_to_json(const StudyConfig& config);
StudyConfig study_config_from_json(const json& j, const std::filesystem::path& base_dir);
StudyConfig study_config_from_file(const std::filesystem::path& path);

} // namespace chorusnet
