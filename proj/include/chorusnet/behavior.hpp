#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chorusnet/melody.hpp"
#include "chorusnet/rng.hpp"

namespace chorusnet {

enum class ScorerKind { smoothness, table, uniform };
enum class SelectionKind { softmax, uniform, argmax };
enum class ReproductionKind { biased_singer, matched_noise, identity };

// Proxy pleasantness judge. The smoothness kind prefers small integer-like
// intervals; the table kind looks scores up by integer-rounded intervals.
struct Scorer {
    ScorerKind kind = ScorerKind::smoothness;
    double w1 = 0.25; // weight on mean absolute interval size
    double w2 = 1.0;  // weight on mean distance from integer intervals
    std::map<std::array<int, kIntervalCount>, double> table;
    std::optional<double> table_default;
};

struct SelectionPolicy {
    SelectionKind kind = SelectionKind::softmax;
    double temperature = 1.0;
};

struct ReproductionModel {
    ReproductionKind kind = ReproductionKind::biased_singer;
    // biased_singer parameters
    double lambda = 0.5; // pull toward integer intervals, 0..1
    double kappa = 0.5;  // compression of intervals beyond 7 semitones, 0..1
    double sigma = 0.75; // per-interval motor noise, semitones
    double sigma0 = 1.0; // first-note noise, semitones
    // matched_noise parameter
    std::optional<DeviationModel> deviation;
};

// Full agent description as it appears in study configs.
struct AgentConfig {
    Scorer scorer;
    SelectionPolicy selection;
    ReproductionModel reproduction;
    double jitter_sd = 0.0; // per-participant Gaussian jitter on parameters
};

double score(const Scorer& scorer, const Melody& m);

// Softmax probabilities over scores at the given temperature (max-shifted,
// so adding a constant to all scores leaves them bit-identical).
std::vector<double> softmax_probabilities(const std::vector<double>& scores, double temperature);

// Picks a candidate index. softmax samples proportionally to
// exp(score / temperature); uniform ignores scores; argmax breaks ties
// toward the lowest index.
int select(const SelectionPolicy& policy, const Scorer& scorer,
           const std::vector<Melody>& candidates, Rng& rng);

Melody reproduce(const ReproductionModel& model, const Melody& m, Rng& rng);

// Agent parameters with Gaussian jitter applied (clamped to valid ranges).
// jitter_sd == 0 returns the config unchanged.
AgentConfig jitter_agent(const AgentConfig& base, Rng& rng);

} // namespace chorusnet
