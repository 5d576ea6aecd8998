#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chorusnet/behavior.hpp"
#include "chorusnet/graph.hpp"
#include "chorusnet/melody.hpp"

namespace chorusnet {

enum class Condition { full, no_selection, no_reproduction, linear };
enum class RunMode { synchronous, asynchronous };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

// Pitch range of the shared initial melodies.
inline constexpr double kInitLow = -15.0;
inline constexpr double kInitHigh = 15.0;

// One (condition, topology, batch) simulation cell.
struct ExperimentConfig {
    Condition condition = Condition::full;
    TopologySpec topology;
    int iterations = 10; // T
    int batch = 0;
    std::uint64_t base_seed = 0;
    AgentConfig agent;
    RunMode mode = RunMode::synchronous;
    int participants = 8;            // async pool size
    int trials_per_participant = 3;  // async retirement threshold
};

struct CandidateRef {
    int source = 0;
    Melody melody{};
};

struct TrialRecord {
    int batch = 0;
    Condition condition = Condition::full;
    std::string topology;
    int iteration = 0; // 1..T
    int node = 0;
    int participant = 0;
    std::vector<CandidateRef> candidates;
    int selected = 0;
    Melody produced{};
    double t_start = 0.0;
    double t_end = 0.0;
};

// Shared initial melodies for a batch: one uniform [-15, 15) melody per node,
// depending on the batch seed only, so every condition and topology in the
// batch starts from the same set.
std::vector<Melody> init_batch(int node_count, std::uint64_t batch_seed);

// Candidate list for node v: own melody first, then neighbor melodies in
// ascending node id (networked conditions); own melody only (linear).
std::vector<CandidateRef> candidate_set(const std::vector<Melody>& melodies, const Graph& g,
                                        int v, Condition condition);

// The selection policy / reproduction model actually used under a condition.
SelectionPolicy effective_selection(const AgentConfig& agent, Condition condition);
ReproductionModel effective_reproduction(const AgentConfig& agent, Condition condition);

// T generations; every node performs one trial per generation against the
// previous generation's snapshot.
std::vector<TrialRecord> run_synchronous(const ExperimentConfig& config, std::uint64_t batch_seed);

// Event-driven schedule in virtual time: a pool of virtual participants is
// assigned to unlocked nodes at the globally minimal completed-iteration
// count (ties to the lowest node id); trial durations are Exponential(1).
// Candidates reflect the latest completed melodies at trial start.
std::vector<TrialRecord> run_asynchronous(const ExperimentConfig& config, std::uint64_t batch_seed);

// Dispatches on config.mode.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config, std::uint64_t batch_seed);

// Seed for batch b of a study.
std::uint64_t batch_seed_for(std::uint64_t base_seed, int batch);

} // namespace chorusnet
