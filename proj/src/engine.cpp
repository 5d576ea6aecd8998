#include "chorusnet/engine.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <queue>

#include "chorusnet/errors.hpp"

namespace chorusnet {

std::string to_string(Condition c) {
    switch (c) {
    case Condition::full: return "full";
    case Condition::no_selection: return "no_selection";
    case Condition::no_reproduction: return "no_reproduction";
    case Condition::linear: return "linear";
    }
    return "?";
}

Condition condition_from_string(const std::string& s) {
    if (s == "full") return Condition::full;
    if (s == "no_selection") return Condition::no_selection;
    if (s == "no_reproduction") return Condition::no_reproduction;
    if (s == "linear") return Condition::linear;
    throw ParameterError("unknown condition '" + s + "'");
}

std::vector<Melody> init_batch(int node_count, std::uint64_t batch_seed) {
    Rng rng(seed_combine(batch_seed, "init_batch"));
    std::vector<Melody> melodies;
    melodies.reserve(static_cast<std::size_t>(node_count));
    for (int v = 0; v < node_count; ++v) melodies.push_back(random_melody(rng, kInitLow, kInitHigh));
    return melodies;
}

std::vector<CandidateRef> candidate_set(const std::vector<Melody>& melodies, const Graph& g,
                                        int v, Condition condition) {
    if (v < 0 || v >= g.n) throw ParameterError("candidate_set: node out of range");
    std::vector<CandidateRef> out;
    out.push_back({v, melodies[static_cast<std::size_t>(v)]});
    if (condition == Condition::linear) return out;
    for (int u : g.adjacency[v]) out.push_back({u, melodies[static_cast<std::size_t>(u)]});
    return out;
}

SelectionPolicy effective_selection(const AgentConfig& agent, Condition condition) {
    if (condition == Condition::no_selection) return {SelectionKind::uniform, 1.0};
    return agent.selection;
}

ReproductionModel effective_reproduction(const AgentConfig& agent, Condition condition) {
    if (condition == Condition::no_reproduction) {
        if (agent.reproduction.kind == ReproductionKind::matched_noise && agent.reproduction.deviation)
            return agent.reproduction;
        throw ParameterError("no_reproduction condition requires a matched-noise deviation model");
    }
    return agent.reproduction;
}

namespace {

struct CellSetup {
    Graph graph;
    std::vector<Melody> initial;
    SelectionPolicy selection;
    ReproductionModel reproduction;
    std::uint64_t dynamics_seed;
};

CellSetup prepare_cell(const ExperimentConfig& config, std::uint64_t batch_seed) {
    CellSetup cell;
    TopologySpec spec = config.topology;
    if (config.condition == Condition::linear) {
        // The linear baseline keeps the study's node count but drops all edges.
        spec.kind = "disconnected";
    }
    cell.graph = make_topology(spec);
    cell.initial = init_batch(cell.graph.n, batch_seed);
    cell.selection = effective_selection(config.agent, config.condition);
    cell.reproduction = effective_reproduction(config.agent, config.condition);

    std::uint64_t s = seed_combine(batch_seed, "dynamics");
    s = seed_combine(s, to_string(config.condition));
    s = seed_combine(s, cell.graph.kind);
    s = seed_combine(s, config.topology.seed);
    cell.dynamics_seed = s;
    return cell;
}

std::vector<Melody> candidate_melodies(const std::vector<CandidateRef>& refs) {
    std::vector<Melody> ms;
    ms.reserve(refs.size());
    for (const auto& r : refs) ms.push_back(r.melody);
    return ms;
}

// Per-participant agent; identical to the config unless jitter is enabled.
AgentConfig participant_agent(const AgentConfig& base, std::uint64_t batch_seed, int participant) {
    if (base.jitter_sd == 0.0) return base;
    Rng rng(seed_combine(seed_combine(batch_seed, "participant"), static_cast<std::uint64_t>(participant)));
    return jitter_agent(base, rng);
}

} // namespace

std::uint64_t batch_seed_for(std::uint64_t base_seed, int batch) {
    return seed_combine(seed_combine(base_seed, "batch"), static_cast<std::uint64_t>(batch));
}

std::vector<TrialRecord> run_synchronous(const ExperimentConfig& config, std::uint64_t batch_seed) {
    if (config.iterations < 1) throw ParameterError("iterations must be >= 1");
    CellSetup cell = prepare_cell(config, batch_seed);
    Rng rng(cell.dynamics_seed);

    std::vector<Melody> current = cell.initial;
    std::vector<Melody> next(current.size());
    std::vector<TrialRecord> log;
    log.reserve(static_cast<std::size_t>(config.iterations) * current.size());

    for (int t = 1; t <= config.iterations; ++t) {
        for (int v = 0; v < cell.graph.n; ++v) {
            TrialRecord rec;
            rec.batch = config.batch;
            rec.condition = config.condition;
            rec.topology = cell.graph.kind;
            rec.iteration = t;
            rec.node = v;
            rec.participant = v; // one persistent agent per node in sync mode
            rec.candidates = candidate_set(current, cell.graph, v, config.condition);
            const AgentConfig agent = participant_agent(config.agent, batch_seed, rec.participant);
            const auto sel = effective_selection(agent, config.condition);
            const auto rep = effective_reproduction(agent, config.condition);
            rec.selected = select(sel, agent.scorer, candidate_melodies(rec.candidates), rng);
            rec.produced = reproduce(rep, rec.candidates[static_cast<std::size_t>(rec.selected)].melody, rng);
            rec.t_start = t - 1;
            rec.t_end = t;
            next[static_cast<std::size_t>(v)] = rec.produced;
            log.push_back(std::move(rec));
        }
        current.swap(next);
    }
    return log;
}

std::vector<TrialRecord> run_asynchronous(const ExperimentConfig& config, std::uint64_t batch_seed) {
    if (config.iterations < 1) throw ParameterError("iterations must be >= 1");
    if (config.participants < 1) throw ParameterError("participant pool must be >= 1");
    if (config.trials_per_participant < 1) throw ParameterError("trials per participant must be >= 1");

    CellSetup cell = prepare_cell(config, batch_seed);
    Rng rng(cell.dynamics_seed);
    const int n = cell.graph.n;
    const int T = config.iterations;

    std::vector<Melody> melodies = cell.initial; // latest completed per node
    std::vector<int> completed(static_cast<std::size_t>(n), 0);
    std::vector<bool> locked(static_cast<std::size_t>(n), false);

    struct Running {
        double t_end;
        std::uint64_t order; // tie-break: assignment order
        int node;
        int participant;
        TrialRecord record;
        bool operator>(const Running& o) const {
            return t_end != o.t_end ? t_end > o.t_end : order > o.order;
        }
    };
    std::priority_queue<Running, std::vector<Running>, std::greater<>> running;

    std::deque<int> free_pool;
    for (int p = 0; p < config.participants; ++p) free_pool.push_back(p);
    int next_participant = config.participants;
    std::vector<int> trials_done; // indexed by participant id
    trials_done.resize(static_cast<std::size_t>(config.participants), 0);

    double now = 0.0;
    std::uint64_t order = 0;
    std::vector<TrialRecord> log;
    log.reserve(static_cast<std::size_t>(T) * static_cast<std::size_t>(n));

    auto all_done = [&] {
        return std::all_of(completed.begin(), completed.end(), [T](int c) { return c >= T; });
    };

    // Nodes are only assignable at the global minimum completed count, which
    // keeps the completed-iteration spread across nodes at most 1.
    auto next_assignable = [&]() -> int {
        int min_completed = T;
        for (int v = 0; v < n; ++v)
            if (completed[v] < min_completed) min_completed = completed[v];
        if (min_completed >= T) return -1;
        for (int v = 0; v < n; ++v)
            if (!locked[v] && completed[v] == min_completed) return v;
        return -1;
    };

    auto try_assign = [&] {
        while (!free_pool.empty()) {
            const int v = next_assignable();
            if (v < 0) break;
            const int p = free_pool.front();
            free_pool.pop_front();
            locked[static_cast<std::size_t>(v)] = true;

            TrialRecord rec;
            rec.batch = config.batch;
            rec.condition = config.condition;
            rec.topology = cell.graph.kind;
            rec.iteration = completed[static_cast<std::size_t>(v)] + 1;
            rec.node = v;
            rec.participant = p;
            rec.candidates = candidate_set(melodies, cell.graph, v, config.condition);
            const AgentConfig agent = participant_agent(config.agent, batch_seed, p);
            const auto sel = effective_selection(agent, config.condition);
            const auto rep = effective_reproduction(agent, config.condition);
            rec.selected = select(sel, agent.scorer, candidate_melodies(rec.candidates), rng);
            rec.produced = reproduce(rep, rec.candidates[static_cast<std::size_t>(rec.selected)].melody, rng);
            rec.t_start = now;
            rec.t_end = now + rng.exponential(1.0);
            running.push({rec.t_end, order++, v, p, std::move(rec)});
        }
    };

    try_assign();
    while (!running.empty()) {
        Running done = running.top();
        running.pop();
        now = done.t_end;

        const auto v = static_cast<std::size_t>(done.node);
        melodies[v] = done.record.produced;
        completed[v] += 1;
        locked[v] = false;
        log.push_back(std::move(done.record));

        auto& count = trials_done[static_cast<std::size_t>(done.participant)];
        count += 1;
        if (count >= config.trials_per_participant) {
            // Participant retires; a fresh one joins the pool.
            free_pool.push_back(next_participant++);
            trials_done.push_back(0);
        } else {
            free_pool.push_back(done.participant);
        }
        try_assign();
    }

    if (!all_done()) throw Error("asynchronous scheduler stalled before completion");

    // Logs are keyed by (node, iteration) for analysis; report them in
    // completion-time order, which the loop above already produces.
    return log;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config, std::uint64_t batch_seed) {
    return config.mode == RunMode::synchronous ? run_synchronous(config, batch_seed)
                                               : run_asynchronous(config, batch_seed);
}

} // namespace chorusnet
