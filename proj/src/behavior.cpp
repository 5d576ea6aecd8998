#include "chorusnet/behavior.hpp"

#include <algorithm>
#include <cmath>

#include "chorusnet/errors.hpp"

namespace chorusnet {

namespace {

std::array<int, kIntervalCount> quantized_intervals(const Melody& m) {
    const auto iv = intervals(m);
    std::array<int, kIntervalCount> q{};
    for (int k = 0; k < kIntervalCount; ++k)
        q[k] = static_cast<int>(std::lround(iv[k]));
    return q;
}

// Compresses the part of an interval beyond 7 semitones by (1 - kappa).
double compress_interval(double i, double kappa) {
    const double mag = std::abs(i);
    if (kappa == 0.0 || mag <= 7.0) return i;
    return std::copysign(7.0 + (mag - 7.0) * (1.0 - kappa), i);
}

} // namespace

double score(const Scorer& scorer, const Melody& m) {
    switch (scorer.kind) {
    case ScorerKind::uniform:
        return 0.0;
    case ScorerKind::smoothness: {
        const auto iv = intervals(m);
        double abs_sum = 0.0, frac_sum = 0.0;
        for (double i : iv) {
            abs_sum += std::abs(i);
            frac_sum += std::abs(i - std::round(i));
        }
        return -(scorer.w1 / kIntervalCount) * abs_sum - (scorer.w2 / kIntervalCount) * frac_sum;
    }
    case ScorerKind::table: {
        const auto it = scorer.table.find(quantized_intervals(m));
        if (it != scorer.table.end()) return it->second;
        if (scorer.table_default) return *scorer.table_default;
        throw ModelError("scorer table has no entry for melody and no default score");
    }
    }
    throw ModelError("unknown scorer kind");
}

std::vector<double> softmax_probabilities(const std::vector<double>& scores, double temperature) {
    if (scores.empty()) throw ParameterError("softmax over empty score list");
    if (!(temperature > 0.0)) throw ParameterError("softmax temperature must be positive");
    const double max_score = *std::max_element(scores.begin(), scores.end());
    std::vector<double> probs(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        probs[i] = std::exp((scores[i] - max_score) / temperature);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

int select(const SelectionPolicy& policy, const Scorer& scorer,
           const std::vector<Melody>& candidates, Rng& rng) {
    if (candidates.empty()) throw ParameterError("cannot select from an empty candidate list");
    const auto k = candidates.size();

    switch (policy.kind) {
    case SelectionKind::uniform:
        return static_cast<int>(rng.uniform_index(k));
    case SelectionKind::argmax: {
        int best = 0;
        double best_score = score(scorer, candidates[0]);
        for (std::size_t i = 1; i < k; ++i) {
            const double s = score(scorer, candidates[i]);
            if (s > best_score) {
                best = static_cast<int>(i);
                best_score = s;
            }
        }
        return best;
    }
    case SelectionKind::softmax: {
        std::vector<double> scores(k);
        for (std::size_t i = 0; i < k; ++i) scores[i] = score(scorer, candidates[i]);
        const auto probs = softmax_probabilities(scores, policy.temperature);
        const double u = rng.uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            cum += probs[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(k - 1); // guard against rounding in the CDF
    }
    }
    throw ParameterError("unknown selection kind");
}

Melody reproduce(const ReproductionModel& model, const Melody& m, Rng& rng) {
    switch (model.kind) {
    case ReproductionKind::identity:
        return m;
    case ReproductionKind::matched_noise: {
        if (!model.deviation) throw ModelError("matched_noise reproduction needs a deviation model");
        return apply_matched_noise(m, *model.deviation, rng);
    }
    case ReproductionKind::biased_singer: {
        const auto iv = intervals(m);
        // Per-interval adjustment: leap compression, pull toward integers,
        // then motor noise. Applied as cumulative pitch shifts so that an
        // all-zero parameterization reproduces the input exactly (pre-clamp).
        Melody out = m;
        double cum = model.sigma0 * rng.normal();
        out[0] = m[0] + cum;
        for (int k = 0; k < kIntervalCount; ++k) {
            const double compressed = compress_interval(iv[k], model.kappa);
            double delta = compressed - iv[k];
            delta += model.lambda * (std::round(compressed) - compressed);
            delta += model.sigma * rng.normal();
            cum += delta;
            out[k + 1] = m[k + 1] + cum;
        }
        return clamp_melody(out);
    }
    }
    throw ModelError("unknown reproduction kind");
}

namespace {

double jittered(double value, double sd, double lo, double hi, Rng& rng) {
    return std::clamp(value + sd * rng.normal(), lo, hi);
}

} // namespace

AgentConfig jitter_agent(const AgentConfig& base, Rng& rng) {
    if (base.jitter_sd == 0.0) return base;
    AgentConfig out = base;
    const double sd = base.jitter_sd;
    if (out.selection.kind == SelectionKind::softmax)
        out.selection.temperature = jittered(out.selection.temperature, sd, 1e-3, 100.0, rng);
    if (out.reproduction.kind == ReproductionKind::biased_singer) {
        out.reproduction.lambda = jittered(out.reproduction.lambda, sd, 0.0, 1.0, rng);
        out.reproduction.kappa = jittered(out.reproduction.kappa, sd, 0.0, 1.0, rng);
        out.reproduction.sigma = jittered(out.reproduction.sigma, sd, 0.0, 10.0, rng);
        out.reproduction.sigma0 = jittered(out.reproduction.sigma0, sd, 0.0, 10.0, rng);
    }
    return out;
}

} // namespace chorusnet
