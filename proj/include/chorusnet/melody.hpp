#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "chorusnet/rng.hpp"

namespace chorusnet {

inline constexpr int kMelodyLength = 5;
inline constexpr int kIntervalCount = 4;

// Hard bound on singable pitch, in semitones relative to the reference.
// Productions are clamped to this range note by note.
inline constexpr double kPitchClamp = 30.0;

// Five pitches in semitones (MIDI-style scale, relative reference).
using Melody = std::array<double, kMelodyLength>;

// Four consecutive pitch differences.
using IntervalVector = std::array<double, kIntervalCount>;

// Gaussian model of interval deviations between target and produced
// melodies. `mean` is kept for reporting; noise is always drawn at mean zero.
struct DeviationModel {
    Eigen::Matrix4d sigma = Eigen::Matrix4d::Zero();
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    long sample_count = 0;
};

// 5 pitches i.i.d. uniform on [lo, hi). Requires lo < hi.
Melody random_melody(Rng& rng, double lo, double hi);

IntervalVector intervals(const Melody& m);

// Rebuilds pitches from a first pitch and interval vector (telescoping sum),
// without clamping.
Melody rebuild(double first_pitch, const IntervalVector& iv);

// Shifts the melody so its mean pitch is zero; intervals are unchanged.
Melody center(const Melody& m);

double mean_pitch(const Melody& m);

Melody clamp_melody(Melody m);

bool is_finite(const Melody& m);

// Sample covariance (denominator n-1) of produced-minus-target interval
// deviations, with the sample mean retained as metadata. Needs >= 5 pairs.
DeviationModel estimate_deviation_covariance(const std::vector<std::pair<Melody, Melody>>& pairs);

// Factor used to draw noise: Cholesky of sigma, falling back to an
// eigenvalue-floored square root when sigma is only semidefinite.
// Throws ModelError if sigma is asymmetric or indefinite beyond tolerance.
Eigen::Matrix4d noise_transform(const DeviationModel& model);

// Keeps the first pitch, perturbs the intervals with N(0, sigma) noise,
// rebuilds cumulatively, clamps.
Melody apply_matched_noise(const Melody& m, const DeviationModel& model, Rng& rng);

Melody apply_matched_noise(const Melody& m, const Eigen::Matrix4d& transform, Rng& rng);

} // namespace chorusnet
