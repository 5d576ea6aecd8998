#include "chorusnet/melody.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "chorusnet/errors.hpp"

namespace chorusnet {

Melody random_melody(Rng& rng, double lo, double hi) {
    if (!(lo < hi)) throw ParameterError("random_melody requires lo < hi");
    Melody m;
    for (double& p : m) p = rng.uniform(lo, hi);
    return m;
}

IntervalVector intervals(const Melody& m) {
    IntervalVector iv;
    for (int k = 0; k < kIntervalCount; ++k) iv[k] = m[k + 1] - m[k];
    return iv;
}

Melody rebuild(double first_pitch, const IntervalVector& iv) {
    Melody m;
    m[0] = first_pitch;
    for (int k = 0; k < kIntervalCount; ++k) m[k + 1] = m[k] + iv[k];
    return m;
}

double mean_pitch(const Melody& m) {
    double s = 0.0;
    for (double p : m) s += p;
    return s / kMelodyLength;
}

Melody center(const Melody& m) {
    const double mu = mean_pitch(m);
    Melody out = m;
    for (double& p : out) p -= mu;
    return out;
}

Melody clamp_melody(Melody m) {
    for (double& p : m) p = std::clamp(p, -kPitchClamp, kPitchClamp);
    return m;
}

bool is_finite(const Melody& m) {
    return std::all_of(m.begin(), m.end(), [](double p) { return std::isfinite(p); });
}

DeviationModel estimate_deviation_covariance(const std::vector<std::pair<Melody, Melody>>& pairs) {
    if (pairs.size() < 5)
        throw DataError("deviation covariance needs at least 5 (target, produced) pairs");

    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::MatrixX4d deltas(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& [target, produced] = pairs[static_cast<std::size_t>(i)];
        if (!is_finite(target) || !is_finite(produced))
            throw DataError("non-finite melody in deviation pair " + std::to_string(i));
        const auto ti = intervals(target);
        const auto pi = intervals(produced);
        for (int k = 0; k < kIntervalCount; ++k) deltas(i, k) = pi[k] - ti[k];
    }

    DeviationModel model;
    model.mean = deltas.colwise().mean();
    Eigen::MatrixX4d centered = deltas.rowwise() - model.mean.transpose();
    model.sigma = centered.transpose() * centered / static_cast<double>(n - 1);
    model.sigma = 0.5 * (model.sigma + model.sigma.transpose().eval());
    model.sample_count = static_cast<long>(n);
    return model;
}

Eigen::Matrix4d noise_transform(const DeviationModel& model) {
    const Eigen::Matrix4d& s = model.sigma;
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw ModelError("deviation covariance is not symmetric");

    Eigen::LLT<Eigen::Matrix4d> llt(s);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    // Semidefinite (or numerically indefinite) sigma: floor eigenvalues at 0.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(s);
    Eigen::Vector4d vals = eig.eigenvalues();
    if (vals.minCoeff() < -1e-9)
        throw ModelError("deviation covariance is not positive semidefinite");
    vals = vals.cwiseMax(0.0);
    return eig.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

Melody apply_matched_noise(const Melody& m, const Eigen::Matrix4d& transform, Rng& rng) {
    Eigen::Vector4d z;
    for (int k = 0; k < kIntervalCount; ++k) z[k] = rng.normal();
    const Eigen::Vector4d noise = transform * z;
    // Interval noise applied as a cumulative shift of the original pitches;
    // zero noise therefore reproduces the input bit for bit.
    Melody out = m;
    double cum = 0.0;
    for (int k = 0; k < kIntervalCount; ++k) {
        cum += noise[k];
        out[k + 1] = m[k + 1] + cum;
    }
    return clamp_melody(out);
}

Melody apply_matched_noise(const Melody& m, const DeviationModel& model, Rng& rng) {
    return apply_matched_noise(m, noise_transform(model), rng);
}

} // namespace chorusnet
