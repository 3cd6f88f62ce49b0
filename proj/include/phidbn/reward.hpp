#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "phidbn/coding.hpp"
#include "phidbn/core.hpp"

namespace phidbn {

/// Regression samples: reward r_t paired with the successor features x_{t+1}.
struct RewardSamples {
    std::vector<FeatureVector> xs;
    std::vector<double> rs;

    std::size_t size() const { return rs.size(); }
};

/// Pairs rewards[t] with trajectory[t + 1]; uses min(|rewards|, |trajectory|-1) samples.
RewardSamples pair_rewards(std::span<const FeatureVector> trajectory, std::span<const double> rewards);

/// Sufficient statistics of the square loss over (1, x) vectors:
/// A_ij = sum x^i x^j, b_i = sum r x^i, c = sum r^2. Index 0 is the constant bit.
struct RewardDesign {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double c = 0.0;
    std::size_t n = 0;

    std::size_t num_features() const { return b.size() == 0 ? 0 : static_cast<std::size_t>(b.size()) - 1; }
};

/// `m` is only consulted when xs is empty.
RewardDesign build_design(std::span<const FeatureVector> xs, std::span<const double> rs, std::size_t m = 0);
RewardDesign build_design_serial(std::span<const FeatureVector> xs, std::span<const double> rs,
                                 std::size_t m = 0);

struct RewardModel {
    Eigen::VectorXd w;  ///< w(0) is the intercept
    double loss = 0.0;
    double sigma2 = 0.0;
    std::size_t n = 0;

    std::size_t num_features() const { return w.size() == 0 ? 0 : static_cast<std::size_t>(w.size()) - 1; }
    /// w^T (1, x).
    double predict(const FeatureVector& x) const;

    nlohmann::json to_json() const;
    static RewardModel from_json(const nlohmann::json& j);
};

/// w^T A w - 2 b^T w + c, evaluated in extended precision.
double quadratic_loss(const RewardDesign& d, const Eigen::VectorXd& w);

/// sum_t (w^T (1, x_t) - r_t)^2 computed sample by sample.
double residual_loss(std::span<const FeatureVector> xs, std::span<const double> rs, const Eigen::VectorXd& w);

/// Moore-Penrose inverse of a symmetric PSD matrix; eigenvalues at or below
/// rel_tol * max eigenvalue are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& symmetric, double rel_tol = 1e-10);

/// Minimum-norm least-squares weights, w = pinv(A) b.
RewardModel fit_weights(const RewardDesign& d);

/// Gaussian reward code length in bits:
///   n/2 log Loss + (m+2)/2 log n - n/2 log(n e / 2 pi),
/// with Loss floored at 1/n. Zero when n = 0; may be negative.
CodeLength cl_rewards(const RewardModel& model, std::size_t m, std::size_t n);

/// Per-feature conditional reward averages. Summing them over features is
/// not a valid reward estimate; kept as a reference for that failure mode.
struct LocalRewardAverages {
    std::vector<double> when_off;
    std::vector<double> when_on;

    double summed_prediction(const FeatureVector& x) const;
};

LocalRewardAverages naive_local_reward_average(std::span<const FeatureVector> xs, std::span<const double> rs);

}  // namespace phidbn
