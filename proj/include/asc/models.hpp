#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "asc/features.hpp"

namespace asc {

// Diagonal-covariance Gaussian mixture for one class.
struct GmmModel {
  Eigen::VectorXd weights;    // K, simplex
  Eigen::MatrixXd means;      // K x d
  Eigen::MatrixXd variances;  // K x d diagonal entries, floored
  std::string class_label;

  int num_components() const { return static_cast<int>(weights.size()); }
  int dims() const { return static_cast<int>(means.cols()); }
};

struct EmConfig {
  double tol = 1e-5;  // per-frame log-likelihood gain
  int max_iters = 200;
  int n_init = 3;  // restart r uses seed + r; the best final likelihood wins
  double variance_floor = 1e-4;
  std::uint64_t seed = 0;
  // Test hook, called after every EM update with the current parameters.
  std::function<void(const GmmModel&)> on_iteration;
};

struct FitReport {
  std::vector<double> log_likelihood_trace;  // ends at the returned parameters
  int iterations = 0;                        // EM updates performed
  bool converged = false;
  std::uint64_t seed = 0;
};

// EM fit of a K-component mixture on pooled class frames (rows). Means are
// seeded k-means++ style from data points; a component whose responsibility
// mass dies is re-seeded at a random data point so K stays fixed.
std::pair<GmmModel, FitReport> fit_gmm(const Eigen::MatrixXd& frames, int num_components,
                                       const EmConfig& config);

// Total log-likelihood sum_t log sum_k w_k N(x_t; mu_k, Sigma_k), log-sum-exp
// stabilized. The per-frame terms are accumulated in sorted order, so the
// value is independent of frame order.
double gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& frames);
inline double gmm_log_likelihood(const GmmModel& model, const FeatureMatrix& features) {
  return gmm_log_likelihood(model, features.values);
}

struct CentroidModel {
  Eigen::VectorXd centroid;
  std::string class_label;
};

CentroidModel fit_centroid(const Eigen::MatrixXd& frames);

enum class Summarization { kFrameLevel, kClipMean };

struct ExemplarStore {
  Eigen::MatrixXd vectors;          // one exemplar per row
  std::vector<std::string> labels;  // parallel to rows

  Eigen::Index size() const { return vectors.rows(); }
};

// Stores labelled training vectors for nearest-neighbour criteria: every
// frame in kFrameLevel mode, one mean vector per clip in kClipMean mode.
ExemplarStore build_exemplar_store(const std::vector<FeatureMatrix>& per_clip_features,
                                   const std::vector<std::string>& labels, Summarization mode);

}  // namespace asc
