#include "asc/models.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "asc/random.hpp"
#include "asc/util.hpp"

namespace asc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// N x K matrix of log(w_k) + log N(x_t; mu_k, diag var_k).
Eigen::MatrixXd component_log_densities(const GmmModel& model, const Eigen::MatrixXd& x) {
  const int k = model.num_components();
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd out(n, k);
  for (int c = 0; c < k; ++c) {
    const Eigen::ArrayXd var = model.variances.row(c).array();
    const double log_norm =
        -0.5 * (model.dims() * kLog2Pi + var.log().sum()) + std::log(model.weights[c]);
    const Eigen::ArrayXXd centered =
        (x.rowwise() - model.means.row(c)).array();
    out.col(c) =
        (centered.square().rowwise() / var.transpose()).rowwise().sum() * -0.5 + log_norm;
  }
  return out;
}

Eigen::VectorXd row_log_sum_exp(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double peak = m.row(i).maxCoeff();
    out[i] = peak + std::log((m.row(i).array() - peak).exp().sum());
  }
  return out;
}

// k-means++ style seeding: first mean uniform, then each next mean drawn
// with probability proportional to squared distance from the chosen set.
Eigen::MatrixXd seed_means(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd means(k, x.cols());
  means.row(0) = x.row(static_cast<Eigen::Index>(rng.next_index(static_cast<std::size_t>(n))));
  Eigen::VectorXd min_sq =
      (x.rowwise() - means.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = min_sq.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.next_double() * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += min_sq[i];
        if (cum >= target) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.next_index(static_cast<std::size_t>(n)));
    }
    means.row(c) = x.row(pick);
    min_sq = min_sq.cwiseMin((x.rowwise() - means.row(c)).rowwise().squaredNorm());
  }
  return means;
}

struct EmRun {
  GmmModel model;
  FitReport report;
};

EmRun run_em(const Eigen::MatrixXd& x, int k, const EmConfig& config, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Rng rng(seed);

  Eigen::VectorXd global_mean = x.colwise().mean();
  Eigen::VectorXd global_var =
      ((x.rowwise() - global_mean.transpose()).array().square().colwise().sum() /
       static_cast<double>(n))
          .max(config.variance_floor)
          .matrix();

  EmRun run;
  run.report.seed = seed;
  GmmModel& m = run.model;
  m.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  m.means = seed_means(x, k, rng);
  m.variances = global_var.transpose().replicate(k, 1);

  auto& trace = run.report.log_likelihood_trace;
  while (true) {
    Eigen::MatrixXd log_dens = component_log_densities(m, x);
    Eigen::VectorXd frame_ll = row_log_sum_exp(log_dens);
    trace.push_back(frame_ll.sum());

    const std::size_t t = trace.size();
    if (t >= 2 && trace[t - 1] - trace[t - 2] < config.tol * static_cast<double>(n)) {
      run.report.converged = true;
      break;
    }
    if (run.report.iterations >= config.max_iters) break;

    // E-step: responsibilities.
    Eigen::MatrixXd resp =
        (log_dens.colwise() - frame_ll).array().exp().matrix();

    // M-step.
    Eigen::VectorXd nk = resp.colwise().sum();
    for (int c = 0; c < k; ++c) {
      if (nk[c] < 1e-10) {
        // Dead component: re-seed at a random data point, K stays fixed.
        m.means.row(c) = x.row(static_cast<Eigen::Index>(rng.next_index(static_cast<std::size_t>(n))));
        m.variances.row(c) = global_var.transpose();
        m.weights[c] = 1.0 / k;
        continue;
      }
      m.weights[c] = nk[c] / static_cast<double>(n);
      const Eigen::RowVectorXd mu = resp.col(c).transpose() * x / nk[c];
      const Eigen::RowVectorXd ex2 =
          resp.col(c).transpose() * x.array().square().matrix() / nk[c];
      m.means.row(c) = mu;
      m.variances.row(c) =
          (ex2.array() - mu.array().square()).max(config.variance_floor).matrix();
    }
    m.weights /= m.weights.sum();
    ++run.report.iterations;
    if (config.on_iteration) config.on_iteration(m);
    (void)d;
  }
  return run;
}

Eigen::Index count_distinct_rows(const Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) < x(b, j)) return true;
      if (x(a, j) > x(b, j)) return false;
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  Eigen::Index distinct = x.rows() == 0 ? 0 : 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (less(idx[i - 1], idx[i])) ++distinct;
  return distinct;
}

}  // namespace

std::pair<GmmModel, FitReport> fit_gmm(const Eigen::MatrixXd& frames, int num_components,
                                       const EmConfig& config) {
  if (num_components < 1) throw std::invalid_argument("need at least one mixture component");
  if (frames.rows() == 0) throw InputError("no frames to fit");
  if (static_cast<Eigen::Index>(num_components) > frames.rows() ||
      static_cast<Eigen::Index>(num_components) > count_distinct_rows(frames))
    throw InputError("K=" + std::to_string(num_components) +
                     " exceeds the number of distinct frames");
  if (frames.rows() < static_cast<Eigen::Index>(num_components) * frames.cols())
    std::cerr << "warning: fitting K=" << num_components << " on only " << frames.rows()
              << " frames of dimension " << frames.cols() << "\n";

  EmRun best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, config.n_init); ++r) {
    EmRun run = run_em(frames, num_components, config, config.seed + static_cast<std::uint64_t>(r));
    const double ll = run.report.log_likelihood_trace.back();
    if (ll > best_ll) {
      best_ll = ll;
      best = std::move(run);
    }
  }
  return {std::move(best.model), std::move(best.report)};
}

double gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& frames) {
  if (frames.cols() != model.dims())
    throw InputError("feature dimension " + std::to_string(frames.rows() ? frames.cols() : 0) +
                     " does not match model dimension " + std::to_string(model.dims()));
  if (frames.rows() == 0) throw InputError("empty feature matrix");
  return stable_sum(row_log_sum_exp(component_log_densities(model, frames)));
}

CentroidModel fit_centroid(const Eigen::MatrixXd& frames) {
  if (frames.rows() == 0) throw InputError("no frames to fit");
  CentroidModel m;
  m.centroid = frames.colwise().mean();
  return m;
}

ExemplarStore build_exemplar_store(const std::vector<FeatureMatrix>& per_clip_features,
                                   const std::vector<std::string>& labels, Summarization mode) {
  if (per_clip_features.empty() || per_clip_features.size() != labels.size())
    throw InputError("exemplar store needs one label per clip and at least one clip");

  const Eigen::Index d = per_clip_features.front().values.cols();
  ExemplarStore store;
  if (mode == Summarization::kClipMean) {
    store.vectors.resize(static_cast<Eigen::Index>(per_clip_features.size()), d);
    for (std::size_t i = 0; i < per_clip_features.size(); ++i) {
      store.vectors.row(static_cast<Eigen::Index>(i)) =
          stable_colmean(per_clip_features[i].values).transpose();
      store.labels.push_back(labels[i]);
    }
  } else {
    Eigen::Index total = 0;
    for (const auto& f : per_clip_features) total += f.values.rows();
    store.vectors.resize(total, d);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < per_clip_features.size(); ++i) {
      const auto& v = per_clip_features[i].values;
      store.vectors.middleRows(row, v.rows()) = v;
      for (Eigen::Index t = 0; t < v.rows(); ++t) store.labels.push_back(labels[i]);
      row += v.rows();
    }
  }
  return store;
}

}  // namespace asc
