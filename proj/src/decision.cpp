#include "asc/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "asc/util.hpp"

namespace asc {

namespace {

void require_frames(const FeatureMatrix& features) {
  if (features.values.rows() == 0) throw InputError("empty feature matrix");
}

Eigen::VectorXd clip_summary(const FeatureMatrix& features) {
  return stable_colmean(features.values);
}

}  // namespace

std::string argmax_label(const std::map<std::string, double>& scores) {
  if (scores.empty()) throw InputError("no scores to take argmax over");
  auto best = scores.begin();
  for (auto it = std::next(scores.begin()); it != scores.end(); ++it)
    if (it->second > best->second) best = it;  // map order makes ties lexicographic
  return best->first;
}

Prediction classify_ml(const FeatureMatrix& features, const ClassifierBundle& bundle) {
  require_frames(features);
  if (bundle.gmms.empty()) throw InputError("bundle has no GMMs for the ml criterion");
  Prediction pred;
  pred.criterion = "ml";
  for (const auto& model : bundle.gmms)
    pred.per_class_scores[model.class_label] = gmm_log_likelihood(model, features);
  pred.label = argmax_label(pred.per_class_scores);
  return pred;
}

Prediction classify_map(const FeatureMatrix& features, const ClassifierBundle& bundle,
                        const std::map<std::string, double>& priors) {
  require_frames(features);
  if (bundle.gmms.empty()) throw InputError("bundle has no GMMs for the map criterion");
  double prior_mass = 0.0;
  for (const auto& model : bundle.gmms) {
    auto it = priors.find(model.class_label);
    if (it == priors.end())
      throw InputError("no prior given for class '" + model.class_label + "'");
    if (it->second < 0.0) throw InputError("negative prior for class '" + model.class_label + "'");
    prior_mass += it->second;
  }
  if (prior_mass <= 0.0) throw InputError("prior mass is zero on every class");

  Prediction pred;
  pred.criterion = "map";
  for (const auto& model : bundle.gmms) {
    const double prior = priors.at(model.class_label);
    const double log_prior =
        prior > 0.0 ? std::log(prior) : -std::numeric_limits<double>::infinity();
    pred.per_class_scores[model.class_label] =
        log_prior + gmm_log_likelihood(model, features);
  }
  pred.label = argmax_label(pred.per_class_scores);
  return pred;
}

Prediction classify_centroid(const FeatureMatrix& features, const ClassifierBundle& bundle) {
  require_frames(features);
  if (bundle.centroids.empty()) throw InputError("bundle has no centroids");
  const Eigen::VectorXd summary = clip_summary(features);
  Prediction pred;
  pred.criterion = "centroid";
  for (const auto& model : bundle.centroids)
    pred.per_class_scores[model.class_label] = -(summary - model.centroid).norm();
  pred.label = argmax_label(pred.per_class_scores);
  return pred;
}

Prediction classify_knn(const FeatureMatrix& features, const ExemplarStore& store, int k) {
  require_frames(features);
  if (store.size() == 0) throw InputError("empty exemplar store");
  if (k < 1 || static_cast<Eigen::Index>(k) > store.size())
    throw InputError("k must be in [1, store size]");

  const Eigen::VectorXd query = clip_summary(features);
  const Eigen::VectorXd dist = (store.vectors.rowwise() - query.transpose()).rowwise().norm();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(store.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b]; });

  std::map<std::string, double> votes;       // label -> count among the k nearest
  std::map<std::string, double> summed_dist;
  for (int i = 0; i < k; ++i) {
    const auto& label = store.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    votes[label] += 1.0;
    summed_dist[label] += dist[order[static_cast<std::size_t>(i)]];
  }

  Prediction pred;
  pred.criterion = "knn";
  pred.per_class_scores = votes;
  auto best = votes.begin();
  for (auto it = std::next(votes.begin()); it != votes.end(); ++it) {
    if (it->second > best->second ||
        (it->second == best->second && summed_dist.at(it->first) < summed_dist.at(best->first)))
      best = it;
  }
  pred.label = best->first;
  return pred;
}

std::string frame_majority_vote(const std::vector<std::string>& frame_predictions,
                                const std::vector<double>* weights) {
  if (frame_predictions.empty()) throw InputError("majority vote needs at least one prediction");
  if (weights && weights->size() != frame_predictions.size())
    throw InputError("weights must match the number of predictions");
  std::map<std::string, double> counts;
  for (std::size_t i = 0; i < frame_predictions.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    if (w < 0.0) throw InputError("vote weights must be non-negative");
    counts[frame_predictions[i]] += w;
  }
  return argmax_label(counts);
}

namespace {

// Per-frame ML labels followed by an unweighted majority vote.
Prediction classify_frame_vote(const FeatureMatrix& features, const ClassifierBundle& bundle) {
  require_frames(features);
  if (bundle.gmms.empty()) throw InputError("bundle has no GMMs for the vote criterion");
  std::vector<std::string> frame_labels;
  frame_labels.reserve(static_cast<std::size_t>(features.values.rows()));
  for (Eigen::Index t = 0; t < features.values.rows(); ++t) {
    std::map<std::string, double> scores;
    for (const auto& model : bundle.gmms)
      scores[model.class_label] =
          gmm_log_likelihood(model, Eigen::MatrixXd(features.values.row(t)));
    frame_labels.push_back(argmax_label(scores));
  }
  Prediction pred;
  pred.criterion = "vote";
  for (const auto& model : bundle.gmms) pred.per_class_scores[model.class_label] = 0.0;
  for (const auto& label : frame_labels) pred.per_class_scores[label] += 1.0;
  pred.label = frame_majority_vote(frame_labels);
  return pred;
}

}  // namespace

Prediction classify_features(const FeatureMatrix& features, const ClassifierBundle& bundle,
                             const std::string& criterion) {
  if (criterion == "ml") return classify_ml(features, bundle);
  if (criterion == "map") return classify_map(features, bundle, bundle.priors);
  if (criterion == "centroid") return classify_centroid(features, bundle);
  if (criterion == "knn") return classify_knn(features, bundle.exemplars, bundle.knn_k);
  if (criterion == "vote") return classify_frame_vote(features, bundle);
  throw InputError("unknown criterion '" + criterion + "'");
}

Prediction classify_clip(const AudioClip& clip, const ClassifierBundle& bundle,
                         const std::string& criterion, const MelFilterbank* prebuilt_bank) {
  FeatureMatrix features = extract(clip, bundle.recipe, prebuilt_bank);
  if (bundle.has_normalization)
    features = apply_normalization(features, bundle.normalization);
  if (bundle.has_pca) features = apply_pca(features, bundle.pca);
  return classify_features(features, bundle, criterion);
}

}  // namespace asc
