#pragma once

#include <map>
#include <string>
#include <vector>

#include "asc/features.hpp"
#include "asc/models.hpp"

namespace asc {

struct Prediction {
  std::string label;
  // Total log-likelihood, log-posterior, negative distance or vote count,
  // depending on the criterion. label is always the tie-broken argmax.
  std::map<std::string, double> per_class_scores;
  std::string criterion;
};

// Trained per-class models plus the feature-processing state they were
// fitted with. Immutable once assembled; classification is pure.
struct ClassifierBundle {
  std::string model_type;  // "gmm" | "centroid" | "knn"
  std::vector<GmmModel> gmms;
  std::vector<CentroidModel> centroids;
  ExemplarStore exemplars;
  int knn_k = 5;

  bool has_normalization = false;
  NormalizationStats normalization;
  bool has_pca = false;
  PcaTransform pca;

  std::map<std::string, double> priors;  // simplex over labels
  std::vector<std::string> labels;       // sorted universe
  Recipe recipe;
};

// Largest score wins; exact ties go to the lexicographically first label.
std::string argmax_label(const std::map<std::string, double>& scores);

// Maximum likelihood over per-class GMMs: score_l = log p(X | M_l).
Prediction classify_ml(const FeatureMatrix& features, const ClassifierBundle& bundle);

// Maximum a posteriori: score_l = log prior_l + log p(X | M_l). Uniform
// priors reduce exactly to classify_ml.
Prediction classify_map(const FeatureMatrix& features, const ClassifierBundle& bundle,
                        const std::map<std::string, double>& priors);

// Nearest class centroid to the clip-mean feature vector; score is the
// negative Euclidean distance.
Prediction classify_centroid(const FeatureMatrix& features, const ClassifierBundle& bundle);

// Majority label among the k exemplars nearest to the clip-mean vector.
// Count ties break by smaller summed distance, then lexicographically.
Prediction classify_knn(const FeatureMatrix& features, const ExemplarStore& store, int k);

// Most common (optionally weighted) label; ties lexicographic.
std::string frame_majority_vote(const std::vector<std::string>& frame_predictions,
                                const std::vector<double>* weights = nullptr);

// End-to-end: extract with the bundle's recipe, apply its normalization and
// PCA, then run the named criterion ("ml", "map", "centroid", "knn" or
// "vote" for per-frame ML + majority vote).
Prediction classify_clip(const AudioClip& clip, const ClassifierBundle& bundle,
                         const std::string& criterion,
                         const MelFilterbank* prebuilt_bank = nullptr);

// Criterion dispatch on already-processed features (cache path). The caller
// must have verified the recipe fingerprint.
Prediction classify_features(const FeatureMatrix& features, const ClassifierBundle& bundle,
                             const std::string& criterion);

}  // namespace asc
