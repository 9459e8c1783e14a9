#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "asc/dataset.hpp"
#include "asc/decision.hpp"

namespace asc {

struct DecisionRecord {
  std::string clip_id;
  std::string true_label;
  std::string predicted_label;
  std::string classifier_id;
  int fold_index = -1;  // -1 when unknown (e.g. records read back from CSV)
  double score = 0.0;

  bool correct() const { return predicted_label == true_label; }
};

struct EvaluationReport {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;  // trace / total over the pooled confusion matrix
  double ci_mean = 0.0;        // mean of the fold accuracies
  double half_width = 0.0;     // 1.96 * sigma / sqrt(k); total bar = 3.92 * sigma / sqrt(k)
  Eigen::MatrixXi confusion;   // (i, j) = count(true = i, predicted = j)
  std::vector<std::string> labels;
  std::map<std::string, bool> per_file_correct;
};

// What to run inside each cross-validation fold. "echo" predicts the true
// label and "random" a seeded uniform label; both skip feature extraction
// and exist for protocol tests.
struct PipelineConfig {
  Recipe recipe;
  std::string model_type = "gmm";  // gmm | centroid | knn
  std::string criterion = "ml";    // ml | map | centroid | knn | vote | echo | random
  int gmm_k = 8;
  EmConfig em;
  int knn_k = 5;
  Summarization knn_mode = Summarization::kClipMean;
  std::uint64_t seed = 0;
};

// Fits the feature statistics and per-class models on the listed training
// clips only. Exposed so tests can assert train/test hygiene directly.
ClassifierBundle fit_bundle(const LabeledDataset& dataset,
                            const std::vector<std::string>& train_ids,
                            const PipelineConfig& config);

// Per fold: fit on train, classify test. Every clip is classified exactly
// once across folds; all randomness derives from config.seed.
std::pair<EvaluationReport, std::vector<DecisionRecord>> run_cross_validation(
    const LabeledDataset& dataset, const FoldPlan& plan, const PipelineConfig& config);

// (mean of fold accuracies, half interval width). The full bar length is
// 3.92 * sigma / sqrt(k) with sigma the sample standard deviation.
std::pair<double, double> accuracy_confidence_interval(const std::vector<double>& fold_accuracies);

Eigen::MatrixXi confusion_matrix(const std::vector<DecisionRecord>& records,
                                 const std::vector<std::string>& labels);
// Rows normalized to percentages (all-zero rows stay zero).
Eigen::MatrixXd confusion_percentages(const Eigen::MatrixXi& counts);

struct SignTestResult {
  double p_value = 1.0;
  bool reject = false;
  int n_positive = 0;  // clips where A is correct and B is not
  int n_negative = 0;
  int n_nonzero = 0;
};

// Exact two-sided binomial sign test on per-clip correctness differences,
// zeros discarded. Both record sets must cover identical clip sets.
SignTestResult sign_test(const std::vector<DecisionRecord>& records_a,
                         const std::vector<DecisionRecord>& records_b, double alpha);

struct RankingResult {
  std::vector<std::string> order;        // classifier ids, best accuracy first
  std::vector<double> mean_accuracies;   // parallel to order
  Eigen::MatrixXd p_values;              // pairwise sign-test p, in sorted order
  struct Box {
    int first = 0;
    int last = 0;  // inclusive indices into order
  };
  std::vector<Box> boxes;  // maximal runs in which no pair rejects; may overlap
  double alpha = 0.05;
};

RankingResult rank_with_boxes(
    const std::map<std::string, std::vector<DecisionRecord>>& records_per_classifier,
    double alpha);

// Per clip, the modal predicted label across the constituent classifiers
// (ties lexicographic); emitted with classifier_id "MV". MV must stay out of
// sign-test rankings (its decisions are not independent of the inputs).
std::vector<DecisionRecord> majority_vote_ensemble(
    const std::map<std::string, std::vector<DecisionRecord>>& records_per_classifier);

struct PerFileAccuracy {
  std::map<std::string, double> fraction_correct;     // clip id -> correct / m
  std::vector<std::pair<double, int>> histogram;      // (j/m, count), j = 0..m
  std::vector<std::string> never_correct;             // the zero set, sorted
};

PerFileAccuracy per_file_accuracy(
    const std::map<std::string, std::vector<DecisionRecord>>& records_per_classifier);

struct CumulativeAccuracy {
  std::vector<double> accuracy;  // A(t) = correct-in-first-t / t, t = 1..n
  std::vector<double> diff;      // A(t) - A(t-1), t = 2..n
  double diff_mean = 0.0;
  double t_statistic = 0.0;  // right-tailed statistic for mean(diff) > 0
  int degrees_of_freedom = 0;
};

CumulativeAccuracy cumulative_accuracy(const std::vector<int>& correctness_flags);

// Number of clips on which two classifiers' predictions differ (a Hamming
// distance over the shared clip set).
int disagreement_distance(const std::vector<DecisionRecord>& records_a,
                          const std::vector<DecisionRecord>& records_b);

struct MdsEmbedding {
  Eigen::MatrixXd coordinates;  // n x r, mean-centered
  double stress = 0.0;
  bool padded = false;  // fewer positive eigenvalues than r; extra axes are zero
};

// Classical (Torgerson) MDS: double-center -1/2 J D^2 J and embed with the
// top-r non-negative eigenpairs.
MdsEmbedding mds(const Eigen::MatrixXd& distances, int target_dim);

}  // namespace asc
