#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "asc/dataset.hpp"

namespace asc {

// Silence floors. The log floor keeps MFCCs of all-zero frames finite; the
// std floor keeps normalization defined for constant feature columns.
inline constexpr double kLogFloor = 1e-10;
inline constexpr double kStdFloor = 1e-8;

struct FeatureMatrix {
  Eigen::MatrixXd values;           // num_frames x d
  std::vector<std::string> layout;  // d feature names
  std::string source_id;
};

// One-sided magnitude spectrum (fft_size/2 + 1 bins). The frame is
// zero-padded or truncated to fft_size, which must be a power of two.
Eigen::VectorXd magnitude_spectrum(const Eigen::VectorXd& frame, int fft_size);

// Rate of strict sign changes between adjacent samples, in [0, 1].
// Zero samples count as non-negative.
double zero_crossing_rate(const Eigen::VectorXd& frame);

// Centre of mass of the one-sided magnitude spectrum, in Hz. An all-zero
// frame yields 0 Hz and sets *silent when provided.
double spectral_centroid(const Eigen::VectorXd& frame, double sample_rate,
                         bool* silent = nullptr);

// Lowest bin frequency where the cumulative magnitude reaches
// threshold * total. Silent frames yield 0 Hz.
double spectral_rolloff(const Eigen::VectorXd& frame, double sample_rate,
                        double threshold = 0.85, bool* silent = nullptr);

struct BandEnergies {
  Eigen::VectorXd power;   // per-band power sums
  Eigen::VectorXd ratios;  // power / total over the bands; sums to 1 unless silent
  bool silent = false;
};

// Power spectrum integrated over [band_edges[i], band_edges[i+1]) bands.
// Edges must be strictly increasing within [0, Nyquist], at least two of
// them; the final band includes its upper edge.
BandEnergies subband_energies(const Eigen::VectorXd& frame, double sample_rate,
                              const std::vector<double>& band_edges);

struct MelFilterbank {
  int num_bands = 0;
  int fft_size = 0;
  double sample_rate = 0.0;
  Eigen::MatrixXd weights;  // num_bands x (fft_size/2 + 1), triangular rows
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with centres equally spaced on the mel scale between
// 0 and Nyquist; adjacent filters overlap at each other's centres.
MelFilterbank build_mel_filterbank(int num_bands, int fft_size, double sample_rate);

// DCT-II (orthonormal) of log(mel energies + kLogFloor); the first
// num_coeffs coefficients are kept, coefficient 0 included.
Eigen::VectorXd mfcc(const Eigen::VectorXd& frame, const MelFilterbank& bank, int num_coeffs);

struct LpcResult {
  Eigen::VectorXd coeffs;        // a_1..a_p of x(t) = sum a_i x(t-i) + e(t)
  double residual_energy = 0.0;  // never exceeds the frame energy
  bool silent = false;
};

// Levinson-Durbin on the biased autocorrelation.
LpcResult lpc(const Eigen::VectorXd& frame, int order);

// Row t holds values[t] - values[t-1]; row 0 is all zeros. Layout names
// gain a "d_" prefix.
FeatureMatrix delta_features(const FeatureMatrix& features);

struct NormalizationStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // floored at kStdFloor
  std::vector<std::string> layout;
};

// Global per-column mean and standard deviation pooled over the training
// matrices (population convention). Requires at least two pooled frames and
// a shared layout.
NormalizationStats fit_normalization(const std::vector<FeatureMatrix>& train_features);
FeatureMatrix apply_normalization(const FeatureMatrix& features, const NormalizationStats& stats);

struct PcaTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;               // d x r, orthonormal columns
  Eigen::VectorXd explained_variance;  // r eigenvalues, non-increasing
};

// Top-r eigenpairs of the pooled sample covariance. Eigenvector signs are
// canonicalized (largest-magnitude entry positive) so fits are deterministic.
PcaTransform fit_pca(const Eigen::MatrixXd& pooled, int rank);
FeatureMatrix apply_pca(const FeatureMatrix& features, const PcaTransform& transform);

// Ordered feature recipe. `normalize` and `pca_rank` are recorded here but
// applied by the classification pipeline with statistics fitted on training
// data only; extract() itself never sees test-side statistics.
struct Recipe {
  struct Item {
    std::string name;  // mfcc | zcr | centroid | rolloff | subbands | lpc
    int param = 0;     // mfcc: #coeffs, lpc: order, subbands: #bands
  };
  std::vector<Item> items;
  bool deltas = false;
  bool normalize = false;
  int pca_rank = 0;  // 0 = off

  double frame_ms = 50.0;
  double hop_fraction = 0.5;
  std::string window = "hamming";
  int mel_bands = 26;
  double rolloff_threshold = 0.85;

  // Parses e.g. "mfcc:13,zcr,deltas,normalize" (items keep their order).
  static Recipe parse(const std::string& spec);
  // Canonical spec string; hashing it fingerprints the recipe.
  std::string canonical() const;
  std::uint64_t fingerprint() const;
};

// Applies the transform: frame the clip, compute each recipe item per frame,
// concatenate in recipe order, then append deltas if requested. A prebuilt
// filterbank may be shared across clips; its sample rate must match.
FeatureMatrix extract(const AudioClip& clip, const Recipe& recipe,
                      const MelFilterbank* prebuilt_bank = nullptr);

}  // namespace asc
