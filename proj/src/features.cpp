#include "asc/features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "asc/util.hpp"

namespace asc {

Eigen::VectorXd magnitude_spectrum(const Eigen::VectorXd& frame, int fft_size) {
  if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0)
    throw std::invalid_argument("fft_size must be a power of two");
  std::vector<double> in(static_cast<std::size_t>(fft_size), 0.0);
  const Eigen::Index n = std::min<Eigen::Index>(frame.size(), fft_size);
  for (Eigen::Index i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = frame[i];

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);

  Eigen::VectorXd mag(fft_size / 2 + 1);
  for (int i = 0; i <= fft_size / 2; ++i) mag[i] = std::abs(out[static_cast<std::size_t>(i)]);
  return mag;
}

double zero_crossing_rate(const Eigen::VectorXd& frame) {
  if (frame.size() < 2) throw std::invalid_argument("zcr needs at least 2 samples");
  int changes = 0;
  bool prev_nonneg = frame[0] >= 0.0;
  for (Eigen::Index i = 1; i < frame.size(); ++i) {
    const bool nonneg = frame[i] >= 0.0;
    if (nonneg != prev_nonneg) ++changes;
    prev_nonneg = nonneg;
  }
  return static_cast<double>(changes) / static_cast<double>(frame.size() - 1);
}

double spectral_centroid(const Eigen::VectorXd& frame, double sample_rate, bool* silent) {
  const int fft_size = next_pow2(static_cast<int>(frame.size()));
  const Eigen::VectorXd mag = magnitude_spectrum(frame, fft_size);
  const double total = mag.sum();
  if (silent) *silent = total == 0.0;
  if (total == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mag.size(); ++i)
    acc += static_cast<double>(i) * sample_rate / fft_size * mag[i];
  return acc / total;
}

double spectral_rolloff(const Eigen::VectorXd& frame, double sample_rate, double threshold,
                        bool* silent) {
  if (threshold <= 0.0 || threshold >= 1.0)
    throw std::invalid_argument("rolloff threshold must be in (0, 1)");
  const int fft_size = next_pow2(static_cast<int>(frame.size()));
  const Eigen::VectorXd mag = magnitude_spectrum(frame, fft_size);
  const double total = mag.sum();
  if (silent) *silent = total == 0.0;
  if (total == 0.0) return 0.0;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < mag.size(); ++i) {
    cum += mag[i];
    if (cum >= threshold * total) return static_cast<double>(i) * sample_rate / fft_size;
  }
  return static_cast<double>(mag.size() - 1) * sample_rate / fft_size;
}

BandEnergies subband_energies(const Eigen::VectorXd& frame, double sample_rate,
                              const std::vector<double>& band_edges) {
  if (band_edges.size() < 2) throw std::invalid_argument("need at least 2 band edges");
  const double nyquist = sample_rate / 2.0;
  for (std::size_t i = 0; i < band_edges.size(); ++i) {
    if (band_edges[i] < 0.0 || band_edges[i] > nyquist + 1e-9)
      throw std::invalid_argument("band edge outside [0, Nyquist]");
    if (i > 0 && band_edges[i] <= band_edges[i - 1])
      throw std::invalid_argument("band edges must be strictly increasing");
  }

  const int fft_size = next_pow2(static_cast<int>(frame.size()));
  const Eigen::VectorXd mag = magnitude_spectrum(frame, fft_size);
  const std::size_t num_bands = band_edges.size() - 1;

  BandEnergies out;
  out.power.setZero(static_cast<Eigen::Index>(num_bands));
  for (Eigen::Index i = 0; i < mag.size(); ++i) {
    const double f = static_cast<double>(i) * sample_rate / fft_size;
    for (std::size_t b = 0; b < num_bands; ++b) {
      const bool last = b == num_bands - 1;
      if (f >= band_edges[b] && (f < band_edges[b + 1] || (last && f <= band_edges[b + 1]))) {
        out.power[static_cast<Eigen::Index>(b)] += mag[i] * mag[i];
        break;
      }
    }
  }
  const double total = out.power.sum();
  out.silent = total == 0.0;
  out.ratios = out.silent ? Eigen::VectorXd::Zero(out.power.size())
                          : Eigen::VectorXd(out.power / total);
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank build_mel_filterbank(int num_bands, int fft_size, double sample_rate) {
  if (num_bands < 2) throw std::invalid_argument("need at least 2 mel bands");
  if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0)
    throw std::invalid_argument("fft_size must be a power of two");

  MelFilterbank bank;
  bank.num_bands = num_bands;
  bank.fft_size = fft_size;
  bank.sample_rate = sample_rate;

  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  // num_bands + 2 points: band b peaks at point b+1 and is zero at b and b+2.
  std::vector<double> centers_hz(static_cast<std::size_t>(num_bands) + 2);
  for (int i = 0; i < num_bands + 2; ++i)
    centers_hz[static_cast<std::size_t>(i)] = mel_to_hz(mel_max * i / (num_bands + 1));

  const int bins = fft_size / 2 + 1;
  bank.weights.setZero(num_bands, bins);
  for (int b = 0; b < num_bands; ++b) {
    const double lo = centers_hz[static_cast<std::size_t>(b)];
    const double mid = centers_hz[static_cast<std::size_t>(b) + 1];
    const double hi = centers_hz[static_cast<std::size_t>(b) + 2];
    for (int i = 0; i < bins; ++i) {
      const double f = static_cast<double>(i) * sample_rate / fft_size;
      double w = 0.0;
      if (f > lo && f < hi) w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      bank.weights(b, i) = w;
    }
    if (bank.weights.row(b).maxCoeff() <= 0.0)
      throw InputError("mel band " + std::to_string(b) +
                       " is degenerate: num_bands too large for fft_size " +
                       std::to_string(fft_size));
  }
  return bank;
}

namespace {

// Orthonormal DCT-II of x, first num_coeffs coefficients.
Eigen::VectorXd dct2(const Eigen::VectorXd& x, int num_coeffs) {
  const auto n = static_cast<double>(x.size());
  Eigen::VectorXd out(num_coeffs);
  for (int k = 0; k < num_coeffs; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      acc += x[i] * std::cos(M_PI * (2.0 * static_cast<double>(i) + 1.0) * k / (2.0 * n));
    out[k] = acc * (k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n));
  }
  return out;
}

}  // namespace

Eigen::VectorXd mfcc(const Eigen::VectorXd& frame, const MelFilterbank& bank, int num_coeffs) {
  if (num_coeffs < 1 || num_coeffs > bank.num_bands)
    throw std::invalid_argument("num_coeffs must be in [1, num_bands]");
  const Eigen::VectorXd mag = magnitude_spectrum(frame, bank.fft_size);
  const Eigen::VectorXd energies = bank.weights * mag;
  const Eigen::VectorXd log_energies =
      (energies.array() + kLogFloor).log().matrix();
  return dct2(log_energies, num_coeffs);
}

LpcResult lpc(const Eigen::VectorXd& frame, int order) {
  const Eigen::Index n = frame.size();
  if (order < 1) throw std::invalid_argument("lpc order must be >= 1");
  if (n <= order) throw std::invalid_argument("frame must be longer than the lpc order");

  // Biased autocorrelation (zero-extended lags); the 1/N factor cancels in
  // the recursion, so r[0] stays the frame energy and the final prediction
  // error E is directly the residual energy.
  Eigen::VectorXd r = Eigen::VectorXd::Zero(order + 1);
  for (int k = 0; k <= order; ++k)
    for (Eigen::Index t = k; t < n; ++t) r[k] += frame[t] * frame[t - k];

  LpcResult res;
  res.coeffs = Eigen::VectorXd::Zero(order);
  if (r[0] == 0.0) {
    res.silent = true;
    return res;
  }

  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc -= res.coeffs[j - 1] * r[i - j];
    const double k = acc / err;
    Eigen::VectorXd prev = res.coeffs;
    res.coeffs[i - 1] = k;
    for (int j = 1; j < i; ++j) res.coeffs[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    err *= 1.0 - k * k;
    if (err <= 0.0) {  // perfectly predictable within fp
      err = 0.0;
      break;
    }
  }
  res.residual_energy = err;
  return res;
}

FeatureMatrix delta_features(const FeatureMatrix& features) {
  if (features.values.rows() < 1) throw std::invalid_argument("need at least one frame");
  FeatureMatrix out;
  out.source_id = features.source_id;
  out.values.setZero(features.values.rows(), features.values.cols());
  for (Eigen::Index t = 1; t < features.values.rows(); ++t)
    out.values.row(t) = features.values.row(t) - features.values.row(t - 1);
  out.layout.reserve(features.layout.size());
  for (const auto& name : features.layout) out.layout.push_back("d_" + name);
  return out;
}

NormalizationStats fit_normalization(const std::vector<FeatureMatrix>& train_features) {
  if (train_features.empty()) throw InputError("no training features to normalize");
  const auto& layout = train_features.front().layout;
  Eigen::Index total = 0;
  for (const auto& f : train_features) {
    if (f.layout != layout) throw InputError("feature layout mismatch across training clips");
    total += f.values.rows();
  }
  if (total < 2) throw std::invalid_argument("need at least 2 pooled frames");

  const auto d = static_cast<Eigen::Index>(layout.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(d);
  for (const auto& f : train_features) {
    sum += f.values.colwise().sum();
    sumsq += f.values.array().square().colwise().sum().matrix();
  }

  NormalizationStats stats;
  stats.layout = layout;
  stats.mean = sum / static_cast<double>(total);
  Eigen::VectorXd var =
      sumsq / static_cast<double>(total) - stats.mean.array().square().matrix();
  stats.std = var.array().max(0.0).sqrt().max(kStdFloor).matrix();
  return stats;
}

FeatureMatrix apply_normalization(const FeatureMatrix& features,
                                  const NormalizationStats& stats) {
  if (features.layout != stats.layout)
    throw InputError("feature layout does not match normalization stats");
  FeatureMatrix out = features;
  out.values = (features.values.rowwise() - stats.mean.transpose()).array().rowwise() /
               stats.std.transpose().array();
  return out;
}

namespace {

// Flip eigenvector signs to a canonical orientation so repeated fits are
// bit-identical.
void canonicalize_columns(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index top = 0;
    m.col(j).cwiseAbs().maxCoeff(&top);
    if (m(top, j) < 0.0) m.col(j) = -m.col(j);
  }
}

}  // namespace

PcaTransform fit_pca(const Eigen::MatrixXd& pooled, int rank) {
  const Eigen::Index d = pooled.cols();
  if (rank < 1 || rank > d) throw InputError("pca rank must be in [1, d]");
  if (pooled.rows() < 2) throw std::invalid_argument("need at least 2 frames for pca");

  PcaTransform t;
  t.mean = pooled.colwise().mean();
  Eigen::MatrixXd centered = pooled.rowwise() - t.mean.transpose();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(pooled.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca eigensolver failed");

  // Eigen returns eigenvalues ascending; take the top `rank` in descending order.
  t.basis.resize(d, rank);
  t.explained_variance.resize(rank);
  for (int j = 0; j < rank; ++j) {
    const Eigen::Index src = d - 1 - j;
    t.basis.col(j) = solver.eigenvectors().col(src);
    t.explained_variance[j] = std::max(solver.eigenvalues()[src], 0.0);
  }
  canonicalize_columns(t.basis);
  return t;
}

FeatureMatrix apply_pca(const FeatureMatrix& features, const PcaTransform& transform) {
  if (features.values.cols() != transform.basis.rows())
    throw InputError("feature dimension does not match pca transform");
  FeatureMatrix out;
  out.source_id = features.source_id;
  out.values = (features.values.rowwise() - transform.mean.transpose()) * transform.basis;
  for (Eigen::Index j = 0; j < transform.basis.cols(); ++j)
    out.layout.push_back("pc_" + std::to_string(j));
  return out;
}

namespace {

std::string two_digit(int i) { return (i < 10 ? "0" : "") + std::to_string(i); }

}  // namespace

Recipe Recipe::parse(const std::string& spec) {
  Recipe r;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    std::string name = token;
    int param = 0;
    if (auto colon = token.find(':'); colon != std::string::npos) {
      name = token.substr(0, colon);
      try {
        param = std::stoi(token.substr(colon + 1));
      } catch (const std::exception&) {
        throw InputError("bad recipe parameter in '" + token + "'");
      }
    }
    if (name == "deltas") {
      r.deltas = true;
    } else if (name == "normalize") {
      r.normalize = true;
    } else if (name == "pca") {
      if (param < 1) throw InputError("pca needs a rank, e.g. pca:5");
      r.pca_rank = param;
    } else if (name == "mfcc") {
      r.items.push_back({name, param > 0 ? param : 13});
    } else if (name == "lpc") {
      r.items.push_back({name, param > 0 ? param : 8});
    } else if (name == "subbands") {
      r.items.push_back({name, param > 0 ? param : 4});
    } else if (name == "zcr" || name == "centroid" || name == "rolloff") {
      r.items.push_back({name, 0});
    } else {
      throw InputError("unknown feature '" + name + "' in recipe");
    }
  }
  if (r.items.empty()) throw InputError("empty recipe: no features named");
  return r;
}

std::string Recipe::canonical() const {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ",";
    out += item.name;
    if (item.param > 0) out += ":" + std::to_string(item.param);
  }
  if (deltas) out += ",deltas";
  if (normalize) out += ",normalize";
  if (pca_rank > 0) out += ",pca:" + std::to_string(pca_rank);
  out += "|frame_ms=" + format_g17(frame_ms) + "|hop=" + format_g17(hop_fraction) +
         "|window=" + window + "|mel_bands=" + std::to_string(mel_bands) +
         "|rolloff=" + format_g17(rolloff_threshold);
  return out;
}

std::uint64_t Recipe::fingerprint() const { return fnv1a64(canonical()); }

FeatureMatrix extract(const AudioClip& clip, const Recipe& recipe,
                      const MelFilterbank* prebuilt_bank) {
  if (recipe.items.empty()) throw InputError("empty recipe: no features named");
  const FrameSequence seq =
      frame_signal(clip, recipe.frame_ms, recipe.hop_fraction, recipe.window);
  const int fft_size = next_pow2(static_cast<int>(seq.frame_length));
  const double sr = clip.sample_rate;

  bool needs_mfcc = false;
  for (const auto& item : recipe.items) needs_mfcc |= item.name == "mfcc";

  MelFilterbank local_bank;
  const MelFilterbank* bank = nullptr;
  if (needs_mfcc) {
    if (prebuilt_bank) {
      if (prebuilt_bank->sample_rate != sr || prebuilt_bank->fft_size != fft_size)
        throw InputError("clip '" + clip.id + "' (rate " + std::to_string(clip.sample_rate) +
                         " Hz) does not match the prebuilt filterbank");
      bank = prebuilt_bank;
    } else {
      local_bank = build_mel_filterbank(recipe.mel_bands, fft_size, sr);
      bank = &local_bank;
    }
  }

  FeatureMatrix out;
  out.source_id = clip.id;
  for (const auto& item : recipe.items) {
    if (item.name == "mfcc") {
      for (int i = 0; i < item.param; ++i) out.layout.push_back("mfcc_" + two_digit(i));
    } else if (item.name == "lpc") {
      for (int i = 1; i <= item.param; ++i) out.layout.push_back("lpc_" + two_digit(i));
    } else if (item.name == "subbands") {
      for (int i = 0; i < item.param; ++i) out.layout.push_back("subband_" + std::to_string(i));
    } else {
      out.layout.push_back(item.name);
    }
  }

  out.values.resize(seq.frames.rows(), static_cast<Eigen::Index>(out.layout.size()));
  for (Eigen::Index t = 0; t < seq.frames.rows(); ++t) {
    const Eigen::VectorXd frame = seq.frames.row(t);
    Eigen::Index col = 0;
    for (const auto& item : recipe.items) {
      if (item.name == "mfcc") {
        out.values.row(t).segment(col, item.param) = mfcc(frame, *bank, item.param);
        col += item.param;
      } else if (item.name == "zcr") {
        out.values(t, col++) = zero_crossing_rate(frame);
      } else if (item.name == "centroid") {
        out.values(t, col++) = spectral_centroid(frame, sr);
      } else if (item.name == "rolloff") {
        out.values(t, col++) = spectral_rolloff(frame, sr, recipe.rolloff_threshold);
      } else if (item.name == "subbands") {
        std::vector<double> edges(static_cast<std::size_t>(item.param) + 1);
        for (int i = 0; i <= item.param; ++i) edges[static_cast<std::size_t>(i)] = sr / 2.0 * i / item.param;
        out.values.row(t).segment(col, item.param) = subband_energies(frame, sr, edges).ratios;
        col += item.param;
      } else if (item.name == "lpc") {
        out.values.row(t).segment(col, item.param) = lpc(frame, item.param).coeffs;
        col += item.param;
      }
    }
  }

  if (recipe.deltas) {
    const FeatureMatrix deltas = delta_features(out);
    FeatureMatrix joined;
    joined.source_id = out.source_id;
    joined.values.resize(out.values.rows(), out.values.cols() * 2);
    joined.values << out.values, deltas.values;
    joined.layout = out.layout;
    joined.layout.insert(joined.layout.end(), deltas.layout.begin(), deltas.layout.end());
    out = std::move(joined);
  }
  return out;
}

}  // namespace asc
