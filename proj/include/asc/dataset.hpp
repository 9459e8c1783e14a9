#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asc/audio.hpp"

namespace asc {

struct LabeledDataset {
  std::vector<AudioClip> clips;
  std::vector<std::string> labels;    // parallel to clips
  std::vector<std::string> universe;  // distinct labels, sorted lexicographically
  std::string manifest_path;

  std::size_t size() const { return clips.size(); }
  // Index of a clip id, or -1.
  int index_of(const std::string& id) const;
};

// Loads a CSV manifest with header `path,label`. Audio paths are resolved
// relative to the manifest's directory. Throws InputError naming the
// offending path on missing files, malformed WAVs, duplicate ids or an
// empty manifest.
LabeledDataset load_manifest(const std::filesystem::path& path);

struct FrameSequence {
  Eigen::MatrixXd frames;  // num_frames x frame_length, window applied
  Eigen::Index frame_length = 0;
  Eigen::Index hop = 0;
  std::string window;
  bool input_shorter_than_frame = false;
};

// Cuts a clip into windowed frames. frame_length = round(frame_ms * rate /
// 1000), hop = round(frame_length * hop_fraction). The last partial frame is
// zero-padded; a clip shorter than one frame yields a single padded frame
// with the flag set. Windows: "hamming", "hann", "rectangular".
FrameSequence frame_signal(const AudioClip& clip, double frame_ms, double hop_fraction,
                           const std::string& window);

struct FoldPlan {
  struct Fold {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
  };
  std::vector<Fold> folds;
  int num_folds = 0;
  std::uint64_t seed = 0;
};

// Stratified k-fold split: per class, ids are shuffled with the seeded RNG
// and dealt round-robin into the k test sets, so each class contributes
// floor/ceil(count/k) test items per fold and every id appears in exactly
// one test set. Classes with fewer than k members are rejected.
FoldPlan stratified_kfold(const LabeledDataset& dataset, int k, std::uint64_t seed);

}  // namespace asc
