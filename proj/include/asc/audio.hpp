#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace asc {

// Mono signal with amplitudes in [-1, 1].
struct AudioClip {
  Eigen::VectorXd samples;
  int sample_rate = 0;
  std::string id;
};

// Reads a PCM WAV file (8/16/24-bit integer or 32-bit float). Stereo and
// multi-channel input is downmixed to mono by the channel mean. Throws
// InputError naming the path on missing or malformed files.
AudioClip read_wav(const std::filesystem::path& path, const std::string& id = {});

// Writes a mono 16-bit PCM WAV. Samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path, const Eigen::VectorXd& samples,
               int sample_rate);

}  // namespace asc
