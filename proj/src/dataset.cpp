#include "asc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "asc/random.hpp"
#include "asc/util.hpp"

namespace asc {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

int LabeledDataset::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < clips.size(); ++i)
    if (clips[i].id == id) return static_cast<int>(i);
  return -1;
}

LabeledDataset load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path.string() + "'");

  LabeledDataset ds;
  ds.manifest_path = path.string();
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  std::string line;
  bool header_seen = false;
  std::set<std::string> seen_ids;
  std::set<std::string> universe;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "path,label")
        throw InputError("manifest '" + path.string() + "' must start with header 'path,label'");
      header_seen = true;
      continue;
    }
    auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw InputError("manifest row without comma in '" + path.string() + "': " + line);
    std::string rel = trim(line.substr(0, comma));
    std::string label = trim(line.substr(comma + 1));
    if (rel.empty() || label.empty())
      throw InputError("manifest row with empty field in '" + path.string() + "': " + line);
    if (!seen_ids.insert(rel).second)
      throw InputError("duplicate id in manifest '" + path.string() + "': " + rel);

    std::filesystem::path audio = std::filesystem::path(rel).is_absolute() ? rel : base / rel;
    AudioClip clip = read_wav(audio, rel);
    if (clip.samples.size() == 0)
      throw InputError("audio file with no samples: '" + audio.string() + "'");
    ds.clips.push_back(std::move(clip));
    ds.labels.push_back(label);
    universe.insert(label);
  }
  if (!header_seen) throw InputError("empty manifest '" + path.string() + "'");
  if (ds.clips.empty()) throw InputError("manifest '" + path.string() + "' lists no files");
  ds.universe.assign(universe.begin(), universe.end());
  return ds;
}

FrameSequence frame_signal(const AudioClip& clip, double frame_ms, double hop_fraction,
                           const std::string& window) {
  if (frame_ms <= 0.0) throw std::invalid_argument("frame_ms must be positive");
  if (hop_fraction <= 0.0 || hop_fraction > 1.0)
    throw std::invalid_argument("hop_fraction must be in (0, 1]");

  FrameSequence seq;
  seq.window = window;
  seq.frame_length =
      static_cast<Eigen::Index>(std::lround(frame_ms * clip.sample_rate / 1000.0));
  if (seq.frame_length <= 0) throw std::invalid_argument("frame shorter than one sample");
  seq.hop = static_cast<Eigen::Index>(
      std::lround(static_cast<double>(seq.frame_length) * hop_fraction));
  if (seq.hop <= 0) seq.hop = 1;

  const Eigen::Index len = clip.samples.size();
  Eigen::Index num_frames = 1;
  if (len > seq.frame_length) {
    num_frames = (len - seq.frame_length + seq.hop - 1) / seq.hop + 1;
  }
  seq.input_shorter_than_frame = len < seq.frame_length;

  const Eigen::Index m = seq.frame_length;
  Eigen::VectorXd taper(m);
  if (window == "rectangular") {
    taper.setOnes();
  } else if (window == "hamming") {
    for (Eigen::Index n = 0; n < m; ++n)
      taper[n] = m == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (m - 1));
  } else if (window == "hann") {
    for (Eigen::Index n = 0; n < m; ++n)
      taper[n] = m == 1 ? 1.0 : 0.5 * (1.0 - std::cos(2.0 * M_PI * n / (m - 1)));
  } else {
    throw std::invalid_argument("unknown window '" + window + "'");
  }

  seq.frames.setZero(num_frames, m);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    const Eigen::Index start = t * seq.hop;
    const Eigen::Index avail = std::min(m, len - start);
    for (Eigen::Index n = 0; n < avail; ++n)
      seq.frames(t, n) = clip.samples[start + n] * taper[n];
  }
  return seq;
}

FoldPlan stratified_kfold(const LabeledDataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw InputError("k must be at least 2 (k=1 leaves no held-out data)");

  std::map<std::string, std::vector<std::string>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[dataset.labels[i]].push_back(dataset.clips[i].id);

  FoldPlan plan;
  plan.num_folds = k;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));

  Rng rng(seed);
  std::set<std::string> test_union;
  for (auto& [label, ids] : by_class) {  // std::map iterates labels in sorted order
    if (static_cast<int>(ids.size()) < k)
      throw InputError("class '" + label + "' has " + std::to_string(ids.size()) +
                       " members, fewer than k=" + std::to_string(k));
    rng.shuffle(ids);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      plan.folds[j % static_cast<std::size_t>(k)].test_ids.push_back(ids[j]);
      test_union.insert(ids[j]);
    }
  }

  for (auto& fold : plan.folds) {
    std::set<std::string> test(fold.test_ids.begin(), fold.test_ids.end());
    for (const auto& clip : dataset.clips)
      if (!test.count(clip.id)) fold.train_ids.push_back(clip.id);
  }
  return plan;
}

}  // namespace asc
