#include "asc/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "asc/util.hpp"

namespace asc {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

[[noreturn]] void bad_wav(const std::filesystem::path& path, const std::string& what) {
  throw InputError("malformed WAV file '" + path.string() + "': " + what);
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path, const std::string& id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open audio file '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44) bad_wav(path, "file shorter than a RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    bad_wav(path, "missing RIFF/WAVE magic");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    std::uint32_t size = read_u32(chunk + 4);
    if (pos + 8 + size > bytes.size()) bad_wav(path, "chunk overruns file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) bad_wav(path, "fmt chunk too small");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == 0xFFFE) {
        // WAVE_FORMAT_EXTENSIBLE: the actual format leads the SubFormat GUID.
        if (size < 40) bad_wav(path, "extensible fmt chunk too small");
        format = read_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) bad_wav(path, "missing fmt chunk");
  if (data == nullptr) bad_wav(path, "missing data chunk");
  if (channels == 0) bad_wav(path, "zero channels");
  if (rate == 0) bad_wav(path, "zero sample rate");

  const bool pcm_int = format == 1;
  const bool pcm_float = format == 3;
  if (!pcm_int && !pcm_float) bad_wav(path, "unsupported format tag " + std::to_string(format));
  if (pcm_int && bits != 8 && bits != 16 && bits != 24)
    bad_wav(path, "unsupported integer bit depth " + std::to_string(bits));
  if (pcm_float && bits != 32) bad_wav(path, "unsupported float bit depth " + std::to_string(bits));

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t num_frames = data_size / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.id = id.empty() ? path.string() : id;
  clip.samples.resize(static_cast<Eigen::Index>(num_frames));

  for (std::size_t n = 0; n < num_frames; ++n) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + n * frame_bytes + c * bytes_per_sample;
      double v = 0.0;
      if (pcm_float) {
        float f;
        std::memcpy(&f, s, 4);
        v = f;
      } else if (bits == 8) {
        v = (static_cast<int>(s[0]) - 128) / 128.0;
      } else if (bits == 16) {
        std::int16_t x = static_cast<std::int16_t>(s[0] | (s[1] << 8));
        v = x / 32768.0;
      } else {  // 24-bit
        std::int32_t x = s[0] | (s[1] << 8) | (s[2] << 16);
        if (x & 0x800000) x |= ~0xFFFFFF;  // sign extend
        v = x / 8388608.0;
      }
      acc += v;
    }
    clip.samples[static_cast<Eigen::Index>(n)] = acc / channels;
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const Eigen::VectorXd& samples,
               int sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot create '" + path.string() + "'");

  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<char*>(b), 2);
  };

  const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<std::uint32_t>(sample_rate));
  put_u32(static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(2);
  put_u16(16);
  out.write("data", 4);
  put_u32(data_size);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    double v = std::clamp(samples[i], -1.0, 1.0);
    auto x = static_cast<std::int16_t>(std::lrint(v * 32767.0));
    put_u16(static_cast<std::uint16_t>(x));
  }
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

}  // namespace asc
