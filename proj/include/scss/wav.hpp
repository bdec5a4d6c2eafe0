#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scss/signal.hpp"

namespace scss {

struct WavReadInfo {
  int channels = 1;
  bool took_first_channel = false;  // multichannel input, first channel kept
};

/// Reads a RIFF/WAVE file with 16-bit signed little-endian PCM samples.
/// Samples are scaled to [-1, 1) by 1/32768. Multichannel files keep the
/// first channel (recorded in info).
/// Throws UnsupportedFormat for non-PCM16 data and CorruptHeader for
/// malformed or truncated files.
Signal read_wav(const std::filesystem::path& path, WavReadInfo* info = nullptr);

/// Writes mono PCM16; samples are clamped to [-1, 1 - 1/32768] and rounded.
void write_wav(const std::filesystem::path& path, const Signal& signal);

struct CorpusEntry {
  std::filesystem::path path;
  double sample_rate = 0.0;
  double duration_s = 0.0;
  std::string speaker;  // top-level directory name, or manifest override
};

struct CorpusIndex {
  std::vector<CorpusEntry> entries;  // sorted by path
};

/// Indexes every parseable PCM WAV under `root`. Speaker identity comes from
/// the first path component below the root, unless `manifest` (a JSON object
/// of path -> speaker) overrides it.
CorpusIndex index_corpus(const std::filesystem::path& root,
                         const std::filesystem::path& manifest = {});

}  // namespace scss
