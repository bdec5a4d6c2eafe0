#include "scss/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace scss {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

Signal read_wav(const std::filesystem::path& path, WavReadInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw CorruptHeader("not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t len = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + len > bytes.size())
      throw CorruptHeader("chunk '" + std::string(id, 4) + "' overruns file: " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw CorruptHeader("fmt chunk too short: " + path.string());
      format = read_u16(bytes.data() + pos);
      channels = read_u16(bytes.data() + pos + 2);
      sample_rate = read_u32(bytes.data() + pos + 4);
      bits = read_u16(bytes.data() + pos + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_len = len;
    }
    pos += len + (len & 1);  // chunks are word-aligned
  }

  if (format == 0 || sample_rate == 0) throw CorruptHeader("missing fmt chunk: " + path.string());
  if (format != 1 || bits != 16)
    throw UnsupportedFormat("only PCM 16-bit WAV is supported (format " +
                            std::to_string(format) + ", " + std::to_string(bits) + " bits)");
  if (channels < 1) throw CorruptHeader("zero channels: " + path.string());
  if (!data) throw CorruptHeader("missing data chunk: " + path.string());

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * 2;
  const std::size_t frames = data_len / frame_bytes;
  if (frames == 0) throw CorruptHeader("empty data chunk: " + path.string());

  Signal s;
  s.sample_rate = static_cast<double>(sample_rate);
  s.samples.resize(static_cast<Eigen::Index>(frames));
  for (std::size_t f = 0; f < frames; ++f) {
    const unsigned char* p = data + f * frame_bytes;
    const auto raw = static_cast<std::int16_t>(read_u16(p));
    s.samples(static_cast<Eigen::Index>(f)) = static_cast<double>(raw) / 32768.0;
  }
  if (info) {
    info->channels = channels;
    info->took_first_channel = channels > 1;
  }
  return s;
}

void write_wav(const std::filesystem::path& path, const Signal& signal) {
  const auto frames = static_cast<std::uint32_t>(signal.samples.size());
  const std::uint32_t data_len = frames * 2;
  const auto rate = static_cast<std::uint32_t>(std::llround(signal.sample_rate));

  std::vector<unsigned char> out;
  out.reserve(44 + data_len);
  auto push_bytes = [&](const void* src, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(src);
    out.insert(out.end(), p, p + n);
  };
  auto push_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    push_bytes(b, 4);
  };
  auto push_u16 = [&](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    push_bytes(b, 2);
  };

  push_bytes("RIFF", 4);
  push_u32(36 + data_len);
  push_bytes("WAVE", 4);
  push_bytes("fmt ", 4);
  push_u32(16);
  push_u16(1);  // PCM
  push_u16(1);  // mono
  push_u32(rate);
  push_u32(rate * 2);
  push_u16(2);
  push_u16(16);
  push_bytes("data", 4);
  push_u32(data_len);
  for (Eigen::Index i = 0; i < signal.samples.size(); ++i) {
    const double v = std::clamp(signal.samples(i), -1.0, 32767.0 / 32768.0);
    const auto q = static_cast<std::int16_t>(std::llround(v * 32768.0));
    push_u16(static_cast<std::uint16_t>(q));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

CorpusIndex index_corpus(const std::filesystem::path& root,
                         const std::filesystem::path& manifest) {
  nlohmann::json overrides = nlohmann::json::object();
  if (!manifest.empty()) {
    std::ifstream m(manifest);
    if (!m) throw IoError("cannot open manifest: " + manifest.string());
    overrides = nlohmann::json::parse(m, nullptr, true);
  }

  CorpusIndex index;
  if (!std::filesystem::is_directory(root))
    throw IoError("corpus root is not a directory: " + root.string());
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (p.extension() != ".wav" && p.extension() != ".WAV") continue;
    CorpusEntry e;
    e.path = p;
    try {
      const Signal s = read_wav(p);
      e.sample_rate = s.sample_rate;
      e.duration_s = s.duration_s();
    } catch (const Error&) {
      continue;  // unparseable files are not indexed
    }
    const auto rel = std::filesystem::relative(p, root);
    e.speaker = rel.begin() != rel.end() && std::distance(rel.begin(), rel.end()) > 1
                    ? rel.begin()->string()
                    : "";
    const std::string key = rel.generic_string();
    if (overrides.contains(key)) e.speaker = overrides[key].get<std::string>();
    index.entries.push_back(std::move(e));
  }
  std::sort(index.entries.begin(), index.entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.path < b.path; });
  return index;
}

}  // namespace scss
