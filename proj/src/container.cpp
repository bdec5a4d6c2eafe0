#include "scss/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "scss/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container payload is little-endian");

namespace scss {

std::uint64_t fnv1a64(const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void write_container(const std::filesystem::path& path, nlohmann::json header,
                     std::span<const double> payload) {
  header["payload_doubles"] = payload.size();
  header["digest"] = hex64(fnv1a64(payload.data(), payload.size_bytes()));
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kContainerMagic, sizeof kContainerMagic);
  const auto len = static_cast<std::uint32_t>(head.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size_bytes()));
  if (!out) throw IoError("write failed: " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[sizeof kContainerMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kContainerMagic, sizeof magic) != 0)
    throw UnsupportedFormat("not an SCSSBND1 container: " + path.string());
  std::uint32_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len))
    throw CorruptHeader("truncated header length: " + path.string());
  std::string head(len, '\0');
  if (!in.read(head.data(), len)) throw CorruptHeader("truncated header: " + path.string());

  Container c;
  try {
    c.header = nlohmann::json::parse(head);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptHeader("header is not valid JSON: " + std::string(e.what()));
  }
  const auto n = c.header.value("payload_doubles", std::uint64_t{0});
  c.payload.resize(n);
  if (!in.read(reinterpret_cast<char*>(c.payload.data()),
               static_cast<std::streamsize>(n * sizeof(double))))
    throw CorruptHeader("truncated payload: " + path.string());
  return c;
}

bool verify_container(const std::filesystem::path& path, std::string* message) {
  Container c = read_container(path);
  const std::string want = c.header.value("digest", "");
  const std::string got =
      hex64(fnv1a64(c.payload.data(), c.payload.size() * sizeof(double)));
  if (want != got) {
    if (message) *message = "digest mismatch: header " + want + " vs payload " + got;
    return false;
  }
  if (message) message->clear();
  return true;
}

}  // namespace scss
