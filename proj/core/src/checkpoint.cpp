#include "adrl/nd/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace adrl::nd {
namespace {

constexpr char kMagic[8] = {'A', 'D', 'R', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw NumericError(std::string("checkpoint: truncated at ") + what);
  }
  return v;
}
std::uint64_t read_u64(std::istream& in, const char* what) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw NumericError(std::string("checkpoint: truncated at ") + what);
  }
  return v;
}

std::string read_bytes(std::istream& in, std::uint64_t len, const char* what) {
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), static_cast<std::streamsize>(len))) {
    throw NumericError(std::string("checkpoint: truncated at ") + what);
  }
  return s;
}

void check_header(std::istream& in) {
  char magic[8] = {};
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw NumericError("checkpoint: bad magic");
  }
  const std::uint32_t version = read_u32(in, "version");
  if (version != kVersion) {
    throw NumericError("checkpoint: unsupported version " + std::to_string(version));
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::string& metadata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericError("checkpoint: cannot open for write: " + path);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u64(out, metadata.size());
  out.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
  write_u32(out, static_cast<std::uint32_t>(store.entries().size()));
  for (const auto& e : store.entries()) {
    write_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_u32(out, static_cast<std::uint32_t>(e.tensor.rows()));
    write_u32(out, static_cast<std::uint32_t>(e.tensor.cols()));
    const auto& v = e.tensor.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(Real)));
  }
  if (!out) throw NumericError("checkpoint: write failed: " + path);
}

std::string load_checkpoint(const std::string& path, ParamStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericError("checkpoint: cannot open: " + path);
  check_header(in);
  const std::uint64_t meta_len = read_u64(in, "metadata length");
  std::string metadata = read_bytes(in, meta_len, "metadata");
  const std::uint32_t count = read_u32(in, "slice count");
  if (count != store.entries().size()) {
    throw NumericError("checkpoint: slice count mismatch: file has " +
                       std::to_string(count) + ", store has " +
                       std::to_string(store.entries().size()));
  }
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t name_len = read_u32(in, "name length");
    const std::string name = read_bytes(in, name_len, "name");
    const int rows = static_cast<int>(read_u32(in, "rows"));
    const int cols = static_cast<int>(read_u32(in, "cols"));
    if (!store.has(name)) {
      throw NumericError("checkpoint: unknown slice '" + name + "'");
    }
    Tensor t = store.get(name);
    if (t.rows() != rows || t.cols() != cols) {
      throw NumericError("checkpoint: shape mismatch for '" + name + "'");
    }
    auto& dst = t.values();
    if (!in.read(reinterpret_cast<char*>(dst.data()),
                 static_cast<std::streamsize>(dst.size() * sizeof(Real)))) {
      throw NumericError("checkpoint: truncated at slice '" + name + "'");
    }
  }
  return metadata;
}

std::string read_checkpoint_metadata(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericError("checkpoint: cannot open: " + path);
  check_header(in);
  const std::uint64_t meta_len = read_u64(in, "metadata length");
  return read_bytes(in, meta_len, "metadata");
}

}  // namespace adrl::nd
