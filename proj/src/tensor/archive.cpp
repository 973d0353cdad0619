#include "gpr/tensor/archive.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <iomanip>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/rng.hpp"

namespace gpr {

namespace {

constexpr char kMagic[8] = {'G', 'P', 'R', 'A', 'R', 'C', 'H', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw DataError("archive truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_string(std::istream& in, std::uint64_t max_len) {
  const std::uint64_t len = get_u64(in);
  if (len > max_len) throw DataError("archive string length " + std::to_string(len) + " is implausible");
  std::string s(static_cast<std::size_t>(len), '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("archive truncated");
  return s;
}

}  // namespace

void Archive::save(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write archive " + path.string());
    out.write(kMagic, sizeof kMagic);
    const std::string meta = metadata.dump();
    put_u64(out, meta.size());
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put_u64(out, entries.size());
    for (const auto& [name, m] : entries) {
      put_u64(out, name.size());
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put_u64(out, 2);
      put_u64(out, static_cast<std::uint64_t>(m.rows()));
      put_u64(out, static_cast<std::uint64_t>(m.cols()));
      for (Index i = 0; i < m.size(); ++i) put_f64(out, m.data()[i]);
    }
    if (!out) throw DataError("failed writing archive " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Archive Archive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open archive " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw DataError(path.string() + " is not a GPRARCH1 archive");
  Archive archive;
  archive.metadata = nlohmann::json::parse(get_string(in, 1ULL << 32));
  const std::uint64_t count = get_u64(in);
  for (std::uint64_t e = 0; e < count; ++e) {
    std::string name = get_string(in, 1 << 20);
    const std::uint64_t rank = get_u64(in);
    if (rank == 0 || rank > 2) throw DataError("entry '" + name + "' has unsupported rank " + std::to_string(rank));
    std::uint64_t rows = get_u64(in);
    std::uint64_t cols = rank == 2 ? get_u64(in) : 1;
    if (rank == 1) std::swap(rows, cols);  // vectors are stored as 1 x N rows
    if (rows * cols > (1ULL << 31)) throw DataError("entry '" + name + "' is implausibly large");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = get_f64(in);
    archive.entries.emplace(std::move(name), std::move(m));
  }
  return archive;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, nlohmann::json metadata) {
  Archive archive;
  archive.metadata = std::move(metadata);
  for (const auto& [name, t] : params.entries()) archive.entries.emplace(name, t.value());
  archive.save(path);
}

nlohmann::json load_checkpoint(const std::filesystem::path& path, ParamSet& params) {
  Archive archive = Archive::load(path);
  for (auto& [name, t] : params.entries()) {
    auto it = archive.entries.find(name);
    if (it == archive.entries.end()) throw LookupError("checkpoint is missing parameter '" + name + "'");
    if (it->second.rows() != t.rows() || it->second.cols() != t.cols()) {
      throw DimensionError("checkpoint shape mismatch for '" + name + "'");
    }
    t.mutable_value() = it->second;
  }
  return archive.metadata;
}

std::string config_hash(const nlohmann::json& config) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << stable_hash(config.dump());
  return out.str();
}

}  // namespace gpr
