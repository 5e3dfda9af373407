#include "ks2d/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ks2d {
namespace {

uint64_t to_little_endian(uint64_t bits) {
  if constexpr (std::endian::native == std::endian::little) return bits;
  return __builtin_bswap64(bits);
}

} // namespace

void write_field(const std::string& path, const FieldSnapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  std::ostringstream header;
  header.precision(17);
  header << "KS2D " << snap.field.grid.n << " " << snap.field.grid.box_length << " " << snap.t << "\n";
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  std::vector<uint64_t> buf(snap.field.values.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    uint64_t bits;
    std::memcpy(&bits, &snap.field.values[i], sizeof bits);
    buf[i] = to_little_endian(bits);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(uint64_t)));
  if (!out) throw std::runtime_error("short write: " + path);
}

FieldSnapshot read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing snapshot header: " + path);
  std::istringstream header(line);
  std::string magic;
  int n = 0;
  double box_length = 0, t = 0;
  header >> magic >> n >> box_length >> t;
  if (header.fail() || magic != "KS2D") throw std::runtime_error("malformed snapshot header: " + path);
  FieldSnapshot snap{t, ScalarField{make_grid(n, box_length), std::vector<double>(static_cast<std::size_t>(n) * n)}};
  std::vector<uint64_t> buf(snap.field.values.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(uint64_t)))
    throw std::runtime_error("truncated snapshot payload: " + path);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const uint64_t bits = to_little_endian(buf[i]);
    std::memcpy(&snap.field.values[i], &bits, sizeof bits);
  }
  return snap;
}

} // namespace ks2d
