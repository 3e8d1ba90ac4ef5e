#include "hartree/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "hartree/errors.hpp"
#include "hartree/format.hpp"

namespace hartree {

namespace {

void put_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  os.write(buf, 8);
}

double get_le(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) fail(ErrorKind::Io, "snapshot: truncated data block");
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const RadialField& u, double time) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot open snapshot for writing: " + path.string());
  os << "hartree-snapshot 1\n"
     << "n = " << u.grid().n() << "\n"
     << "r_max = " << exact(u.grid().r_max()) << "\n"
     << "time = " << exact(time) << "\n"
     << "end_header\n";
  for (const auto& z : u.values()) {
    put_le(os, z.real());
    put_le(os, z.imag());
  }
  if (!os) fail(ErrorKind::Io, "snapshot write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Io, "cannot open snapshot: " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != "hartree-snapshot 1") fail(ErrorKind::Io, "not a snapshot file: " + path.string());
  int n = -1;
  double r_max = -1.0, time = 0.0;
  while (std::getline(is, line) && line != "end_header") {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Io, "snapshot header line without '='");
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(' ') + 1);
    const std::string value = line.substr(eq + 1);
    if (key == "n") n = std::stoi(value);
    else if (key == "r_max") r_max = std::stod(value);
    else if (key == "time") time = std::stod(value);
  }
  if (line != "end_header") fail(ErrorKind::Io, "snapshot header not terminated");
  RadialGrid grid(n, r_max);
  std::vector<cplx> v(n);
  for (int j = 0; j < n; ++j) {
    const double re = get_le(is);
    const double im = get_le(is);
    v[j] = {re, im};
  }
  return Snapshot{RadialField(grid, std::move(v)), time};
}

}  // namespace hartree
