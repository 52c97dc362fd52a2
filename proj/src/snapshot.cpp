#include "locpert/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "locpert/error.hpp"

namespace locpert {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(std::string("snapshot truncated before ") + what);
  return line;
}

}  // namespace

void write_snapshot(std::ostream& out, const ScalarField& f) {
  const Grid& g = f.grid();
  out << g.dim() << '\n';
  for (int p = 0; p < g.dim(); ++p) out << (p ? " " : "") << g.points(p);
  out << '\n' << std::setprecision(17);
  for (int p = 0; p < g.dim(); ++p) out << (p ? " " : "") << g.extent(p);
  out << '\n';
  for (Index n = 0; n < f.size(); ++n) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(f[n]));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeAbort("cannot open " + path.string() + " for writing");
  write_snapshot(out, f);
}

ScalarField read_snapshot(std::istream& in) {
  int dim = 0;
  {
    std::istringstream ls(next_line(in, "dim"));
    if (!(ls >> dim) || dim < 1 || dim > 3) throw InvalidArgument("snapshot has invalid dim");
  }
  std::array<Index, 3> points{1, 1, 1};
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  {
    std::istringstream ls(next_line(in, "points"));
    for (int p = 0; p < dim; ++p) {
      if (!(ls >> points[p])) throw InvalidArgument("snapshot points line is short");
    }
  }
  {
    std::istringstream ls(next_line(in, "extents"));
    for (int p = 0; p < dim; ++p) {
      if (!(ls >> extent[p])) throw InvalidArgument("snapshot extents line is short");
    }
  }
  const Grid g(dim, points, extent);
  Eigen::ArrayXd values(g.size());
  for (Index n = 0; n < g.size(); ++n) {
    char buf[8];
    if (!in.read(buf, 8)) throw InvalidArgument("snapshot payload truncated");
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf, 8);
    values(n) = std::bit_cast<double>(to_little_endian(bits));
  }
  return ScalarField(g, std::move(values));
}

ScalarField read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

}  // namespace locpert
