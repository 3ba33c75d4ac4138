#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "mdiew/conic.hpp"
#include "mdiew/errors.hpp"

namespace mdiew {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ConeKind parse_kind(const std::string& word) {
  if (word == "free") return ConeKind::Free;
  if (word == "nonneg") return ConeKind::Nonneg;
  if (word == "soc") return ConeKind::SecondOrder;
  if (word == "psd") return ConeKind::Psd;
  throw SchemaError("program dump: unknown cone '" + word + "'");
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw SchemaError("program dump: expected '" + word + "', got '" + got + "'");
}

}  // namespace

void write_program(std::ostream& out, const StandardConicProgram& p) {
  out << "conic-program " << p.num_rows() << ' ' << p.num_vars() << '\n';
  out << "objective\n";
  for (int j = 0; j < p.num_vars(); ++j) out << fmt(p.c(j)) << '\n';
  out << "equalities " << p.A.nonZeros() << '\n';
  for (int j = 0; j < p.A.outerSize(); ++j)
    for (RealSparse::InnerIterator it(p.A, j); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << fmt(it.value()) << '\n';
  out << "rhs\n";
  for (int i = 0; i < p.num_rows(); ++i) out << fmt(p.b(i)) << '\n';
  out << "cones " << p.cones.size() << '\n';
  for (const Cone& k : p.cones) out << to_string(k.kind) << ' ' << k.dim << '\n';
  out << "tags " << p.row_tags.size() << '\n';
  for (const auto& tag : p.row_tags) out << tag << '\n';
}

StandardConicProgram read_program(std::istream& in) {
  StandardConicProgram p;
  int m = 0, n = 0;
  expect(in, "conic-program");
  if (!(in >> m >> n) || m < 0 || n < 0) throw SchemaError("program dump: bad header");
  expect(in, "objective");
  p.c.resize(n);
  for (int j = 0; j < n; ++j)
    if (!(in >> p.c(j))) throw SchemaError("program dump: truncated objective");
  expect(in, "equalities");
  long nnz = 0;
  in >> nnz;
  std::vector<Eigen::Triplet<double>> trips;
  for (long k = 0; k < nnz; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v) || i < 0 || i >= m || j < 0 || j >= n)
      throw SchemaError("program dump: bad equality entry");
    trips.emplace_back(i, j, v);
  }
  p.A.resize(m, n);
  p.A.setFromTriplets(trips.begin(), trips.end());
  expect(in, "rhs");
  p.b.resize(m);
  for (int i = 0; i < m; ++i)
    if (!(in >> p.b(i))) throw SchemaError("program dump: truncated rhs");
  expect(in, "cones");
  std::size_t count = 0;
  in >> count;
  for (std::size_t k = 0; k < count; ++k) {
    std::string kind;
    int dim = 0;
    if (!(in >> kind >> dim)) throw SchemaError("program dump: truncated cone list");
    p.cones.push_back({parse_kind(kind), dim});
  }
  expect(in, "tags");
  in >> count;
  std::string line;
  std::getline(in, line);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) throw SchemaError("program dump: truncated tags");
    p.row_tags.push_back(line);
  }
  p.validate();
  return p;
}

}  // namespace mdiew
