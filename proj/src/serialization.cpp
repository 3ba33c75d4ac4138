#include "mdiew/serialization.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "mdiew/errors.hpp"

namespace mdiew {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

const Json& array_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
    throw SchemaError(std::string("missing array field '") + key + "'");
  return j.at(key);
}

std::string format_double(double v) {
  if (!std::isfinite(v)) throw SchemaError("canonical_json: non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_canonical(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      // nlohmann's default object is a std::map, so iteration is key-sorted.
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write_canonical(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ',';
        write_canonical(j[k], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: out += format_double(j.get<double>()); break;
    default: out += j.dump(); break;
  }
}

}  // namespace

Json to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix complex_matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw SchemaError("matrix: expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  ComplexMatrix m(n, static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols())
      throw SchemaError("matrix: ragged rows");
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const Json& e = row[static_cast<std::size_t>(k)];
      if (e.is_number()) {
        m(i, k) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw SchemaError("matrix: entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

Json to_json(const Scenario& scenario) {
  Json j;
  j["dX"] = scenario.dX();
  j["dY"] = scenario.dY();
  j["nA"] = scenario.nA;
  j["nB"] = scenario.nB;
  j["inputsX"] = Json::array();
  j["inputsY"] = Json::array();
  for (const auto& m : scenario.inputs_x) j["inputsX"].push_back(to_json(m));
  for (const auto& m : scenario.inputs_y) j["inputsY"].push_back(to_json(m));
  return j;
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.nA = field<int>(j, "nA");
  s.nB = field<int>(j, "nB");
  for (const Json& m : array_field(j, "inputsX")) s.inputs_x.push_back(complex_matrix_from_json(m));
  for (const Json& m : array_field(j, "inputsY")) s.inputs_y.push_back(complex_matrix_from_json(m));
  if (j.contains("dX") && field<int>(j, "dX") != s.dX()) throw SchemaError("scenario: dX disagrees with inputsX");
  if (j.contains("dY") && field<int>(j, "dY") != s.dY()) throw SchemaError("scenario: dY disagrees with inputsY");
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  return s;
}

Json to_json(const ProbabilityTable& table) {
  Json j;
  j["normalization"] = table.normalization == Normalization::Normalized ? "normalized" : "subnormalized";
  j["indexSet"] = Json::array();
  for (const Setting& s : table.index_set) j["indexSet"].push_back({s.x, s.y});
  j["entries"] = Json::array();
  for (const auto& [k, v] : table.values)
    j["entries"].push_back({{"a", k.a}, {"b", k.b}, {"x", k.x}, {"y", k.y}, {"p", v}});
  return j;
}

ProbabilityTable probability_table_from_json(const Json& j) {
  ProbabilityTable t;
  const std::string norm = field<std::string>(j, "normalization");
  if (norm == "normalized") t.normalization = Normalization::Normalized;
  else if (norm == "subnormalized") t.normalization = Normalization::Subnormalized;
  else throw SchemaError("probability table: unknown normalization '" + norm + "'");
  for (const Json& e : array_field(j, "entries")) {
    const EventKey k{field<int>(e, "a"), field<int>(e, "b"), field<int>(e, "x"), field<int>(e, "y")};
    t.values[k] = field<double>(e, "p");
    t.index_set.insert(k.setting());
  }
  if (j.contains("indexSet")) {
    std::set<Setting> declared;
    for (const Json& s : array_field(j, "indexSet")) {
      if (!s.is_array() || s.size() != 2) throw SchemaError("probability table: bad indexSet entry");
      declared.insert({s[0].get<int>(), s[1].get<int>()});
    }
    if (declared != t.index_set) throw SchemaError("probability table: indexSet disagrees with entries");
  }
  return t;
}

Json to_json(const CountTable& counts) {
  Json j;
  j["nA"] = counts.nA;
  j["nB"] = counts.nB;
  j["nX"] = counts.nX;
  j["nY"] = counts.nY;
  j["entries"] = Json::array();
  for (const auto& [k, n] : counts.counts)
    j["entries"].push_back({{"a", k.a}, {"b", k.b}, {"x", k.x}, {"y", k.y}, {"n", n}});
  return j;
}

CountTable count_table_from_json(const Json& j) {
  CountTable c;
  for (const Json& e : array_field(j, "entries")) {
    const EventKey k{field<int>(e, "a"), field<int>(e, "b"), field<int>(e, "x"), field<int>(e, "y")};
    const auto n = field<std::int64_t>(e, "n");
    if (n < 0) throw SchemaError("count table: negative count");
    c.counts[k] = n;
    c.nA = std::max(c.nA, k.a + 1);
    c.nB = std::max(c.nB, k.b + 1);
    c.nX = std::max(c.nX, k.x + 1);
    c.nY = std::max(c.nY, k.y + 1);
  }
  if (j.contains("nA")) c.nA = std::max(c.nA, field<int>(j, "nA"));
  if (j.contains("nB")) c.nB = std::max(c.nB, field<int>(j, "nB"));
  if (j.contains("nX")) c.nX = std::max(c.nX, field<int>(j, "nX"));
  if (j.contains("nY")) c.nY = std::max(c.nY, field<int>(j, "nY"));
  return c;
}

Json to_json(const Witness& w) {
  Json j;
  j["measure"] = to_string(w.measure.tag);
  j["sepApprox"] = to_string(w.measure.sep);
  j["scenarioDigest"] = w.scenario_digest;
  j["bound"] = w.bound;
  j["beta"] = Json::array();
  for (const auto& [k, v] : w.beta) j["beta"].push_back({{"a", k.a}, {"b", k.b}, {"x", k.x}, {"y", k.y}, {"v", v}});
  return j;
}

Witness witness_from_json(const Json& j) {
  Witness w;
  w.measure.tag = parse_measure_tag(field<std::string>(j, "measure"));
  if (j.contains("sepApprox")) w.measure.sep = parse_sep_approx(field<std::string>(j, "sepApprox"));
  w.scenario_digest = field<std::string>(j, "scenarioDigest");
  w.bound = field<double>(j, "bound");
  for (const Json& e : array_field(j, "beta")) {
    const EventKey k{field<int>(e, "a"), field<int>(e, "b"), field<int>(e, "x"), field<int>(e, "y")};
    w.beta[k] = field<double>(e, "v");
  }
  return w;
}

std::string canonical_json(const Json& j) {
  std::string out;
  write_canonical(j, out);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
    throw Error("sha256: OpenSSL digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < length; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

std::string json_digest(const Json& j) { return sha256_hex(canonical_json(j)); }

std::string scenario_digest(const Scenario& scenario) { return json_digest(to_json(scenario)); }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace mdiew
