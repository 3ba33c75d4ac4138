#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mdiew/errors.hpp"
#include "mdiew/serialization.hpp"
#include "support.hpp"

using namespace mdiew;

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Canonical, SortedKeysAndFullPrecision) {
  const Json j = Json::parse(R"({"b": [1, 0.1, true, null], "a": {"z": "s", "y": -2}})");
  EXPECT_EQ(canonical_json(j), R"({"a":{"y":-2,"z":"s"},"b":[1,0.10000000000000001,true,null]})");
  EXPECT_THROW(canonical_json(Json(std::nan(""))), SchemaError);
}

TEST(RoundTrip, Matrix) {
  const Complex i(0.0, 1.0);
  ComplexMatrix m(2, 2);
  m << 1.0 / 3.0, i, -i, 2.0;
  EXPECT_EQ(complex_matrix_from_json(to_json(m)), m);
  EXPECT_EQ(complex_matrix_from_json(Json::parse("[[1, 0], [0, 1]]")), ComplexMatrix::Identity(2, 2));
  EXPECT_THROW(complex_matrix_from_json(Json::parse("[[1, 0], [0]]")), SchemaError);
  EXPECT_THROW(complex_matrix_from_json(Json::parse("[[\"x\"]]")), SchemaError);
}

TEST(RoundTrip, ScenarioAndDigest) {
  const Scenario s = fixtures::pauli_bell_scenario();
  const Scenario back = scenario_from_json(to_json(s));
  EXPECT_EQ(back.nA, s.nA);
  EXPECT_EQ(back.inputs_y.size(), s.inputs_y.size());
  EXPECT_EQ(scenario_digest(back), scenario_digest(s));
  Scenario other = s;
  other.nB = 5;
  EXPECT_NE(scenario_digest(other), scenario_digest(s));
  Json bad = to_json(s);
  bad["dX"] = 3;
  EXPECT_THROW(scenario_from_json(bad), SchemaError);
  bad = to_json(s);
  bad.erase("nA");
  EXPECT_THROW(scenario_from_json(bad), SchemaError);
}

TEST(RoundTrip, Tables) {
  const ProbabilityTable t = fixtures::werner_table(0.3);
  const ProbabilityTable back = probability_table_from_json(to_json(t));
  EXPECT_EQ(back.values, t.values);
  EXPECT_EQ(back.index_set, t.index_set);
  EXPECT_EQ(back.normalization, t.normalization);
  Json bad = to_json(t);
  bad["normalization"] = "sometimes";
  EXPECT_THROW(probability_table_from_json(bad), SchemaError);

  const CountTable c = sample_counts(t, 50, 1);
  const CountTable cb = count_table_from_json(to_json(c));
  EXPECT_EQ(cb.counts, c.counts);
  EXPECT_EQ(cb.nA, c.nA);
  EXPECT_EQ(cb.nY, c.nY);
}

TEST(RoundTrip, Witness) {
  Witness w;
  w.measure = {MeasureTag::Dub, SepApprox::Dps2};
  w.scenario_digest = scenario_digest(fixtures::pauli_bell_scenario());
  w.bound = 1.25;
  w.beta[{0, 1, 2, 3}] = -0.125;
  w.beta[{1, 0, 0, 0}] = 1.0 / 7.0;
  const Witness back = witness_from_json(to_json(w));
  EXPECT_EQ(back.beta, w.beta);
  EXPECT_EQ(back.measure, w.measure);
  EXPECT_EQ(back.bound, w.bound);
  EXPECT_EQ(back.scenario_digest, w.scenario_digest);
  EXPECT_EQ(json_digest(to_json(back)), json_digest(to_json(w)));
}

TEST(Files, ReadWriteAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "mdiew_serialization_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "sub" / "t.json";
  write_json_file(path, to_json(fixtures::werner_table(0.5)));
  EXPECT_EQ(probability_table_from_json(read_json_file(path)).values, fixtures::werner_table(0.5).values);
  EXPECT_THROW(read_json_file(dir / "absent.json"), SchemaError);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(read_json_file(dir / "broken.json"), SchemaError);
  std::filesystem::remove_all(dir);
}
