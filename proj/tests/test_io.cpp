#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <map>

#include "toporep/io.hpp"
#include "toporep/synth.hpp"
#include "test_helpers.hpp"

using namespace toporep;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("toporep_io_" + std::to_string(Catch::rngSeed()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

FeatureMatrix random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix f = FeatureMatrix::zeros(n, d);
  for (auto& v : f.data) v = rng.gaussian() * std::pow(10.0, double(rng.bounded(7)) - 3.0);
  return f;
}

}  // namespace

TEST_CASE("feature CSV round trip is bit exact") {
  TempDir tmp;
  const auto f = random_features(7, 4, 1);
  io::write_feature_csv(f, tmp.path / "f.csv");
  const auto g = io::read_feature_csv(tmp.path / "f.csv");
  CHECK(g.data == f.data);
  CHECK(g.subject_ids == f.subject_ids);
}

TEST_CASE("feature binary + sidecar round trip") {
  TempDir tmp;
  const auto f = random_features(5, 9, 2);
  io::write_feature_binary(f, tmp.path / "f.bin");
  const auto g = io::read_feature_binary(tmp.path / "f.bin");
  CHECK(g.data == f.data);
  CHECK(g.subject_ids == f.subject_ids);
  // dispatcher picks by extension
  CHECK(io::read_feature_matrix(tmp.path / "f.bin").data == f.data);
}

TEST_CASE("distance CSV round trip preserves ids and values") {
  TempDir tmp;
  Rng rng(3);
  const auto d = testutil::random_metric(6, rng);
  io::write_distance_csv(d, tmp.path / "d.csv");
  const auto e = io::read_distance_csv(tmp.path / "d.csv");
  CHECK(e.d == d.d);
  CHECK(e.subject_ids == d.subject_ids);
}

TEST_CASE("spsd manifest round trip") {
  TempDir tmp;
  SpsdStack s;
  s.m = 3;
  Rng rng(4);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> m(9);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) {
        m[i * 3 + j] = m[j * 3 + i] = (i == j) ? 1.0 : rng.uniform() - 0.5;
      }
    s.matrices.push_back(m);
    s.subject_ids.push_back("subj" + std::to_string(k));
  }
  io::write_spsd_stack(s, tmp.path / "stack.json");
  const auto t = io::read_spsd_stack(tmp.path / "stack.json");
  CHECK(t.m == 3);
  CHECK(t.matrices == s.matrices);
  CHECK(t.subject_ids == s.subject_ids);
}

TEST_CASE("time series manifest round trip") {
  TempDir tmp;
  TimeSeriesSet ts;
  ts.components = 2;
  ts.timepoints = 4;
  ts.series = {{1, 2, 3, 4, 5, 6, 7, 8}, {8, 7, 6, 5, 4, 3, 2, 1}};
  ts.subject_ids = {"a", "b"};
  io::write_time_series(ts, tmp.path / "ts.json");
  const auto u = io::read_time_series(tmp.path / "ts.json");
  CHECK(u.series == ts.series);
  CHECK(u.components == 2);
  CHECK(u.timepoints == 4);
}

TEST_CASE("diagram JSON round trip with essential classes and prevalence") {
  TempDir tmp;
  PersistenceDiagram d;
  d.source_label = "demo";
  d.intervals.push_back(PersistenceInterval{0, 0.0, kInfDeath, 0, kNoSimplex, {}});
  d.intervals.push_back(PersistenceInterval{1, 0.25, 0.75, 3, 9, 0.625});
  d.sort();
  io::write_diagram_json(d, tmp.path / "d.json", nlohmann::json{{"threshold", 1.5}});
  const auto e = io::read_diagram_json(tmp.path / "d.json");
  REQUIRE(e.intervals.size() == 2);
  CHECK(e.source_label == "demo");
  CHECK(e.intervals[0].essential());
  CHECK_FALSE(e.intervals[0].prevalence.has_value());
  CHECK(e.intervals[1].birth == 0.25);
  CHECK(e.intervals[1].death == 0.75);
  CHECK(e.intervals[1].prevalence.value() == 0.625);
}

TEST_CASE("image diagram JSON carries the mask as base64") {
  TempDir tmp;
  ImageDiagram d;
  d.source_label = "img";
  d.sentinel = 4.5;
  d.mask.included = {true, false, true, true, false, true, true, false, true, true, true};
  d.mask.count = 8;
  d.intervals.push_back(ImageInterval{1, 0.5, 1.5, 2, 77});
  io::write_image_diagram_json(d, tmp.path / "img.json");
  const auto e = io::read_image_diagram_json(tmp.path / "img.json");
  CHECK(e.mask.included == d.mask.included);
  CHECK(e.mask.count == 8);
  CHECK(e.sentinel == 4.5);
  REQUIRE(e.intervals.size() == 1);
  CHECK(e.intervals[0].death_simplex == 77);
}

TEST_CASE("base64 bitset round trip at awkward lengths") {
  Rng rng(5);
  for (std::size_t n : {1u, 7u, 8u, 9u, 64u, 100u}) {
    std::vector<bool> bits(n);
    for (std::size_t i = 0; i < n; ++i) bits[i] = rng.bounded(2) == 1;
    CHECK(io::base64_decode(io::base64_encode(bits), n) == bits);
  }
}

TEST_CASE("match records CSV round trip, including unmatched rows") {
  TempDir tmp;
  std::vector<std::vector<MatchRecord>> records(2);
  records[0] = {MatchRecord{0, 0, 5, 0.75}, MatchRecord{1, 0, std::nullopt, 0.0}};
  records[1] = {MatchRecord{0, 1, std::nullopt, 0.0}, MatchRecord{1, 1, 2, 1.0}};
  io::write_match_records_csv(records, tmp.path / "r.csv");
  const auto back = io::read_match_records_csv(tmp.path / "r.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0][0].image_interval.value() == 5);
  CHECK(back[0][0].affinity == 0.75);
  CHECK_FALSE(back[0][1].image_interval.has_value());
  CHECK(back[1][1].affinity == 1.0);
}

TEST_CASE("block CSV aligns ids and rejects missing subjects") {
  TempDir tmp;
  const std::vector<std::string> ids{"s0", "s1", "s2"};
  io::write_blocks_csv(ids, BlockStructure{{"famA", "famA", "famB"}}, tmp.path / "b.csv");
  const auto b = io::read_blocks_csv(tmp.path / "b.csv", ids);
  CHECK(b.block_ids == std::vector<std::string>{"famA", "famA", "famB"});
  CHECK_THROWS_WITH(io::read_blocks_csv(tmp.path / "b.csv", {"s0", "sX"}),
                    Catch::Matchers::ContainsSubstring("sX"));
}

TEST_CASE("format_double survives a round trip through parse_double") {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, double(rng.bounded(13)) - 6.0);
    CHECK(io::parse_double(io::format_double(v), "t") == v);
  }
  CHECK(io::format_double(0.0) == "0");
}

TEST_CASE("malformed files are rejected") {
  TempDir tmp;
  {
    auto out = io::open_out(tmp.path / "ragged.csv");
    out << "subject_id,f0,f1\ns0,1.0,2.0\ns1,1.0\n";
  }
  CHECK_THROWS_AS(io::read_feature_csv(tmp.path / "ragged.csv"), std::runtime_error);
  CHECK_THROWS_AS(io::read_feature_csv(tmp.path / "missing.csv"), std::runtime_error);
  {
    auto out = io::open_out(tmp.path / "badnum.csv");
    out << "subject_id,f0\ns0,notanumber\ns1,2.0\n";
  }
  CHECK_THROWS_AS(io::read_feature_csv(tmp.path / "badnum.csv"), std::runtime_error);
}
