#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "rti/experiments.hpp"
#include "rti/io.hpp"

using namespace rti;
namespace fs = std::filesystem;

TEST_SUITE("experiments") {

TEST_CASE("nearest-rank percentiles") {
  const std::vector<double> v = {15, 20, 35, 40, 50};
  CHECK(nearest_rank(v, 5) == 15);
  CHECK(nearest_rank(v, 30) == 20);
  CHECK(nearest_rank(v, 40) == 20);
  CHECK(nearest_rank(v, 50) == 35);
  CHECK(nearest_rank(v, 100) == 50);
  CHECK(nearest_rank(v, 0) == 15);
}

TEST_CASE("path study trials respect the sampling ranges") {
  PathStudyConfig cfg;
  cfg.trials = 100;
  const PathStudyReport rep = path_length_study(cfg);
  REQUIRE(rep.trials.size() == 100);
  for (const auto& t : rep.trials) {
    const double vs = t.region.v_max - t.region.v_min, hs = t.region.h_max - t.region.h_min;
    CHECK(vs >= cfg.v_span_min - 1e-12);
    CHECK(vs <= cfg.v_span_max + 1e-12);
    CHECK(hs >= cfg.h_span_min - 1e-12);
    CHECK(hs <= cfg.h_span_max + 1e-12);
    CHECK(t.region.distance >= cfg.distance_min);
    CHECK(t.region.distance <= cfg.distance_max);
    CHECK(t.v_s >= 2);
    CHECK(t.v_s <= 8);
    CHECK(t.sppa_length > 0.0);
    CHECK(t.etsp_length > 0.0);
  }
  REQUIRE(rep.percentiles.size() == 101);
  for (std::size_t i = 1; i < rep.percentiles.size(); ++i) {
    CHECK(rep.percentiles[i].sppa_ratio >= rep.percentiles[i - 1].sppa_ratio);
    CHECK(rep.percentiles[i].fib_ratio >= rep.percentiles[i - 1].fib_ratio);
  }
}

TEST_CASE("path study reports are byte-reproducible") {
  PathStudyConfig cfg;
  cfg.trials = 100;
  cfg.seed = 5;
  const std::string a = path_study_json(path_length_study(cfg));
  const std::string b = path_study_json(path_length_study(cfg));
  CHECK(a == b);
  CHECK(path_study_csv(path_length_study(cfg)) == path_study_csv(path_length_study(cfg)));
  cfg.seed = 6;
  CHECK(path_study_json(path_length_study(cfg)) != a);
}

TEST_CASE("small noise sweep is reproducible and writes its reports") {
  NoiseSweepConfig cfg;
  cfg.sigmas = {0.0, 0.2};
  cfg.trials = 2;
  cfg.truth_size = 120;
  cfg.plan_size = 30;
  cfg.scene.width = cfg.scene.height = 48;
  const NoiseSweepReport a = noise_sweep(cfg);
  const NoiseSweepReport b = noise_sweep(cfg);
  CHECK(noise_sweep_json(a) == noise_sweep_json(b));
  REQUIRE(a.points.size() == 2);
  CHECK(a.points[0].deltas.size() == 2);
  CHECK(a.points[0].mean > 0.0);
  CHECK(a.points[1].mean > a.points[0].mean);
  CHECK(a.points[0].mean_light_gap == 0.0);

  const fs::path dir = fs::temp_directory_path() / "rti_unit_tests" / "sweep";
  fs::remove_all(dir);
  write_noise_sweep(dir.string(), a);
  for (const char* f : {"noise_sweep.json", "noise_sweep.csv", "noise_sweep.svg"}) CHECK(fs::exists(dir / f));
  CHECK(read_json((dir / "noise_sweep.json").string()).dump() == Json::parse(noise_sweep_json(a)).dump());
}

TEST_CASE("invalid study settings are rejected") {
  PathStudyConfig p;
  p.trials = 0;
  CHECK_THROWS(path_length_study(p));
  NoiseSweepConfig n;
  n.sigmas = {0.2, 0.1};
  CHECK_THROWS(noise_sweep(n));
}

}
