#include <doctest.h>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "wbhp/codebook_io.hpp"
#include "wbhp/errors.hpp"
#include "wbhp/experiment.hpp"
#include "wbhp/greedy.hpp"

using namespace wbhp;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.system.n_bs = 16;
  cfg.system.n_ms = 4;
  cfg.system.n_rf = 3;
  cfg.system.n_s = 2;
  cfg.system.k_sub = 8;
  cfg.system.cp_len = 2;
  cfg.snr_grid_db = {-5.0, 5.0};
  cfg.n_realizations = 12;
  cfg.seed = 17;
  return cfg;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream o;
  write_sweep_csv(o, r);
  return o.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / ("wbhp_exp_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (auto k : {SchemeKind::UnconstrainedSvd, SchemeKind::OptimalHybridExhaustive, SchemeKind::ApproxGsHp,
                 SchemeKind::DgHp, SchemeKind::GsHp, SchemeKind::TrainedCodebook})
    CHECK(scheme_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(scheme_kind_from_string("magic"), ConfigError);
}

TEST_CASE("zero channel gives zero spectral efficiency") {
  auto cfg = small_config();
  WidebandChannel zero;
  zero.per_subcarrier.assign(8, CMat::Zero(4, 16));
  zero.compute_svds();
  cfg.schemes = {SchemeSpec{SchemeKind::UnconstrainedSvd, PowerConstraint::Unitary, "", "", ""},
                 SchemeSpec{SchemeKind::UnconstrainedSvd, PowerConstraint::Total, "", "", ""}};
  for (const auto& s : resolve_schemes(cfg)) CHECK(evaluate_scheme(s, zero, 1.0, cfg.system) == 0.0);
}

TEST_CASE("sweep: dominance, determinism, serial equals parallel") {
  auto cfg = small_config();
  cfg.schemes = {SchemeSpec{SchemeKind::UnconstrainedSvd, PowerConstraint::Unitary, "", "", ""},
                 SchemeSpec{SchemeKind::UnconstrainedSvd, PowerConstraint::Total, "", "", ""},
                 SchemeSpec{SchemeKind::ApproxGsHp, PowerConstraint::Unitary, "beamsteering:16:6", "", ""},
                 SchemeSpec{SchemeKind::ApproxGsHp, PowerConstraint::Total, "beamsteering:16:6", "", ""},
                 SchemeSpec{SchemeKind::DgHp, PowerConstraint::Unitary, "beamsteering:16:6", "", ""},
                 SchemeSpec{SchemeKind::GsHp, PowerConstraint::Unitary, "beamsteering:16:6", "", ""},
                 SchemeSpec{SchemeKind::OptimalHybridExhaustive, PowerConstraint::Unitary, "beamsteering:8:6", "", ""}};
  const auto res = run_sweep(cfg);
  REQUIRE(res.rows.size() == 14);
  for (double snr : cfg.snr_grid_db) {
    const auto* su = res.find("unconstrained-svd-unitary", snr);
    const auto* st = res.find("unconstrained-svd-total", snr);
    REQUIRE(su);
    REQUIRE(st);
    for (const auto& r : res.rows) {
      if (r.snr_db != snr) continue;
      CHECK(r.n == 12);
      CHECK(r.mean_se >= 0.0);
      CHECK(r.wall_ms == 0.0);
      const bool total = r.scheme.find("total") != std::string::npos;
      CHECK(r.mean_se <= (total ? st : su)->mean_se + 1e-12);
    }
    CHECK(std::abs(res.find("dg-hp", snr)->mean_se - res.find("gs-hp", snr)->mean_se) < 1e-8);
  }
  CHECK(res.find("dg-hp", -5.0)->feedback_bits == 3 * 4);
  CHECK(res.find("optimal-hybrid-unitary", -5.0)->feedback_bits == 3 * 3);
  CHECK(res.find("unconstrained-svd-total", -5.0)->feedback_bits == 0);

  CHECK(csv_of(res) == csv_of(run_sweep(cfg)));
  CHECK(csv_of(res) == csv_of(run_sweep(cfg, Exec::Serial)));
  auto other = cfg;
  other.seed = 18;
  CHECK(csv_of(res) != csv_of(run_sweep(other)));
}

TEST_CASE("sweep timing is recorded only on request") {
  auto cfg = small_config();
  cfg.n_realizations = 3;
  cfg.record_timing = true;
  cfg.schemes = {SchemeSpec{SchemeKind::GsHp, PowerConstraint::Unitary, "beamsteering:16:6", "", ""}};
  for (const auto& r : run_sweep(cfg).rows) CHECK(r.wall_ms > 0.0);
}

TEST_CASE("cluster sweep keys rows by L") {
  auto cfg = small_config();
  cfg.n_realizations = 4;
  cfg.snr_grid_db = {0.0};
  cfg.clusters_grid = {1};
  cfg.schemes = {SchemeSpec{SchemeKind::UnconstrainedSvd, PowerConstraint::Total, "", "", ""}};
  const auto one = cluster_sweep(cfg);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].param == std::optional<double>(1.0));

  cfg.clusters_grid = {1, 3};
  cfg.schemes.push_back(SchemeSpec{SchemeKind::DgHp, PowerConstraint::Total, "beamsteering:16:6", "", ""});
  const auto two = cluster_sweep(cfg);
  CHECK(two.rows.size() == 4);
  CHECK(two.find("dg-hp", 0.0, 3.0) != nullptr);

  cfg.clusters_grid.clear();
  CHECK_THROWS_AS(cluster_sweep(cfg), ConfigError);
}

TEST_CASE("RF-chain sweep: skipped entries, reference row, bits column") {
  auto cfg = small_config();
  cfg.system.n_ms = 8;
  cfg.system.n_rf = cfg.system.n_s = 2;
  cfg.n_realizations = 4;
  cfg.snr_grid_db = {0.0};
  cfg.nrf_grid = {1, 2, 3, 9};
  cfg.rfchain_vcb = "beamsteering:16:5";
  cfg.baseband.codebook_size = 4;
  cfg.baseband.n_train = 8;
  cfg.baseband.max_iters = 3;
  const auto res = rf_chain_sweep(cfg);
  CHECK(res.warnings.size() == 2);
  CHECK(res.find("unconstrained-svd-unitary", 0.0) != nullptr);
  const auto* r2 = res.find("approx-gs-hp", 0.0, 2.0);
  const auto* r3 = res.find("approx-gs-hp", 0.0, 3.0);
  REQUIRE(r2);
  REQUIRE(r3);
  CHECK(r2->feedback_bits == 2 * 4);
  CHECK(r3->feedback_bits == feedback_bits({FeedbackScheme::RfVector, 3, 2, 8, 16, 4}));
  CHECK(r3->feedback_bits == 3 * 4 + 8 * 2);
  CHECK(r2->mean_se <= res.find("unconstrained-svd-unitary", 0.0)->mean_se + 1e-12);
}

TEST_CASE("config parsing") {
  std::istringstream good(R"({
    "system": {"n_bs": 16, "n_ms": 8, "n_rf": 2, "n_s": 2, "k_sub": 16, "cp_len": 4},
    "channel": {"clusters": 3, "rays_per_cluster": 2, "spread_deg": 5, "delay_policy": "per-ray"},
    "schemes": [{"kind": "approx-gs-hp", "mode": "total", "rf": "beamsteering:16:6"},
                {"kind": "unconstrained-svd", "mode": "persub", "label": "ref"}],
    "snr_db": [-10, 0], "realizations": 5, "seed": 9,
    "baseband": {"quantized": false}, "training": {"n_cb": 4, "tol": 0.001}
  })");
  const auto cfg = parse_experiment_config(good, "/tmp");
  CHECK(cfg.system.n_bs == 16);
  CHECK(cfg.stats.n_clusters == 3);
  CHECK(cfg.stats.delay_policy == DelayPolicy::PerRay);
  CHECK(cfg.stats.angle_spread_rad == doctest::Approx(5.0 * 3.14159265358979 / 180));
  REQUIRE(cfg.schemes.size() == 2);
  CHECK(cfg.schemes[0].mode == PowerConstraint::Total);
  CHECK(cfg.schemes[1].label == "ref");
  CHECK(cfg.snr_grid_db == std::vector<double>{-10, 0});
  CHECK_FALSE(cfg.baseband.quantized);
  CHECK(cfg.train_n_cb == 4);

  auto bad = [](const char* text) {
    std::istringstream in(text);
    return parse_experiment_config(in, ".");
  };
  CHECK_THROWS_AS(bad(R"({"sytem": {}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"system": {"n_bs": "many"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"system": {"n_s": 5}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"realizations": 0})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"schemes": [{"kind": "approx-gs-hp", "mode": "sideways"}]})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"channel": {"delay_policy": "random"}})"), ConfigError);
  CHECK_THROWS_AS(bad("{not json"), ConfigError);
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("codebook references resolve relative to the config file") {
  TempDir tmp;
  auto cfg = small_config();
  RfTrainingConfig rc;
  rc.system = cfg.system;
  rc.n_cb = 4;
  rc.n_train = 20;
  rc.max_iters = 3;
  const auto rf = train_rf_codebook(rc);
  save_rf_codebook(tmp.path / "rf.json", rf.codebook);
  BasebandTrainingConfig bc;
  bc.system = cfg.system;
  bc.n_cb = 2;
  bc.n_train = 10;
  bc.max_iters = 3;
  const auto bb = train_baseband_codebook(bc, exhaustive_selector(rf.codebook, 1.0, 2));
  save_baseband_codebook(tmp.path / "bb.json", bb.codebook);

  {
    std::ofstream f(tmp.path / "cfg.json");
    f << R"({"system": {"n_bs": 16, "n_ms": 4, "n_rf": 3, "n_s": 2, "k_sub": 8, "cp_len": 2},
             "schemes": [{"kind": "trained-codebook", "rf": "rf.json", "bb": "bb.json"},
                         {"kind": "optimal-hybrid", "mode": "unitary", "rf": "rf.json"}],
             "realizations": 3})";
  }
  const auto loaded = load_experiment_config(tmp.path / "cfg.json");
  const auto schemes = resolve_schemes(loaded);
  REQUIRE(schemes.size() == 2);
  CHECK(schemes[0].feedback_bits == 2 + 8 * 1);
  CHECK(schemes[1].feedback_bits == 2);
  const auto res = run_sweep(loaded);
  CHECK(res.rows.size() == 2);
  CHECK(res.rows[0].mean_se <= res.rows[1].mean_se + 1e-12);

  auto missing = loaded;
  missing.schemes[0].rf_ref = "nope.json";
  CHECK_THROWS_AS(resolve_schemes(missing), ConfigError);
  CHECK_THROWS_AS(run_sweep(missing), ConfigError);
  auto no_bb = loaded;
  no_bb.schemes[0].bb_ref.clear();
  CHECK_THROWS_AS(resolve_schemes(no_bb), ConfigError);
  auto malformed = loaded;
  malformed.schemes[1].rf_ref = "beamsteering:x:6";
  CHECK_THROWS_AS(resolve_schemes(malformed), ConfigError);
  auto wrong_n = loaded;
  wrong_n.system.n_bs = 32;
  CHECK_THROWS_AS(resolve_schemes(wrong_n), ConfigError);
}

TEST_CASE("result serialization") {
  CHECK(csv_of(SweepResult{}) == "scheme,snr_db,param,mean_se,stderr,n,feedback_bits,wall_ms\n");

  SweepResult r;
  r.rows.push_back(SweepRow{"x", -2.5, 3.0, 1.25, 0.5, 7, 12, 0.0});
  r.rows.push_back(SweepRow{"y", 0.0, std::nullopt, 0.1, 0.0, 1, 0, 0.0});
  r.warnings.push_back("careful");
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");  // ignored when unavailable
  const std::string csv = csv_of(r);
  std::setlocale(LC_NUMERIC, saved.c_str());
  CHECK(csv == "scheme,snr_db,param,mean_se,stderr,n,feedback_bits,wall_ms\n"
               "x,-2.5,3,1.25,0.5,7,12,0\n"
               "y,0,,0.1,0,1,0,0\n");

  std::ostringstream js;
  write_sweep_json(js, r);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][1]["param"].is_null());
  CHECK(j["warnings"][0] == "careful");

  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("full-scale switch") {
  auto cfg = small_config();
  apply_full_scale(cfg);
  CHECK(cfg.system.k_sub == 512);
  CHECK(cfg.system.cp_len == 128);
}
