#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <set>

#include "wbhp/errors.hpp"
#include "wbhp/experiment.hpp"

namespace wbhp {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "scheme,snr_db,param,mean_se,stderr,n,feedback_bits,wall_ms\n";
  for (const auto& row : r.rows) {
    out << row.scheme << ',' << format_double(row.snr_db) << ',' << (row.param ? format_double(*row.param) : "")
        << ',' << format_double(row.mean_se) << ',' << format_double(row.stderr_se) << ',' << row.n << ','
        << row.feedback_bits << ',' << format_double(row.wall_ms) << '\n';
  }
}

void write_sweep_json(std::ostream& out, const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j;
    j["scheme"] = row.scheme;
    j["snr_db"] = row.snr_db;
    j["param"] = row.param ? json(*row.param) : json(nullptr);
    j["mean_se"] = row.mean_se;
    j["stderr"] = row.stderr_se;
    j["n"] = row.n;
    j["feedback_bits"] = row.feedback_bits;
    j["wall_ms"] = row.wall_ms;
    rows.push_back(std::move(j));
  }
  json doc;
  doc["rows"] = std::move(rows);
  doc["warnings"] = r.warnings;
  out << doc.dump(2) << '\n';
}

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

DelayPolicy delay_policy_from(const std::string& s) {
  if (s == "per-cluster") return DelayPolicy::PerCluster;
  if (s == "per-ray") return DelayPolicy::PerRay;
  throw ConfigError("unknown delay_policy '" + s + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j, "config",
               {"system", "channel", "schemes", "snr_db", "realizations", "seed", "record_timing", "clusters_grid",
                "nrf_grid", "rfchain_vcb", "baseband", "training"});
    if (j.contains("system")) {
      const auto& s = j["system"];
      check_keys(s, "system", {"n_bs", "n_ms", "n_rf", "n_s", "k_sub", "cp_len", "snr_db", "antenna_spacing",
                               "rolloff", "rng_seed"});
      auto& sys = cfg.system;
      read(s, "n_bs", sys.n_bs);
      read(s, "n_ms", sys.n_ms);
      read(s, "n_rf", sys.n_rf);
      read(s, "n_s", sys.n_s);
      read(s, "k_sub", sys.k_sub);
      read(s, "cp_len", sys.cp_len);
      read(s, "snr_db", sys.snr_db);
      read(s, "antenna_spacing", sys.antenna_spacing);
      read(s, "rolloff", sys.rolloff);
      read(s, "rng_seed", sys.rng_seed);
    }
    if (j.contains("channel")) {
      const auto& c = j["channel"];
      check_keys(c, "channel",
                 {"clusters", "rays_per_cluster", "spread_deg", "delay_policy", "ray_delay_spread", "path_loss"});
      auto& st = cfg.stats;
      read(c, "clusters", st.n_clusters);
      read(c, "rays_per_cluster", st.rays_per_cluster);
      if (c.contains("spread_deg")) st.angle_spread_rad = c["spread_deg"].get<double>() * std::numbers::pi / 180.0;
      if (c.contains("delay_policy")) st.delay_policy = delay_policy_from(c["delay_policy"].get<std::string>());
      read(c, "ray_delay_spread", st.ray_delay_spread);
      read(c, "path_loss", st.path_loss);
    }
    if (j.contains("schemes")) {
      for (const auto& s : j["schemes"]) {
        check_keys(s, "scheme", {"kind", "mode", "rf", "bb", "label"});
        SchemeSpec spec;
        spec.kind = scheme_kind_from_string(s.at("kind").get<std::string>());
        if (s.contains("mode")) {
          try {
            spec.mode = power_constraint_from_string(s["mode"].get<std::string>());
          } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
          }
        }
        read(s, "rf", spec.rf_ref);
        read(s, "bb", spec.bb_ref);
        read(s, "label", spec.label);
        cfg.schemes.push_back(std::move(spec));
      }
    }
    read(j, "snr_db", cfg.snr_grid_db);
    read(j, "realizations", cfg.n_realizations);
    read(j, "seed", cfg.seed);
    read(j, "record_timing", cfg.record_timing);
    read(j, "clusters_grid", cfg.clusters_grid);
    read(j, "nrf_grid", cfg.nrf_grid);
    read(j, "rfchain_vcb", cfg.rfchain_vcb);
    if (j.contains("baseband")) {
      const auto& b = j["baseband"];
      check_keys(b, "baseband", {"quantized", "codebook_size", "n_train", "max_iters"});
      read(b, "quantized", cfg.baseband.quantized);
      read(b, "codebook_size", cfg.baseband.codebook_size);
      read(b, "n_train", cfg.baseband.n_train);
      read(b, "max_iters", cfg.baseband.max_iters);
    }
    if (j.contains("training")) {
      const auto& t = j["training"];
      check_keys(t, "training", {"n_cb", "bb_n_cb", "phase_bits", "n_train", "max_iters", "tol", "rf"});
      read(t, "n_cb", cfg.train_n_cb);
      read(t, "bb_n_cb", cfg.train_bb_n_cb);
      read(t, "phase_bits", cfg.train_phase_bits);
      read(t, "n_train", cfg.train_n_train);
      read(t, "max_iters", cfg.train_max_iters);
      read(t, "tol", cfg.train_tol);
      read(t, "rf", cfg.train_rf_ref);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return parse_experiment_config(in, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace wbhp
