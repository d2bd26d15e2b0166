#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "wbhp/codebook.hpp"
#include "wbhp/codebook_io.hpp"
#include "wbhp/errors.hpp"
#include "wbhp/precoder.hpp"

using namespace wbhp;
using oracle::kPi;

namespace {

SystemConfig small_sys(int k_sub = 8, int cp_len = 2) {
  SystemConfig s;
  s.n_bs = 8;
  s.n_ms = 4;
  s.n_rf = 3;
  s.n_s = 2;
  s.k_sub = k_sub;
  s.cp_len = cp_len;
  return s;
}

TrainingSet random_training(int members, int k, int n, int r, std::mt19937_64& rng) {
  TrainingSet ts;
  ts.n = n;
  ts.r = r;
  for (int i = 0; i < members; ++i) {
    std::vector<SubspacePoint> b;
    for (int j = 0; j < k; ++j) b.emplace_back(oracle::random_basis(n, r, rng));
    ts.add(std::move(b));
  }
  return ts;
}

double loop_distortion(const SubspacePoint& x, const TrainingMember& m) {
  double s = 0.0;
  for (const auto& b : m.bases) s += generalized_chordal_sq(x, b);
  return s / m.bases.size();
}

double wrapped(double a) { return std::abs(std::remainder(a, 2 * kPi)); }

}  // namespace

TEST_CASE("initial codebook") {
  std::mt19937_64 rng(1);
  const auto u = init_codebook(1, 4, 4, rng);
  CHECK((u[0].adjoint() * u[0] - CMat::Identity(4, 4)).norm() < 1e-12);

  std::mt19937_64 a(5), b(5);
  const auto ca = init_codebook(3, 6, 2, a), cb = init_codebook(3, 6, 2, b);
  for (int i = 0; i < 3; ++i) CHECK((ca[i] - cb[i]).norm() == 0.0);

  const auto four = init_codebook(4, 8, 3, rng);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) CHECK(chordal_sq(SubspacePoint(four[i]), SubspacePoint(four[j])) > 1e-3);
  CHECK_THROWS_AS(init_codebook(2, 3, 4, rng), InvalidArgument);
}

TEST_CASE("training set construction") {
  auto sys = small_sys(4, 2);
  const auto ts = build_training_set(sys, ChannelStatsConfig{}, 1, 2, 3);
  REQUIRE(ts.size() == 1);
  CHECK(ts.members[0].bases.size() == 4);
  CHECK(ts.n == 8);
  CHECK(ts.r == 2);
  for (const auto& b : ts.members[0].bases) CHECK((b.basis.adjoint() * b.basis - CMat::Identity(2, 2)).norm() < 1e-10);

  auto flat = small_sys(4, 1);
  const auto tf = build_training_set(flat, ChannelStatsConfig{}, 3, 2, 3);
  for (const auto& m : tf.members)
    for (const auto& b : m.bases) CHECK(chordal_sq(b, m.bases[0]) < 1e-9);

  const auto big = build_training_set(small_sys(), ChannelStatsConfig{}, 7, 3, 4);
  CHECK(big.size() == 7);
  for (const auto& m : big.members) {
    CHECK(m.bases.size() == 8);
    CHECK(m.bases[0].dim() == 3);
  }
  CHECK_THROWS_AS(build_training_set(sys, ChannelStatsConfig{}, 0, 2, 3), InvalidArgument);
}

TEST_CASE("partition and assignment") {
  std::mt19937_64 rng(2);
  const auto ts = random_training(30, 3, 6, 2, rng);
  const std::vector<SubspacePoint> single{SubspacePoint(oracle::random_basis(6, 2, rng))};
  const auto one = partition(single, ts, false);
  CHECK(one.size() == 1);
  CHECK(one[0].size() == 30);

  std::vector<SubspacePoint> cws;
  for (int i = 0; i < 5; ++i) cws.emplace_back(oracle::random_basis(6, 2, rng));
  TrainingSet with_copy = ts;
  with_copy.add(std::vector<SubspacePoint>(3, cws[3]));
  const auto a = assign(cws, with_copy, false);
  CHECK(a.cell.back() == 3);
  CHECK(a.distortion.back() < 1e-12);

  for (int i = 0; i < ts.size(); ++i) {
    int best = 0;
    double bd = 1e300;
    for (int c = 0; c < 5; ++c) {
      const double d = loop_distortion(cws[c], ts.members[i]);
      if (d < bd - 1e-12) bd = d, best = c;
    }
    CHECK(a.cell[i] == best);
    CHECK(std::abs(a.distortion[i] - bd) < 1e-12);
  }

  const auto cells = partition(cws, ts, false);
  std::vector<int> seen(ts.size(), 0);
  for (const auto& c : cells)
    for (int m : c) ++seen[m];
  for (int s : seen) CHECK(s == 1);

  std::vector<SubspacePoint> dup{cws[0], cws[0]};
  for (int c : assign(dup, ts, false).cell) CHECK(c == 0);
}

TEST_CASE("recenter") {
  std::mt19937_64 rng(3);
  const SubspacePoint y(oracle::random_basis(6, 2, rng));
  TrainingSet ts1;
  ts1.n = 6;
  ts1.r = 2;
  ts1.add({y});
  const std::vector<double> d1{0.5};
  const auto c1 = recenter({{0}}, ts1, 2, d1);
  CHECK(chordal_sq(c1[0], y) < 1e-10);

  TrainingSet same;
  same.n = 6;
  same.r = 2;
  for (int i = 0; i < 4; ++i) same.add(std::vector<SubspacePoint>(3, y));
  const auto cs = recenter({{0, 1, 2, 3}}, same, 2, std::vector<double>(4, 1.0));
  CHECK(codebook_distortion(cs, same, false) < 1e-10);

  const auto ts = random_training(6, 4, 6, 2, rng);
  const auto c = recenter({{0, 2, 5}, {1, 3, 4}}, ts, 2, std::vector<double>(6, 0.0));
  CMat s = CMat::Zero(6, 6);
  for (int m : {0, 2, 5})
    for (const auto& b : ts.members[m].bases) s += oracle::matmul(b.basis, oracle::adjoint(b.basis));
  const auto ref = oracle::top_projector_embedding(s, 2);
  const auto got = oracle::real_embedding(oracle::matmul(c[0].basis, oracle::adjoint(c[0].basis)));
  double diff = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) diff += std::pow(ref[i] - got[i], 2);
  CHECK(std::sqrt(diff) < 1e-8);

  // Empty cells reseed at the worst members, one member each.
  std::vector<double> dist{0.1, 0.9, 0.3, 0.8, 0.2, 0.0};
  const auto re = recenter({{0, 1, 2, 3, 4, 5}, {}, {}}, ts, 2, dist);
  CHECK(chordal_sq(re[1], karcher_centroid(std::vector<std::vector<SubspacePoint>>{ts.members[1].bases}, 2)) < 1e-9);
  CHECK(chordal_sq(re[2], karcher_centroid(std::vector<std::vector<SubspacePoint>>{ts.members[3].bases}, 2)) < 1e-9);
}

TEST_CASE("RF phase projection") {
  CMat one(1, 1);
  one(0, 0) = std::polar(1.0, 0.3);
  CHECK(rf_phase_indices(one, 2)(0, 0) == 0);
  one(0, 0) = std::polar(1.0, kPi / 4);
  CHECK(rf_phase_indices(one, 2)(0, 0) == 0);
  one(0, 0) = std::polar(2.0, 3 * kPi / 4);
  CHECK(rf_phase_indices(one, 2)(0, 0) == 1);
  one(0, 0) = std::polar(1.0, -0.1);
  CHECK(rf_phase_indices(one, 2)(0, 0) == 0);
  one(0, 0) = 0.0;
  CHECK(rf_phase_indices(one, 3)(0, 0) == 0);

  std::mt19937_64 rng(4);
  const CMat on_grid = oracle::random_unit_modulus(6, 3, 5, rng);
  const CMat proj = rf_project(on_grid, 5);
  CHECK((proj - on_grid).norm() < 1e-12);

  for (int bits = 1; bits <= 8; ++bits) {
    const CMat f = oracle::random_basis(8, 3, rng);
    const CMat p = rf_project(f, bits);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(std::abs(p(i, j)) - 1.0) < 1e-12);
        CHECK(wrapped(std::arg(p(i, j)) - std::arg(f(i, j))) <= kPi / (1 << bits) + 1e-12);
        const double steps = std::arg(p(i, j)) / (2 * kPi / (1 << bits));
        CHECK(std::abs(steps - std::round(steps)) < 1e-9);
      }
  }
  CHECK_THROWS_AS(rf_project(on_grid, 0), InvalidArgument);
}

TEST_CASE("Lloyd RF training: monotone trace, invariants, RF distortion bound") {
  const auto ts = build_training_set(small_sys(), ChannelStatsConfig{}, 60, 2, 5);
  const auto res = train_rf_codebook(ts, 6, 3, 4, 30, 0.0, 5);
  const auto& tr = res.trace.per_iteration;
  REQUIRE(tr.size() >= 2);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i].unconstrained <= tr[i - 1].unconstrained + 1e-9);
  CHECK(tr.back().unconstrained < tr.front().unconstrained);

  const auto& cb = res.codebook;
  REQUIRE(cb.size() == 6);
  CHECK(cb.twins.size() == 6);
  for (int i = 0; i < cb.size(); ++i) {
    CHECK((cb.codewords[i].cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((cb.twins[i].adjoint() * cb.twins[i] - CMat::Identity(3, 3)).norm() < 1e-10);
    CHECK((cb.codewords[i] - unit_modulus_from_indices(cb.phase_index[i], 4)).norm() == 0.0);
  }

  // Extra RF distortion per cell, bounded through the triangle inequality of
  // the chordal metric (d(X, Y) <= sqrt(r)).
  const auto ts3 = build_training_set(small_sys(), ChannelStatsConfig{}, 40, 3, 6);
  const auto r3 = train_rf_codebook(ts3, 4, 3, 5, 20, 1e-4, 6);
  const auto twins = as_subspaces(r3.codebook.twins);
  const auto rfs = rf_subspaces(r3.codebook.codewords);
  const auto cells = partition(twins, ts3, false);
  for (int c = 0; c < 4; ++c) {
    if (cells[c].empty()) continue;
    double d_rf = 0.0, d_tw = 0.0;
    for (int m : cells[c]) {
      d_rf += loop_distortion(rfs[c], ts3.members[m]);
      d_tw += loop_distortion(twins[c], ts3.members[m]);
    }
    d_rf /= cells[c].size();
    d_tw /= cells[c].size();
    const double bound = 2.0 * std::sqrt(3.0 * chordal_sq(twins[c], rfs[c])) + chordal_sq(twins[c], rfs[c]);
    CHECK(d_rf - d_tw <= bound + 1e-8);
  }
}

TEST_CASE("Lloyd on identical flat members converges to zero distortion") {
  auto sys = small_sys(4, 1);
  const auto one = build_training_set(sys, ChannelStatsConfig{}, 1, 2, 8);
  TrainingSet ts;
  ts.n = one.n;
  ts.r = one.r;
  for (int i = 0; i < 5; ++i) ts.add(one.members[0].bases);
  const auto res = train_rf_codebook(ts, 1, 2, 6, 10, 1e-4, 1);
  CHECK(res.trace.per_iteration.back().unconstrained < 1e-9);
}

TEST_CASE("baseband codebook training") {
  auto sys = small_sys(8, 2);
  const RfCodebook rf = beamsteering_codebook(8, 8, 0.5, 6);
  RfCodebook mat = RfCodebook::from_phase_indices(
      RfKind::Matrix, 6,
      {(Eigen::MatrixXi(8, 3) << rf.phase_index[0], rf.phase_index[3], rf.phase_index[5]).finished(),
       (Eigen::MatrixXi(8, 3) << rf.phase_index[1], rf.phase_index[2], rf.phase_index[7]).finished()});
  const auto sel = exhaustive_selector(mat, 1.0, 2);

  BasebandTrainingConfig cfg;
  cfg.system = sys;
  cfg.n_cb = 1;
  cfg.n_train = 1;
  cfg.seed = 4;
  const auto single = train_baseband_codebook(cfg, sel);
  const auto ts1 = build_baseband_training_set(cfg, sel);
  const auto c = karcher_centroid(std::vector<std::vector<SubspacePoint>>{ts1.members[0].bases}, 2);
  CHECK(chordal_sq(SubspacePoint(single.codebook.codewords[0]), c) < 1e-9);

  cfg.n_cb = 4;
  cfg.n_train = 40;
  const auto trained = train_baseband_codebook(cfg, sel);
  for (const auto& g : trained.codebook.codewords) CHECK((g.adjoint() * g - CMat::Identity(2, 2)).norm() < 1e-10);
  const auto ts = build_baseband_training_set(cfg, sel);
  std::mt19937_64 rng(9);
  const auto rnd = as_subspaces(init_codebook(4, 3, 2, rng));
  CHECK(codebook_distortion(as_subspaces(trained.codebook.codewords), ts, false) <=
        codebook_distortion(rnd, ts, false));

  cfg.system.n_s = 3;
  CHECK_THROWS_AS(train_baseband_codebook(cfg, sel), InvalidArgument);
}

TEST_CASE("beamsteering codebook") {
  const auto cb = beamsteering_codebook(8, 8, 0.5, 6);
  REQUIRE(cb.size() == 8);
  CHECK(cb.kind == RfKind::Vector);
  const CMat cols = cb.columns();
  CHECK((cols.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  // With n_cb = n and half-wavelength spacing the codewords are DFT columns.
  CHECK((cols.adjoint() * cols - 8.0 * CMat::Identity(8, 8)).norm() < 1e-9);
  for (int i = 0; i < 8; ++i)
    for (int m = 0; m < 8; ++m) {
      const cd dft = std::polar(1.0, kPi * m * (-1.0 + 2.0 * i / 8));
      CHECK(std::abs(cols(m, i) - dft) < 1e-12);
    }
}

TEST_CASE("Lloyd vector codebook beats beamsteering of equal size") {
  RfTrainingConfig cfg;
  cfg.system = small_sys(8, 2);
  cfg.system.n_s = 1;
  cfg.n_cb = 8;
  cfg.n_train = 150;
  cfg.max_iters = 30;
  cfg.seed = 12;
  const auto trained = train_rf_vector_codebook(cfg);
  CHECK(trained.codebook.kind == RfKind::Vector);
  const auto validation = build_training_set(cfg.system, cfg.stats, 150, 1, 12);
  const auto beams = beamsteering_codebook(8, 8, 0.5, 6);
  CHECK(codebook_distortion(rf_subspaces(trained.codebook.codewords), validation, true) <
        codebook_distortion(rf_subspaces(beams.codewords), validation, true));
}

TEST_CASE("vector codebook training ignores the stream count") {
  RfTrainingConfig cfg;
  cfg.system = small_sys();
  cfg.n_cb = 4;
  cfg.n_train = 20;
  cfg.max_iters = 2;
  const auto v = train_rf_vector_codebook(cfg);
  CHECK(v.codebook.r == 1);
  CHECK(v.codebook.size() == 4);
}

TEST_CASE("codebook distortion") {
  std::mt19937_64 rng(10);
  std::vector<SubspacePoint> cws;
  TrainingSet self;
  self.n = 6;
  self.r = 2;
  for (int i = 0; i < 3; ++i) {
    cws.emplace_back(oracle::random_basis(6, 2, rng));
    self.add({cws.back(), cws.back()});
  }
  CHECK(codebook_distortion(cws, self, false) < 1e-12);

  const auto one = random_training(1, 3, 6, 2, rng);
  const std::vector<SubspacePoint> c1{cws[0]};
  CHECK(std::abs(codebook_distortion(c1, one, false) - avg_chordal(cws[0], one.members[0].bases, false)) < 1e-12);

  const auto ts = random_training(20, 4, 6, 2, rng);
  double loop = 0.0;
  for (const auto& m : ts.members) {
    double best = 1e300;
    for (const auto& c : cws) best = std::min(best, loop_distortion(c, m));
    loop += best;
  }
  CHECK(std::abs(codebook_distortion(cws, ts, false) - loop / 20) < 1e-12);
  CHECK(std::abs(codebook_distortion(cws, ts, false, Exec::Serial) - codebook_distortion(cws, ts, false)) == 0.0);
}

TEST_CASE("codebook files") {
  const auto ts = build_training_set(small_sys(), ChannelStatsConfig{}, 20, 3, 7);
  const auto res = train_rf_codebook(ts, 3, 3, 6, 5, 1e-4, 7);
  std::stringstream s;
  write_rf_codebook(s, res.codebook);
  const auto back = read_rf_codebook(s);
  CHECK(back.kind == RfKind::Matrix);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back.phase_index[i] == res.codebook.phase_index[i]);
    CHECK((back.twins[i] - res.codebook.twins[i]).norm() == 0.0);
  }

  const auto beams = beamsteering_codebook(4, 8, 0.5, 3);
  std::stringstream v;
  write_rf_codebook(v, beams);
  const auto vb = read_rf_codebook(v);
  CHECK(vb.kind == RfKind::Vector);
  CHECK(vb.phase_bits == 3);

  BasebandCodebook bb{3, 2, {CMat::Identity(3, 2), CMat::Identity(3, 2) * cd(0, 1)}};
  std::stringstream b;
  write_baseband_codebook(b, bb);
  const auto bb2 = read_baseband_codebook(b);
  CHECK((bb2.codewords[1] - bb.codewords[1]).norm() == 0.0);

  std::stringstream wrong_version(R"({"version": 2, "kind": "rf-matrix"})");
  CHECK_THROWS_AS(read_rf_codebook(wrong_version), FormatError);
  std::stringstream wrong_kind;
  write_baseband_codebook(wrong_kind, bb);
  CHECK_THROWS_AS(read_rf_codebook(wrong_kind), FormatError);
  std::stringstream off_grid(
      R"({"version":1,"kind":"rf-vector","n":2,"r":1,"phase_bits":2,"codewords":[[[0],[4]]]})");
  CHECK_THROWS_AS(read_rf_codebook(off_grid), FormatError);
  CHECK_THROWS_AS(load_rf_codebook("/nonexistent/cb.json"), FormatError);

  std::ostringstream csv;
  write_trace_csv(csv, res.trace);
  CHECK(csv.str().rfind("iteration,unconstrained_distortion,rf_distortion\n", 0) == 0);
}
