#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "pqframe/bounds.hpp"

using namespace pqframe;

namespace {

Eigen::MatrixXcd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = {z(rng), z(rng)};
  return m;
}

SolverConfig solver(std::uint64_t seed = 1) { return SolverConfig(seed); }

}  // namespace

TEST(OperatorNorm, Examples) {
  EXPECT_NEAR(operator_norm_pq(Eigen::MatrixXcd::Identity(2, 2), 2, 2, solver()).value, 1.0, 1e-12);
  Eigen::MatrixXcd col(2, 1);
  col << 1, 1;
  for (double p : {1.5, 2.0, 3.0}) EXPECT_NEAR(operator_norm_pq(col, p, 2, solver()).value, 2.0, 1e-12);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 1;
  EXPECT_NEAR(operator_norm_pq(d, 4, 2, solver()).value, std::sqrt(17.0), 1e-9);
  const auto grid = oracle::grid_search(d, 4, 2);
  EXPECT_NEAR(grid.max, std::sqrt(17.0), 1e-6);
}

TEST(MinGain, Examples) {
  std::mt19937_64 rng(2);
  EXPECT_EQ(min_gain_pq(random_matrix(2, 3, rng), 2, 2, solver()).value, 0.0);
  EXPECT_EQ(min_gain_pq(random_matrix(3, 5, rng), 1.5, 3, solver()).value, 0.0);
  Eigen::MatrixXcd c(1, 1);
  c << cplx(0.6, -0.8) * 3.0;
  EXPECT_NEAR(min_gain_pq(c, 1.5, 3, solver()).value, 27.0, 1e-10);
  Eigen::MatrixXcd h(2, 2);
  h << 1, 1, 1, -1;
  EXPECT_NEAR(min_gain_pq(h, 2, 2, solver()).value, 2.0, 1e-12);
  EXPECT_NEAR(hilbert_gains(h).first.value, 2.0, 1e-12);
  EXPECT_NEAR(hilbert_gains(h).second.value, 2.0, 1e-12);
}

TEST(Solvers, RejectBadInput) {
  EXPECT_THROW(operator_norm_pq(Eigen::MatrixXcd(0, 0), 2, 2, solver()), DomainError);
  EXPECT_THROW(operator_norm_pq(Eigen::MatrixXcd::Identity(2, 2), 1.0, 2, solver()), DomainError);
  auto cfg = solver();
  cfg.restarts = 0;
  EXPECT_THROW(min_gain_pq(Eigen::MatrixXcd::Identity(2, 2), 2, 2, cfg), DomainError);
}

TEST(Solvers, WitnessesAreFeasibleAndBeatColumns) {
  std::mt19937_64 rng(3);
  const std::pair<double, double> exps[] = {{1.5, 3}, {3, 1.5}, {4.0 / 3.0, 4}, {2.5, 2.5}, {2, 2}};
  for (int t = 0; t < 25; ++t) {
    const auto [p, q] = exps[t % 5];
    const auto m = random_matrix(2 + t % 4, 1 + t % 3, rng);
    const auto hi = operator_norm_pq(m, p, q, solver(t));
    const auto lo = min_gain_pq(m, p, q, solver(t));
    EXPECT_NEAR(detail::lp(hi.witness, p), 1.0, 1e-12);
    EXPECT_NEAR(detail::gain(m, hi.witness, q), hi.value, 1e-12 * hi.value);
    EXPECT_GE(lo.value, 0.0);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double cv = detail::gain(m, detail::basis(m.cols(), j), q);
      EXPECT_GE(hi.value, cv * (1 - 1e-14));
      EXPECT_LE(lo.value, cv * (1 + 1e-14));
    }
    EXPECT_LE(lo.value, hi.value * (1 + 1e-12));
  }
}

TEST(Solvers, HeuristicsAgreeWithSpectralPathAtHilbert) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index c = 1 + t % 12;
    const auto m = random_matrix(c + t % 3, c, rng);
    const auto [lo, hi] = hilbert_gains(m);
    EXPECT_NEAR(operator_norm_pq(m, 2, 2, solver(t)).value, hi.value, 1e-7 * hi.value);
    EXPECT_NEAR(min_gain_pq(m, 2, 2, solver(t)).value, lo.value, 1e-7 * hi.value);
  }
}

TEST(Solvers, MatchExhaustiveGridOnTwoColumns) {
  std::mt19937_64 rng(5);
  const std::pair<double, double> exps[] = {{1.5, 3}, {3, 1.5}, {4.0 / 3.0, 4}, {1.2, 2.5}, {2, 2}};
  for (int t = 0; t < 10; ++t) {
    const auto [p, q] = exps[t % 5];
    const auto m = random_matrix(2 + t % 3, 2, rng);
    const auto grid = oracle::grid_search(m, p, q, 600);
    const double hi = operator_norm_pq(m, p, q, solver(t)).value;
    const double lo = min_gain_pq(m, p, q, solver(t)).value;
    EXPECT_NEAR(hi, grid.max, 1e-4 * grid.max) << "p=" << p << " q=" << q;
    EXPECT_NEAR(lo, grid.min, 1e-4 * grid.min) << "p=" << p << " q=" << q;
    // Direction: the solver max can only undershoot, its min only overshoot,
    // but both beat a grid up to the grid's resolution.
    EXPECT_GE(hi, grid.max * (1 - 1e-9));
    EXPECT_LE(lo, grid.min * (1 + 1e-9));
  }
}

TEST(Solvers, Deterministic) {
  std::mt19937_64 rng(6);
  const auto m = random_matrix(4, 3, rng);
  const auto a = operator_norm_pq(m, 1.5, 3, solver(9));
  const auto b = operator_norm_pq(m, 1.5, 3, solver(9));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.best_restart, b.best_restart);
  EXPECT_EQ(a.witness, b.witness);
  const auto c = min_gain_pq(m, 3, 1.5, solver(9));
  const auto d = min_gain_pq(m, 3, 1.5, solver(9));
  EXPECT_EQ(c.value, d.value);
  EXPECT_EQ(c.witness, d.witness);
}

TEST(Solvers, IterationCapRaisesWarning) {
  FiniteAbelianGroup g({8});
  std::mt19937_64 rng(7);
  const auto mu = random_measure<GroupElement>(g, 6, rng);
  const auto nu = random_measure<DualCharacter>(g, 7, rng);
  auto cfg = solver();
  cfg.max_iterations = 1;
  cfg.restarts = 3;
  const auto est = frame_bounds(mu, nu, PNormConfig(1.5, 3), cfg);
  EXPECT_TRUE(est.warning);
  EXPECT_FALSE(est.exact);
  EXPECT_LE(est.lower, est.upper);
}

TEST(FrameBounds, PointMassAtEveryExponent) {
  FiniteAbelianGroup g({4});
  const auto mu = convolve(dirac(g, g.element({1})), dirac(g, g.element({2})));
  DualMeasure nu(g, {{g.character({0}), 0.5}, {g.character({1}), 0.25}, {g.character({2}), 0.25}});
  for (auto [p, q] : {std::pair{2.0, 2.0}, {1.5, 3.0}, {3.0, 1.5}}) {
    const auto b = frame_bounds(mu, nu, PNormConfig(p, q), solver());
    EXPECT_NEAR(b.lower, 1.0, 1e-9);
    EXPECT_NEAR(b.upper, 1.0, 1e-9);
    EXPECT_EQ(b.exact, p == 2.0 && q == 2.0);
  }
}

TEST(FrameBounds, Plancherel) {
  for (std::int64_t n = 2; n <= 16; ++n) {
    FiniteAbelianGroup g({n});
    const auto b = frame_bounds(haar<GroupElement>(g, HaarNormalization::counting),
                                haar<DualCharacter>(g, HaarNormalization::counting).scaled(1.0 / n), PNormConfig(),
                                solver());
    EXPECT_NEAR(b.lower, 1.0, 1e-10);
    EXPECT_NEAR(b.upper, 1.0, 1e-10);
  }
}

TEST(FrameBounds, HausdorffYoungDirection) {
  FiniteAbelianGroup g({8});
  const auto b = frame_bounds(haar<GroupElement>(g, HaarNormalization::probability),
                              haar<DualCharacter>(g, HaarNormalization::counting), PNormConfig(4.0 / 3.0, 4.0),
                              solver());
  EXPECT_LE(b.upper, 1.0 + 1e-6);
  EXPECT_GE(b.upper, 1.0 - 1e-9);
}

TEST(FrameBounds, MonotoneInDualMeasure) {
  std::mt19937_64 rng(8);
  for (const auto& g : {FiniteAbelianGroup({6}), FiniteAbelianGroup({2, 4})}) {
    for (int t = 0; t < 20; ++t) {
      const auto mu = random_measure<GroupElement>(g, 1 + t % 5, rng);
      const auto nu = random_measure<DualCharacter>(g, 2 + t % 5, rng);
      const auto extra = random_measure<DualCharacter>(g, 2, rng);
      const auto a = frame_bounds(mu, nu, PNormConfig(), solver());
      const auto b = frame_bounds(mu, add(nu, extra), PNormConfig(), solver());
      EXPECT_GE(b.lower, a.lower - 1e-10 * a.upper);
      EXPECT_GE(b.upper, a.upper - 1e-10 * a.upper);
    }
  }
}

TEST(FrameBounds, EnumerationOrderIrrelevant) {
  // Building the same measure in a different insertion order gives the same report.
  FiniteAbelianGroup g({6});
  GroupMeasure a(g), b(g);
  const double w[] = {0.3, 1.2, 0.7, 2.0};
  for (int i = 0; i < 4; ++i) a.add_mass(g.element({i}), w[i]);
  for (int i = 3; i >= 0; --i) b.add_mass(g.element({i}), w[i]);
  const auto nu = haar<DualCharacter>(g, HaarNormalization::probability);
  for (auto pq : {PNormConfig(), PNormConfig(1.5, 3)}) {
    const auto x = frame_bounds(a, nu, pq, solver());
    const auto y = frame_bounds(b, nu, pq, solver());
    EXPECT_NEAR(x.lower, y.lower, 1e-12 * x.upper);
    EXPECT_NEAR(x.upper, y.upper, 1e-12 * x.upper);
  }
}

TEST(BesselCertificate, BoundsTheOptimum) {
  FiniteAbelianGroup g({5});
  std::mt19937_64 rng(10);
  const auto nu = random_measure<DualCharacter>(g, 4, rng);
  const auto point = frame_bounds(dirac(g, g.element({0})), nu, PNormConfig(), solver());
  EXPECT_NEAR(bessel_certificate(dirac(g, g.element({0})), nu, PNormConfig()), nu.total_mass(), 1e-15);
  EXPECT_NEAR(point.upper, nu.total_mass(), 1e-12);
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_measure<GroupElement>(g, 1 + t % 5, rng);
    const auto v = random_measure<DualCharacter>(g, 1 + t % 5, rng);
    for (auto pq : {PNormConfig(), PNormConfig(1.5, 3), PNormConfig(3, 1.5)}) {
      auto cfg = solver(t);
      cfg.restarts = 4;
      EXPECT_LE(frame_bounds(mu, v, pq, cfg).upper, bessel_certificate(mu, v, pq) * (1 + 1e-12));
    }
  }
}

TEST(LocalFiniteness, Examples) {
  FiniteAbelianGroup g({6});
  std::mt19937_64 rng(11);
  const auto nu = random_measure<DualCharacter>(g, 4, rng);
  const auto delta0 = dirac(g, g.element({0}));
  const auto b = frame_bounds(delta0, nu, PNormConfig(), solver());
  const auto all = g.characters();
  const auto rep = local_finiteness_check(delta0, nu, {all.begin(), all.end()}, b.upper, PNormConfig());
  EXPECT_NEAR(rep.delta, 1.0, 1e-15);
  EXPECT_NEAR(rep.max_mass, nu.total_mass(), 1e-12);
  EXPECT_TRUE(rep.holds);

  const auto mu = random_measure<GroupElement>(g, 3, rng);
  const auto r0 = local_finiteness_check(mu, nu, {g.character({0})}, 2.0, PNormConfig(1.5, 3));
  EXPECT_NEAR(r0.delta, mu.total_mass(), 1e-12);
  EXPECT_NEAR(r0.bound, 2.0 * std::pow(mu.total_mass(), 2.0) / std::pow(mu.total_mass(), 3.0), 1e-12);

  EXPECT_TRUE(local_finiteness_check(mu, DualMeasure(g), {g.character({0})}, 0.0, PNormConfig()).holds);

  FiniteAbelianGroup z2({2});
  EXPECT_THROW(local_finiteness_check(haar<GroupElement>(z2, HaarNormalization::probability),
                                      haar<DualCharacter>(z2, HaarNormalization::counting), {z2.character({1})}, 1.0,
                                      PNormConfig()),
               PreconditionError);
}

TEST(FrameBounds, JsonRecord) {
  FiniteAbelianGroup g({3});
  const auto b = frame_bounds(haar<GroupElement>(g, HaarNormalization::counting),
                              haar<DualCharacter>(g, HaarNormalization::counting), PNormConfig(), solver(77));
  const auto j = to_json(b);
  for (const char* k : {"A_est", "B_est", "exact", "p", "q", "seed", "restarts", "witness_min", "witness_max"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 77u);
  EXPECT_EQ(j["witness_max"].size(), 3u);
  EXPECT_EQ(j["witness_max"][0].size(), 2u);
}
