// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include "oracle.hpp"
#include "pqframe/pqframe.hpp"

using namespace pqframe;

namespace {

int failures = 0;

void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VerifyConfig cfg(double p, double q, std::uint64_t seed, int restarts = 32) {
  SolverConfig s(seed);
  s.restarts = restarts;
  return VerifyConfig(PNormConfig(p, q), s, "acceptance");
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

template <class P>
AtomicMeasure<P> random_support(const FiniteAbelianGroup& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> n(1, g.order());
  return random_measure<P>(g, static_cast<std::size_t>(n(rng)), rng);
}

template <class P>
std::set<P> random_subset(const std::vector<P>& from, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::set<P> s;
  for (const auto& x : from) {
    if (coin(rng)) s.insert(x);
  }
  if (s.empty()) s.insert(from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)]);
  return s;
}

// 1. The closed-form instance on Z_4 at three exponent pairs.
void example_instance() {
  const auto t0 = std::chrono::steady_clock::now();
  FiniteAbelianGroup g({4});
  const auto mu = convolve(dirac(g, g.element({1})), dirac(g, g.element({2})));
  DualMeasure nu(g, {{g.character({0}), 0.5}, {g.character({1}), 0.25}, {g.character({2}), 0.25}});
  double worst = 0.0;
  for (auto [p, q] : {std::pair{2.0, 2.0}, {1.5, 3.0}, {3.0, 1.5}}) {
    const auto b = frame_bounds(mu, nu, PNormConfig(p, q), SolverConfig(1));
    worst = std::max({worst, std::abs(b.lower - 1.0), std::abs(b.upper - 1.0)});
  }
  const double t = seconds_since(t0);
  verdict(1, "example-instance", worst <= 1e-9 && t < 1.0, fmt("max |bound - 1| = %.3g, %.3f s", worst, t));
}

// 2. Counting measure against normalized dual counting is Plancherel.
void plancherel() {
  double worst = 0.0;
  for (std::int64_t n = 2; n <= 16; ++n) {
    FiniteAbelianGroup g({n});
    const auto b = frame_bounds(haar<GroupElement>(g, HaarNormalization::counting),
                                haar<DualCharacter>(g, HaarNormalization::counting).scaled(1.0 / static_cast<double>(n)),
                                PNormConfig(), SolverConfig(1));
    worst = std::max({worst, std::abs(b.lower - 1.0), std::abs(b.upper - 1.0)});
  }
  verdict(2, "plancherel", worst <= 1e-10, fmt("n = 2..16, max |bound - 1| = %.3g", worst));
}

// 3. Hausdorff-Young at (4/3, 4).
void hausdorff_young() {
  FiniteAbelianGroup g({8});
  const auto b = frame_bounds(haar<GroupElement>(g, HaarNormalization::probability),
                              haar<DualCharacter>(g, HaarNormalization::counting), PNormConfig(4.0 / 3.0, 4.0),
                              SolverConfig(1));
  verdict(3, "hausdorff-young", b.upper <= 1.0 + 1e-6, fmt("B_est = %.12f", b.upper));
}

// 4. B/A against the density ratio.
void density_ratio() {
  FiniteAbelianGroup g({8});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  double worst_tight = 0.0, worst_generic = 0.0;
  for (int t = 0; t < 50; ++t) {
    GroupMeasure mu(g);
    double lo = INFINITY, hi = 0.0;
    for (const auto& x : g.elements()) {
      const double v = u(rng);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      mu.add_mass(x, v);
    }
    const auto tight = frame_bounds(mu, haar<DualCharacter>(g, HaarNormalization::counting).scaled(0.125), PNormConfig(),
                                    SolverConfig(t));
    worst_tight = std::max(worst_tight, rel(tight.upper / tight.lower, hi / lo));
    const auto generic = frame_bounds(mu, random_measure<DualCharacter>(g, 8, rng), PNormConfig(), SolverConfig(t));
    worst_generic = std::max(worst_generic, hi / lo - 1e-9 - generic.upper / generic.lower);
  }
  verdict(4, "ac-ratio-tightness", worst_tight <= 1e-9 && worst_generic <= 0.0,
          fmt("max rel gap %.3g, generic shortfall %.3g", worst_tight, std::max(worst_generic, 0.0)));
}

// 5. Translation and modulation invariance.
void translation() {
  std::mt19937_64 rng(5);
  int bad = 0, runs = 0;
  double worst = 0.0;
  for (const auto& g : {FiniteAbelianGroup({6}), FiniteAbelianGroup({8}), FiniteAbelianGroup({2, 4})}) {
    std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(g.order() - 1));
    for (int t = 0; t < 100; ++t, ++runs) {
      const auto r = verify_translation(random_support<GroupElement>(g, rng), random_support<DualCharacter>(g, rng),
                                        g.at(pick(rng)), g.at<DualCharacter>(pick(rng)), cfg(2, 2, runs));
      if (!r.passed()) ++bad;
      for (const char* s : {"translated", "modulated", "both"}) {
        worst = std::max(worst, std::abs(r.at(std::string("A_") + s) - r.at("A_base")) / r.at("B_base"));
        worst = std::max(worst, std::abs(r.at(std::string("B_") + s) - r.at("B_base")) / r.at("B_base"));
      }
    }
  }
  int bad_mixed = 0;
  double worst_mixed = 0.0;
  FiniteAbelianGroup g({6});
  std::uniform_int_distribution<std::int64_t> pick(0, 5), size(1, 4);
  for (int t = 0; t < 20; ++t) {
    const auto r = verify_translation(random_measure<GroupElement>(g, static_cast<std::size_t>(size(rng)), rng),
                                      random_measure<DualCharacter>(g, static_cast<std::size_t>(size(rng)), rng),
                                      g.element({pick(rng)}), g.character({pick(rng)}), cfg(1.5, 3, t, 16));
    if (!r.passed()) ++bad_mixed;
    for (const char* s : {"translated", "modulated", "both"}) {
      worst_mixed = std::max(worst_mixed, std::abs(r.at(std::string("A_") + s) - r.at("A_base")) / r.at("B_base"));
      worst_mixed = std::max(worst_mixed, std::abs(r.at(std::string("B_") + s) - r.at("B_base")) / r.at("B_base"));
    }
  }
  verdict(5, "translation-invariance", bad == 0 && bad_mixed == 0 && worst <= 1e-9 && worst_mixed <= 1e-3,
          fmt("300 exact (max gap %.3g), 20 at (1.5,3) (max gap %.3g)", worst, worst_mixed) +
              (bad + bad_mixed ? ", failures " + std::to_string(bad + bad_mixed) : ""));
}

// 6. Bracket inequalities, 50 instances each.
void brackets() {
  std::mt19937_64 rng(6);
  const FiniteAbelianGroup groups[] = {FiniteAbelianGroup({6}), FiniteAbelianGroup({8}), FiniteAbelianGroup({2, 4}),
                                       FiniteAbelianGroup({5})};
  std::uniform_real_distribution<double> dens(0.2, 5.0);
  std::map<std::string, int> fails, inconclusive;
  for (int t = 0; t < 50; ++t) {
    const auto& g = groups[t % 4];
    const auto c = cfg(2, 2, t);
    auto tally = [&](const VerificationReport& r) {
      if (r.outcome == Outcome::failed) ++fails[r.theorem];
      if (r.outcome == Outcome::inconclusive) ++inconclusive[r.theorem];
      fails.emplace(r.theorem, 0);
    };
    const auto mu = random_support<GroupElement>(g, rng);
    const auto nu = random_support<DualCharacter>(g, rng);
    tally(verify_convolution_frame(mu, nu, random_support<DualCharacter>(g, rng), c));

    std::map<GroupElement, double> phi;
    std::map<DualCharacter, double> psi;
    for (const auto& x : g.elements()) phi[x] = dens(rng);
    for (const auto& x : g.characters()) psi[x] = dens(rng);
    tally(verify_density(mu, nu, DensityFunction<GroupElement>(phi), DensityFunction<DualCharacter>(psi), c));

    const auto full = random_measure<GroupElement>(g, static_cast<std::size_t>(g.order()), rng);
    const auto left = random_subset(full.support(), rng);
    std::set<GroupElement> right;
    for (const auto& x : full.support()) {
      if (!left.count(x)) right.insert(x);
    }
    tally(verify_sum_split(restrict(full, left), restrict(full, right), nu, c));
    tally(verify_restriction(mu, nu, random_subset(mu.support(), rng), c));

    const auto nu_full = random_measure<DualCharacter>(g, static_cast<std::size_t>(g.order()), rng);
    tally(verify_uniformity(full, nu_full, random_subset(g.elements(), rng),
                            g.at(std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(g.order() - 1))(rng)),
                            c));
    tally(verify_bessel_certificate(mu, nu, c));
    tally(verify_local_finiteness(mu, nu, random_subset(g.characters(), rng), c));
  }
  int total = 0, undecided = 0;
  std::string detail;
  for (const auto& [k, v] : fails) {
    total += v;
    detail += k + "=" + std::to_string(v) + " ";
  }
  for (const auto& [k, v] : inconclusive) undecided += v;
  verdict(6, "bracket-inequalities", total == 0 && undecided == 0,
          "violations: " + detail + "inconclusive " + std::to_string(undecided));
}

// 7. Duality pairing and the adjoint identity.
void duality() {
  FiniteAbelianGroup g({6});
  std::mt19937_64 rng(7);
  const auto mu = random_measure<GroupElement>(g, 6, rng);
  const auto nu = random_measure<DualCharacter>(g, 6, rng);
  const auto r = verify_duality(mu, nu, cfg(2, 2, 7), 1000);
  double adj = 0.0;
  std::uniform_real_distribution<double> ex(1.2, 5.0);
  for (int t = 0; t < 50; ++t) {
    const PNormConfig pq(ex(rng), ex(rng));
    const auto a = random_support<GroupElement>(g, rng);
    const auto b = random_support<DualCharacter>(g, rng);
    adj = std::max(adj, (synthesis_matrix(a, b, pq) - analysis_matrix(a, b, pq).entries.adjoint()).cwiseAbs().maxCoeff());
  }
  verdict(7, "duality-adjoint", r.passed() && adj <= 1e-12,
          fmt("max scaled gap %.3g over 1000 pairs, adjoint gap %.3g", r.at("max_scaled_gap"), adj));
}

// 8. Frame operator spectrum.
void frame_operator() {
  std::mt19937_64 rng(8);
  const FiniteAbelianGroup groups[] = {FiniteAbelianGroup({6}), FiniteAbelianGroup({8}), FiniteAbelianGroup({2, 4})};
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto& g = groups[t % 3];
    const auto mu = random_support<GroupElement>(g, rng);
    const auto nu = random_support<DualCharacter>(g, rng);
    const auto s = frame_operator_spectrum(mu, nu, cfg(2, 2, t));
    const auto b = frame_bounds(mu, nu, PNormConfig(), SolverConfig(t));
    if (!s.report.passed()) ++bad;
    for (double e : s.eigenvalues) {
      if (e < b.lower - 1e-9 || e > b.upper + 1e-9) ++bad;
    }
    worst = std::max({worst, std::abs(s.eigenvalues.front() - b.lower), std::abs(s.eigenvalues.back() - b.upper)});
  }
  verdict(8, "frame-operator", bad == 0 && worst <= 1e-9, fmt("max extreme mismatch %.3g", worst));
}

// 9. Perturbation brackets and the equivalence sandwich.
void perturbation() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3), scale(0.5, 4.0);
  const FiniteAbelianGroup groups[] = {FiniteAbelianGroup({4}), FiniteAbelianGroup({6}), FiniteAbelianGroup({2, 3})};
  int bad = 0, checks = 0;
  double worst_scale = 0.0;
  auto ok = [&](const VerificationReport& r) {
    ++checks;
    if (!r.passed()) ++bad;
  };
  for (int t = 0; t < 10; ++t) {
    const auto& g = groups[t % 3];
    const auto mu = random_support<GroupElement>(g, rng);
    const auto nu = random_measure<DualCharacter>(g, static_cast<std::size_t>(g.order()), rng);
    const auto n_nu = static_cast<Eigen::Index>(nu.support_size());
    const auto n_mu = static_cast<Eigen::Index>(mu.support_size());
    const double c = scale(rng);

    // Dual side, p = q = 2.
    const auto hs = verify_perturbation_hilbert(mu, nu, nu.scaled(c), c * Eigen::MatrixXcd::Identity(n_nu, n_nu), cfg(2, 2, t));
    ok(hs);
    worst_scale = std::max({worst_scale, rel(hs.at("A_rho"), c * hs.at("A_nu")), rel(hs.at("B_rho"), c * hs.at("B_nu"))});
    DualMeasure rho(g);
    for (const auto& [x, w] : nu.atoms()) rho.add_mass(x, w * (1 + jitter(rng)));
    ok(verify_perturbation_hilbert(mu, nu, rho, Eigen::MatrixXcd::Identity(n_nu, n_nu), cfg(2, 2, t)));

    // Group side at (2,2) and in falsification mode at (1.5,3).
    GroupMeasure lambda(g);
    for (const auto& [x, w] : mu.atoms()) lambda.add_mass(x, w * (1 + jitter(rng)));
    for (auto [p, q] : {std::pair{2.0, 2.0}, {1.5, 3.0}}) {
      const auto k = cfg(p, q, t, p == 2.0 ? 32 : 8);
      const auto s = verify_perturbation_pq(mu, mu.scaled(c), nu, c * Eigen::MatrixXcd::Identity(n_mu, n_mu), std::nullopt, k);
      ok(s);
      if (p == 2.0) {
        worst_scale = std::max({worst_scale, rel(s.at("A_lambda"), c * s.at("A_mu")), rel(s.at("B_lambda"), c * s.at("B_mu"))});
      }
      ok(verify_perturbation_pq(mu, lambda, nu, Eigen::MatrixXcd::Identity(n_mu, n_mu), std::nullopt, k));
    }

    // Sandwich over 500 samples.
    if (frame_bounds(mu, nu, PNormConfig(), SolverConfig(t)).lower > 0.0) {
      const auto e = verify_equivalence(mu, lambda, nu, Eigen::MatrixXcd::Identity(n_mu, n_mu), cfg(2, 2, t), 500);
      ok(e);
      if (e.at("sandwich_violations") != 0.0) ++bad;
    }
  }
  verdict(9, "perturbation", bad == 0 && worst_scale <= 1e-8,
          fmt("%g reports, %g not passed, max scaling error %.3g", checks, bad, worst_scale));
}

// 10. Packing blow-up on Z_{4^k}.
void packing_blowup() {
  const auto t0 = std::chrono::steady_clock::now();
  GrowthTable table;
  packing_blowup_demo({1, 2, 3, 4}, BlowupOptions{}, cfg(2, 2, 10), &table);
  const double t = seconds_since(t0);
  bool ok = t < 60.0;
  std::string ratios;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    ok = ok && r.ratio >= std::pow(2.0, r.k) * (1 - 1e-9);
    if (i > 0) ok = ok && r.ratio > table.rows[i - 1].ratio;
    ratios += fmt("%.6g ", r.ratio);
  }
  verdict(10, "packing-blowup", ok && table.rows.size() == 4, "B/A = " + ratios + fmt("in %.2f s", t));
}

// 11. Heuristic solvers against an exhaustive grid on one- and two-column matrices.
void grid_oracle() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> ex(1.2, 5.0);
  std::uniform_int_distribution<int> rows(2, 6);
  double worst = 0.0;
  int count = 0;
  auto check = [&](const Eigen::MatrixXcd& m, double p, double q) {
    SolverConfig s(static_cast<std::uint64_t>(count));
    const double hi = operator_norm_pq(m, p, q, s).value;
    const double lo = min_gain_pq(m, p, q, s).value;
    const auto grid = oracle::grid_search(m, p, q, 600);
    worst = std::max({worst, rel(hi, grid.max), rel(lo, grid.min)});
    ++count;
  };
  for (int t = 0; t < 30; ++t) {
    const int cols = 1 + t % 2;
    Eigen::MatrixXcd m(rows(rng), cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {z(rng), z(rng)};
    check(m, ex(rng), ex(rng));
  }
  // Analysis matrices of two-atom measures.
  for (const auto& g : {FiniteAbelianGroup({6}), FiniteAbelianGroup({2, 4})}) {
    for (int t = 0; t < 10; ++t) {
      const PNormConfig pq(ex(rng), ex(rng));
      const auto mu = random_measure<GroupElement>(g, 2, rng);
      const auto nu = random_measure<DualCharacter>(g, 4, rng);
      check(analysis_matrix(mu, nu, pq).entries, pq.p, pq.q);
    }
  }
  verdict(11, "grid-oracle", worst <= 1e-4, fmt("%g matrices, max relative gap %.3g", count, worst));
}

}  // namespace

int main() {
  example_instance();
  plancherel();
  hausdorff_young();
  density_ratio();
  translation();
  brackets();
  duality();
  frame_operator();
  perturbation();
  packing_blowup();
  grid_oracle();
  std::printf("%s\n", failures ? "FAILED" : "ALL PASSED");
  return failures ? 1 : 0;
}
