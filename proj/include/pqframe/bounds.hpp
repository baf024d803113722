#pragma once

// Optimal (p,q)-frame bounds. Bounds are reported in the q-th power
// convention of the frame inequality:
//
//   A ||f||_{L^p(mu)}^q <= ||f^dmu||_{L^q(nu)}^q <= B ||f||_{L^p(mu)}^q,
//
// i.e. A and B are the extremal values of ||M g||_q^q over the unit p-sphere
// of the analysis matrix M. At p = q = 2 they come from the singular values.
// Otherwise B is estimated from below by nonlinear power iteration and A from
// above by projected gradient descent, so every heuristic estimate errs on the
// side of the true optimum it can certify: A_est >= A_opt, B_est <= B_opt.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "pqframe/errors.hpp"
#include "pqframe/measure.hpp"
#include "pqframe/transform.hpp"

namespace pqframe {

struct SolverConfig {
  std::uint64_t seed;
  int restarts = 32;
  int max_iterations = 500;
  double tolerance = 1e-11;  ///< relative change of the objective between iterates
  // Minimizer step schedule: Barzilai-Borwein trial step with Armijo backtracking.
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 60;

  explicit SolverConfig(std::uint64_t seed_) : seed(seed_) {}

  void validate() const {
    if (restarts < 1) throw DomainError("restarts must be >= 1");
    if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be > 0");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw DomainError("backtrack_factor must be in (0,1)");
  }
};

struct SolverResult {
  double value = 0.0;          ///< ||M w||_q^q at the witness
  Eigen::VectorXcd witness;    ///< unit p-norm vector in weighted coordinates
  int iterations = 0;          ///< total over all restarts
  int restarts = 0;
  int best_restart = 0;
  bool converged = true;       ///< false when some restart hit max_iterations
  bool exact = false;
};

struct FrameBoundsEstimate {
  double lower = 0.0;  ///< A
  double upper = 0.0;  ///< B
  bool exact = false;
  double p = 2.0;
  double q = 2.0;
  Eigen::VectorXcd lower_witness;
  Eigen::VectorXcd upper_witness;
  int restarts = 0;
  int iterations = 0;
  std::uint64_t seed = 0;
  bool warning = false;  ///< some heuristic restart did not converge

  double ratio() const { return upper / lower; }
};

// ---------------------------------------------------------------------------
namespace detail {

inline double lp(const Eigen::VectorXcd& v, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return std::pow(s, 1.0 / p);
}

inline double lp_power(const Eigen::VectorXcd& v, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return s;
}

/// Phi_r(z) = |z|^{r-1} z/|z| componentwise, Phi_r(0) = 0.
inline Eigen::VectorXcd duality_map(const Eigen::VectorXcd& v, double r) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    out(i) = a == 0.0 ? cplx(0.0) : v(i) * std::pow(a, r - 2.0);
  }
  return out;
}

inline Eigen::VectorXcd normalize_p(const Eigen::VectorXcd& v, double p) {
  const double n = lp(v, p);
  return n > 0.0 ? Eigen::VectorXcd(v / n) : v;
}

inline double gain(const Eigen::MatrixXcd& m, const Eigen::VectorXcd& w, double q) {
  return lp_power(m * w, q);
}

inline Eigen::VectorXcd random_start(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
  return v;
}

inline std::mt19937_64 restart_rng(std::uint64_t seed, int restart, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline Eigen::VectorXcd basis(Eigen::Index n, Eigen::Index j) {
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e(j) = 1.0;
  return e;
}

struct Spectral {
  Eigen::VectorXd singular;  ///< descending
  Eigen::MatrixXcd v;        ///< full right singular basis
};

inline Spectral spectral(const Eigen::MatrixXcd& m) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  return {svd.singularValues(), svd.matrixV()};
}

/// Best value over restarts; ties go to the lowest restart index.
inline bool improves(double candidate, double incumbent, bool maximize) {
  return maximize ? candidate > incumbent : candidate < incumbent;
}

}  // namespace detail

/// B = sup_{||w||_p = 1} ||M w||_q^q by nonlinear power iteration
///   w <- normalize_p(Phi_{p'}(M^H Phi_q(M w))).
/// Each step can only increase ||M w||_q (Hoelder), so a decrease signals
/// rounding-level stagnation and ends the restart with the previous iterate.
inline SolverResult operator_norm_pq(const Eigen::MatrixXcd& m, double p, double q, const SolverConfig& cfg) {
  cfg.validate();
  PNormConfig(p, q);  // validates the exponents
  if (m.cols() == 0 || m.rows() == 0) throw DomainError("operator norm of an empty matrix");
  const Eigen::Index n = m.cols();
  const double pc = p / (p - 1.0);

  // Start 0: best canonical column; start 1: top 2-norm right singular vector.
  Eigen::Index best_col = 0;
  double best_col_val = -1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = m.col(j).cwiseAbs().array().pow(q).sum();
    if (v > best_col_val) {
      best_col_val = v;
      best_col = j;
    }
  }
  const auto spec = detail::spectral(m);

  SolverResult res;
  res.value = -1.0;
  res.restarts = cfg.restarts;
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::VectorXcd w;
    if (r == 0) {
      w = detail::basis(n, best_col);
    } else if (r == 1) {
      w = spec.v.col(0);
    } else {
      auto rng = detail::restart_rng(cfg.seed, r, 0xB0);
      w = detail::random_start(n, rng);
    }
    w = detail::normalize_p(w, p);
    double val = detail::gain(m, w, q);
    bool converged = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      ++res.iterations;
      const Eigen::VectorXcd y = detail::duality_map(m * w, q);
      const Eigen::VectorXcd z = m.adjoint() * y;
      if (z.squaredNorm() == 0.0) {
        converged = true;
        break;
      }
      const Eigen::VectorXcd next = detail::normalize_p(detail::duality_map(z, pc), p);
      const double next_val = detail::gain(m, next, q);
      if (!(next_val >= val * (1.0 - 1e-13))) {
        converged = true;  // non-monotone step: stagnated at rounding level
        break;
      }
      const double change = std::abs(next_val - val);
      if (next_val >= val) {
        w = next;
        val = next_val;
      }
      if (change <= cfg.tolerance * std::max(val, std::numeric_limits<double>::min())) {
        converged = true;
        break;
      }
    }
    if (!converged) res.converged = false;
    if (detail::improves(val, res.value, true)) {
      res.value = val;
      res.witness = w;
      res.best_restart = r;
    }
  }
  return res;
}

inline SolverResult operator_norm_pq(const AnalysisMatrix& m, const SolverConfig& cfg) {
  return operator_norm_pq(m.entries, m.exponents.p, m.exponents.q, cfg);
}

/// A = inf_{||w||_p = 1} ||M w||_q^q by projected gradient descent on the unit
/// p-sphere (Barzilai-Borwein trial steps, Armijo backtracking, restarts).
/// A nontrivial kernel is detected directly and reported as exactly 0.
inline SolverResult min_gain_pq(const Eigen::MatrixXcd& m, double p, double q, const SolverConfig& cfg) {
  cfg.validate();
  PNormConfig(p, q);
  if (m.cols() == 0 || m.rows() == 0) throw DomainError("minimal gain of an empty matrix");
  const Eigen::Index n = m.cols();
  const auto spec = detail::spectral(m);

  SolverResult res;
  res.restarts = cfg.restarts;

  // Kernel check: the null space does not depend on (p, q).
  {
    const Eigen::VectorXcd v = spec.v.col(n - 1);
    const double scale = std::max(1.0, spec.singular.size() ? spec.singular(0) : 0.0);
    if (m.rows() < n || (m * v).norm() < 1e-12 * scale) {
      res.value = 0.0;
      res.witness = detail::normalize_p(v, p);
      res.converged = true;
      return res;
    }
  }

  auto objective = [&](const Eigen::VectorXcd& w) { return detail::gain(m, w, q); };
  auto gradient = [&](const Eigen::VectorXcd& w, double f) -> Eigen::VectorXcd {
    return q * (m.adjoint() * detail::duality_map(m * w, q) - f * detail::duality_map(w, p));
  };

  Eigen::Index best_col = 0;
  double best_col_val = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = m.col(j).cwiseAbs().array().pow(q).sum();
    if (v < best_col_val) {
      best_col_val = v;
      best_col = j;
    }
  }

  res.value = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::VectorXcd w;
    if (r == 0) {
      w = spec.v.col(n - 1);
    } else if (r == 1) {
      w = detail::basis(n, best_col);
    } else {
      auto rng = detail::restart_rng(cfg.seed, r, 0xA0);
      w = detail::random_start(n, rng);
    }
    w = detail::normalize_p(w, p);
    double f = objective(w);
    Eigen::VectorXcd g = gradient(w, f);
    Eigen::VectorXcd prev_w, prev_g;
    bool converged = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      ++res.iterations;
      const double gnorm2 = g.squaredNorm();
      if (gnorm2 == 0.0) {
        converged = true;
        break;
      }
      double t = cfg.initial_step / std::sqrt(gnorm2);
      if (it > 0) {
        const Eigen::VectorXcd s = w - prev_w;
        const Eigen::VectorXcd yv = g - prev_g;
        const double sy = s.dot(yv).real();
        if (sy > 0.0 && std::isfinite(sy)) t = s.squaredNorm() / sy;
      }
      bool accepted = false;
      Eigen::VectorXcd next;
      double next_f = f;
      for (int b = 0; b < cfg.max_backtracks; ++b) {
        const Eigen::VectorXcd raw = w - t * g;
        // A step that cancels w leaves the sphere; only feasible points count.
        const double raw_norm = detail::lp(raw, p);
        if (!(raw_norm > 1e-12) || !std::isfinite(raw_norm)) {
          t *= cfg.backtrack_factor;
          continue;
        }
        next = raw / raw_norm;
        next_f = objective(next);
        const double decrease = g.dot(w - next).real();
        if (next_f <= f - cfg.armijo * decrease && next_f < f) {
          accepted = true;
          break;
        }
        t *= cfg.backtrack_factor;
      }
      if (!accepted) {
        converged = true;
        break;
      }
      const double change = f - next_f;
      prev_w = w;
      prev_g = g;
      w = next;
      f = next_f;
      g = gradient(w, f);
      if (change <= cfg.tolerance * std::max(f, std::numeric_limits<double>::min())) {
        converged = true;
        break;
      }
    }
    if (!converged) res.converged = false;
    if (detail::improves(f, res.value, false)) {
      res.value = f;
      res.witness = w;
      res.best_restart = r;
    }
  }
  return res;
}

inline SolverResult min_gain_pq(const AnalysisMatrix& m, const SolverConfig& cfg) {
  return min_gain_pq(m.entries, m.exponents.p, m.exponents.q, cfg);
}

/// Extremal gains of M at p = q = 2 from its singular values.
inline std::pair<SolverResult, SolverResult> hilbert_gains(const Eigen::MatrixXcd& m) {
  if (m.cols() == 0 || m.rows() == 0) throw DomainError("gains of an empty matrix");
  const auto spec = detail::spectral(m);
  const Eigen::Index n = m.cols();
  SolverResult lo, hi;
  lo.exact = hi.exact = true;
  hi.value = spec.singular(0) * spec.singular(0);
  hi.witness = spec.v.col(0);
  if (m.rows() >= n) {
    const double s = spec.singular(n - 1);
    lo.value = s * s;
  } else {
    lo.value = 0.0;
  }
  lo.witness = spec.v.col(n - 1);
  return {lo, hi};
}

/// Optimal frame bounds of nu for mu.
inline FrameBoundsEstimate frame_bounds(const GroupMeasure& mu, const DualMeasure& nu, const PNormConfig& pq,
                                        const SolverConfig& cfg) {
  const auto m = analysis_matrix(mu, nu, pq);
  FrameBoundsEstimate est;
  est.p = pq.p;
  est.q = pq.q;
  est.seed = cfg.seed;
  if (pq.hilbert()) {
    auto [lo, hi] = hilbert_gains(m.entries);
    est.exact = true;
    est.lower = lo.value;
    est.upper = hi.value;
    est.lower_witness = lo.witness;
    est.upper_witness = hi.witness;
    return est;
  }
  const auto hi = operator_norm_pq(m, cfg);
  const auto lo = min_gain_pq(m, cfg);
  est.exact = false;
  // Both witnesses are feasible points, so the smaller value is a valid upper
  // estimate of A and the larger a valid lower estimate of B.
  const bool swapped = lo.value > hi.value;
  est.lower = swapped ? hi.value : lo.value;
  est.lower_witness = swapped ? hi.witness : lo.witness;
  est.upper = swapped ? lo.value : hi.value;
  est.upper_witness = swapped ? lo.witness : hi.witness;
  est.restarts = cfg.restarts;
  est.iterations = hi.iterations + lo.iterations;
  est.warning = !(hi.converged && lo.converged);
  return est;
}

/// Closed-form Bessel bound nu(dual) * mu(G)^{q/p'}; always >= B_opt.
inline double bessel_certificate(const GroupMeasure& mu, const DualMeasure& nu, const PNormConfig& pq) {
  return nu.total_mass() * std::pow(mu.total_mass(), pq.q / pq.p_conj());
}

struct LocalFinitenessReport {
  double delta = 0.0;      ///< min over V of |mu^|
  double bound = 0.0;      ///< B_ref mu(G)^{q/p} / delta^q
  double max_mass = 0.0;   ///< max over xi of nu(xi + V)
  double max_ratio = 0.0;  ///< max_mass / bound
  DualCharacter worst;     ///< xi attaining max_mass
  bool holds = true;
};

/// nu(xi + V) <= B_ref mu(G)^{q/p} / delta^q for every xi in the dual.
inline LocalFinitenessReport local_finiteness_check(const GroupMeasure& mu, const DualMeasure& nu,
                                                    const std::set<DualCharacter>& window, double b_ref,
                                                    const PNormConfig& pq, double rel_tol = 1e-9) {
  if (mu.empty()) throw DomainError("local finiteness needs mu(G) > 0");
  if (window.empty()) throw PreconditionError("window V must be nonempty");
  const auto& g = mu.group();
  const auto mu_hat = fourier_stieltjes(mu);
  LocalFinitenessReport rep;
  rep.delta = std::numeric_limits<double>::infinity();
  for (const auto& gamma : window) rep.delta = std::min(rep.delta, std::abs(mu_hat.at(gamma)));
  if (!(rep.delta > 1e-13 * mu.total_mass())) {
    throw PreconditionError("|mu^| vanishes on the window V (delta = 0)");
  }
  rep.bound = b_ref * std::pow(mu.total_mass(), pq.q / pq.p) / std::pow(rep.delta, pq.q);
  rep.worst = g.zero<CharacterTag>();
  for (const auto& xi : g.characters()) {
    double mass = 0.0;
    for (const auto& v : window) mass += nu.weight(g.add(xi, v));
    if (mass > rep.max_mass) {
      rep.max_mass = mass;
      rep.worst = xi;
    }
  }
  rep.max_ratio = rep.bound > 0.0 ? rep.max_mass / rep.bound : (rep.max_mass > 0.0 ? INFINITY : 0.0);
  rep.holds = rep.max_mass <= rep.bound * (1.0 + rel_tol);
  return rep;
}

// ---------------------------------------------------------------------------
// JSON export

inline nlohmann::json vector_to_json(const Eigen::VectorXcd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

inline nlohmann::json to_json(const FrameBoundsEstimate& e) {
  return {{"A_est", e.lower},
          {"B_est", e.upper},
          {"exact", e.exact},
          {"p", e.p},
          {"q", e.q},
          {"seed", e.seed},
          {"restarts", e.restarts},
          {"iterations", e.iterations},
          {"warning", e.warning},
          {"witness_min", vector_to_json(e.lower_witness)},
          {"witness_max", vector_to_json(e.upper_witness)}};
}

}  // namespace pqframe
