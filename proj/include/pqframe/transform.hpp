#pragma once

// Fourier transform with respect to a measure (analysis), inverse transform
// with respect to a dual measure (synthesis), the Fourier-Stieltjes
// transform, and the weighted character matrix that represents the analysis
// operator L^p(mu) -> L^q(nu) on unweighted coordinates.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pqframe/errors.hpp"
#include "pqframe/group.hpp"
#include "pqframe/measure.hpp"

namespace pqframe {

using cplx = std::complex<double>;

/// Complex values indexed by points. A function "on a support" only needs
/// values there; extra points are carried but ignored.
template <class P>
class PointFunction {
 public:
  PointFunction() = default;
  explicit PointFunction(std::map<P, cplx> values) : values_(std::move(values)) {}

  PointFunction(const std::vector<P>& domain, const Eigen::VectorXcd& v) {
    if (static_cast<Eigen::Index>(domain.size()) != v.size()) {
      throw StructuralError("domain and value vector differ in length");
    }
    for (std::size_t i = 0; i < domain.size(); ++i) values_[domain[i]] = v(static_cast<Eigen::Index>(i));
  }

  static PointFunction constant(const std::vector<P>& domain, cplx c) {
    std::map<P, cplx> v;
    for (const auto& x : domain) v[x] = c;
    return PointFunction(std::move(v));
  }

  const std::map<P, cplx>& values() const noexcept { return values_; }
  bool defined_at(const P& x) const { return values_.count(x) != 0; }

  cplx at(const P& x) const {
    auto it = values_.find(x);
    if (it == values_.end()) throw StructuralError("function undefined at " + to_string(x));
    return it->second;
  }

  Eigen::VectorXcd on(const std::vector<P>& domain) const {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(domain.size()));
    for (std::size_t i = 0; i < domain.size(); ++i) v(static_cast<Eigen::Index>(i)) = at(domain[i]);
    return v;
  }

 private:
  std::map<P, cplx> values_;
};

using GroupFunction = PointFunction<GroupElement>;
using DualFunction = PointFunction<DualCharacter>;

struct PNormConfig {
  double p = 2.0;
  double q = 2.0;

  PNormConfig() = default;
  PNormConfig(double p_, double q_) : p(p_), q(q_) {
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("p must lie in (1, inf), got " + std::to_string(p));
    if (!(q > 1.0) || !std::isfinite(q)) throw DomainError("q must lie in (1, inf), got " + std::to_string(q));
  }

  double p_conj() const { return p / (p - 1.0); }
  double q_conj() const { return q / (q - 1.0); }
  /// Exponent q(1 - 1/p) = q / p' that governs density and uniformity laws.
  double density_exponent() const { return q / p_conj(); }
  bool hilbert() const { return p == 2.0 && q == 2.0; }
};

template <class P>
double lp_norm(const PointFunction<P>& f, const AtomicMeasure<P>& mu, double p) {
  double s = 0.0;
  for (const auto& [x, w] : mu.atoms()) s += std::pow(std::abs(f.at(x)), p) * w;
  return std::pow(s, 1.0 / p);
}

/// f^dmu(gamma) = sum_x f(x) conj<x,gamma> mu({x}), on the full dual.
inline DualFunction analysis(const GroupFunction& f, const GroupMeasure& mu) {
  const auto& g = mu.group();
  std::map<DualCharacter, cplx> out;
  for (const auto& gamma : g.characters()) {
    cplx s = 0.0;
    for (const auto& [x, w] : mu.atoms()) s += f.at(x) * std::conj(g.pairing(x, gamma)) * w;
    out[gamma] = s;
  }
  return DualFunction(std::move(out));
}

inline DualFunction fourier_stieltjes(const GroupMeasure& mu) {
  return analysis(GroupFunction::constant(mu.support(), 1.0), mu);
}

/// phi^vdnu(x) = sum_gamma phi(gamma) <x,gamma> nu({gamma}), on the full group.
inline GroupFunction synthesis(const DualFunction& phi, const DualMeasure& nu) {
  const auto& g = nu.group();
  std::map<GroupElement, cplx> out;
  for (const auto& x : g.elements()) {
    cplx s = 0.0;
    for (const auto& [gamma, w] : nu.atoms()) s += phi.at(gamma) * g.pairing(x, gamma) * w;
    out[x] = s;
  }
  return GroupFunction(std::move(out));
}

struct DualityPairings {
  cplx transform_side;  ///< <f^dmu, phi> in L^2(nu) pairing
  cplx function_side;   ///< <f, phi^vdnu> in L^2(mu) pairing
  double gap() const { return std::abs(transform_side - function_side); }
};

inline DualityPairings duality_pairings(const GroupFunction& f, const DualFunction& phi,
                                        const GroupMeasure& mu, const DualMeasure& nu) {
  if (!(mu.group() == nu.group())) throw StructuralError("mu and nu live on different groups");
  const auto fhat = analysis(f, mu);
  const auto phicheck = synthesis(phi, nu);
  DualityPairings out{0.0, 0.0};
  for (const auto& [gamma, w] : nu.atoms()) out.transform_side += fhat.at(gamma) * std::conj(phi.at(gamma)) * w;
  for (const auto& [x, w] : mu.atoms()) out.function_side += f.at(x) * std::conj(phicheck.at(x)) * w;
  return out;
}

inline double duality_gap(const GroupFunction& f, const DualFunction& phi, const GroupMeasure& mu,
                          const DualMeasure& nu) {
  return duality_pairings(f, phi, mu, nu).gap();
}

/// entry[gamma, x] = nu({gamma})^{1/q} mu({x})^{1/p'} conj<x, gamma>.
///
/// With g(x) = mu({x})^{1/p} f(x) the unweighted norms satisfy
/// ||g||_p = ||f||_{L^p(mu)} and ||M g||_q = ||f^dmu||_{L^q(nu)}, so the frame
/// inequality becomes a statement about the extremal p->q gains of M. This is
/// the only place the weighting convention lives.
struct AnalysisMatrix {
  Eigen::MatrixXcd entries;
  PNormConfig exponents;
  std::vector<DualCharacter> rows;
  std::vector<GroupElement> cols;
  std::vector<double> row_weights;
  std::vector<double> col_weights;

  Eigen::Index n_rows() const { return entries.rows(); }
  Eigen::Index n_cols() const { return entries.cols(); }

  Eigen::VectorXcd weighted(const GroupFunction& f) const {
    Eigen::VectorXcd g(n_cols());
    for (Eigen::Index j = 0; j < n_cols(); ++j) {
      g(j) = std::pow(col_weights[static_cast<std::size_t>(j)], 1.0 / exponents.p) *
             f.at(cols[static_cast<std::size_t>(j)]);
    }
    return g;
  }

  GroupFunction unweighted(const Eigen::VectorXcd& g) const {
    std::map<GroupElement, cplx> v;
    for (Eigen::Index j = 0; j < n_cols(); ++j) {
      v[cols[static_cast<std::size_t>(j)]] =
          g(j) / std::pow(col_weights[static_cast<std::size_t>(j)], 1.0 / exponents.p);
    }
    return GroupFunction(std::move(v));
  }

  std::string to_csv() const;
};

inline AnalysisMatrix analysis_matrix(const GroupMeasure& mu, const DualMeasure& nu, const PNormConfig& cfg) {
  if (!(mu.group() == nu.group())) throw StructuralError("mu and nu live on different groups");
  if (mu.empty()) throw DomainError("analysis matrix needs a nonempty support for mu");
  if (nu.empty()) throw DomainError("analysis matrix needs a nonempty support for nu");
  const auto& g = mu.group();
  AnalysisMatrix m;
  m.exponents = cfg;
  m.rows = nu.support();
  m.cols = mu.support();
  for (const auto& r : m.rows) m.row_weights.push_back(nu.weight(r));
  for (const auto& c : m.cols) m.col_weights.push_back(mu.weight(c));
  const auto nr = static_cast<Eigen::Index>(m.rows.size());
  const auto nc = static_cast<Eigen::Index>(m.cols.size());
  m.entries.resize(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const double rw = std::pow(m.row_weights[static_cast<std::size_t>(i)], 1.0 / cfg.q);
    for (Eigen::Index j = 0; j < nc; ++j) {
      const double cw = std::pow(m.col_weights[static_cast<std::size_t>(j)], 1.0 / cfg.p_conj());
      m.entries(i, j) = rw * cw *
                        std::conj(g.pairing(m.cols[static_cast<std::size_t>(j)], m.rows[static_cast<std::size_t>(i)]));
    }
  }
  return m;
}

/// Weighted matrix of the synthesis operator L^{q'}(nu) -> L^{p'}(mu), built by
/// pushing unit functions through `synthesis`.
inline Eigen::MatrixXcd synthesis_matrix(const GroupMeasure& mu, const DualMeasure& nu, const PNormConfig& cfg) {
  const auto cols = nu.support();
  const auto rows = mu.support();
  Eigen::MatrixXcd w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::map<DualCharacter, cplx> unit;
    for (const auto& c : cols) unit[c] = 0.0;
    unit[cols[j]] = 1.0;
    const auto out = synthesis(DualFunction(std::move(unit)), nu);
    const double in_scale = std::pow(nu.weight(cols[j]), -1.0 / cfg.q_conj());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::pow(mu.weight(rows[i]), 1.0 / cfg.p_conj()) * out.at(rows[i]) * in_scale;
    }
  }
  return w;
}

/// Unweighted value-space matrix of f -> f^dmu restricted to `dual_points`.
inline Eigen::MatrixXcd analysis_values(const GroupMeasure& mu, const std::vector<DualCharacter>& dual_points) {
  const auto& g = mu.group();
  const auto cols = mu.support();
  Eigen::MatrixXcd u(static_cast<Eigen::Index>(dual_points.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < dual_points.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::conj(g.pairing(cols[j], dual_points[i])) * mu.weight(cols[j]);
    }
  }
  return u;
}

/// Unweighted value-space matrix of phi -> phi^vdnu restricted to `points`.
inline Eigen::MatrixXcd synthesis_values(const DualMeasure& nu, const std::vector<GroupElement>& points) {
  const auto& g = nu.group();
  const auto cols = nu.support();
  Eigen::MatrixXcd t(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          g.pairing(points[i], cols[j]) * nu.weight(cols[j]);
    }
  }
  return t;
}

/// diag(target^{1/r}) V diag(source^{-1/s}): turns a value-space operator
/// L^s(source) -> L^r(target) into one between unweighted l^s and l^r.
inline Eigen::MatrixXcd weigh_operator(const Eigen::MatrixXcd& values, const std::vector<double>& target,
                                       double r, const std::vector<double>& source, double s) {
  if (static_cast<Eigen::Index>(target.size()) != values.rows() ||
      static_cast<Eigen::Index>(source.size()) != values.cols()) {
    throw StructuralError("operator shape does not match the measure supports");
  }
  Eigen::MatrixXcd w = values;
  for (Eigen::Index i = 0; i < w.rows(); ++i) w.row(i) *= std::pow(target[static_cast<std::size_t>(i)], 1.0 / r);
  for (Eigen::Index j = 0; j < w.cols(); ++j) w.col(j) *= std::pow(source[static_cast<std::size_t>(j)], -1.0 / s);
  return w;
}

template <class P>
std::vector<double> weights_of(const AtomicMeasure<P>& m) {
  std::vector<double> w;
  for (const auto& kv : m.atoms()) w.push_back(kv.second);
  return w;
}

namespace detail {
inline std::string format_complex(cplx z) {
  std::ostringstream os;
  os.precision(17);
  // Negative zeros print as plain zeros.
  const double re = z.real() == 0.0 ? 0.0 : z.real();
  os << re << (z.imag() < 0.0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}
}  // namespace detail

inline std::string AnalysisMatrix::to_csv() const {
  std::ostringstream os;
  os << "\"dual\\group\"";
  for (const auto& c : cols) os << ",\"" << to_string(c) << "\"";
  os << "\n";
  for (Eigen::Index i = 0; i < n_rows(); ++i) {
    os << "\"" << to_string(rows[static_cast<std::size_t>(i)]) << "\"";
    for (Eigen::Index j = 0; j < n_cols(); ++j) os << "," << detail::format_complex(entries(i, j));
    os << "\n";
  }
  return os.str();
}

}  // namespace pqframe
