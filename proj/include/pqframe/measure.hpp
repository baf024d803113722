#pragma once

// Atomic measures on a finite abelian group (or its dual) and the calculus
// used by the frame-measure constructions: Dirac masses, Haar measure,
// convolution, translation, restriction, density reweighting, sums,
// Radon-Nikodym derivatives and packing pairs.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pqframe/errors.hpp"
#include "pqframe/group.hpp"

namespace pqframe {

template <class P>
class AtomicMeasure {
 public:
  using point_type = P;

  AtomicMeasure() = default;
  explicit AtomicMeasure(FiniteAbelianGroup group) : group_(std::move(group)) {}

  /// Duplicate atoms accumulate; zero weights are dropped.
  AtomicMeasure(FiniteAbelianGroup group, const std::vector<std::pair<P, double>>& atoms)
      : group_(std::move(group)) {
    for (const auto& [x, w] : atoms) add_mass(x, w);
  }

  const FiniteAbelianGroup& group() const noexcept { return group_; }
  const std::map<P, double>& atoms() const noexcept { return weights_; }

  double weight(const P& x) const {
    auto it = weights_.find(x);
    return it == weights_.end() ? 0.0 : it->second;
  }

  bool contains(const P& x) const { return weights_.count(x) != 0; }

  double total_mass() const {
    double s = 0.0;
    for (const auto& kv : weights_) s += kv.second;
    return s;
  }

  double mass_of(const std::set<P>& set) const {
    double s = 0.0;
    for (const auto& x : set) s += weight(x);
    return s;
  }

  std::vector<P> support() const {
    std::vector<P> out;
    out.reserve(weights_.size());
    for (const auto& kv : weights_) out.push_back(kv.first);
    return out;
  }

  std::set<P> support_set() const {
    std::set<P> out;
    for (const auto& kv : weights_) out.insert(kv.first);
    return out;
  }

  std::size_t support_size() const noexcept { return weights_.size(); }
  bool empty() const noexcept { return weights_.empty(); }

  void add_mass(const P& x, double w) {
    group_.check(x);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("atom weight must be finite and >= 0, got " + std::to_string(w) +
                        " at " + to_string(x));
    }
    if (w == 0.0) return;
    weights_[x] += w;
  }

  AtomicMeasure scaled(double c) const {
    if (!(c >= 0.0)) throw DomainError("measure scale must be >= 0");
    AtomicMeasure out(group_);
    for (const auto& [x, w] : weights_) out.add_mass(x, c * w);
    return out;
  }

  friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;

 private:
  FiniteAbelianGroup group_;
  std::map<P, double> weights_;
};

using GroupMeasure = AtomicMeasure<GroupElement>;
using DualMeasure = AtomicMeasure<DualCharacter>;

/// Strictly positive multiplier defined on a set of points.
template <class P>
class DensityFunction {
 public:
  DensityFunction() = default;
  explicit DensityFunction(std::map<P, double> values) : values_(std::move(values)) {
    for (const auto& [x, v] : values_) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("density must be finite and > 0, got " + std::to_string(v) + " at " +
                          to_string(x));
      }
    }
  }

  static DensityFunction constant(const std::vector<P>& domain, double c) {
    std::map<P, double> v;
    for (const auto& x : domain) v[x] = c;
    return DensityFunction(std::move(v));
  }

  const std::map<P, double>& values() const noexcept { return values_; }
  bool defined_at(const P& x) const { return values_.count(x) != 0; }

  double at(const P& x) const {
    auto it = values_.find(x);
    if (it == values_.end()) throw StructuralError("density undefined at " + to_string(x));
    return it->second;
  }

  double min() const {
    if (values_.empty()) throw DomainError("density has an empty domain");
    double m = values_.begin()->second;
    for (const auto& kv : values_) m = std::min(m, kv.second);
    return m;
  }

  double max() const {
    if (values_.empty()) throw DomainError("density has an empty domain");
    double m = values_.begin()->second;
    for (const auto& kv : values_) m = std::max(m, kv.second);
    return m;
  }

 private:
  std::map<P, double> values_;
};

template <class P>
struct RadonNikodym {
  DensityFunction<P> density;
  double sup_norm = 0.0;
};

template <class P>
struct PackingReport {
  bool packing = false;
  std::optional<P> witness;  ///< nonzero common difference when packing fails
  /// sigma(E+F) = mu(E) lambda(F) on sampled E, F (only evaluated when packing).
  bool product_rule_holds = false;
  double product_rule_gap = 0.0;
  int product_rule_samples = 0;
};

// ---------------------------------------------------------------------------

template <class P>
void require_same_group(const AtomicMeasure<P>& a, const AtomicMeasure<P>& b) {
  if (!(a.group() == b.group())) {
    throw StructuralError("measures live on different groups: Z" + a.group().describe() +
                          " vs Z" + b.group().describe());
  }
}

template <class P = GroupElement>
AtomicMeasure<P> dirac(const FiniteAbelianGroup& g, const P& x) {
  AtomicMeasure<P> m(g);
  m.add_mass(x, 1.0);
  return m;
}

enum class HaarNormalization { counting, probability };

template <class P = GroupElement>
AtomicMeasure<P> haar(const FiniteAbelianGroup& g, HaarNormalization norm) {
  const double w = norm == HaarNormalization::counting ? 1.0 : 1.0 / static_cast<double>(g.order());
  AtomicMeasure<P> m(g);
  for (const auto& x : g.enumerate<P>()) m.add_mass(x, w);
  return m;
}

template <class P>
AtomicMeasure<P> convolve(const AtomicMeasure<P>& mu, const AtomicMeasure<P>& lambda) {
  require_same_group(mu, lambda);
  const auto& g = mu.group();
  AtomicMeasure<P> out(g);
  for (const auto& [x, wx] : mu.atoms()) {
    for (const auto& [y, wy] : lambda.atoms()) out.add_mass(g.add(x, y), wx * wy);
  }
  return out;
}

template <class P>
AtomicMeasure<P> translate(const AtomicMeasure<P>& mu, const P& a) {
  const auto& g = mu.group();
  AtomicMeasure<P> out(g);
  for (const auto& [x, w] : mu.atoms()) out.add_mass(g.add(x, a), w);
  return out;
}

template <class P>
AtomicMeasure<P> restrict(const AtomicMeasure<P>& mu, const std::set<P>& set) {
  AtomicMeasure<P> out(mu.group());
  for (const auto& [x, w] : mu.atoms()) {
    if (set.count(x)) out.add_mass(x, w);
  }
  return out;
}

template <class P>
AtomicMeasure<P> reweight(const AtomicMeasure<P>& mu, const DensityFunction<P>& phi) {
  AtomicMeasure<P> out(mu.group());
  for (const auto& [x, w] : mu.atoms()) out.add_mass(x, phi.at(x) * w);
  return out;
}

template <class P>
AtomicMeasure<P> add(const AtomicMeasure<P>& mu, const AtomicMeasure<P>& lambda) {
  require_same_group(mu, lambda);
  AtomicMeasure<P> out = mu;
  for (const auto& [x, w] : lambda.atoms()) out.add_mass(x, w);
  return out;
}

/// T_a(mu|_{F+a}): every atom x of mu inside F+a moves to x-a.
template <class P>
AtomicMeasure<P> translate_restrict(const AtomicMeasure<P>& mu, const std::set<P>& set, const P& a) {
  const auto& g = mu.group();
  std::set<P> shifted;
  for (const auto& y : set) shifted.insert(g.add(y, a));
  AtomicMeasure<P> out(g);
  for (const auto& [x, w] : mu.atoms()) {
    if (shifted.count(x)) out.add_mass(g.sub(x, a), w);
  }
  return out;
}

template <class P>
RadonNikodym<P> radon_nikodym(const AtomicMeasure<P>& numerator, const AtomicMeasure<P>& denominator) {
  require_same_group(numerator, denominator);
  std::map<P, double> ratio;
  double sup = 0.0;
  for (const auto& [x, w] : numerator.atoms()) {
    const double d = denominator.weight(x);
    if (d == 0.0) {
      throw DomainError("not absolutely continuous: atom " + to_string(x) +
                        " carries mass but the reference measure vanishes there");
    }
    ratio[x] = w / d;
    sup = std::max(sup, w / d);
  }
  return {DensityFunction<P>(std::move(ratio)), sup};
}

/// (ess inf, ess sup) of d(mu)/d(base), i.e. min and max weight ratio on supp(mu).
template <class P>
std::pair<double, double> essential_bounds(const AtomicMeasure<P>& mu, const AtomicMeasure<P>& base) {
  if (mu.empty()) throw DomainError("essential bounds of the zero measure are undefined");
  const auto rn = radon_nikodym(mu, base);
  return {rn.density.min(), rn.density.max()};
}

template <class P>
std::set<P> difference_set(const FiniteAbelianGroup& g, const std::set<P>& a) {
  std::set<P> out;
  for (const auto& x : a) {
    for (const auto& y : a) out.insert(g.sub(x, y));
  }
  return out;
}

template <class P>
std::set<P> minkowski_sum(const FiniteAbelianGroup& g, const std::set<P>& a, const std::set<P>& b) {
  std::set<P> out;
  for (const auto& x : a) {
    for (const auto& y : b) out.insert(g.add(x, y));
  }
  return out;
}

/// (K_mu - K_mu) n (K_lambda - K_lambda) == {0}. When it holds, also checks
/// sigma(E+F) = mu(E) lambda(F) for sigma = mu * lambda on random subsets.
template <class P>
PackingReport<P> is_packing_pair(const AtomicMeasure<P>& mu, const AtomicMeasure<P>& lambda,
                                 int samples = 16, std::uint64_t seed = 0x5eed) {
  require_same_group(mu, lambda);
  const auto& g = mu.group();
  PackingReport<P> rep;
  const auto dmu = difference_set(g, mu.support_set());
  const auto dla = difference_set(g, lambda.support_set());
  const P zero(std::vector<std::int64_t>(g.rank(), 0));
  rep.packing = true;
  for (const auto& d : dmu) {
    if (dla.count(d) && d != zero) {
      rep.packing = false;
      rep.witness = d;
      break;
    }
  }
  if (!rep.packing || mu.empty() || lambda.empty()) return rep;

  const auto sigma = convolve(mu, lambda);
  const auto kmu = mu.support();
  const auto kla = lambda.support();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  rep.product_rule_holds = true;
  for (int s = 0; s < samples; ++s) {
    std::set<P> e, f;
    for (const auto& x : kmu) if (coin(rng)) e.insert(x);
    for (const auto& y : kla) if (coin(rng)) f.insert(y);
    const double lhs = sigma.mass_of(minkowski_sum(g, e, f));
    const double rhs = mu.mass_of(e) * lambda.mass_of(f);
    const double gap = std::abs(lhs - rhs);
    rep.product_rule_gap = std::max(rep.product_rule_gap, gap);
    if (gap > 1e-12 * std::max(1.0, std::abs(rhs))) rep.product_rule_holds = false;
    ++rep.product_rule_samples;
  }
  return rep;
}

/// Random measure with `support_size` distinct atoms and weights in [lo, hi].
template <class P, class Rng>
AtomicMeasure<P> random_measure(const FiniteAbelianGroup& g, std::size_t support_size, Rng& rng,
                                double lo = 0.25, double hi = 2.0) {
  auto pts = g.enumerate<P>();
  support_size = std::min(support_size, pts.size());
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < support_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::uniform_real_distribution<double> w(lo, hi);
  AtomicMeasure<P> m(g);
  for (std::size_t i = 0; i < support_size; ++i) m.add_mass(pts[idx[i]], w(rng));
  return m;
}

}  // namespace pqframe
