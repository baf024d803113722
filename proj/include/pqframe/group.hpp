#pragma once

// Finite abelian groups Z_{n_1} x ... x Z_{n_k}, their duals, and the
// character pairing <x, gamma> = exp(2 pi i sum_j x_j gamma_j / n_j).

#include <compare>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pqframe/errors.hpp"

namespace pqframe {

struct PointTag {};
struct CharacterTag {};

/// Residue tuple tagged with the side of the duality it lives on. Group
/// points and characters share a representation but never mix implicitly.
template <class Tag>
struct Coords {
  std::vector<std::int64_t> c;

  Coords() = default;
  explicit Coords(std::vector<std::int64_t> coords) : c(std::move(coords)) {}
  Coords(std::initializer_list<std::int64_t> coords) : c(coords) {}

  std::size_t size() const noexcept { return c.size(); }
  std::int64_t operator[](std::size_t i) const { return c[i]; }

  friend auto operator<=>(const Coords&, const Coords&) = default;
  friend bool operator==(const Coords&, const Coords&) = default;
};

using GroupElement = Coords<PointTag>;
using DualCharacter = Coords<CharacterTag>;

template <class Tag>
std::string to_string(const Coords<Tag>& x) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(x[i]);
  }
  return out + ")";
}

template <class Tag>
std::ostream& operator<<(std::ostream& os, const Coords<Tag>& x) {
  return os << to_string(x);
}

class FiniteAbelianGroup {
 public:
  FiniteAbelianGroup() : FiniteAbelianGroup(std::vector<std::int64_t>{1}) {}

  explicit FiniteAbelianGroup(std::vector<std::int64_t> moduli)
      : moduli_(std::move(moduli)) {
    if (moduli_.empty()) throw DomainError("group needs at least one modulus");
    order_ = 1;
    lcm_ = 1;
    for (auto n : moduli_) {
      if (n < 1) throw DomainError("every modulus must be >= 1, got " + std::to_string(n));
      if (order_ > INT64_MAX / n) throw DomainError("group order overflows int64");
      order_ *= n;
      lcm_ = std::lcm(lcm_, n);
    }
  }

  FiniteAbelianGroup(std::initializer_list<std::int64_t> moduli)
      : FiniteAbelianGroup(std::vector<std::int64_t>(moduli)) {}

  const std::vector<std::int64_t>& moduli() const noexcept { return moduli_; }
  std::size_t rank() const noexcept { return moduli_.size(); }
  std::int64_t order() const noexcept { return order_; }

  /// The dual of a finite abelian group has the same moduli.
  const FiniteAbelianGroup& dual() const noexcept { return *this; }

  friend bool operator==(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) {
    return a.moduli_ == b.moduli_;
  }

  /// Reduces arbitrary integers into canonical residues.
  template <class P = GroupElement>
  P make(std::vector<std::int64_t> coords) const {
    if (coords.size() != rank()) {
      throw StructuralError("expected " + std::to_string(rank()) + " coordinates, got " +
                            std::to_string(coords.size()));
    }
    for (std::size_t j = 0; j < rank(); ++j) {
      coords[j] %= moduli_[j];
      if (coords[j] < 0) coords[j] += moduli_[j];
    }
    return P(std::move(coords));
  }

  GroupElement element(std::vector<std::int64_t> coords) const {
    return make<GroupElement>(std::move(coords));
  }
  DualCharacter character(std::vector<std::int64_t> coords) const {
    return make<DualCharacter>(std::move(coords));
  }

  template <class Tag>
  bool contains(const Coords<Tag>& x) const noexcept {
    if (x.size() != rank()) return false;
    for (std::size_t j = 0; j < rank(); ++j) {
      if (x[j] < 0 || x[j] >= moduli_[j]) return false;
    }
    return true;
  }

  template <class Tag>
  void check(const Coords<Tag>& x) const {
    if (!contains(x)) {
      throw StructuralError("coordinates " + to_string(x) + " are not a reduced element of Z" +
                            describe());
    }
  }

  template <class Tag>
  Coords<Tag> zero() const {
    return Coords<Tag>(std::vector<std::int64_t>(rank(), 0));
  }

  template <class Tag>
  Coords<Tag> add(const Coords<Tag>& x, const Coords<Tag>& y) const {
    check(x);
    check(y);
    Coords<Tag> out = x;
    for (std::size_t j = 0; j < rank(); ++j) {
      out.c[j] += y[j];
      if (out.c[j] >= moduli_[j]) out.c[j] -= moduli_[j];
    }
    return out;
  }

  template <class Tag>
  Coords<Tag> neg(const Coords<Tag>& x) const {
    check(x);
    Coords<Tag> out = x;
    for (std::size_t j = 0; j < rank(); ++j) {
      if (out.c[j] != 0) out.c[j] = moduli_[j] - out.c[j];
    }
    return out;
  }

  template <class Tag>
  Coords<Tag> sub(const Coords<Tag>& x, const Coords<Tag>& y) const {
    return add(x, neg(y));
  }

  /// Position in lexicographic (last coordinate fastest) order.
  template <class Tag>
  std::size_t index_of(const Coords<Tag>& x) const {
    check(x);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
      idx = idx * static_cast<std::size_t>(moduli_[j]) + static_cast<std::size_t>(x[j]);
    }
    return idx;
  }

  template <class P = GroupElement>
  P at(std::size_t index) const {
    std::vector<std::int64_t> c(rank());
    for (std::size_t j = rank(); j-- > 0;) {
      auto n = static_cast<std::size_t>(moduli_[j]);
      c[j] = static_cast<std::int64_t>(index % n);
      index /= n;
    }
    return P(std::move(c));
  }

  template <class P = GroupElement>
  std::vector<P> enumerate() const {
    std::vector<P> out;
    out.reserve(static_cast<std::size_t>(order_));
    for (std::size_t i = 0; i < static_cast<std::size_t>(order_); ++i) out.push_back(at<P>(i));
    return out;
  }

  std::vector<GroupElement> elements() const { return enumerate<GroupElement>(); }
  std::vector<DualCharacter> characters() const { return enumerate<DualCharacter>(); }

  /// Phase of <x, gamma> as an exact fraction num / lcm(moduli) in [0, 1).
  std::pair<std::int64_t, std::int64_t> phase(const GroupElement& x, const DualCharacter& g) const {
    check(x);
    check(g);
    __int128 num = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
      const __int128 n = moduli_[j];
      const __int128 r = (static_cast<__int128>(x[j]) * g[j]) % n;
      num = (num + r * (lcm_ / moduli_[j])) % lcm_;
    }
    return {static_cast<std::int64_t>(num), lcm_};
  }

  std::complex<double> pairing(const GroupElement& x, const DualCharacter& g) const {
    const auto [num, den] = phase(x, g);
    return unit_root(num, den);
  }

  std::string describe() const {
    std::string s;
    for (std::size_t j = 0; j < rank(); ++j) {
      if (j) s += "xZ";
      s += "_" + std::to_string(moduli_[j]);
    }
    return s;
  }

  /// exp(2 pi i num / den), evaluated on the nearest octant so the quarter
  /// points come out exact.
  static std::complex<double> unit_root(std::int64_t num, std::int64_t den) {
    num %= den;
    if (num < 0) num += den;
    const __int128 n8 = static_cast<__int128>(num) * 8;
    if (n8 % den == 0) {
      static constexpr double h = std::numbers::sqrt2 / 2;
      static const std::complex<double> oct[8] = {{1, 0},  {h, h},   {0, 1},  {-h, h},
                                                  {-1, 0}, {-h, -h}, {0, -1}, {h, -h}};
      return oct[static_cast<int>(n8 / den)];
    }
    // Symmetric reduction to (-1/2, 1/2] keeps the argument small.
    long double t = static_cast<long double>(num) / static_cast<long double>(den);
    if (t > 0.5L) t -= 1.0L;
    const long double ang = 2.0L * std::numbers::pi_v<long double> * t;
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
  }

 private:
  std::vector<std::int64_t> moduli_;
  std::int64_t order_ = 1;
  std::int64_t lcm_ = 1;
};

}  // namespace pqframe
