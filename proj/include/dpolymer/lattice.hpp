#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpolymer {

inline constexpr int kMaxDim = 6;

// Error taxonomy shared by every module. The CLI maps ValidationError and
// BudgetError to exit code 2.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
// Raised when a requested diagnostic does not exist for the given
// parameters (e.g. the J process when beta <= beta_2).
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point of Z^d with d <= kMaxDim. Unused trailing coordinates stay zero, so
// the dimension is carried by the container and not by the site itself.
struct Site {
  std::array<std::int32_t, kMaxDim> x{};

  constexpr std::int32_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  constexpr std::int32_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
  friend constexpr bool operator==(const Site&, const Site&) = default;
};

inline Site make_site(std::initializer_list<int> coords) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim))
    throw ValidationError("site has more than kMaxDim coordinates");
  Site s;
  int i = 0;
  for (int c : coords) s[i++] = c;
  return s;
}

inline Site unit_site(int axis, int sign) {
  Site s;
  s[axis] = sign;
  return s;
}

constexpr Site operator+(Site a, const Site& b) {
  for (int i = 0; i < kMaxDim; ++i) a[i] += b[i];
  return a;
}

constexpr Site operator-(Site a, const Site& b) {
  for (int i = 0; i < kMaxDim; ++i) a[i] -= b[i];
  return a;
}

constexpr Site operator-(Site a) {
  for (int i = 0; i < kMaxDim; ++i) a[i] = -a[i];
  return a;
}

inline int l1_norm(const Site& s) {
  int r = 0;
  for (int i = 0; i < kMaxDim; ++i) r += std::abs(s[i]);
  return r;
}

// Parity of the coordinate sum (0 = even).
inline int parity(const Site& s) {
  int r = 0;
  for (int i = 0; i < kMaxDim; ++i) r += s[i];
  return r & 1;
}

inline std::vector<int> coordinates(const Site& s, int dim) {
  return {s.x.begin(), s.x.begin() + dim};
}

inline Site site_from(const std::vector<int>& coords) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim))
    throw ValidationError("site has more than kMaxDim coordinates");
  Site s;
  for (std::size_t i = 0; i < coords.size(); ++i) s[static_cast<int>(i)] = coords[i];
  return s;
}

std::string to_string(const Site& s, int dim);

inline void check_dimension(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw ValidationError("dimension d must lie in [1, " + std::to_string(kMaxDim) + "]");
}

// Finitely supported function on Z^d, ordered lexicographically.
template <class Real>
using BasicSiteMap = std::map<Site, Real>;
using SiteMap = BasicSiteMap<double>;

}  // namespace dpolymer
