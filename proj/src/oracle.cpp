#include "dpolymer/oracle.hpp"

namespace dpolymer::oracle {

LightCone::LightCone(int d, int horizon) : dim(d), n(horizon) {
  check_dimension(d);
  BasicSiteMap<int> front{{Site{}, 0}};
  const auto steps = detail::unit_steps(d);
  for (int k = 1; k <= horizon; ++k) {
    BasicSiteMap<int> next;
    for (const auto& [x, unused] : front)
      for (const Site& s : steps) next[x + s] = 0;
    for (const auto& [x, unused] : next) {
      index[{k, x}] = static_cast<int>(sites.size());
      sites.emplace_back(k, x);
    }
    front = std::move(next);
  }
}

std::uint64_t count_closed_walks(int dim, int steps) {
  check_dimension(dim);
  const auto moves = detail::unit_steps(dim);
  std::uint64_t count = 0;
  std::function<void(int, const Site&)> walk = [&](int k, const Site& x) {
    if (l1_norm(x) > steps - k) return;
    if (k == steps) {
      ++count;
      return;
    }
    for (const Site& s : moves) walk(k + 1, x + s);
  };
  walk(0, Site{});
  return count;
}

}  // namespace dpolymer::oracle
