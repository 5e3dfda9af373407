#include "ks2d/grid.hpp"

#include <numbers>

namespace ks2d {

GridSpec make_grid(int n, double box_length) {
  if (n < 8 || (n & (n - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 8");
  if (!(box_length > 0.0)) throw std::invalid_argument("box length must be positive");
  return GridSpec{n, box_length};
}

ScalarField zeros(const GridSpec& g) { return ScalarField{g, std::vector<double>(g.size(), 0.0)}; }

double wavenumber(int m, const GridSpec& g) {
  return 2.0 * std::numbers::pi * signed_index(m, g.n) / g.box_length;
}

} // namespace ks2d
