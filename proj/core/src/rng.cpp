#include "covert/rng.hpp"

#include <cmath>
#include <numbers>

namespace covert {

double Rng::exponential() { return -std::log(uniform_open0()); }

double Rng::normal() {
  const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

}  // namespace covert
