#include "rbench/weights.hpp"

#include <cmath>

#include <fmt/format.h>

namespace rbench {
namespace {

constexpr double kSumTolerance = 1e-9;

void check_unit(std::vector<std::string>& out, const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) out.push_back(fmt::format("{} = {} outside [0, 1]", name, v));
}

void check_pair(std::vector<std::string>& out, const char* a, double va, const char* b, double vb) {
  if (std::abs(va + vb - 1.0) > kSumTolerance) {
    out.push_back(fmt::format("{} + {} = {} (must be 1)", a, b, va + vb));
  }
}

}  // namespace

std::vector<std::string> EvalWeights::problems() const {
  std::vector<std::string> out;
  check_unit(out, "alpha", alpha);
  check_unit(out, "beta", beta);
  check_unit(out, "lambda", lambda);
  check_unit(out, "mu", mu);
  check_unit(out, "eta", eta);
  check_unit(out, "theta", theta);
  check_unit(out, "kappa", kappa);
  check_pair(out, "alpha", alpha, "beta", beta);
  check_pair(out, "lambda", lambda, "mu", mu);
  check_pair(out, "theta", theta, "kappa", kappa);
  if (!(eps_plus > 0.0)) out.push_back(fmt::format("eps_plus = {} must be positive", eps_plus));
  if (!(eps_minus > 0.0)) out.push_back(fmt::format("eps_minus = {} must be positive", eps_minus));
  return out;
}

}  // namespace rbench
