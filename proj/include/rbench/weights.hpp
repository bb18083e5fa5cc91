#pragma once

#include <string>
#include <vector>

namespace rbench {

/// Every weight and threshold the scoring formulas use.
///
/// The defaults are the published evaluation settings; eps_plus and eps_minus
/// (the keyword expectation scales) have no published value and are chosen
/// here so that a core term should recur three times and a single stray
/// distractor mention counts at half weight.
struct EvalWeights {
  double alpha = 0.5;   // QSR share of quality
  double beta = 0.5;    // GRR share of quality
  double lambda = 0.7;  // FAK share of drift
  double mu = 0.3;      // FDK share of drift
  double eta = 0.2;     // boost magnitude
  double theta = 0.7;   // exact-hit share of boost
  double kappa = 0.3;   // host-hit share of boost
  double eps_plus = 3.0;
  double eps_minus = 2.0;

  /// Human-readable problems; empty when the weights are usable.
  std::vector<std::string> problems() const;

  friend bool operator==(const EvalWeights&, const EvalWeights&) = default;
};

}  // namespace rbench
