#pragma once

namespace lrla {

// Posterior decision factors for a two-armed belief state:
// v = mu0 - mu1, ru = sd0 - sd1, tu = sqrt(sd0^2 + sd1^2).
struct Factors {
  double v = 0.0;
  double ru = 0.0;
  double tu = 0.0;
};

}  // namespace lrla
