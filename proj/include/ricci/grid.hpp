#pragma once

#include <vector>

namespace ricci {

/// Uniform evaluation grid [lo, hi] with step, plus optional extra nodes
/// (used to cluster samples around narrow features).
struct GridSpec {
  double lo = 0;
  double hi = 0;
  double step = 1e-3;
  std::vector<double> extra;

  /// Materializes the sorted node list: lo + i*step for all nodes <= hi,
  /// merged with the extra nodes that fall inside [lo, hi].
  std::vector<double> nodes() const;
};

}  // namespace ricci
