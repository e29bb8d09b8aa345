#pragma once

#include <stdexcept>

namespace gears {

/// ell quanta delivered to one gear in num_kicks equal kicks, separated by
/// free evolution over delta_t.
struct KickProtocol {
  int ell = 0;
  int num_kicks = 1;
  double delta_t = 0.0;
  int target_gear = 1;

  int per_kick() const { return ell / num_kicks; }

  void validate() const {
    if (num_kicks < 1) throw std::invalid_argument("num_kicks must be >= 1");
    if (ell % num_kicks != 0) throw std::invalid_argument("ell must split into num_kicks equal integer kicks");
    if (!(delta_t >= 0.0)) throw std::invalid_argument("delta_t must be non-negative");
    if (target_gear != 1 && target_gear != 2) throw std::invalid_argument("target_gear must be 1 or 2");
  }

  static KickProtocol single(int ell, int target_gear = 1) { return {ell, 1, 0.0, target_gear}; }
  /// ell single-quantum kicks (a zero total gives one empty kick).
  static KickProtocol quanta(int ell, double delta_t, int target_gear = 1) {
    return {ell, ell == 0 ? 1 : (ell > 0 ? ell : -ell), delta_t, target_gear};
  }
};

}  // namespace gears
