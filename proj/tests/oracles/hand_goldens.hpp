#pragma once

// Generated by hand_goldens.py; exact rationals rounded to double.

namespace goldens {

inline constexpr double aipw_ate_grid = 1.0;  // 1
inline constexpr double aipw_overlap_grid = 1.0;  // 1
inline constexpr double aipw_ate_uneven = 1.6266666666666667;  // 122/75
inline constexpr double aipw_overlap_uneven = 1.624;  // 203/125
inline constexpr double iv_ratio_confounded = 1.2567703109327983;  // 1253/997
inline constexpr double ols_slope_mixed = 0.9801242236024845;  // 789/805
inline constexpr double product_proxy = 0.4625;  // 37/80

}  // namespace goldens
