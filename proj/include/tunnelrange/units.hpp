// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

namespace tunnelrange {

// Propagation speed used by every range conversion. Model equations work in
// nanoseconds, so ranges come out as 0.3 m per ns.
inline constexpr double kSpeedOfLightMps = 3.0e8;
inline constexpr double kMetersPerNs = kSpeedOfLightMps * 1e-9;

inline constexpr double kSecondsPerNs = 1e-9;

inline double to_dbm(double power_mw, double reference_mw = 1.0)
{
    return 10.0 * std::log10(power_mw / reference_mw);
}

inline double from_dbm(double dbm, double reference_mw = 1.0)
{
    return reference_mw * std::pow(10.0, dbm / 10.0);
}

} // namespace tunnelrange
