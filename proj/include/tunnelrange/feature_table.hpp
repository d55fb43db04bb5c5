// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "channel_features.hpp"
#include "records.hpp"
#include "units.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tunnelrange {

/// One detected record in the labeled feature table.
struct FeatureRow {
    std::string record_id;
    std::optional<Scenario> scenario;
    std::optional<double> true_distance_m;
    ChannelFeatures features;

    std::optional<LinkClass> link_class() const
    {
        if (!scenario)
            return std::nullopt;
        return pooled_class(*scenario);
    }

    /// Ranging error c * tau_1 - d in meters.
    std::optional<double> ranging_error_m() const
    {
        if (!true_distance_m)
            return std::nullopt;
        return kSpeedOfLightMps * features.toa_s - *true_distance_m;
    }
};

using FeatureTable = std::vector<FeatureRow>;

} // namespace tunnelrange
