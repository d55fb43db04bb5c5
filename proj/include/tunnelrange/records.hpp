// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cir_processing.hpp"
#include "error.hpp"
#include "units.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace tunnelrange {

enum class Scenario { Los, NlosMetal, NlosPerson, NlosWall };

/// Binary propagation class used by the ranging model.
enum class LinkClass { Los, Nlos };

// Metal-sheet and person blockages behave like LOS and are pooled with it;
// only wall blockage counts as NLOS.
constexpr LinkClass pooled_class(Scenario s) noexcept
{
    return s == Scenario::NlosWall ? LinkClass::Nlos : LinkClass::Los;
}

constexpr std::string_view to_string(Scenario s) noexcept
{
    switch (s) {
    case Scenario::Los: return "LOS";
    case Scenario::NlosMetal: return "NLOS-M";
    case Scenario::NlosPerson: return "NLOS-P";
    case Scenario::NlosWall: return "NLOS-W";
    }
    return "LOS";
}

constexpr std::string_view to_string(LinkClass c) noexcept
{
    return c == LinkClass::Nlos ? "NLOS" : "LOS";
}

inline Scenario parse_scenario(std::string_view text)
{
    if (text == "LOS")
        return Scenario::Los;
    if (text == "NLOS-M")
        return Scenario::NlosMetal;
    if (text == "NLOS-P")
        return Scenario::NlosPerson;
    if (text == "NLOS-W")
        return Scenario::NlosWall;
    throw Error(ErrorCode::InvalidInput, "unknown scenario '" + std::string(text) + "'");
}

/// One sounding in the time domain, with optional ground truth for training.
struct SweepRecord {
    std::string record_id;
    std::string tx_id;
    std::string rx_id;
    std::optional<double> true_distance_m;
    std::optional<Scenario> scenario;
    ImpulseResponse cir;

    std::optional<double> true_toa_s() const
    {
        if (!true_distance_m)
            return std::nullopt;
        return *true_distance_m / kSpeedOfLightMps;
    }
};

} // namespace tunnelrange
