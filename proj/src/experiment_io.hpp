#pragma once

// Output helpers shared by the experiment runners and presets.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>

#include <json.hpp>

#include "cfc/config.hpp"
#include "cfc/decoder.hpp"

namespace cfc {

/// Lower edge of the accurately measured band.
inline constexpr double kValidLow = 10e-12;

nlohmann::json config_to_json(const CfcConfig& c);

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& writer);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> points, const CfcConfig& cfg);

/// valid | below_valid | above_valid | no_measurement
std::string_view band_label(const CfcConfig& cfg, double programmed, bool measured);

}  // namespace cfc
