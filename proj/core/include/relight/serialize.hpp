#pragma once

#include <filesystem>
#include <string>

#include "relight/inverse_fit.hpp"
#include "relight/render.hpp"

namespace relight::io {

/// {"coeffs":[9 numbers],"color":[3 numbers]}
[[nodiscard]] std::string lighting_to_json(const ShLighting& light);
[[nodiscard]] ShLighting lighting_from_json(const std::string& text);
void write_lighting(const std::filesystem::path& path, const ShLighting& light);
[[nodiscard]] ShLighting read_lighting(const std::filesystem::path& path);

/// {"width","height","lights":[ShLighting...],"albedo":[R,G,B,...],
///  "normals":[x,y,z,...],"mask":[0|1,...],"spec":{"s_p","alpha"}|null,
///  "objective","iterations"}; pixel arrays are scanline order.
[[nodiscard]] std::string fit_state_to_json(const fit::FitState& state);
[[nodiscard]] fit::FitState fit_state_from_json(const std::string& text);
void write_fit_state(const std::filesystem::path& path, const fit::FitState& state);
[[nodiscard]] fit::FitState read_fit_state(const std::filesystem::path& path);

}  // namespace relight::io
