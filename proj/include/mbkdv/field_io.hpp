#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mbkdv/spectral_field.hpp"

namespace mbkdv {

/// {"n_max": int, "modes": [[k, re, im], ...]} listing k > 0 only.
nlohmann::json field_to_json(const SpectralField& f);
/// Inverse of field_to_json; negative modes are rebuilt by conjugation.
SpectralField field_from_json(const nlohmann::json& j);

nlohmann::json pair_to_json(const SpectralPair& p);
SpectralPair pair_from_json(const nlohmann::json& j);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

}  // namespace mbkdv
