#pragma once

#include <filesystem>

#include "hirise/analog_sensor.hpp"

namespace hirise {

// Binary PPM (P6, maxval 255) mapped linearly onto [0, vdd]. Throws IoError
// when the file cannot be opened and ParseError on any other format.
[[nodiscard]] PixelArray load_ppm(const std::filesystem::path& path, double vdd = 1.0);

}  // namespace hirise
