#pragma once

#include <filesystem>
#include <sstream>

#include "micromotion/config.hpp"
#include "micromotion/io.hpp"
#include "micromotion/numerov.hpp"
#include "micromotion/units.hpp"

namespace fixture {

inline micromotion::RunConfig preset_config() {
    std::istringstream in("preset = ba-rb\n");
    return micromotion::parse_config(in);
}

/// Full d = 0 basis of the preset, shared between test processes through the
/// on-disk cache.
inline const micromotion::UnperturbedBasis& preset_basis() {
    static const micromotion::UnperturbedBasis basis = micromotion::cached_basis(
        preset_config(), std::filesystem::temp_directory_path() / "micromotion_test_cache", true);
    return basis;
}

inline const micromotion::DimensionlessModel& preset_model() {
    static const micromotion::DimensionlessModel model = micromotion::dimensionless(preset_config().trap);
    return model;
}

}  // namespace fixture
