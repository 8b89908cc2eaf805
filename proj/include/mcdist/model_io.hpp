#pragma once

#include <filesystem>
#include <variant>

#include "mcdist/estimators.hpp"

namespace mcdist {

// Versioned plain-text model files; numeric fields are written with 17
// significant digits so load(save(m)) is lossless.
void save_model(const LinearModel& model, const std::filesystem::path& path);
void save_model(const NeuralModel& model, const std::filesystem::path& path);

using AnyModel = std::variant<LinearModel, NeuralModel>;
AnyModel load_model(const std::filesystem::path& path);

}  // namespace mcdist
