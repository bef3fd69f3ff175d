#pragma once

#include "rop/harness/experiments.hpp"

#include <filesystem>

namespace rop::harness {

// JSON forms of the experiment specs. Parsing starts from `base` and overrides
// only the keys present; unknown keys are rejected with the offending name.

nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const PhaseSpec& spec);
nlohmann::json to_json(const RobustSpec& spec);
nlohmann::json to_json(const RateSpec& spec);
nlohmann::json to_json(const CompareSpec& spec);
nlohmann::json to_json(const LowerSpec& spec);
nlohmann::json to_json(const CovSpec& spec);
nlohmann::json to_json(const CvSpec& spec);
nlohmann::json to_json(const ImageTask& task);

SolverConfig parse(const nlohmann::json& j, SolverConfig base);
PhaseSpec parse(const nlohmann::json& j, PhaseSpec base);
RobustSpec parse(const nlohmann::json& j, RobustSpec base);
RateSpec parse(const nlohmann::json& j, RateSpec base);
CompareSpec parse(const nlohmann::json& j, CompareSpec base);
LowerSpec parse(const nlohmann::json& j, LowerSpec base);
CovSpec parse(const nlohmann::json& j, CovSpec base);
CvSpec parse(const nlohmann::json& j, CvSpec base);
ImageTask parse(const nlohmann::json& j, ImageTask base);

nlohmann::json load_json(const std::filesystem::path& path);

std::string to_string(CompareMode mode);
CompareMode parse_compare_mode(std::string_view name);

}  // namespace rop::harness
