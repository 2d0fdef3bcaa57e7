#pragma once

#include "augundo/pipeline.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Property checks on synthetic scenes, run by the `harness` subcommand.
namespace augundo::harness {

struct HarnessOptions {
  std::uint64_t seed = 7;
  /// Square image side.
  int size = 64;
  /// Random records / seeds per check.
  int trials = 50;
  pipeline::AugmentationConfig config = pipeline::AugmentationConfig::void_preset();
  std::vector<pipeline::AblationFamily> excluded;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Deterministic for fixed options.
std::vector<CheckResult> run_harness(const HarnessOptions& options);

/// True when `sample` contains an operation of `family`.
bool sample_uses(const pipeline::AugmentationSample& sample, pipeline::AblationFamily family);

}  // namespace augundo::harness
