#pragma once

#include "augundo/core.hpp"
#include "augundo/geometric.hpp"
#include "augundo/loss.hpp"
#include "augundo/photometric.hpp"
#include "augundo/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// File formats: 8-bit RGB image PNGs, 16-bit millimeter depth PNGs, 8-bit
// {0,255} mask PNGs, color-mapped error PNGs and JSON sidecars.
namespace augundo::io {

namespace fs = std::filesystem;

/// Gray and palette inputs are expanded to RGB, alpha is composited onto black
/// and 16-bit channels are reduced to 8 bits. Throws IoError or ParseError.
Image read_image_png(const fs::path& path);
/// Rounds each intensity to the nearest of 256 levels (error <= 1/510).
void write_image_png(const fs::path& path, const Image& image);

/// 16-bit grayscale, value / 1000 = meters, 0 = missing.
Grid<double> read_depth_png(const fs::path& path);
/// Rounds to whole millimeters (error <= 0.5 mm); values above 65.535 m saturate.
void write_depth_png(const fs::path& path, const Grid<double>& depth_m);

ValidityMask read_mask_png(const fs::path& path);
void write_mask_png(const fs::path& path, const ValidityMask& mask);

/// Maps [0, max_value] through a blue-to-red ramp. A non-positive max_value
/// uses the map maximum.
void write_error_png(const fs::path& path, const Grid<double>& values, double max_value = 0.0);

/// JSON text forms used by sidecars and for replay.
std::string record_to_text(const geometric::TransformRecord& record);
geometric::TransformRecord record_from_text(const std::string& text);

std::string sample_to_text(const pipeline::AugmentationSample& sample);
pipeline::AugmentationSample sample_from_text(const std::string& text);

/// Keys absent from the text keep the value of the base config (the
/// "preset" key, when present, selects the base; otherwise none()).
std::string config_to_text(const pipeline::AugmentationConfig& config);
pipeline::AugmentationConfig config_from_text(const std::string& text);

std::string loss_to_text(const loss::LossBreakdown& loss);
std::string metrics_to_text(const pipeline::MetricRecord& metrics);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

/// Frame triplet described by a JSON sidecar with keys fx, fy, cx, cy,
/// pose_prev/pose_next {rotation (row-major 9), translation (3)} and image,
/// sparse and optional ground-truth paths relative to the sidecar.
struct LoadedSample {
  pipeline::FrameTriplet triplet;
  std::optional<Grid<double>> ground_truth;
};

LoadedSample load_sample(const fs::path& sidecar);

/// Writes `<stem>_{prev,current,next}.png`, `<stem>_sparse.png`, optional
/// `<stem>_gt.png` and the `<stem>.json` sidecar into `dir`.
fs::path save_sample(const fs::path& dir, const std::string& stem, const pipeline::FrameTriplet& triplet,
                     const Grid<double>* ground_truth = nullptr);

/// Writes every artifact of a step (images, depths, mask, reconstructions,
/// error maps, sample and event log) into `dir`.
void save_artifacts(const pipeline::StepArtifacts& artifacts, const loss::LossBreakdown& loss, const fs::path& dir);

}  // namespace augundo::io
