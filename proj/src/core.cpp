#include "augundo/core.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace augundo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRangeIntensity: return "OutOfRangeIntensity";
    case ErrorCode::DegenerateDims: return "DegenerateDims";
    case ErrorCode::NotRotation: return "NotRotation";
    case ErrorCode::NegativeDepth: return "NegativeDepth";
    case ErrorCode::DepthOutOfRange: return "DepthOutOfRange";
    case ErrorCode::BadMaskValue: return "BadMaskValue";
    case ErrorCode::BadIntrinsics: return "BadIntrinsics";
    case ErrorCode::BadFactor: return "BadFactor";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::BadPatchSize: return "BadPatchSize";
    case ErrorCode::BadRate: return "BadRate";
    case ErrorCode::BadParam: return "BadParam";
    case ErrorCode::EmptyRecord: return "EmptyRecord";
    case ErrorCode::NonInvertibleParam: return "NonInvertibleParam";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::DimsMismatch: return "DimsMismatch";
    case ErrorCode::TargetTooSmall: return "TargetTooSmall";
    case ErrorCode::PoseCountMismatch: return "PoseCountMismatch";
    case ErrorCode::BadKind: return "BadKind";
    case ErrorCode::ExcessiveMotion: return "ExcessiveMotion";
    case ErrorCode::TooManyPoints: return "TooManyPoints";
    case ErrorCode::EmptyEvalSet: return "EmptyEvalSet";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

std::string to_string(const Dims& dims) {
  return std::to_string(dims.height) + "x" + std::to_string(dims.width);
}

namespace {

void require_min_dims(Dims dims) {
  if (dims.height < 2 || dims.width < 2) {
    throw Error(ErrorCode::DegenerateDims, "dims must be at least 2x2, got " + to_string(dims));
  }
}

}  // namespace

Image Image::create(Dims dims, std::vector<double> pixels) {
  require_min_dims(dims);
  if (pixels.size() != dims.area() * kChannels) {
    throw Error(ErrorCode::DimsMismatch, "pixel buffer does not hold 3 channels of " + to_string(dims));
  }
  for (double p : pixels) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::OutOfRangeIntensity, "intensity " + std::to_string(p) + " outside [0,1]");
    }
  }
  return Image(dims, std::move(pixels));
}

Image Image::filled(Dims dims, double value) {
  return create(dims, std::vector<double>(dims.area() * kChannels, value));
}

Grid<double> Image::gray() const {
  Grid<double> out(dims_, 0.0);
  for (std::size_t i = 0; i < dims_.area(); ++i) {
    out[i] = (pixels_[3 * i] + pixels_[3 * i + 1] + pixels_[3 * i + 2]) / 3.0;
  }
  return out;
}

Image validate_image(Dims dims, std::vector<double> pixels) { return Image::create(dims, std::move(pixels)); }

SparseDepthMap SparseDepthMap::create(Dims dims, std::vector<double> depths) {
  require_min_dims(dims);
  for (double d : depths) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::NegativeDepth, "sparse depth entries must be finite and >= 0");
    }
  }
  return SparseDepthMap(Grid<double>(dims, std::move(depths)));
}

SparseDepthMap SparseDepthMap::empty(Dims dims) {
  return create(dims, std::vector<double>(dims.area(), 0.0));
}

std::size_t SparseDepthMap::point_count() const {
  const auto values = depths_.values();
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double d) { return d > 0.0; }));
}

double DepthRange::clamp(double d) const noexcept { return std::clamp(d, min, max); }

namespace {

void require_range(DepthRange range) {
  if (!(range.min > 0.0) || !(range.max >= range.min)) {
    throw Error(ErrorCode::BadRange, "depth range must satisfy 0 < min <= max");
  }
}

}  // namespace

DenseDepthMap DenseDepthMap::create(Dims dims, std::vector<double> depths, DepthRange range) {
  require_min_dims(dims);
  require_range(range);
  for (double d : depths) {
    if (!range.contains(d)) {
      throw Error(ErrorCode::DepthOutOfRange, "depth " + std::to_string(d) + " outside [" +
                                                  std::to_string(range.min) + ", " +
                                                  std::to_string(range.max) + "]");
    }
  }
  return DenseDepthMap(Grid<double>(dims, std::move(depths)), range);
}

DenseDepthMap DenseDepthMap::clamped(Dims dims, std::vector<double> depths, DepthRange range) {
  require_range(range);
  for (double& d : depths) d = range.clamp(d);
  return create(dims, std::move(depths), range);
}

DenseDepthMap DenseDepthMap::filled(Dims dims, double depth, DepthRange range) {
  return create(dims, std::vector<double>(dims.area(), depth), range);
}

ValidityMask ValidityMask::create(Dims dims, std::vector<std::uint8_t> values) {
  require_min_dims(dims);
  for (auto v : values) {
    if (v > 1) throw Error(ErrorCode::BadMaskValue, "validity mask values must be 0 or 1");
  }
  return ValidityMask(Grid<std::uint8_t>(dims, std::move(values)));
}

ValidityMask ValidityMask::ones(Dims dims) { return create(dims, std::vector<std::uint8_t>(dims.area(), 1)); }

ValidityMask ValidityMask::zeros(Dims dims) { return create(dims, std::vector<std::uint8_t>(dims.area(), 0)); }

std::size_t ValidityMask::count_valid() const {
  const auto values = mask_.values();
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

CameraIntrinsics CameraIntrinsics::create(double fx, double fy, double cx, double cy) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy)) {
    throw Error(ErrorCode::BadIntrinsics, "focal lengths must be positive and all intrinsics finite");
  }
  return CameraIntrinsics(fx, fy, cx, cy);
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
  return k;
}

RigidPose RigidPose::identity() { return RigidPose(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()); }

bool RigidPose::is_identity() const {
  return rotation_ == Eigen::Matrix3d::Identity() && translation_ == Eigen::Vector3d::Zero();
}

RigidPose validate_pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::NotRotation, "pose contains non-finite values");
  }
  const double orthonormality = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (orthonormality > RigidPose::kTolerance || std::abs(det - 1.0) > RigidPose::kTolerance) {
    throw Error(ErrorCode::NotRotation, "rotation is not orthonormal with determinant +1 (det=" +
                                            std::to_string(det) + ")");
  }
  return RigidPose(rotation, translation);
}

Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d& axis, double degrees) {
  return Eigen::AngleAxisd(degrees * M_PI / 180.0, axis.normalized()).toRotationMatrix();
}

}  // namespace augundo
