#include "augundo/io.hpp"

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace augundo::io {

namespace {

using nlohmann::json;
using geometric::GeometricTransform;
using geometric::TransformKind;
using geometric::TransformRecord;
using photometric::PhotometricKind;
using photometric::PhotometricTransform;

// ---------------------------------------------------------------- PNG ----

struct PngReader {
  png_image image{};

  explicit PngReader(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoError, "no such file: " + path.string());
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + image.message);
    }
  }
  ~PngReader() { png_image_free(&image); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  [[nodiscard]] Dims dims() const { return {static_cast<int>(image.height), static_cast<int>(image.width)}; }

  template <typename T>
  std::vector<T> finish(png_uint_32 format, const fs::path& path) {
    image.format = format;
    std::vector<T> buffer(PNG_IMAGE_SIZE(image) / sizeof(T), T{0});
    if (png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr) == 0) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + image.message);
    }
    return buffer;
  }
};

template <typename T>
void write_png(const fs::path& path, Dims dims, png_uint_32 format, const std::vector<T>& buffer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(dims.width);
  image.height = static_cast<png_uint_32>(dims.height);
  image.format = format;
  if (png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr) == 0) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::IoError, path.string() + ": " + message);
  }
}

std::uint8_t to_byte(double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); }

// Blue -> cyan -> yellow -> red ramp.
void ramp(double t, std::uint8_t* rgb) {
  t = std::isfinite(t) ? std::clamp(t, 0.0, 1.0) : 0.0;
  rgb[0] = to_byte(1.5 - std::abs(4.0 * t - 3.0));
  rgb[1] = to_byte(1.5 - std::abs(4.0 * t - 2.0));
  rgb[2] = to_byte(1.5 - std::abs(4.0 * t - 1.0));
}

// --------------------------------------------------------------- JSON ----

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

const json& require(const json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::MissingKey, std::string("missing key '") + key + "'");
  return *it;
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("key '") + key + "': " + e.what());
  }
}

template <typename T>
void get_optional(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw Error(ErrorCode::ParseError, std::string("unknown key '") + key + "' in " + where);
    }
  }
}

json dims_json(Dims d) { return json::array({d.height, d.width}); }

Dims dims_from(const json& j, const char* key) {
  const auto v = get<std::vector<int>>(j, key);
  if (v.size() != 2) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be [height, width]");
  return {v[0], v[1]};
}

json transform_json(const GeometricTransform& t) {
  json j{{"kind", std::string(geometric::to_string(t.kind()))},
         {"in_dims", dims_json(t.in_dims())},
         {"out_dims", dims_json(t.out_dims())}};
  switch (t.kind()) {
    case TransformKind::FlipH:
    case TransformKind::FlipV: break;
    case TransformKind::Resize:
      j["scale_h"] = t.scale_h();
      j["scale_w"] = t.scale_w();
      break;
    case TransformKind::Rotate:
      j["degrees"] = t.degrees();
      j["pad"] = t.pad();
      break;
    case TransformKind::Translate:
      j["shift_u"] = t.shift_u();
      j["shift_v"] = t.shift_v();
      break;
  }
  return j;
}

json record_json(const TransformRecord& record) {
  json transforms = json::array();
  for (const auto& t : record.transforms()) transforms.push_back(transform_json(t));
  return {{"original_dims", dims_json(record.original_dims())}, {"transforms", transforms}};
}

TransformRecord record_from_json(const json& j) {
  TransformRecord record(dims_from(j, "original_dims"));
  const json& list = require(j, "transforms");
  if (!list.is_array()) throw Error(ErrorCode::ParseError, "'transforms' must be an array");
  for (const auto& t : list) {
    const Dims in = record.final_dims();
    if (t.contains("in_dims") && dims_from(t, "in_dims") != in) {
      throw Error(ErrorCode::DimsMismatch, "recorded input canvas does not chain with the previous transform");
    }
    const TransformKind kind = geometric::transform_kind_from_string(get<std::string>(t, "kind"));
    std::optional<GeometricTransform> g;
    switch (kind) {
      case TransformKind::FlipH: g = GeometricTransform::flip_horizontal(in); break;
      case TransformKind::FlipV: g = GeometricTransform::flip_vertical(in); break;
      case TransformKind::Resize:
        g = GeometricTransform::resize(in, get<double>(t, "scale_h"), get<double>(t, "scale_w"));
        break;
      case TransformKind::Rotate: {
        int pad = 0;
        get_optional(t, "pad", pad);
        g = GeometricTransform::rotate(in, get<double>(t, "degrees"), pad);
        break;
      }
      case TransformKind::Translate:
        g = GeometricTransform::translate(in, get<int>(t, "shift_u"), get<int>(t, "shift_v"));
        break;
    }
    if (t.contains("out_dims") && dims_from(t, "out_dims") != g->out_dims()) {
      throw Error(ErrorCode::ParseError, "recorded output canvas disagrees with the transform parameters");
    }
    record.append(*g);
  }
  return record;
}

json photometric_json(const PhotometricTransform& t) {
  return {{"kind", std::string(photometric::to_string(t.kind))},
          {"value", t.value},
          {"patch_size", t.patch_size},
          {"seed", t.rng_seed}};
}

PhotometricTransform photometric_from_json(const json& j) {
  const PhotometricKind kind = photometric::photometric_kind_from_string(get<std::string>(j, "kind"));
  const double value = get<double>(j, "value");
  switch (kind) {
    case PhotometricKind::Brightness: return PhotometricTransform::brightness(value);
    case PhotometricKind::Contrast: return PhotometricTransform::contrast(value);
    case PhotometricKind::Saturation: return PhotometricTransform::saturation(value);
    case PhotometricKind::Hue: return PhotometricTransform::hue(value);
    case PhotometricKind::PatchOcclusion:
      return PhotometricTransform::patch_occlusion(value, get<int>(j, "patch_size"), get<std::uint64_t>(j, "seed"));
    case PhotometricKind::SparsePointRemoval:
      return PhotometricTransform::sparse_point_removal(value, get<std::uint64_t>(j, "seed"));
  }
  throw Error(ErrorCode::BadKind, "unhandled photometric kind");
}

json sample_json(const pipeline::AugmentationSample& sample) {
  json photometric = json::array();
  for (const auto& t : sample.photometric) photometric.push_back(photometric_json(t));
  return {{"photometric", photometric}, {"geometric", record_json(sample.geometric)}};
}

json family_json(const pipeline::FamilyConfig& f) {
  return {{"enabled", f.enabled}, {"probability", f.probability}, {"min", f.min}, {"max", f.max}};
}

void family_from(const json& j, const char* key, pipeline::FamilyConfig& f) {
  if (!j.contains(key)) return;
  const json& o = j.at(key);
  if (!o.is_object()) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be an object");
  reject_unknown(o, {"enabled", "probability", "min", "max"}, key);
  get_optional(o, "enabled", f.enabled);
  get_optional(o, "probability", f.probability);
  get_optional(o, "min", f.min);
  get_optional(o, "max", f.max);
}

RigidPose pose_from(const json& j, const char* key) {
  const json& o = require(j, key);
  const auto r = get<std::vector<double>>(o, "rotation");
  const auto t = get<std::vector<double>>(o, "translation");
  if (r.size() != 9 || t.size() != 3) {
    throw Error(ErrorCode::ParseError, std::string("'") + key + "' needs 9 rotation and 3 translation values");
  }
  Eigen::Matrix3d rot;
  for (int i = 0; i < 9; ++i) rot(i / 3, i % 3) = r[static_cast<std::size_t>(i)];
  return validate_pose(rot, Eigen::Vector3d(t[0], t[1], t[2]));
}

json pose_json(const RigidPose& p) {
  std::vector<double> r(9);
  for (int i = 0; i < 9; ++i) r[static_cast<std::size_t>(i)] = p.rotation()(i / 3, i % 3);
  return {{"rotation", r}, {"translation", {p.translation().x(), p.translation().y(), p.translation().z()}}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

Image read_image_png(const fs::path& path) {
  PngReader reader(path);
  const Dims dims = reader.dims();
  const auto bytes = reader.finish<std::uint8_t>(PNG_FORMAT_RGB, path);
  std::vector<double> pixels(bytes.size());
  std::transform(bytes.begin(), bytes.end(), pixels.begin(), [](std::uint8_t b) { return b / 255.0; });
  return Image::create(dims, std::move(pixels));
}

void write_image_png(const fs::path& path, const Image& image) {
  std::vector<std::uint8_t> bytes(image.pixels().size());
  std::transform(image.pixels().begin(), image.pixels().end(), bytes.begin(), to_byte);
  write_png(path, image.dims(), PNG_FORMAT_RGB, bytes);
}

Grid<double> read_depth_png(const fs::path& path) {
  PngReader reader(path);
  const png_uint_32 format = reader.image.format;
  if ((format & PNG_FORMAT_FLAG_COLOR) != 0 || (format & PNG_FORMAT_FLAG_LINEAR) == 0) {
    throw Error(ErrorCode::ParseError, path.string() + ": depth must be a 16-bit grayscale PNG");
  }
  const Dims dims = reader.dims();
  const auto raw = reader.finish<std::uint16_t>(PNG_FORMAT_LINEAR_Y, path);
  std::vector<double> meters(raw.size());
  std::transform(raw.begin(), raw.end(), meters.begin(), [](std::uint16_t mm) { return mm / 1000.0; });
  return {dims, std::move(meters)};
}

void write_depth_png(const fs::path& path, const Grid<double>& depth_m) {
  std::vector<std::uint16_t> raw(depth_m.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double mm = std::isfinite(depth_m[i]) ? std::round(depth_m[i] * 1000.0) : 0.0;
    raw[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }
  write_png(path, depth_m.dims(), PNG_FORMAT_LINEAR_Y, raw);
}

ValidityMask read_mask_png(const fs::path& path) {
  PngReader reader(path);
  const Dims dims = reader.dims();
  auto bytes = reader.finish<std::uint8_t>(PNG_FORMAT_GRAY, path);
  for (auto& b : bytes) {
    if (b != 0 && b != 255) throw Error(ErrorCode::BadMaskValue, path.string() + ": mask values must be 0 or 255");
    b = b == 255 ? 1 : 0;
  }
  return ValidityMask::create(dims, std::move(bytes));
}

void write_mask_png(const fs::path& path, const ValidityMask& mask) {
  std::vector<std::uint8_t> bytes(mask.grid().size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.grid()[i] != 0 ? 255 : 0;
  write_png(path, mask.dims(), PNG_FORMAT_GRAY, bytes);
}

void write_error_png(const fs::path& path, const Grid<double>& values, double max_value) {
  if (!(max_value > 0.0)) {
    max_value = 0.0;
    for (double v : values.values()) {
      if (std::isfinite(v)) max_value = std::max(max_value, v);
    }
    if (max_value == 0.0) max_value = 1.0;
  }
  std::vector<std::uint8_t> bytes(values.size() * 3);
  for (std::size_t i = 0; i < values.size(); ++i) ramp(values[i] / max_value, &bytes[3 * i]);
  write_png(path, values.dims(), PNG_FORMAT_RGB, bytes);
}

std::string record_to_text(const TransformRecord& record) { return dump(record_json(record)); }

TransformRecord record_from_text(const std::string& text) { return record_from_json(parse_json(text)); }

std::string sample_to_text(const pipeline::AugmentationSample& sample) { return dump(sample_json(sample)); }

pipeline::AugmentationSample sample_from_text(const std::string& text) {
  const json j = parse_json(text);
  pipeline::AugmentationSample sample;
  const json& list = require(j, "photometric");
  if (!list.is_array()) throw Error(ErrorCode::ParseError, "'photometric' must be an array");
  for (const auto& t : list) sample.photometric.push_back(photometric_from_json(t));
  sample.geometric = record_from_json(require(j, "geometric"));
  return sample;
}

std::string config_to_text(const pipeline::AugmentationConfig& c) {
  const auto& p = c.photometric;
  const auto& g = c.geometric;
  const json j{
      {"mode", c.mode == pipeline::InclusionMode::Block ? "block" : "per_family"},
      {"application_probability", c.application_probability},
      {"seed", c.seed},
      {"photometric",
       {{"brightness", family_json(p.brightness)},
        {"contrast", family_json(p.contrast)},
        {"saturation", family_json(p.saturation)},
        {"hue", family_json(p.hue)},
        {"patch_occlusion", family_json(p.patch_occlusion)},
        {"patch_size", p.patch_size},
        {"point_removal", family_json(p.point_removal)}}},
      {"geometric",
       {{"flip", family_json(g.flip)},
        {"flip_horizontal", g.flip_horizontal},
        {"flip_vertical", g.flip_vertical},
        {"resize", family_json(g.resize)},
        {"resize_anisotropic", g.resize_anisotropic},
        {"rotate", family_json(g.rotate)},
        {"translate", family_json(g.translate)}}},
  };
  return dump(j);
}

pipeline::AugmentationConfig config_from_text(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be an object");
  reject_unknown(j, {"preset", "mode", "application_probability", "seed", "photometric", "geometric"}, "config");
  pipeline::AugmentationConfig c = pipeline::AugmentationConfig::none();
  if (j.contains("preset")) {
    const auto name = get<std::string>(j, "preset");
    if (name == "void") {
      c = pipeline::AugmentationConfig::void_preset();
    } else if (name == "kitti") {
      c = pipeline::AugmentationConfig::kitti_preset();
    } else if (name != "none") {
      throw Error(ErrorCode::ParseError, "unknown preset '" + name + "'");
    }
  }
  if (j.contains("mode")) {
    const auto mode = get<std::string>(j, "mode");
    if (mode == "block") {
      c.mode = pipeline::InclusionMode::Block;
    } else if (mode == "per_family") {
      c.mode = pipeline::InclusionMode::PerFamily;
    } else {
      throw Error(ErrorCode::ParseError, "unknown mode '" + mode + "'");
    }
  }
  get_optional(j, "application_probability", c.application_probability);
  get_optional(j, "seed", c.seed);
  if (j.contains("photometric")) {
    const json& p = j.at("photometric");
    reject_unknown(p, {"brightness", "contrast", "saturation", "hue", "patch_occlusion", "patch_size", "point_removal"},
                   "photometric");
    family_from(p, "brightness", c.photometric.brightness);
    family_from(p, "contrast", c.photometric.contrast);
    family_from(p, "saturation", c.photometric.saturation);
    family_from(p, "hue", c.photometric.hue);
    family_from(p, "patch_occlusion", c.photometric.patch_occlusion);
    get_optional(p, "patch_size", c.photometric.patch_size);
    family_from(p, "point_removal", c.photometric.point_removal);
  }
  if (j.contains("geometric")) {
    const json& g = j.at("geometric");
    reject_unknown(g, {"flip", "flip_horizontal", "flip_vertical", "resize", "resize_anisotropic", "rotate", "translate"},
                   "geometric");
    family_from(g, "flip", c.geometric.flip);
    get_optional(g, "flip_horizontal", c.geometric.flip_horizontal);
    get_optional(g, "flip_vertical", c.geometric.flip_vertical);
    family_from(g, "resize", c.geometric.resize);
    get_optional(g, "resize_anisotropic", c.geometric.resize_anisotropic);
    family_from(g, "rotate", c.geometric.rotate);
    family_from(g, "translate", c.geometric.translate);
  }
  c.validate();
  return c;
}

std::string loss_to_text(const loss::LossBreakdown& l) {
  return dump({{"photometric", l.photometric},
               {"sparse", l.sparse},
               {"smoothness", l.smoothness},
               {"total", l.total},
               {"valid_pixel_count", l.valid_pixel_count}});
}

std::string metrics_to_text(const pipeline::MetricRecord& m) {
  return dump({{"mae_mm", m.mae_mm},
               {"rmse_mm", m.rmse_mm},
               {"imae_per_m", m.imae},
               {"irmse_per_m", m.irmse},
               {"abs_rel", m.abs_rel},
               {"sq_rel", m.sq_rel},
               {"delta_1.25", m.delta1},
               {"delta_1.25^2", m.delta2},
               {"delta_1.25^3", m.delta3},
               {"count", m.count}});
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

LoadedSample load_sample(const fs::path& sidecar) {
  const json j = parse_json(read_text_file(sidecar));
  const fs::path base = sidecar.parent_path();
  const auto intrinsics =
      CameraIntrinsics::create(get<double>(j, "fx"), get<double>(j, "fy"), get<double>(j, "cx"), get<double>(j, "cy"));
  const RigidPose pose_prev = pose_from(j, "pose_prev");
  const RigidPose pose_next = pose_from(j, "pose_next");
  const json& images = require(j, "images");
  auto path_of = [&](const json& o, const char* key) { return base / get<std::string>(o, key); };

  const Image prev = read_image_png(path_of(images, "prev"));
  const Image current = read_image_png(path_of(images, "current"));
  const Image next = read_image_png(path_of(images, "next"));
  Grid<double> sparse = read_depth_png(path_of(j, "sparse"));
  LoadedSample out{pipeline::FrameTriplet{prev, current, next,
                                          SparseDepthMap::create(sparse.dims(), std::move(sparse.storage())),
                                          intrinsics, pose_prev, pose_next},
                   std::nullopt};
  out.triplet.validate();
  if (j.contains("ground_truth")) {
    out.ground_truth = read_depth_png(path_of(j, "ground_truth"));
    if (out.ground_truth->dims() != current.dims()) {
      throw Error(ErrorCode::DimsMismatch, "ground truth dims differ from the reference image");
    }
  }
  return out;
}

fs::path save_sample(const fs::path& dir, const std::string& stem, const pipeline::FrameTriplet& triplet,
                     const Grid<double>* ground_truth) {
  triplet.validate();
  fs::create_directories(dir);
  json j{{"fx", triplet.intrinsics.fx()},
         {"fy", triplet.intrinsics.fy()},
         {"cx", triplet.intrinsics.cx()},
         {"cy", triplet.intrinsics.cy()},
         {"pose_prev", pose_json(triplet.pose_prev)},
         {"pose_next", pose_json(triplet.pose_next)},
         {"images", {{"prev", stem + "_prev.png"}, {"current", stem + "_current.png"}, {"next", stem + "_next.png"}}},
         {"sparse", stem + "_sparse.png"}};
  write_image_png(dir / (stem + "_prev.png"), triplet.prev);
  write_image_png(dir / (stem + "_current.png"), triplet.current);
  write_image_png(dir / (stem + "_next.png"), triplet.next);
  write_depth_png(dir / (stem + "_sparse.png"), triplet.sparse.grid());
  if (ground_truth != nullptr) {
    write_depth_png(dir / (stem + "_gt.png"), *ground_truth);
    j["ground_truth"] = stem + "_gt.png";
  }
  const fs::path sidecar = dir / (stem + ".json");
  write_text_file(sidecar, dump(j));
  return sidecar;
}

void save_artifacts(const pipeline::StepArtifacts& a, const loss::LossBreakdown& loss, const fs::path& dir) {
  fs::create_directories(dir);
  write_image_png(dir / "augmented_image.png", a.augmented_image);
  write_depth_png(dir / "augmented_sparse.png", a.augmented_sparse.grid());
  write_depth_png(dir / "predicted_augmented.png", a.predicted_augmented.grid());
  write_depth_png(dir / "depth.png", a.depth.grid());
  write_mask_png(dir / "mask.png", a.mask);
  for (std::size_t k = 0; k < a.maps.reconstructions.size(); ++k) {
    const std::string idx = std::to_string(k);
    write_image_png(dir / ("reconstruction_" + idx + ".png"), a.maps.reconstructions[k].image);
    write_mask_png(dir / ("in_frame_" + idx + ".png"), a.maps.reconstructions[k].in_frame);
  }
  for (std::size_t k = 0; k < a.maps.photometric.size(); ++k) {
    write_error_png(dir / ("photometric_error_" + std::to_string(k) + ".png"), a.maps.photometric[k], 1.0);
  }
  if (a.maps.sparse.size() > 0) write_error_png(dir / "sparse_error.png", a.maps.sparse);
  write_text_file(dir / "sample.json", sample_to_text(a.sample));
  write_text_file(dir / "loss.json", loss_to_text(loss));
  std::string events;
  for (const auto step : a.events) {
    events += std::to_string(static_cast<int>(step)) + " " + std::string(pipeline::to_string(step)) + "\n";
  }
  write_text_file(dir / "events.txt", events);
}

}  // namespace augundo::io
