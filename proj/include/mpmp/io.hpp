#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpmp/baseline.hpp"
#include "mpmp/geometry.hpp"
#include "mpmp/phantoms.hpp"
#include "mpmp/physics.hpp"
#include "mpmp/stage1.hpp"
#include "mpmp/stage2.hpp"

namespace mpmp::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Missing or unwritable file.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

json to_json(const Rect &r);
Rect rect_from_json(const json &j);
json to_json(const Grid &g);
Grid grid_from_json(const json &j);
json to_json(const LissajousParams &p);
LissajousParams lissajous_from_json(const json &j);
json to_json(const ScanPlan &plan);
ScanPlan plan_from_json(const json &j);
json to_json(const PhantomSpec &spec);
PhantomSpec phantom_spec_from_json(const json &j, const Grid &grid);

void write_json(const fs::path &path, const json &j);
json read_json(const fs::path &path);

// <base>.json header plus <base>.bin with little-endian float64 values.
void save_field(const fs::path &base, const DenseField &f);
DenseField load_field(const fs::path &base);

// 16-bit binary graymap, linear map of [lo, hi] to [0, 65535]; rows written
// top (largest y) first. lo == hi selects the field's own range.
void write_pgm(const fs::path &path, const DenseField &f, double lo = 0.0, double hi = 0.0);

struct ScanBundle {
  ScanPlan plan;
  Rect domain;
  double h = 0.01;
  NoiseModel noise;
  double epsilon = 0.0;
  std::size_t generated = 0;
  std::vector<ScanSample> samples;
};

// <dir>/manifest.json and <dir>/samples.csv (t,patch,sx,sy,rx,ry,vx,vy).
void write_scan_bundle(const fs::path &dir, const ScanBundle &bundle);
ScanBundle read_scan_bundle(const fs::path &dir);

void save_system_matrix(const fs::path &base, const SystemMatrix &S);
SystemMatrix load_system_matrix(const fs::path &base);

json to_json(const Stage1Diagnostics &d);
json to_json(const Stage2Diagnostics &d);
void write_residual_csv(const fs::path &path, const std::vector<double> &history);
void write_objective_csv(const fs::path &path, const std::vector<ObjectivePoint> &trace);

struct ReportRow {
  std::string experiment;
  std::string stage;
  std::string param;
  double psnr = 0.0;
  double ssim = 0.0;
};
void write_report(const fs::path &path, const std::vector<ReportRow> &rows);

}  // namespace mpmp::io
