#include "mpmp/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mpmp/rng.hpp"

namespace mpmp::io {

namespace {

std::ofstream open_out(const fs::path &path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw FileError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const fs::path &path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw FileError("cannot open for reading: " + path.string());
  return in;
}

fs::path with_suffix(const fs::path &base, const char *ext) {
  return base.parent_path() / (base.filename().string() + ext);
}

void write_f64(std::ostream &out, const std::vector<double> &v) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char *>(v.data()), static_cast<std::streamsize>(v.size() * 8));
  } else {
    for (double d : v) {
      auto bits = std::bit_cast<std::uint64_t>(d);
      char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
      out.write(b, 8);
    }
  }
}

std::vector<double> read_f64(std::istream &in, std::size_t n) {
  std::vector<double> v(n);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char *>(v.data()), static_cast<std::streamsize>(n * 8));
  } else {
    for (double &d : v) {
      unsigned char b[8];
      in.read(reinterpret_cast<char *>(b), 8);
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
      d = std::bit_cast<double>(bits);
    }
  }
  if (!in) throw std::runtime_error("binary payload is shorter than its header says");
  return v;
}

json vec(const Vec2 &v) { return json::array({v.x, v.y}); }
Vec2 vec_from(const json &j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("bad number in CSV: " + std::string(s));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, p);
}

json to_json(const Rect &r) { return json::array({r.xmin, r.xmax, r.ymin, r.ymax}); }

Rect rect_from_json(const json &j) {
  Rect r{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
  if (!r.valid()) throw std::invalid_argument("degenerate domain in JSON");
  return r;
}

json to_json(const Grid &g) { return {{"nx", g.nx}, {"ny", g.ny}, {"domain", to_json(g.domain)}}; }

Grid grid_from_json(const json &j) {
  return Grid(j.at("nx").get<int>(), j.at("ny").get<int>(), rect_from_json(j.at("domain")));
}

json to_json(const LissajousParams &p) {
  return {{"amplitude", vec(p.amplitude)},
          {"freq", json::array({p.freq_x, p.freq_y})},
          {"phase", json::array({p.phase_x, p.phase_y})},
          {"samples_per_period", p.samples_per_period}};
}

LissajousParams lissajous_from_json(const json &j) {
  LissajousParams p;
  p.amplitude = vec_from(j.at("amplitude"));
  p.freq_x = j.at("freq").at(0).get<int>();
  p.freq_y = j.at("freq").at(1).get<int>();
  p.phase_x = j.at("phase").at(0).get<double>();
  p.phase_y = j.at("phase").at(1).get<double>();
  p.samples_per_period = j.at("samples_per_period").get<int>();
  p.validate();
  return p;
}

json to_json(const ScanPlan &plan) {
  json j;
  j["base"] = to_json(plan.base);
  j["patch_duration"] = plan.patch_duration;
  if (plan.law == MotionLaw::ConstantPerPatch) {
    j["law"] = "constant-per-patch";
    j["move_time"] = plan.move_time;
    json ps = json::array();
    for (const RigidMotion &m : plan.patches) ps.push_back({{"offset", vec(m.offset)}, {"angle", m.angle}});
    j["patches"] = ps;
  } else {
    j["law"] = "linear-sweep";
    j["sweep_start"] = vec(plan.sweep_start);
    j["sweep_end"] = vec(plan.sweep_end);
    j["sweep_angle"] = plan.sweep_angle;
    j["sweep_periods"] = plan.sweep_periods;
  }
  return j;
}

ScanPlan plan_from_json(const json &j) {
  ScanPlan plan;
  plan.base = lissajous_from_json(j.at("base"));
  plan.patch_duration = j.value("patch_duration", 1.0);
  const std::string law = j.at("law").get<std::string>();
  if (law == "constant-per-patch") {
    plan.law = MotionLaw::ConstantPerPatch;
    plan.move_time = j.value("move_time", 1.0);
    for (const json &p : j.at("patches")) {
      RigidMotion m;
      m.offset = vec_from(p.at("offset"));
      m.angle = p.at("angle").get<double>();
      plan.patches.push_back(m);
    }
  } else if (law == "linear-sweep") {
    plan.law = MotionLaw::LinearSweep;
    plan.sweep_start = vec_from(j.at("sweep_start"));
    plan.sweep_end = vec_from(j.at("sweep_end"));
    plan.sweep_angle = j.value("sweep_angle", 0.0);
    plan.sweep_periods = j.at("sweep_periods").get<int>();
  } else {
    throw std::invalid_argument("unknown motion law: " + law);
  }
  plan.validate();
  return plan;
}

json to_json(const PhantomSpec &spec) {
  json j{{"kind", to_string(spec.kind)}, {"params", spec.params}};
  if (spec.kind == PhantomKind::Delta) j["cell"] = json::array({spec.delta_i, spec.delta_j});
  return j;
}

PhantomSpec phantom_spec_from_json(const json &j, const Grid &grid) {
  PhantomSpec s = make_phantom_spec(phantom_kind_from_string(j.at("kind").get<std::string>()), grid);
  if (j.contains("params"))
    for (const auto &[k, v] : j.at("params").items()) s.params[k] = v.get<double>();
  if (s.kind == PhantomKind::Delta) {
    s.delta_i = j.at("cell").at(0).get<int>();
    s.delta_j = j.at("cell").at(1).get<int>();
  }
  return s;
}

void write_json(const fs::path &path, const json &j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path &path) {
  auto in = open_in(path);
  return json::parse(in);
}

void save_field(const fs::path &base, const DenseField &f) {
  const fs::path bin = with_suffix(base, ".bin");
  json header = to_json(f.grid);
  header["dtype"] = "float64";
  header["byte_order"] = "little";
  header["layout"] = "row-major, index j*nx+i";
  header["data"] = bin.filename().string();
  write_json(with_suffix(base, ".json"), header);
  auto out = open_out(bin, std::ios::out | std::ios::binary);
  write_f64(out, f.values);
}

DenseField load_field(const fs::path &base) {
  const json header = read_json(with_suffix(base, ".json"));
  const Grid g = grid_from_json(header);
  auto in = open_in(base.parent_path() / header.at("data").get<std::string>(),
                    std::ios::in | std::ios::binary);
  return DenseField(g, read_f64(in, g.size()));
}

void write_pgm(const fs::path &path, const DenseField &f, double lo, double hi) {
  if (lo == hi) {
    const auto [mn, mx] = std::minmax_element(f.values.begin(), f.values.end());
    lo = *mn;
    hi = *mx;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << f.grid.nx << ' ' << f.grid.ny << "\n65535\n";
  for (int j = f.grid.ny - 1; j >= 0; --j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const double t = std::clamp((f(i, j) - lo) / span, 0.0, 1.0);
      const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      const char b[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
      out.write(b, 2);
    }
}

void write_scan_bundle(const fs::path &dir, const ScanBundle &b) {
  fs::create_directories(dir);
  std::map<int, std::size_t> per_patch;
  for (const ScanSample &s : b.samples) ++per_patch[s.patch];
  json counts = json::array();
  for (const auto &[p, n] : per_patch) counts.push_back({{"patch", p}, {"samples", n}});
  json m{{"plan", to_json(b.plan)},
         {"domain", to_json(b.domain)},
         {"h", b.h},
         {"noise", {{"level", b.noise.level}, {"seed", b.noise.seed}}},
         {"generator", CounterRng::kName},
         {"epsilon", b.epsilon},
         {"counts", {{"generated", b.generated}, {"retained", b.samples.size()}, {"per_patch", counts}}},
         {"samples", "samples.csv"}};
  write_json(dir / "manifest.json", m);
  auto out = open_out(dir / "samples.csv");
  out << "t,patch,sx,sy,rx,ry,vx,vy\n";
  for (const ScanSample &s : b.samples) {
    out << format_double(s.t) << ',' << s.patch << ',' << format_double(s.s.x) << ','
        << format_double(s.s.y) << ',' << format_double(s.r.x) << ',' << format_double(s.r.y)
        << ',' << format_double(s.v.x) << ',' << format_double(s.v.y) << '\n';
  }
}

ScanBundle read_scan_bundle(const fs::path &dir) {
  const json m = read_json(dir / "manifest.json");
  ScanBundle b;
  b.plan = plan_from_json(m.at("plan"));
  b.domain = rect_from_json(m.at("domain"));
  b.h = m.at("h").get<double>();
  b.noise.level = m.at("noise").at("level").get<double>();
  b.noise.seed = m.at("noise").at("seed").get<std::uint64_t>();
  b.epsilon = m.at("epsilon").get<double>();
  b.generated = m.at("counts").at("generated").get<std::size_t>();
  auto in = open_in(dir / m.value("samples", std::string("samples.csv")));
  std::string line;
  std::getline(in, line);
  if (line != "t,patch,sx,sy,rx,ry,vx,vy") throw std::runtime_error("unexpected scan CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view rest(line);
    std::string_view f[8];
    for (int k = 0; k < 8; ++k) {
      const auto pos = rest.find(',');
      if ((pos == std::string_view::npos) != (k == 7)) throw std::runtime_error("bad scan CSV row");
      f[k] = rest.substr(0, pos);
      if (k < 7) rest.remove_prefix(pos + 1);
    }
    ScanSample s;
    s.t = parse_double(f[0]);
    s.patch = static_cast<int>(parse_double(f[1]));
    s.s = {parse_double(f[2]), parse_double(f[3])};
    s.r = {parse_double(f[4]), parse_double(f[5])};
    s.v = {parse_double(f[6]), parse_double(f[7])};
    b.samples.push_back(s);
  }
  return b;
}

void save_system_matrix(const fs::path &base, const SystemMatrix &S) {
  const fs::path bin = with_suffix(base, ".bin");
  json header{{"rows", S.rows()},
              {"cols", S.cols()},
              {"layout", "column-major; rows = x components then y components"},
              {"grid", to_json(S.grid())},
              {"dtype", "float64"},
              {"byte_order", "little"},
              {"data", bin.filename().string()}};
  write_json(with_suffix(base, ".json"), header);
  auto out = open_out(bin, std::ios::out | std::ios::binary);
  write_f64(out, S.data());
}

SystemMatrix load_system_matrix(const fs::path &base) {
  const json header = read_json(with_suffix(base, ".json"));
  const Grid g = grid_from_json(header.at("grid"));
  const auto rows = header.at("rows").get<std::size_t>();
  auto in = open_in(base.parent_path() / header.at("data").get<std::string>(),
                    std::ios::in | std::ios::binary);
  return SystemMatrix(g, rows, read_f64(in, rows * g.size()));
}

json to_json(const Stage1Diagnostics &d) {
  return {{"iterations", d.iterations},
          {"final_residual", d.final_residual},
          {"converged", d.converged},
          {"samples", d.sample_count}};
}

json to_json(const Stage2Diagnostics &d) {
  json trace = json::array();
  for (const auto &p : d.objective_trace) trace.push_back({p.iteration, p.value});
  return {{"iterations", d.iterations},
          {"final_residual", d.final_residual},
          {"converged", d.converged},
          {"initial_objective", d.initial_objective},
          {"final_objective", d.final_objective},
          {"objective_trace", trace}};
}

void write_residual_csv(const fs::path &path, const std::vector<double> &history) {
  auto out = open_out(path);
  out << "iteration,relative_residual\n";
  for (std::size_t k = 0; k < history.size(); ++k) out << k << ',' << format_double(history[k]) << '\n';
}

void write_objective_csv(const fs::path &path, const std::vector<ObjectivePoint> &trace) {
  auto out = open_out(path);
  out << "iteration,objective\n";
  for (const auto &p : trace) out << p.iteration << ',' << format_double(p.value) << '\n';
}

void write_report(const fs::path &path, const std::vector<ReportRow> &rows) {
  auto out = open_out(path);
  out << "experiment,stage,param,psnr,ssim\n";
  for (const ReportRow &r : rows)
    out << r.experiment << ',' << r.stage << ',' << r.param << ',' << format_double(r.psnr) << ','
        << format_double(r.ssim) << '\n';
}

}  // namespace mpmp::io
