// wulff: simulate, verify, check-rw, approx, regularize.
// Exit status: 0 success, 2 breakdown before tEnd, 1 error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "criteria.hpp"
#include "json.hpp"
#include "wulff/config.hpp"
#include "wulff/distance.hpp"
#include "wulff/flow.hpp"
#include "wulff/morphology.hpp"
#include "wulff/output.hpp"
#include "wulff/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wulff;

namespace {

constexpr int kOk = 0, kError = 1, kBreakdown = 2;

std::string padded(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", n);
  return buf;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// A bare anisotropy literal or a document with an "anisotropy" member.
Anisotropy read_anisotropy(const std::string& path) {
  const json j = read_json(path);
  if (j.is_object() && j.contains("anisotropy")) return anisotropy_from_json(j.at("anisotropy"));
  return anisotropy_from_json(j);
}

// The config as stored in the manifest: file paths made absolute so the
// manifest can be re-run from any directory.
json portable_config(const RunConfig& c) {
  json j = c.source;
  if (j.contains("initial") && j["initial"].contains("path")) j["initial"]["path"] = fs::absolute(c.initial.path).string();
  return j;
}

struct SnapshotWriter {
  fs::path dir;
  const std::set<std::string>& formats;
  std::vector<std::string> files;
  std::vector<SvgLayer> layers;

  void write(int n, double t, const SetMask& m, const Grid2D& d) {
    const std::string tag = padded(n);
    if (formats.count("pgm")) {
      const auto p = dir / ("mask_" + tag + ".pgm");
      write_pgm(p.string(), m);
      files.push_back(p.filename().string());
    }
    const auto contours = extract_contours(d);
    if (formats.count("csv")) {
      const auto p = dir / ("contours_" + tag + ".csv");
      write_text(p.string(), contours_csv(contours));
      files.push_back(p.filename().string());
    }
    if (formats.count("grids")) {
      const auto p = dir / ("distance_" + tag + ".wfg");
      write_grid(p.string(), d);
      files.push_back(p.filename().string());
    }
    char label[32];
    std::snprintf(label, sizeof label, "t = %.4g", t);
    layers.push_back({label, contours});
  }
};

int cmd_simulate(const std::string& config_path, const std::string& out_override, bool quiet) {
  const RunConfig c = load_run_config(config_path);
  if (!c.source.at("flow").contains("tEnd")) throw ConfigError("flow.tEnd: missing");
  const fs::path dir = out_override.empty() ? fs::path(c.output.directory) : fs::path(out_override);
  fs::create_directories(dir);
  const FlowConfig resolved = c.flow.resolve(c.grid.dx);
  const int total = static_cast<int>(std::floor(resolved.t_end / resolved.h + 1e-9));
  const int cadence = c.output.cadence;

  SnapshotWriter snaps{dir, c.output.formats, {}, {}};
  int last_written = -1;
  const StepObserver observer = [&](const FlowStep& s, const SetMask& m, const Grid2D& d) {
    if (s.n == 0 || (cadence > 0 && s.n % cadence == 0)) {
      snaps.write(s.n, s.t, m, d);
      last_written = s.n;
    }
    if (!quiet && total >= 10 && s.n > 0 && s.n % (total / 10) == 0) {
      std::fprintf(stderr, "step %d/%d  t = %.4g  area = %.5g\n", s.n, total, s.t, s.area);
    }
  };
  const auto level = initial_level(c);
  const FlowTrace tr = level ? evolve(*level, c.anisotropy, c.forcing, c.flow, observer)
                             : evolve(initial_mask(c), c.anisotropy, c.forcing, c.flow, observer);
  for (const std::string& w : tr.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!tr.snapshots.empty() && tr.last().n != last_written) {
    snaps.write(tr.last().n, tr.last().t, tr.last().mask, tr.last().distance);
  }

  std::vector<std::string> outputs{"trace.csv"};
  write_text((dir / "trace.csv").string(), trace_csv(tr));
  if (c.output.formats.count("svg") && !snaps.layers.empty()) {
    // At most eight layers, evenly spread, always with the first and last.
    std::vector<SvgLayer> picked;
    const std::size_t n = snaps.layers.size(), keep = std::min<std::size_t>(n, 8);
    for (std::size_t k = 0; k < keep; ++k) picked.push_back(snaps.layers[keep == 1 ? 0 : k * (n - 1) / (keep - 1)]);
    write_text((dir / "contours.svg").string(), svg_overlay(c.grid, picked, c.anisotropy));
    outputs.push_back("contours.svg");
  }
  outputs.insert(outputs.end(), snaps.files.begin(), snaps.files.end());

  const json cfg = portable_config(c);
  json seeds = json::object();
  if (c.forcing.g1.kind == TimePath::Kind::kBrownian) seeds["g1"] = c.forcing.g1.seed;
  json manifest = {{"configHash", config_hash(cfg)},
                   {"version", kVersion},
                   {"config", cfg},
                   {"seeds", seeds},
                   {"workers", worker_count()},
                   {"steps", tr.steps.size() - 1},
                   {"completed", tr.completed()},
                   {"warnings", tr.warnings},
                   {"outputs", outputs}};
  if (tr.breakdown) manifest["breakdown"] = *tr.breakdown;
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  if (tr.breakdown) {
    std::fprintf(stderr, "breakdown at t = %.6g: %s\n", tr.steps.back().t, tr.breakdown->c_str());
    return kBreakdown;
  }
  if (!quiet) std::fprintf(stderr, "completed %d steps, outputs in %s\n", total, dir.string().c_str());
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& fault, const std::vector<int>& only,
               const std::string& report_path, bool quiet) {
  acceptance::Options opt;
  opt.suite = suite == "fast" ? acceptance::Suite::kFast : acceptance::Suite::kFull;
  opt.no_projection = fault == "no-projection";
  std::vector<acceptance::Result> results;
  for (int id = 1; id <= acceptance::kCriterionCount; ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    results.push_back(acceptance::run(id, opt));
    if (!quiet) std::fprintf(stderr, "%s\n", acceptance::line(results.back()).c_str());
  }
  const json rep = acceptance::report(results, opt);
  if (!report_path.empty()) write_text(report_path, rep.dump(2) + "\n");
  std::cout << rep.dump(2) << std::endl;
  return rep.at("passed").get<bool>() ? kOk : kError;
}

int cmd_check_rw(const std::string& mask_path, const std::string& aniso_path, double R, double dx, int samples) {
  const SetMask m = read_pgm(mask_path, dx);
  const Anisotropy a = read_anisotropy(aniso_path);
  std::cout << json::parse(check_rw(m, a, R, samples).to_json()).dump(2) << std::endl;
  return kOk;
}

int cmd_approx(const std::string& config_path, const std::string& out_override) {
  const RunConfig c = load_run_config(config_path);
  if (c.anisotropy.kind() != AnisotropyKind::kPolygon) throw ConfigError("anisotropy: approx needs a polygon");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon: approx needs a positive epsilon");
  const double R = c.flow.R0;
  if (!(R > 0.0)) throw ConfigError("flow.R0: approx needs the RW radius R0");
  const fs::path dir = out_override.empty() ? fs::path(c.output.directory) : fs::path(out_override);
  fs::create_directories(dir);
  const SetMask m = initial_mask(c);
  const RegularizedAnisotropy reg = regularize(c.anisotropy, c.epsilon);
  const ApproxResult res = approximate_crystal(m, c.anisotropy, reg.result, R);
  write_pgm((dir / "approx.pgm").string(), res.mask);
  write_text((dir / "approx.svg").string(),
             svg_overlay(c.grid, {{"datum", extract_contour(m, c.anisotropy)}, {"approximation", extract_contour(res.mask, reg.result)}},
                         reg.result));
  const double dh = hausdorff_boundary(res.mask, m);
  const json report = {{"epsilon", c.epsilon},
                       {"R", R},
                       {"hausdorff", dh},
                       {"wulffHausdorff", reg.hausdorff},
                       {"bound", R * reg.hausdorff + 2 * c.grid.dx},
                       {"inputCheck", json::parse(res.input_check.to_json())},
                       {"outputCheck", json::parse(res.output_check.to_json())},
                       {"outputs", {"approx.pgm", "approx.svg", "approx.json"}}};
  write_text((dir / "approx.json").string(), report.dump(2) + "\n");
  std::cout << report.dump(2) << std::endl;
  return kOk;
}

int cmd_regularize(const std::string& aniso_path, double eps, const std::string& out_dir, int samples) {
  const Anisotropy a = read_anisotropy(aniso_path);
  const RegularizedAnisotropy reg = regularize(a, eps, samples);
  fs::create_directories(out_dir);
  write_text((fs::path(out_dir) / "anisotropy.json").string(), anisotropy_to_json(reg.result).dump() + "\n");
  char label[32];
  std::snprintf(label, sizeof label, "W_eps, eps = %g", eps);
  write_text((fs::path(out_dir) / "wulff.svg").string(), svg_wulff_pair(a, reg.result, label));
  const json report = {{"epsilon", eps},
                       {"samples", reg.mollifier_samples},
                       {"kernelHalfWidth", reg.kernel_half_width},
                       {"containmentScale", reg.containment_scale},
                       {"wulffHausdorff", reg.hausdorff},
                       {"outputs", {"anisotropy.json", "wulff.svg"}}};
  std::cout << report.dump(2) << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic and crystalline curvature flow by the implicit variational scheme"};
  app.require_subcommand(1);
  int workers = 0;
  bool quiet = false;
  app.add_option("--workers", workers, "worker threads (default: WULFF_WORKERS or 1)")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "no progress output");

  std::string config, out, suite, fault, report, mask, aniso;
  double R = 0.0, dx = 1.0 / 64, eps = 0.0;
  int samples = 512, reg_samples = 4096;

  auto* sim = app.add_subcommand("simulate", "run a flow from a JSON configuration (or a manifest)");
  sim->add_option("config", config, "configuration file")->required();
  sim->add_option("-o,--out", out, "output directory (default: output.directory)");

  auto* ver = app.add_subcommand("verify", "run the acceptance criteria and print a JSON report");
  ver->add_option("suite", suite, "fast or full")->required()->check(CLI::IsMember({"fast", "full"}));
  ver->add_option("--inject-fault", fault, "fault injection")->check(CLI::IsMember({"no-projection"}));
  ver->add_option("--report", report, "also write the report to this file");
  std::vector<int> only;
  ver->add_option("--only", only, "run only these criteria (repeatable)")
      ->check(CLI::Range(1, acceptance::kCriterionCount));

  auto* rw = app.add_subcommand("check-rw", "check the RW condition of a PGM mask");
  rw->add_option("mask", mask, "PGM mask")->required();
  rw->add_option("anisotropy", aniso, "anisotropy JSON")->required();
  rw->add_option("R", R, "radius")->required()->check(CLI::PositiveNumber);
  rw->add_option("--dx", dx, "grid spacing of the mask")->check(CLI::PositiveNumber);
  rw->add_option("--samples", samples, "connectivity sample centers")->check(CLI::PositiveNumber);

  auto* ap = app.add_subcommand("approx", "smooth approximation of a crystalline datum");
  ap->add_option("config", config, "configuration with a polygon anisotropy, epsilon and flow.R0")->required();
  ap->add_option("-o,--out", out, "output directory (default: output.directory)");

  auto* rg = app.add_subcommand("regularize", "regularize an anisotropy");
  rg->add_option("anisotropy", aniso, "anisotropy JSON")->required();
  rg->add_option("eps", eps, "epsilon")->required()->check(CLI::PositiveNumber);
  rg->add_option("-o,--out", out, "output directory (default: .)");
  rg->add_option("--samples", reg_samples, "angular samples")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }
  if (workers > 0) set_worker_count(workers);

  try {
    if (*sim) return cmd_simulate(config, out, quiet);
    if (*ver) return cmd_verify(suite, fault, only, report, quiet);
    if (*rw) return cmd_check_rw(mask, aniso, R, dx, samples);
    if (*ap) return cmd_approx(config, out);
    if (*rg) return cmd_regularize(aniso, eps, out.empty() ? "." : out, reg_samples);
  } catch (const RegularityError& e) {
    std::fprintf(stderr, "error: %s\n%s\n", e.what(), e.report.to_json().c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return kError;
}
