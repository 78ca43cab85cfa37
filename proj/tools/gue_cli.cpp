// gue: command-line front end for the GUE gap experiments.
//
//   gue sample  --n N [--seed S] [--index T] [--matrix] [--out FILE]
//   gue gaps    --n N --matrices M [--delta D] [--seed S] [--threads K] [--out FILE]
//   gue verify  --config FILE [--seed S] [--threads K] [--out DIR]
//   gue gm      [--s-max X] [--points P] [--nodes Q] [--tol T] [--out FILE]
//   gue gt      --n N --matrices M [--delta D] [--seed S] [--threads K] [--out FILE]
//   gue report  --report FILE [--svg DIR] [--out FILE]
//
// Exit codes: 0 success, 1 operational error, 2 a certificate or convergence
// check failed.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gue/eigensolver.hpp"
#include "gue/experiments.hpp"
#include "gue/gaudin_mehta.hpp"
#include "gue/report_io.hpp"
#include "gue/report_render.hpp"
#include "gue/sampler.hpp"

namespace {

namespace fs = std::filesystem;
using namespace gue;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

struct CommonFlags {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, const std::string& out_help) {
  cmd->add_option("--seed", f.seed, "Master seed (64-bit unsigned)");
  cmd->add_option("--threads", f.threads,
                  "Worker threads; 0 = all cores. Never changes any output byte")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f.out, out_help);
}

/// Writes to the file named by `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  io::write_text(path, text);
}

int cmd_sample(std::size_t n, std::uint64_t index, bool as_matrix, const CommonFlags& f) {
  const HermitianMatrix m = sample_gue(n, SeedSpec{f.seed, index});
  std::ostringstream s;
  if (as_matrix) {
    s << "row,col,re,im\n";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        s << i << ',' << j << ',' << io::fmt17(m(i, j).real()) << ',' << io::fmt17(m(i, j).imag())
          << '\n';
  } else {
    const Spectrum spec = hermitian_eigenvalues(m);
    s << "i,lambda\n";
    for (std::size_t i = 1; i <= n; ++i) s << i << ',' << io::fmt17(spec.lambda(i)) << '\n';
  }
  emit(f.out, s.str());
  return kExitOk;
}

int cmd_gaps(std::size_t n, std::size_t matrices, double delta, const CommonFlags& f) {
  experiments::ExperimentConfig cfg;
  cfg.n = n;
  cfg.num_matrices = matrices;
  cfg.delta = delta;
  cfg.master_seed = f.seed;
  cfg.m_list.clear();
  const auto run = experiments::run_gap_experiment(cfg, f.threads);
  emit(f.out, io::gaps_csv(run.gaps));
  return kExitOk;
}

int cmd_verify(const std::string& config_path, const CommonFlags& f) {
  auto cfg = io::load_config(config_path);
  if (f.seed_given) cfg.master_seed = f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  fs::create_directories(cfg.out_dir);  // fail before the long run, not after

  const auto start = std::chrono::steady_clock::now();
  const auto run = experiments::run_gap_experiment(cfg, f.threads);
  const auto report = experiments::build_report(cfg, run, f.threads);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  io::write_artifacts(report, run.gaps, cfg.out_dir);
  // Timing lives outside report.json so the report stays reproducible.
  io::write_text(fs::path(cfg.out_dir) / "timing.json",
                 io::json{{"wall_seconds", seconds}, {"threads", resolve_threads(f.threads)}}.dump(2) +
                     "\n");

  std::cout << render::summarize(io::to_json(report));
  return report.all_pass() ? kExitOk : kExitViolation;
}

int cmd_gm(double s_max, std::size_t points, std::size_t nodes, double tol, const CommonFlags& f) {
  if (!(s_max >= 0.0)) throw std::invalid_argument("--s-max must be >= 0");
  if (s_max > 0.0 && points < 2) throw std::invalid_argument("--points must be >= 2");
  const std::size_t rows = s_max == 0.0 ? 1 : points;

  std::vector<gaudin_mehta::FredholmEvaluation> evals(rows);
  parallel_for(rows, f.threads, [&](std::size_t k) {
    const double s = rows == 1 ? 0.0 : s_max * static_cast<double>(k) / static_cast<double>(rows - 1);
    evals[k] = gaudin_mehta::fredholm_E(s, nodes, tol);
  });

  std::ostringstream out;
  out << "s,E,F,p\n";
  int status = kExitOk;
  for (const auto& ev : evals) {
    if (!ev.converged) {
      std::cerr << "gm: not converged at s = " << io::fmt17(ev.s) << " (doubling delta "
                << io::fmt17(ev.doubling_delta) << ")\n";
      status = kExitViolation;
    }
    if (ev.e_second < gaudin_mehta::kDensityFloor) {
      std::cerr << "gm: density below numerical floor at s = " << io::fmt17(ev.s) << "\n";
      status = kExitViolation;
    }
    out << io::fmt17(ev.s) << ',' << io::fmt17(ev.e_value) << ','
        << io::fmt17(gaudin_mehta::cdf_from(ev)) << ','
        << io::fmt17(std::max(ev.e_second, 0.0)) << '\n';
  }
  emit(f.out, out.str());
  return status;
}

int cmd_gt(std::size_t n, std::size_t matrices, double delta, const CommonFlags& f) {
  const auto gt = experiments::gt_experiment(n, matrices, f.seed, delta, f.threads);
  emit(f.out, io::gt_csv(gt));
  std::cerr << "gt: " << gt.violations.size() << " interlacing violations in " << gt.checks
            << " checks over " << matrices << " matrices\n";
  for (const auto& v : gt.violations)
    std::cerr << "  matrix " << v.matrix_index << " (seed " << v.seed.master_seed << "/"
              << v.seed.task_index << "): k = " << v.k << ", j = " << v.j << "\n";
  if (gt.diagnostic)
    std::cerr << "gt: functional log-concavity "
              << (gt.diagnostic->consistent ? "consistent" : "NOT consistent") << "\n";
  return gt.violations.empty() ? kExitOk : kExitViolation;
}

int cmd_report(const std::string& path, const std::string& svg_dir, const CommonFlags& f) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report " + path);
  io::json rep;
  in >> rep;
  emit(f.out, render::summarize(rep));
  if (!svg_dir.empty()) {
    fs::create_directories(svg_dir);
    io::write_text(fs::path(svg_dir) / "gap_histogram.svg", render::histogram_svg(rep));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GUE eigengap experiments and Gaudin-Mehta numerics"};
  app.require_subcommand(1);

  CommonFlags f;

  std::size_t n = 0, matrices = 0, index = 0;
  double delta = 0.3;
  bool as_matrix = false;
  auto* sample = app.add_subcommand("sample", "Sample one GUE matrix; print its spectrum or entries");
  sample->add_option("--n", n, "Matrix size")->required()->check(CLI::PositiveNumber);
  sample->add_option("--index", index, "Task index within the seed's stream family");
  sample->add_flag("--matrix", as_matrix, "Emit entries (row,col,re,im) instead of eigenvalues");
  add_common(sample, f, "Output CSV file (default stdout)");

  auto* gaps = app.add_subcommand("gaps", "Pooled renormalised bulk gaps as CSV");
  gaps->add_option("--n", n, "Matrix size")->required();
  gaps->add_option("--matrices", matrices, "Number of matrices")->required();
  gaps->add_option("--delta", delta, "Bulk fraction in (0, 0.5)");
  add_common(gaps, f, "Output CSV file (default stdout)");

  std::string config_path;
  auto* verify = app.add_subcommand("verify", "Run the full verification suite from a JSON config");
  verify->add_option("--config,config", config_path, "Experiment config (JSON)")->required();
  add_common(verify, f, "Output directory (overrides out_dir)");

  double s_max = 6.0, tol = gaudin_mehta::kConvergenceTolerance;
  std::size_t points = 200, nodes = gaudin_mehta::kDefaultNodes;
  auto* gm = app.add_subcommand("gm", "Tabulate E, F and p of the Gaudin-Mehta gap law");
  gm->add_option("--s-max", s_max, "Largest gap length (0 gives a single row)");
  gm->add_option("--points", points, "Grid points on [0, s-max]");
  gm->add_option("--nodes", nodes, "Gauss-Legendre nodes (>= 5)");
  gm->add_option("--tol", tol, "Node-doubling convergence tolerance");
  add_common(gm, f, "Output CSV file (default stdout)");

  auto* gt = app.add_subcommand("gt", "Interlacing check over all principal minors");
  gt->add_option("--n", n, "Matrix size")->required();
  gt->add_option("--matrices", matrices, "Number of matrices")->required();
  gt->add_option("--delta", delta, "Bulk fraction for the pooled functional");
  add_common(gt, f, "Output CSV file (default stdout)");

  std::string report_path, svg_dir;
  auto* report = app.add_subcommand("report", "Summarise a report.json; optional SVG histogram");
  report->add_option("--report,report", report_path, "report.json from verify")->required();
  report->add_option("--svg", svg_dir, "Directory for gap_histogram.svg");
  add_common(report, f, "Summary output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  for (auto* cmd : {sample, gaps, verify, gm, gt, report})
    if (cmd->parsed() && cmd->count("--seed") > 0) f.seed_given = true;

  try {
    if (sample->parsed()) return cmd_sample(n, index, as_matrix, f);
    if (gaps->parsed()) return cmd_gaps(n, matrices, delta, f);
    if (verify->parsed()) return cmd_verify(config_path, f);
    if (gm->parsed()) return cmd_gm(s_max, points, nodes, tol, f);
    if (gt->parsed()) return cmd_gt(n, matrices, delta, f);
    if (report->parsed()) return cmd_report(report_path, svg_dir, f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
