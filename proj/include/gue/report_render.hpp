#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include "json.hpp"

#include "gue/report_io.hpp"

namespace gue::render {

using json = nlohmann::json;

namespace detail {

inline double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) && j[key].is_number() ? j[key].get<double>() : fallback;
}

/// Short form for human-readable output; report.json keeps full precision.
inline std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// Plain-text summary of a report.json document. Violated certificates are
/// marked with "!!"; missing sections are skipped.
inline std::string summarize(const json& rep) {
  std::ostringstream s;
  s << "GUE gap experiment report\n";
  if (rep.contains("config")) {
    const auto& c = rep["config"];
    s << "  N = " << c.value("n", 0) << ", matrices = " << c.value("num_matrices", 0)
      << ", delta = " << c.value("delta", 0.0) << ", master_seed = " << c.value("master_seed", 0ULL)
      << "\n";
  }
  if (rep.contains("pooled_gaps")) s << "  pooled gaps: " << rep["pooled_gaps"] << "\n";
  if (rep.contains("thm_main")) {
    const auto& t = rep["thm_main"];
    s << "  mean gap: " << detail::g6(detail::number_or(t, "mean_gap", 0.0)) << " (stderr "
      << detail::g6(detail::number_or(t, "mean_gap_stderr", 0.0)) << ")\n";
  }
  if (rep.contains("ks_distance_to_gm"))
    s << "  KS distance to Gaudin-Mehta: " << detail::g6(rep["ks_distance_to_gm"].get<double>())
      << "\n";
  if (rep.contains("gap_diagnostic") && rep["gap_diagnostic"].is_object())
    s << "  gap log-concavity diagnostic: "
      << (rep["gap_diagnostic"].value("consistent", false) ? "consistent" : "NOT consistent")
      << "\n";
  if (rep.contains("rigidity") && rep["rigidity"].contains("windows")) {
    for (const auto& w : rep["rigidity"]["windows"])
      s << "  rigidity m = " << w.value("m", 0) << ": sigma_hat = "
        << detail::g6(detail::number_or(w, "sigma_hat", 0.0)) << " over " << w.value("count", 0)
        << " sums" << (w.value("reportable", false) ? "" : " (too few to report)") << "\n";
    const auto& g = rep["rigidity"]["growth_exponent"];
    if (g.is_number()) s << "  sigma growth exponent vs log(2+m): " << detail::g6(g.get<double>()) << "\n";
  }
  if (rep.contains("gt") && rep["gt"].is_object())
    s << "  minor-process interlacing: " << rep["gt"].value("violations", 0) << " violations in "
      << rep["gt"].value("checks", 0) << " checks\n";

  std::size_t violated = 0, total = 0;
  std::ostringstream lines;
  if (rep.contains("bounds")) {
    for (const auto& b : rep["bounds"]) {
      ++total;
      const std::string verdict = b.value("verdict", "");
      const bool bad = verdict == "violated";
      violated += bad;
      lines << (bad ? "  !! " : "     ") << b.value("bound_name", "?") << " @ "
            << detail::g6(detail::number_or(b, "param", 0.0))
            << ": empirical " << detail::g6(detail::number_or(b, "empirical", 0.0)) << " vs bound "
            << detail::g6(detail::number_or(b, "bound", 0.0)) << " -> " << verdict << "\n";
    }
  }
  s << "  certificates: " << total - violated << "/" << total << " hold";
  if (violated) s << "  [" << violated << " VIOLATED]";
  s << "\n" << lines.str();
  return s.str();
}

/// Self-contained SVG: empirical gap histogram as bars with the limiting
/// density as a polyline on top.
inline std::string histogram_svg(const json& rep) {
  const auto& h = rep.at("histogram");
  const auto density = h.at("density").get<std::vector<double>>();
  const auto gm = h.value("gm_density", std::vector<double>{});
  const double lo = h.value("lo", 0.0);
  const double width = h.value("width", 0.1);

  constexpr double W = 640, H = 400, margin = 40;
  double ymax = 1e-12;
  for (double d : density) ymax = std::max(ymax, d);
  for (double d : gm) ymax = std::max(ymax, d);
  ymax *= 1.1;
  const double xspan = width * static_cast<double>(std::max<std::size_t>(density.size(), 1));
  auto px = [&](double x) { return margin + (x - lo) / xspan * (W - 2 * margin); };
  auto py = [&](double y) { return H - margin - y / ymax * (H - 2 * margin); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\"" << W - margin
    << "\" y2=\"" << H - margin << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
    << H - margin << "\" stroke=\"black\"/>\n";
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double x0 = lo + width * static_cast<double>(k);
    s << "<rect x=\"" << px(x0) << "\" y=\"" << py(density[k]) << "\" width=\""
      << px(x0 + width) - px(x0) << "\" height=\"" << py(0) - py(density[k])
      << "\" fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\"/>\n";
  }
  if (!gm.empty()) {
    s << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < gm.size(); ++k)
      s << px(lo + width * (static_cast<double>(k) + 0.5)) << ',' << py(gm[k]) << ' ';
    s << "\"/>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 8
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">g</text>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">renormalised gaps vs Gaudin-Mehta density</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace gue::render
