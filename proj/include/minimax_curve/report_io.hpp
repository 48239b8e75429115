#pragma once

// Report serialization: a versioned JSON document, trajectory and sweep
// CSV tables, and an SVG rendering of the reported curves. The JSON
// writer is hand-rolled so the byte layout is deterministic (stable field
// order, fixed 10-decimal output); parsing uses nlohmann::json and
// restores every schema-visible field.

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "minimax_curve/optimizer.hpp"

namespace minimax_curve {

inline constexpr const char* kReportSchemaVersion = "minimax-curve/1";

namespace detail {

/// Fixed-point decimal with exactly ten digits after the point; negative
/// zero and non-finite values are normalized so output stays valid JSON.
inline std::string fmt10(double v) {
  if (!std::isfinite(v)) v = 0.0;
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10f", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline void append_solution_json(std::string& out, const Solution& sol,
                                 const std::string& pad) {
  out += pad + "{\n";
  out += pad + "  \"a\": " + fmt10(sol.a) + ",\n";
  out += pad + "  \"type\": \"" + json_escape(sol.type_string) + "\",\n";
  out += pad + "  \"xi\": [";
  for (int i = 0; i < 5; ++i)
    out += (i ? ", " : "") + fmt10(sol.program.xi[i]);
  out += "],\n";
  out += pad + "  \"residual_norm\": " + fmt10(sol.residual_norm) + ",\n";
  const Certificate& c = sol.certificate;
  out += pad + "  \"certificate\": {\n";
  out += pad + "    \"rho\": " + fmt10(c.rho) + ",\n";
  out += pad + "    \"phi\": " + fmt10(c.phi) + ",\n";
  out += pad + "    \"h\": " + fmt10(c.h) + ",\n";
  out += pad + "    \"flags\": {\n";
  out += pad + "      \"mp_consistent\": " +
         std::string(c.flags.mp_consistent ? "true" : "false") + ",\n";
  out += pad + "      \"ellipse_consistent\": " +
         std::string(c.flags.ellipse_consistent ? "true" : "false") + ",\n";
  out += pad + "      \"filters_passed\": " +
         std::string(c.flags.filters_passed ? "true" : "false") + ",\n";
  out += pad + "      \"notes\": [";
  for (std::size_t i = 0; i < c.flags.notes.size(); ++i)
    out += (i ? ", " : "") + ("\"" + json_escape(c.flags.notes[i]) + "\"");
  out += "]\n";
  out += pad + "    }\n";
  out += pad + "  }\n";
  out += pad + "}";
}

}  // namespace detail

/// Serializes a report to the versioned JSON schema. Field order and
/// number formatting are fixed, so equal reports serialize to equal bytes.
inline std::string report_to_json(const SolveReport& rep) {
  using detail::fmt10;
  std::string out = "{\n";
  out += "  \"schema_version\": \"" + std::string(kReportSchemaVersion) +
         "\",\n";
  out += "  \"instance\": {\n";
  out += "    \"x0\": " + fmt10(rep.instance.start.x) + ",\n";
  out += "    \"y0\": " + fmt10(rep.instance.start.y) + ",\n";
  out += "    \"theta0\": " + fmt10(rep.instance.start.theta) + ",\n";
  out += "    \"xf\": " + fmt10(rep.instance.goal.x) + ",\n";
  out += "    \"yf\": " + fmt10(rep.instance.goal.y) + ",\n";
  out += "    \"thetaf\": " + fmt10(rep.instance.goal.theta) + ",\n";
  out += "    \"tf\": " + fmt10(rep.instance.t_f) + "\n";
  out += "  },\n";
  const SolverConfig& c = rep.config;
  out += "  \"config\": {\n";
  out += "    \"feas_tol\": " + fmt10(c.feas_tol) + ",\n";
  out += "    \"opt_tol\": " + fmt10(c.opt_tol) + ",\n";
  out += "    \"max_outer\": " + std::to_string(c.max_outer) + ",\n";
  out += "    \"max_inner\": " + std::to_string(c.max_inner) + ",\n";
  out += "    \"penalty_growth\": " + fmt10(c.penalty_growth) + ",\n";
  out += "    \"pattern_grid\": " +
         std::string(c.starts.pattern_grid ? "true" : "false") + ",\n";
  out += "    \"reflections\": " +
         std::string(c.starts.reflections ? "true" : "false") + ",\n";
  out += "    \"random\": " + std::to_string(c.starts.random) + ",\n";
  out += "    \"seed\": \"" + std::to_string(c.starts.seed) + "\",\n";
  out += "    \"zero_tol\": " + fmt10(c.zero_tol) + ",\n";
  out += "    \"a_min\": " + fmt10(c.a_min) + ",\n";
  out += "    \"a_max\": " + fmt10(c.a_max) + ",\n";
  out += "    \"threads\": " + std::to_string(c.threads) + "\n";
  out += "  },\n";
  out += "  \"best\":\n";
  detail::append_solution_json(out, rep.best, "  ");
  out += ",\n  \"critical\": [\n";
  for (std::size_t i = 0; i < rep.critical.size(); ++i) {
    detail::append_solution_json(out, rep.critical[i], "    ");
    if (i + 1 < rep.critical.size()) out += ",";
    out += "\n";
  }
  out += "  ],\n";
  out += "  \"timing_ms\": " + fmt10(rep.timing_ms) + "\n";
  out += "}\n";
  return out;
}

namespace detail {

inline Solution solution_from_json(const nlohmann::json& j) {
  Solution sol;
  sol.a = j.at("a").get<double>();
  sol.type_string = j.at("type").get<std::string>();
  const auto& xi = j.at("xi");
  if (xi.size() != 5)
    throw input_error("report_from_json: xi must have five entries");
  for (int i = 0; i < 5; ++i) sol.program.xi[i] = xi[i].get<double>();
  sol.program.a = sol.a;
  sol.residual_norm = j.at("residual_norm").get<double>();
  const auto& cert = j.at("certificate");
  sol.certificate.rho = cert.at("rho").get<double>();
  sol.certificate.phi = cert.at("phi").get<double>();
  sol.certificate.h = cert.at("h").get<double>();
  const auto& flags = cert.at("flags");
  sol.certificate.flags.mp_consistent =
      flags.at("mp_consistent").get<bool>();
  sol.certificate.flags.ellipse_consistent =
      flags.at("ellipse_consistent").get<bool>();
  sol.certificate.flags.filters_passed =
      flags.at("filters_passed").get<bool>();
  for (const auto& note : flags.at("notes"))
    sol.certificate.flags.notes.push_back(note.get<std::string>());
  return sol;
}

}  // namespace detail

/// Parses the JSON schema back into a report. Only schema-visible fields
/// are restored; solver scratch (sampled multipliers, start bookkeeping)
/// is not part of the document.
inline SolveReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("report_from_json: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<std::string>() != kReportSchemaVersion)
      throw input_error("report_from_json: unsupported schema version");
    SolveReport rep;
    const auto& inst = j.at("instance");
    rep.instance.start = {inst.at("x0").get<double>(),
                          inst.at("y0").get<double>(),
                          inst.at("theta0").get<double>()};
    rep.instance.goal = {inst.at("xf").get<double>(),
                         inst.at("yf").get<double>(),
                         inst.at("thetaf").get<double>()};
    rep.instance.t_f = inst.at("tf").get<double>();
    const auto& cfg = j.at("config");
    rep.config.feas_tol = cfg.at("feas_tol").get<double>();
    rep.config.opt_tol = cfg.at("opt_tol").get<double>();
    rep.config.max_outer = cfg.at("max_outer").get<int>();
    rep.config.max_inner = cfg.at("max_inner").get<int>();
    rep.config.penalty_growth = cfg.at("penalty_growth").get<double>();
    rep.config.starts.pattern_grid = cfg.at("pattern_grid").get<bool>();
    rep.config.starts.reflections = cfg.at("reflections").get<bool>();
    rep.config.starts.random = cfg.at("random").get<int>();
    rep.config.starts.seed =
        std::stoull(cfg.at("seed").get<std::string>());
    rep.config.zero_tol = cfg.at("zero_tol").get<double>();
    rep.config.a_min = cfg.at("a_min").get<double>();
    rep.config.a_max = cfg.at("a_max").get<double>();
    rep.config.threads = cfg.at("threads").get<int>();
    rep.best = detail::solution_from_json(j.at("best"));
    for (const auto& s : j.at("critical"))
      rep.critical.push_back(detail::solution_from_json(s));
    rep.timing_ms = j.at("timing_ms").get<double>();
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("report_from_json: ") + e.what());
  }
}

/// Trajectory table of the program at n uniformly spaced times.
inline std::string trajectory_to_csv(const OrientedPoint& start,
                                     const ArcProgram& prog, std::size_t n) {
  const std::vector<TrajectorySample> samples =
      sample_program(start, prog, n);
  std::string out = "t,x,y,theta,u\n";
  for (const TrajectorySample& s : samples) {
    out += detail::fmt10(s.t) + "," + detail::fmt10(s.state.x) + "," +
           detail::fmt10(s.state.y) + "," + detail::fmt10(s.state.theta) +
           "," + detail::fmt10(s.u) + "\n";
  }
  return out;
}

/// Sweep summary table; entries that failed keep their budget column and
/// report a dash pair so row count always matches the requested list.
inline std::string sweep_to_csv(const std::vector<SweepEntry>& entries) {
  std::string out = "t_f,a,type\n";
  for (const SweepEntry& e : entries) {
    out += detail::fmt10(e.t_f) + ",";
    if (e.ok)
      out += detail::fmt10(e.report.best.a) + "," +
             e.report.best.type_string;
    else
      out += "-,-";
    out += "\n";
  }
  return out;
}

namespace detail {

struct SvgBounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  bool any = false;
  void add(double x, double y) {
    if (!any) {
      min_x = max_x = x;
      min_y = max_y = y;
      any = true;
      return;
    }
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }
};

inline std::string svg_num(double v) {
  if (!std::isfinite(v)) v = 0.0;
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

/// Heading arrow at a pose: a shaft plus a solid head, sized to the scene.
inline std::string svg_arrow(const OrientedPoint& p, double len,
                             const char* color) {
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const double tip_x = p.x + len * c, tip_y = p.y + len * s;
  const double head = 0.35 * len;
  const double bx = tip_x - head * c, by = tip_y - head * s;
  const double px = -s, py = c;
  std::string out;
  out += "  <line x1=\"" + svg_num(p.x) + "\" y1=\"" + svg_num(-p.y) +
         "\" x2=\"" + svg_num(tip_x) + "\" y2=\"" + svg_num(-tip_y) +
         "\" stroke=\"" + color + "\" stroke-width=\"" +
         svg_num(0.18 * head) + "\"/>\n";
  out += "  <polygon points=\"" + svg_num(tip_x) + "," + svg_num(-tip_y) +
         " " + svg_num(bx + 0.5 * head * px) + "," +
         svg_num(-(by + 0.5 * head * py)) + " " +
         svg_num(bx - 0.5 * head * px) + "," +
         svg_num(-(by - 0.5 * head * py)) + "\" fill=\"" + color + "\"/>\n";
  return out;
}

}  // namespace detail

/// SVG 1.1 rendering: heading arrows for the two endpoint poses, every
/// reported solution as one polyline path (dotted), and the best solution
/// drawn solid. The y axis is flipped so the picture matches plane
/// coordinates.
inline std::string report_to_svg(const SolveReport& rep,
                                 std::size_t samples_per_curve = 256) {
  std::vector<std::vector<TrajectorySample>> curves;
  curves.reserve(rep.critical.size());
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < rep.critical.size(); ++i) {
    curves.push_back(sample_program(rep.instance.start,
                                    rep.critical[i].program,
                                    samples_per_curve));
    if (rep.critical[i].a == rep.best.a &&
        rep.critical[i].type_string == rep.best.type_string)
      best_index = i;
  }
  if (curves.empty()) {
    curves.push_back(
        sample_program(rep.instance.start, rep.best.program,
                       samples_per_curve));
  }

  detail::SvgBounds bb;
  for (const auto& curve : curves)
    for (const TrajectorySample& s : curve) bb.add(s.state.x, -s.state.y);
  bb.add(rep.instance.start.x, -rep.instance.start.y);
  bb.add(rep.instance.goal.x, -rep.instance.goal.y);
  double w = bb.max_x - bb.min_x, h = bb.max_y - bb.min_y;
  const double diag = std::max(std::hypot(w, h), 1e-6);
  const double margin = 0.12 * diag;
  const double arrow = 0.08 * diag;
  bb.min_x -= margin;
  bb.min_y -= margin;
  w += 2.0 * margin;
  h += 2.0 * margin;

  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      "viewBox=\"" +
      detail::svg_num(bb.min_x) + " " + detail::svg_num(bb.min_y) + " " +
      detail::svg_num(w) + " " + detail::svg_num(h) +
      "\" width=\"640\" height=\"" +
      detail::svg_num(640.0 * h / std::max(w, 1e-9)) + "\">\n";
  out += "  <rect x=\"" + detail::svg_num(bb.min_x) + "\" y=\"" +
         detail::svg_num(bb.min_y) + "\" width=\"" + detail::svg_num(w) +
         "\" height=\"" + detail::svg_num(h) + "\" fill=\"white\"/>\n";

  const double stroke = 0.008 * diag;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const bool is_best = i == best_index;
    std::string d = "M";
    for (const TrajectorySample& s : curves[i])
      d += " " + detail::svg_num(s.state.x) + " " + detail::svg_num(-s.state.y);
    out += "  <path d=\"" + d + "\" fill=\"none\" stroke=\"" +
           (is_best ? "#c62828" : "#607d8b") + "\" stroke-width=\"" +
           detail::svg_num(is_best ? 1.6 * stroke : stroke) + "\"";
    if (!is_best)
      out += " stroke-dasharray=\"" + detail::svg_num(2.5 * stroke) + " " +
             detail::svg_num(2.5 * stroke) + "\"";
    out += "/>\n";
  }
  out += detail::svg_arrow(rep.instance.start, arrow, "#1b5e20");
  out += detail::svg_arrow(rep.instance.goal, arrow, "#0d47a1");
  out += "</svg>\n";
  return out;
}

}  // namespace minimax_curve
