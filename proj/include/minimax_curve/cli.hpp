#pragma once

// Command-line front end: flag parsing into a RunSpec, config file
// loading, artifact writing, and exit-code policy. Kept header-only like
// the rest of the library; the binary is a two-line main.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minimax_curve/report_io.hpp"
#include "minimax_curve/verify.hpp"

namespace minimax_curve {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed invocation: one command, instance fields, output selections,
/// and solver configuration after file and flag overrides.
struct RunSpec {
  std::string command;
  std::optional<double> x0, y0, theta0, xf, yf, thetaf, tf;
  std::vector<double> tf_list;
  bool degrees = false;
  bool help = false;
  std::string json_path, csv_path, svg_path;
  std::size_t samples = 200;
  int oracle_n = 400;
  SolverConfig config{};
};

inline const char* cli_usage() {
  return
      "usage: minimax-curve <command> [flags]\n"
      "\n"
      "commands\n"
      "  solve    minimize the turn-rate bound for one instance\n"
      "  sweep    solve a list of budgets for fixed endpoints\n"
      "  verify   cross-check a solve against the fixed-bound shortest path\n"
      "  certify  solve and report the adjoint certificate\n"
      "\n"
      "instance flags (radians unless --degrees)\n"
      "  --x0 --y0 --theta0    start pose\n"
      "  --xf --yf --thetaf    goal pose\n"
      "  --tf T                duration budget (solve/verify/certify)\n"
      "  --tf-list a,b,c       ascending budgets (sweep)\n"
      "\n"
      "output flags\n"
      "  --json PATH           write the versioned JSON report\n"
      "  --csv PATH            write trajectory rows (solve/certify) or the\n"
      "                        sweep table (sweep)\n"
      "  --svg PATH            render the reported curves (not for sweep)\n"
      "  --samples N           trajectory rows in the CSV (default 200)\n"
      "\n"
      "solver flags\n"
      "  --config PATH         key = value file mirroring the solver config\n"
      "  --seed N              multistart seed\n"
      "  --random N            number of random starts\n"
      "  --threads N           worker cap (also capped by\n"
      "                        MINIMAX_CURVE_THREADS)\n"
      "  --degrees             interpret angles in degrees\n"
      "  --help                this text\n"
      "\n"
      "exit codes: 0 success, 1 infeasible instance, 2 solver failure,\n"
      "            3 usage error\n";
}

namespace detail {

inline double cli_number(const std::string& flag, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw usage_error(flag + ": expected a number, got '" + text + "'");
  return v;
}

inline long cli_integer(const std::string& flag, const std::string& text) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    throw usage_error(flag + ": expected an integer, got '" + text + "'");
  return v;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// key = value lines mirroring SolverConfig; '#' starts a comment.
inline void load_config_file(const std::string& path, SolverConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw usage_error("--config: cannot read '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw usage_error("--config: line " + std::to_string(lineno) +
                        " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const auto num = [&] { return cli_number("--config " + key, val); };
    const auto integer = [&] {
      return static_cast<int>(cli_integer("--config " + key, val));
    };
    const auto boolean = [&] {
      if (val == "true") return true;
      if (val == "false") return false;
      throw usage_error("--config " + key + ": expected true or false");
    };
    if (key == "feas_tol") cfg.feas_tol = num();
    else if (key == "opt_tol") cfg.opt_tol = num();
    else if (key == "max_outer") cfg.max_outer = integer();
    else if (key == "max_inner") cfg.max_inner = integer();
    else if (key == "penalty_growth") cfg.penalty_growth = num();
    else if (key == "pattern_grid") cfg.starts.pattern_grid = boolean();
    else if (key == "reflections") cfg.starts.reflections = boolean();
    else if (key == "random") cfg.starts.random = integer();
    else if (key == "seed") cfg.starts.seed = std::stoull(val, nullptr, 0);
    else if (key == "zero_tol") cfg.zero_tol = num();
    else if (key == "a_min") cfg.a_min = num();
    else if (key == "a_max") cfg.a_max = num();
    else if (key == "threads") cfg.threads = integer();
    else
      throw usage_error("--config: unknown key '" + key + "'");
  }
}

}  // namespace detail

inline RunSpec parse_args(const std::vector<std::string>& args) {
  RunSpec spec;
  if (args.empty()) throw usage_error("missing command");
  std::size_t i = 0;
  if (args[0] == "--help") {
    spec.help = true;
    return spec;
  }
  spec.command = args[i++];
  if (spec.command != "solve" && spec.command != "sweep" &&
      spec.command != "verify" && spec.command != "certify")
    throw usage_error("unknown command '" + spec.command + "'");

  std::optional<long> seed_flag, random_flag, threads_flag;
  std::string config_path;
  std::string seed_text;
  for (; i < args.size(); ++i) {
    const std::string& flag = args[i];
    const auto value = [&]() -> const std::string& {
      if (i + 1 >= args.size())
        throw usage_error(flag + ": missing value");
      return args[++i];
    };
    if (flag == "--help") spec.help = true;
    else if (flag == "--degrees") spec.degrees = true;
    else if (flag == "--x0") spec.x0 = detail::cli_number(flag, value());
    else if (flag == "--y0") spec.y0 = detail::cli_number(flag, value());
    else if (flag == "--theta0")
      spec.theta0 = detail::cli_number(flag, value());
    else if (flag == "--xf") spec.xf = detail::cli_number(flag, value());
    else if (flag == "--yf") spec.yf = detail::cli_number(flag, value());
    else if (flag == "--thetaf")
      spec.thetaf = detail::cli_number(flag, value());
    else if (flag == "--tf") spec.tf = detail::cli_number(flag, value());
    else if (flag == "--tf-list") {
      std::string text = value();
      std::size_t pos = 0;
      while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string tok =
            text.substr(pos, comma == std::string::npos ? std::string::npos
                                                        : comma - pos);
        if (detail::trim(tok).empty())
          throw usage_error("--tf-list: empty entry");
        spec.tf_list.push_back(detail::cli_number(flag, detail::trim(tok)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } else if (flag == "--json") spec.json_path = value();
    else if (flag == "--csv") spec.csv_path = value();
    else if (flag == "--svg") spec.svg_path = value();
    else if (flag == "--samples")
      spec.samples = std::size_t(detail::cli_integer(flag, value()));
    else if (flag == "--config") config_path = value();
    else if (flag == "--seed") seed_text = value();
    else if (flag == "--random")
      random_flag = detail::cli_integer(flag, value());
    else if (flag == "--threads")
      threads_flag = detail::cli_integer(flag, value());
    else
      throw usage_error("unknown flag '" + flag + "'");
  }
  if (spec.help) return spec;

  if (!config_path.empty()) detail::load_config_file(config_path, spec.config);
  if (!seed_text.empty()) {
    try {
      spec.config.starts.seed = std::stoull(seed_text, nullptr, 0);
    } catch (const std::exception&) {
      throw usage_error("--seed: expected an unsigned integer");
    }
  }
  if (random_flag) spec.config.starts.random = int(*random_flag);
  if (threads_flag) spec.config.threads = int(*threads_flag);
  if (spec.samples < 2) throw usage_error("--samples: need at least 2");

  const bool pose_complete = spec.x0 && spec.y0 && spec.theta0 && spec.xf &&
                             spec.yf && spec.thetaf;
  if (!pose_complete)
    throw usage_error(spec.command + ": all six pose flags are required");
  if (spec.command == "sweep") {
    if (spec.tf)
      throw usage_error("sweep: use --tf-list, not --tf");
    if (spec.tf_list.empty())
      throw usage_error("sweep: --tf-list is required");
    for (std::size_t k = 1; k < spec.tf_list.size(); ++k)
      if (!(spec.tf_list[k] > spec.tf_list[k - 1]))
        throw usage_error("sweep: --tf-list must be strictly ascending");
    if (!spec.svg_path.empty())
      throw usage_error("sweep: --svg is not supported");
  } else {
    if (!spec.tf) throw usage_error(spec.command + ": --tf is required");
    if (!spec.tf_list.empty())
      throw usage_error(spec.command + ": --tf-list is a sweep flag");
  }

  if (spec.degrees) {
    const double k = M_PI / 180.0;
    spec.theta0 = *spec.theta0 * k;
    spec.thetaf = *spec.thetaf * k;
  }
  return spec;
}

namespace detail {

inline void apply_thread_cap(SolverConfig& cfg) {
  const char* env = std::getenv("MINIMAX_CURVE_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long cap = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || cap < 1) return;
  if (cfg.threads <= 0 || cfg.threads > cap) cfg.threads = int(cap);
}

inline void write_text_file(const std::string& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out.flush())
    throw std::runtime_error("short write to '" + path + "'");
}

inline void print_solution_line(const char* label, const Solution& sol) {
  std::printf("%s a = %.10f  type = %-6s  xi = [", label, sol.a,
              sol.type_string.c_str());
  for (int i = 0; i < 5; ++i)
    std::printf("%s%.10f", i ? ", " : "", sol.program.xi[i]);
  std::printf("]\n");
}

}  // namespace detail

/// Executes a parsed run. Throws usage_error for spec-level problems; all
/// other failures are mapped to exit codes by run_cli.
inline int run(const RunSpec& spec) {
  if (spec.help) {
    std::fputs(cli_usage(), stdout);
    return 0;
  }
  SolverConfig cfg = spec.config;
  detail::apply_thread_cap(cfg);

  const OrientedPoint start{*spec.x0, *spec.y0, *spec.theta0};
  const OrientedPoint goal{*spec.xf, *spec.yf, *spec.thetaf};

  if (spec.command == "sweep") {
    const std::vector<SweepEntry> entries =
        sweep_tf(start, goal, spec.tf_list, cfg);
    bool any_ok = false;
    for (const SweepEntry& e : entries) {
      if (e.ok) {
        any_ok = true;
        std::printf("t_f = %.10f  a = %.10f  type = %s\n", e.t_f,
                    e.report.best.a, e.report.best.type_string.c_str());
      } else {
        std::printf("t_f = %.10f  failed: %s\n", e.t_f, e.error.c_str());
      }
    }
    if (!spec.csv_path.empty())
      detail::write_text_file(spec.csv_path, sweep_to_csv(entries));
    if (!spec.json_path.empty()) {
      std::string doc = "[\n";
      bool first = true;
      for (const SweepEntry& e : entries) {
        if (!e.ok) continue;
        if (!first) doc += ",\n";
        first = false;
        doc += report_to_json(e.report);
      }
      doc += "]\n";
      detail::write_text_file(spec.json_path, doc);
    }
    return any_ok ? 0 : 1;
  }

  const ProblemInstance inst{start, goal, *spec.tf};
  validate_instance(inst);
  if (feasibility_screen(inst).kind == ScreenKind::infeasible) {
    std::printf("infeasible: straight-line distance exceeds the budget\n");
    return 1;
  }

  if (spec.command == "verify") {
    const CrossCheckReport rep = md_crosscheck(inst, cfg);
    std::printf("bound  a* = %.10f\n", rep.a_star);
    std::printf("shortest path at a*: t_f* = %.10f\n", rep.t_f_star);
    if (!rep.degenerate)
      std::printf("re-solved bound at t_f*: %.10f\n", rep.a_recheck);
    for (const std::string& note : rep.notes)
      std::printf("note: %s\n", note.c_str());
    std::printf("cross-check: %s\n", rep.passed ? "PASS" : "FAIL");
    if (!spec.json_path.empty()) {
      std::string doc = "{\n  \"schema_version\": \"";
      doc += kReportSchemaVersion;
      doc += "\",\n  \"crosscheck\": {\n";
      doc += "    \"passed\": " + std::string(rep.passed ? "true" : "false") +
             ",\n";
      doc += "    \"degenerate\": " +
             std::string(rep.degenerate ? "true" : "false") + ",\n";
      doc += "    \"a_star\": " + detail::fmt10(rep.a_star) + ",\n";
      doc += "    \"t_f_star\": " + detail::fmt10(rep.t_f_star) + ",\n";
      doc += "    \"a_recheck\": " + detail::fmt10(rep.a_recheck) + ",\n";
      doc += "    \"notes\": [";
      for (std::size_t k = 0; k < rep.notes.size(); ++k)
        doc += (k ? ", " : "") +
               ("\"" + detail::json_escape(rep.notes[k]) + "\"");
      doc += "]\n  }\n}\n";
      detail::write_text_file(spec.json_path, doc);
    }
    return rep.passed ? 0 : 2;
  }

  const SolveReport report = multistart_solve(inst, cfg);
  detail::print_solution_line("best    ", report.best);
  for (const Solution& sol : report.critical) {
    if (sol.a == report.best.a && sol.type_string == report.best.type_string)
      continue;
    detail::print_solution_line("critical", sol);
  }
  std::printf("timing: %.1f ms\n", report.timing_ms);

  if (!spec.json_path.empty())
    detail::write_text_file(spec.json_path, report_to_json(report));
  if (!spec.csv_path.empty())
    detail::write_text_file(
        spec.csv_path,
        trajectory_to_csv(inst.start, report.best.program, spec.samples));
  if (!spec.svg_path.empty())
    detail::write_text_file(spec.svg_path, report_to_svg(report));

  if (spec.command == "certify") {
    const Certificate& cert = report.best.certificate;
    std::printf("certificate: rho = %.10f  phi = %.10f  h = %.10f\n",
                cert.rho, cert.phi, cert.h);
    std::printf("  sign law     : %s\n",
                cert.flags.mp_consistent ? "consistent" : "violated");
    std::printf("  ellipse law  : %s\n",
                cert.flags.ellipse_consistent ? "consistent" : "violated");
    std::printf("  filters      : %s\n",
                cert.flags.filters_passed ? "passed" : "rejected");
    for (const std::string& note : cert.flags.notes)
      std::printf("  note: %s\n", note.c_str());
    if (!cert.flags.mp_consistent || !cert.flags.ellipse_consistent)
      return 2;
  }
  return 0;
}

/// Top-level entry: argv to exit code, never throws.
inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(parse_args(args));
  } catch (const usage_error& e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), cli_usage());
    return 3;
  } catch (const input_error& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 1;
  } catch (const no_solution_error& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
}

}  // namespace minimax_curve
