#include "seqrd/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "detail/format.hpp"
#include "seqrd/boundary.hpp"
#include "seqrd/model.hpp"
#include "seqrd/planner.hpp"

namespace seqrd::cli {

namespace {

using detail::fmt17;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("seqrd", sink);
  log->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("SEQRD_LOG")) {
    const std::string value(env);
    if (value == "error") {
      level = spdlog::level::err;
    } else if (value == "debug") {
      level = spdlog::level::debug;
    } else if (value != "info") {
      log->warn("SEQRD_LOG must be error, info or debug; using info");
    }
  }
  log->set_level(level);
  return log;
}

ModelSpec resolve_model(const std::string& name) {
  if (name == "symmetric-channel") return build_symmetric_channel();
  if (name == "kelly") return build_kelly();
  if (!std::filesystem::exists(name)) {
    throw UsageError("unknown model '" + name + "': expected symmetric-channel, kelly or a model file");
  }
  return load_model(name);
}

Units parse_units(const std::string& s) {
  if (s == "nats") return Units::Nats;
  if (s == "bits") return Units::Bits;
  throw UsageError("--units must be nats or bits");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

struct CommonArgs {
  std::string model = "symmetric-channel";
  int horizon = 0;
  std::uint64_t seed = 0;
  double tol_inner = 1e-9;
  double tol_outer = 1e-7;
  int max_inner = 10000;
  int max_outer = 1000;
  std::string units = "nats";
  std::string init = "auto";
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--model", a.model, "symmetric-channel, kelly or a model file")->capture_default_str();
  cmd->add_option("--horizon", a.horizon, "override the model horizon");
  cmd->add_option("--seed", a.seed, "seed for the initial policy")->capture_default_str();
  cmd->add_option("--tol-inner", a.tol_inner, "per-step convergence tolerance")->capture_default_str();
  cmd->add_option("--tol-outer", a.tol_outer, "outer convergence tolerance")->capture_default_str();
  cmd->add_option("--max-inner", a.max_inner, "per-step iteration cap")->capture_default_str();
  cmd->add_option("--max-outer", a.max_outer, "outer iteration cap")->capture_default_str();
  cmd->add_option("--units", a.units, "rate units in output: nats or bits")->capture_default_str();
  cmd->add_option("--init", a.init, "starting policy: random, filter (needs |M| = |W|) or auto")
      ->check(CLI::IsMember({"auto", "random", "filter"}))
      ->capture_default_str();
  cmd->add_option("--out", a.out, "output file");
}

ModelSpec model_from(const CommonArgs& a) {
  ModelSpec spec = resolve_model(a.model);
  if (a.horizon < 0) throw UsageError("--horizon must be positive");
  if (a.horizon > 0) spec.horizon = a.horizon;
  return spec;
}

PlanOptions plan_options(const CommonArgs& a) {
  if (!(a.tol_inner > 0.0) || !(a.tol_outer > 0.0)) throw UsageError("tolerances must be positive");
  if (a.max_inner < 1 || a.max_outer < 1) throw UsageError("iteration caps must be >= 1");
  PlanOptions opts;
  opts.inner.tol = a.tol_inner;
  opts.inner.max_iters = a.max_inner;
  opts.outer_tol = a.tol_outer;
  opts.max_outer_iters = a.max_outer;
  opts.seed = a.seed;
  return opts;
}

// "auto" picks the filter start only where the caller asks for it.
std::optional<Policy> starting_policy(const CommonArgs& a, const ModelSpec& spec, bool filter_by_default) {
  const bool filter = a.init == "filter" || (a.init == "auto" && filter_by_default);
  if (!filter) return std::nullopt;
  if (spec.num_mem != spec.num_world) throw UsageError("--init filter needs num_mem == num_world");
  return filter_initial_policy(spec);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);

  CLI::App app{"Bounded planning in passive POMDPs and memory/sensing rate-distortion sweeps", "seqrd"};
  app.require_subcommand(1);

  // model build | validate
  auto* model_cmd = app.add_subcommand("model", "build or validate model files");
  model_cmd->require_subcommand(1);
  std::string build_name, build_out, validate_path;
  auto* build_cmd = model_cmd->add_subcommand("build", "write a builtin model");
  build_cmd->add_option("name", build_name, "symmetric-channel or kelly")->required();
  build_cmd->add_option("-o,--out", build_out, "output path")->required();
  auto* validate_cmd = model_cmd->add_subcommand("validate", "check a model file");
  validate_cmd->add_option("file", validate_path)->required();

  // plan
  CommonArgs plan_args;
  Multipliers mult;
  auto* plan_cmd = app.add_subcommand("plan", "compute a locally optimal bounded policy");
  add_common(plan_cmd, plan_args);
  plan_cmd->add_option("--gamma-c", mult.gamma_c, "multiplier on the joint rate")->capture_default_str();
  plan_cmd->add_option("--gamma-m", mult.gamma_m, "multiplier on the memory rate")->capture_default_str();
  plan_cmd->add_option("--gamma-s", mult.gamma_s, "multiplier on the sensing rate")->capture_default_str();

  // sweep
  CommonArgs sweep_args;
  std::vector<std::string> grids;
  std::string preset;
  int count = 20;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "trace the rate-distortion boundary over a multiplier grid");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--grid", grids, "grid block, e.g. c:0.02:0.5:8,s:0.01:0.5:8 (repeatable)");
  sweep_cmd->add_option("--preset", preset, "regimes: the three boundary parts; contour: gamma_C x gamma_S grid")
      ->check(CLI::IsMember({"regimes", "contour"}));
  sweep_cmd->add_option("--count", count, "points per axis for presets")->capture_default_str();
  sweep_cmd->add_option("--jobs", jobs, "chains run in parallel")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*build_cmd) {
      ModelSpec spec;
      if (build_name == "symmetric-channel") {
        spec = build_symmetric_channel();
      } else if (build_name == "kelly") {
        spec = build_kelly();
      } else {
        throw UsageError("unknown builtin model '" + build_name + "'");
      }
      save_model(spec, build_out);
      log->info("wrote {} (|W|={}, |O|={}, |M|={}, n={})", build_out, spec.num_world, spec.num_obs, spec.num_mem,
                spec.horizon);
      return kExitOk;
    }

    if (*validate_cmd) {
      std::ifstream in(validate_path);
      if (!in) throw UsageError("cannot open " + validate_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      try {
        const ModelSpec spec = parse_model(buf.str());
        out << "PASS " << validate_path << " (|W|=" << spec.num_world << ", |O|=" << spec.num_obs
            << ", |M|=" << spec.num_mem << ", n=" << spec.horizon << ")\n";
        return kExitOk;
      } catch (const ModelError& e) {
        out << "FAIL " << validate_path << ": " << e.what() << '\n';
        return kExitInvalid;
      }
    }

    if (*plan_cmd) {
      try {
        require_positive(mult);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const ModelSpec spec = model_from(plan_args);
      const Units units = parse_units(plan_args.units);
      const PlanOptions opts = plan_options(plan_args);
      log->debug("plan on |W|={} |M|={} n={}", spec.num_world, spec.num_mem, spec.horizon);
      const Trajectory traj = plan(spec, mult, opts, starting_policy(plan_args, spec, false));
      const auto points = boundary_points(traj, mult);
      const double scale = units == Units::Bits ? 1.0 / std::log(2.0) : 1.0;
      out << "L=" << fmt17(traj.total_cost) << " D=" << fmt17(traj.distortion)
          << " Rm=" << fmt17(points.front().r_m * scale) << " Rs=" << fmt17(points.front().r_s * scale)
          << " iters=" << traj.iterations << " converged=" << (traj.converged ? "true" : "false") << '\n';
      if (!points.front().regime) log->info("no regime condition matched for this multiplier/solution pair");
      if (!traj.converged) log->warn("outer iteration cap reached before convergence");
      if (!plan_args.out.empty()) {
        auto file = open_output(plan_args.out);
        write_trajectory_json(file, traj, mult);
      }
      return kExitOk;
    }

    if (*sweep_cmd) {
      if (sweep_args.out.empty()) throw UsageError("sweep needs --out for the CSV");
      const ModelSpec spec = model_from(sweep_args);
      const Units units = parse_units(sweep_args.units);
      SweepOptions opts;
      opts.plan = plan_options(sweep_args);
      if (jobs < 1) throw UsageError("--jobs must be >= 1");
      opts.jobs = jobs;

      std::vector<Multipliers> grid;
      try {
        if (preset == "regimes") {
          grid = symmetric_channel_grid(count);
        } else if (preset == "contour") {
          grid = kelly_grid(count);
        }
        for (const auto& block : grids) {
          const auto part = parse_grid_block(block);
          grid.insert(grid.end(), part.begin(), part.end());
        }
        if (grid.empty()) throw UsageError("empty grid: pass --grid or --preset");
        for (const auto& m : grid) require_positive(m);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }

      opts.init = starting_policy(sweep_args, spec, preset == "contour");
      log->info("sweeping {} multiplier tuples with {} job(s)", grid.size(), opts.jobs);
      const auto points = sweep(spec, grid, opts);
      std::size_t unconverged = 0;
      for (const auto& p : points) unconverged += p.converged ? 0 : 1;
      out << "points=" << points.size() << " infeasible=" << infeasible_count(points) << '\n';
      if (unconverged) log->warn("{} point(s) did not converge", unconverged);
      auto file = open_output(sweep_args.out);
      write_boundary_csv(file, points, units);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    log->error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace seqrd::cli
