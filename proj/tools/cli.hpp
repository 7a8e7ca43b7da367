#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbekf/io.hpp"
#include "lbekf/sim.hpp"

#ifndef LBEKF_VERSION
#define LBEKF_VERSION "0.0.0"
#endif

namespace lbekf::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3 };

inline constexpr std::uint64_t kDefaultSeed = 20230101;
inline constexpr std::size_t kFullTrials = 5000;

struct CliConfig {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 1;
  int verbosity = 0;
};

struct Fig2Args {
  std::size_t n = 500;
  std::vector<std::size_t> bandwidths{5, 10, 25};
  std::size_t l_max = 50;
  std::size_t trials = 1;
  double diagonal = 15.0;
};

struct LocalizeArgs {
  std::size_t agents = 30;
  double side = 40.0;
  double rate = 0.0;
  std::string positions;
  std::size_t beacons = 8;
  double radius = 15.0;
  double sigma_p = 0.02, sigma_q = 2.0, sigma_r = 10.0;
  double init_var = 5.0;
  std::size_t band = 20;
  std::size_t timesteps = 100;
  std::size_t trials = 200;
  bool full = false;
  std::string algo = "all";
  bool no_vr = false;
  std::string motion = "stationary";
  double speed = 0.1;
  double level = kEllipseLevel;
};

struct ScanArgs {
  std::vector<double> lambdas{0.005, 0.01, 0.02, 0.05, 0.1};
  std::vector<double> sides{40.0};
  double radius = 15.0;
  std::size_t trials = 500;
};

struct RelabelArgs {
  std::string positions;
  double radius = 15.0;
  std::string output = "permutation.csv";
};

struct RggArgs {
  double lambda = 0.05;
  double side = 40.0;
  std::size_t dim = 2;
  double radius = 15.0;
  std::string positions = "positions.csv";
  std::string edges = "edges.csv";
};

struct CommandError : Error {
  using Error::Error;
};

inline int exit_code_for(Errc c) {
  switch (c) {
    case Errc::invalid_argument:
    case Errc::parse_error:
    case Errc::dimension_mismatch:
    case Errc::index_out_of_range:
    case Errc::too_large:
      return kConfigError;
    default:
      return kNumericalError;
  }
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"LB-EKF wireless sensor network localization experiments"};
    app.set_version_flag("--version", LBEKF_VERSION);
    auto* config_opt = app.set_config("--config", "", "INI file; [fig2], [localize], ... sections hold subcommand keys");
    app.option_defaults()->always_capture_default();
    app.add_option("-o,--out", cfg_.out_dir, "Output directory (must exist)");
    app.add_option("--seed", cfg_.seed, "Master seed");
    app.add_option("-j,--jobs", cfg_.jobs, "Worker threads for independent trials")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", cfg_.verbosity, "Print more detail");
    app.require_subcommand(1);

    auto* fig2 = app.add_subcommand("fig2", "Banded inverse approximation error versus L");
    fig2->add_option("--n", fig2_.n, "Matrix size");
    fig2->add_option("--bandwidths", fig2_.bandwidths, "Input matrix bandwidths");
    fig2->add_option("--L-max", fig2_.l_max, "Largest L (L runs from 0)");
    fig2->add_option("--trials", fig2_.trials, "Random matrices per bandwidth");
    fig2->add_option("--diagonal", fig2_.diagonal, "Diagonal value before normalization");

    auto* loc = app.add_subcommand("localize", "Monte Carlo comparison of EKF, LB-EKF+VR and LB-EKF-VR");
    loc->add_option("--agents", loc_.agents, "Agents placed uniformly in the square");
    loc->add_option("--side", loc_.side, "Square side length (m)");
    loc->add_option("--rate", loc_.rate, "Poisson rate (agents/m^2); overrides --agents when > 0");
    loc->add_option("--positions", loc_.positions, "Position CSV (id,x,y); overrides --agents and --rate");
    loc->add_option("--beacons", loc_.beacons, "Beacon count");
    loc->add_option("--radius", loc_.radius, "Sensing radius (m)");
    loc->add_option("--sigma-p", loc_.sigma_p, "Process noise variance (m^2)");
    loc->add_option("--sigma-q", loc_.sigma_q, "Beacon position noise variance (m^2)");
    loc->add_option("--sigma-r", loc_.sigma_r, "Distance noise variance (m^2)");
    loc->add_option("--init-var", loc_.init_var, "Initial estimate variance (m^2)");
    loc->add_option("--L", loc_.band, "Band parameter of LB-EKF (scalar rows)");
    loc->add_option("--timesteps", loc_.timesteps, "Timesteps per trial");
    loc->add_option("--trials", loc_.trials, "Monte Carlo trials");
    loc->add_flag("--full", loc_.full, "Run 5000 trials");
    loc->add_option("--algo", loc_.algo, "all | ekf | lbekf")->check(CLI::IsMember({"all", "ekf", "lbekf"}));
    loc->add_flag("--no-vr", loc_.no_vr, "Drop vertex relabeling from the LB-EKF run");
    loc->add_option("--motion", loc_.motion, "stationary | constant-velocity")
        ->check(CLI::IsMember({"stationary", "constant-velocity"}));
    loc->add_option("--speed", loc_.speed, "Per-step velocity bound for constant-velocity motion (m)");
    loc->add_option("--level", loc_.level, "Ellipse level for ellipses.csv");

    auto* scan = app.add_subcommand("scan", "Scan statistic of the x-projected Poisson process");
    scan->add_option("--lambdas", scan_.lambdas, "Poisson rates (agents/m^2)");
    scan->add_option("--sides", scan_.sides, "Domain side lengths (m)");
    scan->add_option("--radius", scan_.radius, "Window width r (m)");
    scan->add_option("--trials", scan_.trials, "Draws per (rate, side)");

    auto* relabel = app.add_subcommand("relabel", "Sort-by-coordinate relabeling of a position file");
    relabel->add_option("--positions", relabel_.positions, "Position CSV (id,x,y[,z])")->required();
    relabel->add_option("--radius", relabel_.radius, "Sensing radius (m)");
    relabel->add_option("--output", relabel_.output, "Permutation CSV name inside --out");

    auto* rgg = app.add_subcommand("rgg", "Sample a random geometric graph");
    rgg->add_option("--lambda", rgg_.lambda, "Poisson rate (agents per unit volume)");
    rgg->add_option("--side", rgg_.side, "Cube side length (m)");
    rgg->add_option("--dim", rgg_.dim, "Dimension 1..3");
    rgg->add_option("--radius", rgg_.radius, "Sensing radius (m)");
    rgg->add_option("--positions", rgg_.positions, "Position CSV name inside --out");
    rgg->add_option("--edges", rgg_.edges, "Edge CSV name inside --out");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? kOk : kConfigError;
    }
    cfg_.subcommand = app.get_subcommands().front()->get_name();
    if (config_opt->count() > 0) cfg_.config_path = config_opt->as<std::string>();

    const auto start = std::chrono::steady_clock::now();
    try {
      if (!std::filesystem::is_directory(cfg_.out_dir))
        throw CommandError(Errc::invalid_argument, "output directory does not exist: " + cfg_.out_dir);
      nlohmann::ordered_json echo;
      if (cfg_.subcommand == "fig2") echo = cmd_fig2();
      if (cfg_.subcommand == "localize") echo = cmd_localize();
      if (cfg_.subcommand == "scan") echo = cmd_scan();
      if (cfg_.subcommand == "relabel") echo = cmd_relabel();
      if (cfg_.subcommand == "rgg") echo = cmd_rgg();
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_meta(echo, wall);
    } catch (const Error& e) {
      err_ << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
      return exit_code_for(e.code());
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kNumericalError;
    }
    return kOk;
  }

  const CliConfig& config() const { return cfg_; }

 private:
  std::string path(const std::string& name) const { return (std::filesystem::path(cfg_.out_dir) / name).string(); }

  void write_meta(const nlohmann::ordered_json& echo, double wall) const {
    nlohmann::ordered_json meta;
    meta["command"] = cfg_.subcommand;
    meta["artifact_version"] = LBEKF_VERSION;
    meta["seed"] = cfg_.seed;
    meta["jobs"] = cfg_.jobs;
    meta["config_file"] = cfg_.config_path;
    meta["config"] = echo;
    meta["wall_time_s"] = wall;
    std::ofstream f(path("run_meta.json"), std::ios::binary | std::ios::trunc);
    if (!f) throw CommandError(Errc::invalid_argument, "cannot write run_meta.json in " + cfg_.out_dir);
    f << meta.dump(2) << '\n';
  }

  nlohmann::ordered_json cmd_fig2() {
    Fig2Config f;
    f.n = fig2_.n;
    f.input_bandwidths = fig2_.bandwidths;
    f.band_values.clear();
    for (std::size_t L = 0; L <= fig2_.l_max; ++L) f.band_values.push_back(L);
    f.trials = fig2_.trials;
    f.seed = cfg_.seed;
    f.diagonal = fig2_.diagonal;
    if (!(f.diagonal > 0.0)) throw CommandError(Errc::invalid_argument, "--diagonal must be > 0");
    const auto rows = run_fig2(f, cfg_.jobs);
    io::write_fig2(path("fig2.csv"), rows);
    if (cfg_.verbosity > 0)
      for (std::size_t bw : f.input_bandwidths)
        out_ << "bw " << bw << ": error(L=0) " << fig2_mean_error(rows, bw, 0) << ", error(L=" << fig2_.l_max
             << ") " << fig2_mean_error(rows, bw, fig2_.l_max) << '\n';
    out_ << "wrote " << path("fig2.csv") << " (" << rows.size() << " rows)\n";
    return {{"n", f.n},
            {"input_bandwidths", f.input_bandwidths},
            {"L_min", 0},
            {"L_max", fig2_.l_max},
            {"trials", f.trials},
            {"diagonal", f.diagonal},
            {"normalization", "matrix divided by its diagonal value (unit diagonal)"}};
  }

  nlohmann::ordered_json cmd_localize() {
    ScenarioConfig s;
    s.side = loc_.side;
    s.n_agents = loc_.agents;
    s.source = AgentSource::uniform;
    std::string source = "uniform";
    if (loc_.rate > 0.0) {
      s.source = AgentSource::rgg;
      s.rate = loc_.rate;
      source = "rgg";
    }
    if (!loc_.positions.empty()) {
      s.source = AgentSource::file;
      s.positions = io::read_positions(loc_.positions, loc_.radius);
      source = "file";
    }
    s.n_beacons = loc_.beacons;
    s.radius = loc_.radius;
    s.noise = {loc_.sigma_p, loc_.sigma_q, loc_.sigma_r};
    s.init_var = loc_.init_var;
    s.band = loc_.band;
    s.timesteps = loc_.timesteps;
    s.trials = loc_.full ? kFullTrials : loc_.trials;
    s.motion = loc_.motion == "constant-velocity" ? Motion::constant_velocity : Motion::stationary;
    s.speed = loc_.speed;
    s.seed = cfg_.seed;
    const Algorithm lb = loc_.no_vr ? Algorithm::lbekf_novr : Algorithm::lbekf_vr;
    if (loc_.algo == "ekf") s.algorithms = {Algorithm::ekf};
    else if (loc_.algo == "lbekf") s.algorithms = {lb};
    else if (loc_.no_vr) s.algorithms = {Algorithm::ekf, Algorithm::lbekf_novr};

    const LocalizationResult res = run_localization(s, cfg_.jobs);
    io::write_mse(path("mse.csv"), res);
    io::write_mse_total(path("mse_total.csv"), res);
    io::write_ellipses(path("ellipses.csv"), res, 0, loc_.level);
    for (const auto& w : res.warnings) err_ << "warning: " << w << '\n';

    bool any_alive = false;
    for (std::size_t a = 0; a < res.algorithms.size(); ++a) {
      std::size_t diverged = 0;
      for (const auto& r : res.records[a]) diverged += r.diverged ? 1 : 0;
      out_ << to_string(res.algorithms[a]) << ": " << diverged << " of " << s.trials << " trials diverged";
      if (diverged < s.trials) {
        any_alive = true;
        out_ << ", steady-state total MSE " << steady_state_total(mse_curves(res.records[a]), 20) << " m^2";
      }
      out_ << '\n';
    }
    if (!any_alive) throw CommandError(Errc::all_diverged, "every trial diverged for every algorithm");

    std::vector<std::string> algos;
    for (Algorithm a : s.algorithms) algos.emplace_back(to_string(a));
    return {{"source", source},
            {"agents", s.source == AgentSource::uniform ? nlohmann::ordered_json(s.n_agents) : nlohmann::ordered_json()},
            {"rate", s.source == AgentSource::rgg ? nlohmann::ordered_json(s.rate) : nlohmann::ordered_json()},
            {"positions", loc_.positions},
            {"side", s.side},
            {"beacons", s.n_beacons},
            {"beacon_rule", "greedy farthest-point, seeded first pick"},
            {"radius", s.radius},
            {"sigma_p", s.noise.sigma_p},
            {"sigma_q", s.noise.sigma_q},
            {"sigma_r", s.noise.sigma_r},
            {"init_var", s.init_var},
            {"L", s.band},
            {"timesteps", s.timesteps},
            {"trials", s.trials},
            {"trials_note", s.trials == kFullTrials ? "full scale" : "desk scale (full scale is 5000, --full)"},
            {"motion", loc_.motion},
            {"speed", s.speed},
            {"graph", "fixed from initial true positions"},
            {"algorithms", algos},
            {"ellipse_trial", 0},
            {"ellipse_level", loc_.level}};
  }

  nlohmann::ordered_json cmd_scan() {
    ScanConfig c;
    c.lambdas = scan_.lambdas;
    c.sides = scan_.sides;
    c.radius = scan_.radius;
    c.trials = scan_.trials;
    c.seed = cfg_.seed;
    const auto rows = run_scan(c);
    io::write_scan(path("scan.csv"), rows);
    out_ << "wrote " << path("scan.csv") << " (" << rows.size() << " rows)\n";
    return {{"lambdas", c.lambdas}, {"sides", c.sides}, {"radius", c.radius}, {"trials", c.trials}};
  }

  nlohmann::ordered_json cmd_relabel() {
    const Realization x = io::read_positions(relabel_.positions, relabel_.radius);
    const WsnGraph g = build_geometric_graph(x);
    const Permutation p = vertex_relabel(x);
    io::write_permutation(path(relabel_.output), p);
    out_ << "original bandwidth: " << graph_bandwidth(g) << '\n'
         << "relabeled bandwidth: " << relabeled_bandwidth(g, p) << '\n'
         << "phi_max: " << phi_max(x) << '\n';
    return {{"positions", relabel_.positions}, {"radius", relabel_.radius}, {"output", relabel_.output}};
  }

  nlohmann::ordered_json cmd_rgg() {
    RggConfig c;
    c.side_lengths.assign(rgg_.dim, rgg_.side);
    c.rate = rgg_.lambda;
    c.radius = rgg_.radius;
    c.seed = cfg_.seed;
    if (!(c.radius > 0.0)) throw CommandError(Errc::invalid_argument, "--radius must be > 0");
    const auto [g, x] = sample_rgg(c);
    io::write_positions(path(rgg_.positions), x);
    io::write_edges(path(rgg_.edges), g);
    out_ << "sampled " << x.size() << " agents, " << g.edges().size() << " edges (expected agents "
         << c.rate * c.volume() << ")\n";
    return {{"lambda", c.rate}, {"side", rgg_.side}, {"dim", rgg_.dim}, {"radius", c.radius},
            {"positions", rgg_.positions}, {"edges", rgg_.edges}};
  }

  std::ostream& out_;
  std::ostream& err_;
  CliConfig cfg_;
  Fig2Args fig2_;
  LocalizeArgs loc_;
  ScanArgs scan_;
  RelabelArgs relabel_;
  RggArgs rgg_;
};

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Runner r(out, err);
  return r.run(argc, argv);
}

}  // namespace lbekf::cli
