#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blackboard_command.hpp"
#include "fedsplit/errors.hpp"
#include "fedsplit/experiment/report.hpp"
#include "fedsplit/experiment/runner.hpp"
#include "fedsplit/nn/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace fedsplit;

namespace {

struct RunArgs {
  std::string group = "same";
  std::string mode = "coop";
  std::size_t runs = 10;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  std::string out;
  std::string transport = "inprocess";
  std::string bb;
  std::string config;
  bool checkpoints = false;
};

int do_run(const RunArgs& args, const std::vector<std::string>& explicit_opts) {
  auto given = [&](const std::string& name) {
    return std::find(explicit_opts.begin(), explicit_opts.end(), name) != explicit_opts.end();
  };

  ExperimentSpec spec = make_spec(group_from_string(args.group), mode_from_string(args.mode));
  spec.runs = args.runs;
  spec.epochs = args.epochs;
  spec.base_seed = args.seed;
  spec.transport = transport_from_string(args.transport);
  if (!args.config.empty()) {
    // Flags given on the command line win over the file.
    ConfigSections cfg = load_config(args.config);
    auto& exp = cfg["experiment"];
    if (given("--group")) exp["group"] = args.group;
    if (given("--mode")) exp["mode"] = args.mode;
    if (given("--runs")) exp["runs"] = std::to_string(args.runs);
    if (given("--epochs")) exp["epochs"] = std::to_string(args.epochs);
    if (given("--seed")) exp["seed"] = std::to_string(args.seed);
    if (given("--transport")) cfg["federation"]["transport"] = args.transport;
    apply_config(cfg, spec);
  }
  if (!args.bb.empty()) spec.blackboard = net::parse_address(args.bb);
  spec.validate();

  const fs::path out = args.out;
  EpochObserver observer;
  if (args.checkpoints) {
    observer = [&](std::size_t run, std::size_t epoch, std::span<const Participant> ps) {
      if (epoch + 1 != spec.epochs) return;
      fs::create_directories(out / "checkpoints");
      for (const auto& p : ps) {
        save_checkpoint(p.agent->model(),
                        out / "checkpoints" / ("run" + std::to_string(run) + "_" + p.agent->id() + ".fsrl"));
      }
    };
  }

  std::cerr << "fedsplit: " << to_string(spec.group) << "/" << to_string(spec.mode) << ", "
            << spec.runs << " runs x " << spec.epochs << " epochs, transport "
            << to_string(spec.transport) << '\n';
  const CurveSet curves = run_experiment(spec, observer);
  emit(curves, spec, out);

  std::vector<LabeledCurve> labeled;
  for (std::size_t a = 0; a < curves.agents.size(); ++a) {
    labeled.push_back({"agent " + curves.agents[a], curves.mean[a]});
  }
  std::cout << format_report(compare_report(labeled));
  std::cerr << "fedsplit: wrote " << (out / "raw.csv").string() << ", mean.csv, curves.svg\n";
  return 0;
}

int do_compare(const std::vector<std::string>& dirs, const std::string& agent,
               const std::vector<std::string>& checks, double margin) {
  std::vector<LabeledCurve> labeled;
  for (const auto& d : dirs) {
    const LoadedCurves c = load_curves(d);
    auto it = std::find(c.agents.begin(), c.agents.end(), agent);
    const std::size_t idx = it == c.agents.end() ? 0 : static_cast<std::size_t>(it - c.agents.begin());
    labeled.push_back({c.label + ":" + c.agents[idx], c.mean[idx]});
  }
  const ComparisonReport report = compare_report(labeled);
  std::cout << format_report(report);

  // Each --expect names two curve indices "i>j" checked on the first window
  // spanning the comparison, with the given relative margin.
  int flagged = 0;
  for (const auto& spec : checks) {
    const auto gt = spec.find('>');
    if (gt == std::string::npos) throw std::invalid_argument("--expect takes i>j");
    const std::size_t i = std::stoul(spec.substr(0, gt));
    const std::size_t j = std::stoul(spec.substr(gt + 1));
    if (i >= labeled.size() || j >= labeled.size()) throw std::invalid_argument("--expect index out of range");
    const Window w{20, std::min<std::size_t>(60, labeled[i].curve.size())};
    const MarginCheck c = check_margin(labeled[i].label, window_mean(labeled[i].curve, w),
                                       labeled[j].label, window_mean(labeled[j].curve, w), margin);
    std::cout << format_check(c) << '\n';
    flagged += !c.pass;
  }
  return flagged == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split local/global DQN federation experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "train agents and write curves");
  run->add_option("--group", run_args.group, "same|similar|diff-tall|diff-fat|totally-diff")
      ->capture_default_str();
  run->add_option("--mode", run_args.mode, "coop|solo-a|solo-b")->capture_default_str();
  run->add_option("--runs", run_args.runs, "independent runs")->capture_default_str();
  run->add_option("--epochs", run_args.epochs, "epochs per run")->capture_default_str();
  run->add_option("--seed", run_args.seed, "base seed; run r uses seed + r")->capture_default_str();
  run->add_option("--out", run_args.out, "output directory")->required();
  run->add_option("--transport", run_args.transport, "inprocess|network")->capture_default_str();
  run->add_option("--bb", run_args.bb, "external black board host:port (network transport)");
  run->add_option("--config", run_args.config, "experiment config file");
  run->add_flag("--checkpoints", run_args.checkpoints, "save final models of every run");

  std::vector<std::string> compare_dirs;
  std::string compare_agent = "A";
  std::vector<std::string> expectations;
  double margin = 0.05;
  auto* compare = app.add_subcommand("compare", "windowed-mean table across run directories");
  compare->add_option("dirs", compare_dirs, "directories written by 'fedsplit run'")->required();
  compare->add_option("--agent", compare_agent, "agent curve to compare")->capture_default_str();
  compare->add_option("--expect", expectations, "ordering check i>j over epochs [20,60)");
  compare->add_option("--margin", margin, "relative margin for --expect")->capture_default_str();

  cli::BlackBoardArgs bb_args;
  auto* bb = app.add_subcommand("blackboard", "run the keyless forwarder");
  cli::add_blackboard_options(*bb, bb_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::vector<std::string> explicit_opts;
      for (const auto* opt : run->get_options()) {
        if (opt->count() > 0) explicit_opts.push_back(opt->get_name());
      }
      return do_run(run_args, explicit_opts);
    }
    if (compare->parsed()) return do_compare(compare_dirs, compare_agent, expectations, margin);
    if (bb->parsed()) return cli::run_blackboard(bb_args);
  } catch (const TransportError& e) {
    std::cerr << "fedsplit: transport error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fedsplit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
