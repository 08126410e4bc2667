#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fedsplit/experiment/spec.hpp"
#include "fedsplit/federation/session.hpp"

namespace fedsplit {

inline constexpr std::size_t kSmoothingDegree = 4;

struct CurveSet {
  std::vector<std::string> agents;                 // labels, turn order
  std::vector<std::vector<std::vector<double>>> raw;  // [run][agent][epoch]
  std::vector<std::vector<double>> mean;           // [agent][epoch]
  std::vector<std::vector<double>> smooth;         // [agent][epoch]

  std::size_t runs() const { return raw.size(); }
  std::size_t epochs() const { return mean.empty() ? 0 : mean.front().size(); }
  // Recomputes mean and smooth from raw.
  void summarize();
};

// Called after every epoch barrier with the participants of the current run.
using EpochObserver =
    std::function<void(std::size_t run, std::size_t epoch, std::span<const Participant>)>;

// 16-byte agent identity derived from the agent seed.
SenderId sender_id_for(std::uint64_t agent_seed);

// One training run with seed base_seed + run. Returns [agent][epoch].
std::vector<std::vector<double>> run_single(const ExperimentSpec& spec, std::size_t run,
                                            const EpochObserver& observer = {});

CurveSet run_experiment(const ExperimentSpec& spec, const EpochObserver& observer = {});

// Writes raw.csv, mean.csv, curves.svg and experiment.txt into out_dir.
void emit(const CurveSet& curves, const ExperimentSpec& spec, const std::filesystem::path& out_dir);

std::string render_svg(const CurveSet& curves, const std::string& title);

// Reads mean.csv (and experiment.txt if present) back from an emit() directory.
struct LoadedCurves {
  std::string label;
  std::vector<std::string> agents;
  std::vector<std::vector<double>> mean;  // [agent][epoch]
};
LoadedCurves load_curves(const std::filesystem::path& dir);

}  // namespace fedsplit
