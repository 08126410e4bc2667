#include "fedsplit/experiment/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "fedsplit/blackboard/blackboard.hpp"
#include "fedsplit/experiment/polyfit.hpp"
#include "fedsplit/random.hpp"

namespace fedsplit {

std::string to_string(Group g) {
  switch (g) {
    case Group::kSame: return "same";
    case Group::kSimilar: return "similar";
    case Group::kDiffTall: return "diff-tall";
    case Group::kDiffFat: return "diff-fat";
    case Group::kTotallyDiff: return "totally-diff";
  }
  return "?";
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kCoop: return "coop";
    case Mode::kSoloA: return "solo-a";
    case Mode::kSoloB: return "solo-b";
  }
  return "?";
}

std::string to_string(TransportKind t) {
  return t == TransportKind::kInProcess ? "inprocess" : "network";
}

Group group_from_string(const std::string& s) {
  for (Group g : {Group::kSame, Group::kSimilar, Group::kDiffTall, Group::kDiffFat,
                  Group::kTotallyDiff}) {
    if (to_string(g) == s) return g;
  }
  throw std::invalid_argument("unknown group '" + s + "'");
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::kCoop, Mode::kSoloA, Mode::kSoloB}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown mode '" + s + "'");
}

TransportKind transport_from_string(const std::string& s) {
  if (s == "inprocess") return TransportKind::kInProcess;
  if (s == "network") return TransportKind::kNetwork;
  throw std::invalid_argument("unknown transport '" + s + "'");
}

std::array<EnvConfig, 2> group_envs(Group g) {
  EnvConfig a;
  EnvConfig b;
  switch (g) {
    case Group::kSame:
      break;
    case Group::kSimilar:
      b.gravity = 12.0;
      break;
    case Group::kDiffTall:
      b.gravity = 12.0;
      b.pole_half_length = 1.0;
      break;
    case Group::kDiffFat:
      b.gravity = 12.0;
      b.pole_half_length = 0.25;
      b.pole_mass = 0.2;
      break;
    case Group::kTotallyDiff:
      b.kind = EnvKind::kMountainCarMod;
      break;
  }
  return {a, b};
}

ExperimentSpec make_spec(Group g, Mode m) {
  ExperimentSpec spec;
  spec.group = g;
  spec.mode = m;
  const auto envs = group_envs(g);
  spec.agents[0] = {"A", envs[0], {}};
  spec.agents[1] = {"B", envs[1], {}};
  return spec;
}

void ExperimentSpec::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  for (const auto& a : agents) {
    a.env.validate();
    a.hp.validate();
  }
  if (agents[0].id == agents[1].id) throw std::invalid_argument("agent ids must differ");
  if (key_hex) SharedKey::from_hex(*key_hex);
}

void CurveSet::summarize() {
  const std::size_t n_agents = agents.size();
  const std::size_t n_epochs = raw.empty() || raw[0].empty() ? 0 : raw[0][0].size();
  mean.assign(n_agents, std::vector<double>(n_epochs, 0.0));
  for (const auto& run : raw) {
    for (std::size_t a = 0; a < n_agents; ++a) {
      for (std::size_t e = 0; e < n_epochs; ++e) mean[a][e] += run[a][e];
    }
  }
  const double inv = 1.0 / static_cast<double>(raw.size());
  for (auto& m : mean) {
    for (double& v : m) v *= inv;
  }
  smooth.assign(n_agents, std::vector<double>(n_epochs, 0.0));
  std::vector<double> xs(n_epochs);
  for (std::size_t e = 0; e < n_epochs; ++e) xs[e] = static_cast<double>(e);
  const std::size_t degree = std::min(kSmoothingDegree, n_epochs > 0 ? n_epochs - 1 : 0);
  for (std::size_t a = 0; a < n_agents; ++a) {
    if (n_epochs < 2) {
      smooth[a] = mean[a];
      continue;
    }
    const auto c = polyfit(xs, mean[a], degree);
    for (std::size_t e = 0; e < n_epochs; ++e) smooth[a][e] = polyval(c, xs[e]);
  }
}

SenderId sender_id_for(std::uint64_t agent_seed) {
  SenderId id{};
  const std::uint64_t hi = mix64(agent_seed ^ 0x6a09e667f3bcc908ULL);
  const std::uint64_t lo = mix64(agent_seed ^ 0xbb67ae8584caa73bULL);
  for (int i = 0; i < 8; ++i) {
    id[i] = static_cast<std::uint8_t>(hi >> (8 * i));
    id[8 + i] = static_cast<std::uint8_t>(lo >> (8 * i));
  }
  return id;
}

std::vector<std::vector<double>> run_single(const ExperimentSpec& spec, std::size_t run,
                                            const EpochObserver& observer) {
  spec.validate();
  const std::uint64_t run_seed = spec.base_seed + run;
  // All agents start from one common initial model; local layers diverge
  // from there.
  const std::uint64_t model_seed = derive_seed(run_seed, "model");

  std::vector<const AgentSetup*> setups;
  switch (spec.mode) {
    case Mode::kCoop:
      setups = {&spec.agents[0], &spec.agents[1]};
      break;
    case Mode::kSoloA:
      setups = {&spec.agents[0]};
      break;
    case Mode::kSoloB:
      setups = {&spec.agents[1]};
      break;
  }
  const bool federated = spec.mode == Mode::kCoop;

  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::uint64_t> agent_seeds;
  for (const auto* s : setups) {
    const std::uint64_t agent_seed = derive_seed(run_seed, s->id);
    const auto topology = split_topology(s->id);
    agents.push_back(std::make_unique<Agent>(s->id, init_model(model_seed, topology, s->id), s->hp,
                                             agent_seed));
    agent_seeds.push_back(agent_seed);
  }

  std::unique_ptr<BlackBoard> private_bb;
  std::optional<InProcessBus> bus;
  std::vector<std::unique_ptr<FederationSession>> sessions;
  if (federated) {
    const SharedKey key = spec.key_hex ? SharedKey::from_hex(*spec.key_hex) : SharedKey::generate();
    std::optional<net::Address> bb_addr = spec.blackboard;
    if (spec.transport == TransportKind::kNetwork && !bb_addr) {
      BlackBoardOptions opts;
      opts.bind = {"127.0.0.1", 0};
      opts.expected_agents = setups.size();
      private_bb = std::make_unique<BlackBoard>(opts);
      private_bb->start();
      bb_addr = net::Address{"127.0.0.1", private_bb->port()};
    }
    if (spec.transport == TransportKind::kInProcess) bus.emplace();
    for (std::size_t i = 0; i < setups.size(); ++i) {
      const SenderId id = sender_id_for(agent_seeds[i]);
      std::unique_ptr<Endpoint> ep;
      if (spec.transport == TransportKind::kInProcess) {
        ep = bus->connect(id);
      } else {
        try {
          ep = TcpEndpoint::connect(*bb_addr, id);
        } catch (const TransportError& e) {
          throw TransportError("black board at " + bb_addr->str() + " unavailable: " + e.what());
        }
      }
      sessions.push_back(std::make_unique<FederationSession>(id, key, std::move(ep)));
    }
  }

  std::vector<Participant> participants;
  for (std::size_t i = 0; i < setups.size(); ++i) {
    participants.push_back({agents[i].get(), setups[i]->env, derive_seed(agent_seeds[i], "episodes"),
                            federated ? sessions[i].get() : nullptr});
  }

  std::vector<std::vector<double>> returns(setups.size(), std::vector<double>(spec.epochs));
  for (std::size_t e = 0; e < spec.epochs; ++e) {
    const EpochResult r = run_epoch(participants, static_cast<std::uint32_t>(e));
    for (std::size_t a = 0; a < setups.size(); ++a) returns[a][e] = r.returns[a];
    if (observer) observer(run, e, participants);
  }
  sessions.clear();  // disconnect before the private black board goes away
  return returns;
}

CurveSet run_experiment(const ExperimentSpec& spec, const EpochObserver& observer) {
  spec.validate();
  CurveSet curves;
  switch (spec.mode) {
    case Mode::kCoop:
      curves.agents = {spec.agents[0].id, spec.agents[1].id};
      break;
    case Mode::kSoloA:
      curves.agents = {spec.agents[0].id};
      break;
    case Mode::kSoloB:
      curves.agents = {spec.agents[1].id};
      break;
  }
  for (std::size_t r = 0; r < spec.runs; ++r) curves.raw.push_back(run_single(spec, r, observer));
  curves.summarize();
  return curves;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void emit(const CurveSet& curves, const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
  if (curves.raw.empty() || curves.agents.empty()) throw std::invalid_argument("emit: empty curves");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::string raw = "run,agent,epoch,return\n";
  for (std::size_t r = 0; r < curves.raw.size(); ++r) {
    for (std::size_t a = 0; a < curves.agents.size(); ++a) {
      for (std::size_t e = 0; e < curves.raw[r][a].size(); ++e) {
        raw += std::to_string(r) + ',' + curves.agents[a] + ',' + std::to_string(e) + ',' +
               fmt(curves.raw[r][a][e]) + '\n';
      }
    }
  }
  write_file(out_dir / "raw.csv", raw);

  std::string mean = "agent,epoch,mean,smooth\n";
  for (std::size_t a = 0; a < curves.agents.size(); ++a) {
    for (std::size_t e = 0; e < curves.mean[a].size(); ++e) {
      mean += curves.agents[a] + ',' + std::to_string(e) + ',' + fmt(curves.mean[a][e]) + ',' +
              fmt(curves.smooth[a][e]) + '\n';
    }
  }
  write_file(out_dir / "mean.csv", mean);

  const std::string label = to_string(spec.group) + "/" + to_string(spec.mode);
  std::ostringstream meta;
  meta << "label=" << label << "\ngroup=" << to_string(spec.group)
       << "\nmode=" << to_string(spec.mode) << "\nruns=" << spec.runs
       << "\nepochs=" << spec.epochs << "\nseed=" << spec.base_seed
       << "\ntransport=" << to_string(spec.transport) << '\n';
  write_file(out_dir / "experiment.txt", meta.str());
  write_file(out_dir / "curves.svg", render_svg(curves, label));
}

std::string render_svg(const CurveSet& curves, const std::string& title) {
  constexpr double kW = 720, kH = 420, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  static constexpr const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e"};
  const std::size_t n = curves.epochs();
  double y_max = 1.0;
  for (const auto& m : curves.mean) {
    for (double v : m) y_max = std::max(y_max, v);
  }
  for (const auto& s : curves.smooth) {
    for (double v : s) y_max = std::max(y_max, v);
  }
  y_max *= 1.05;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto px = [&](double e) { return kLeft + (n > 1 ? e / static_cast<double>(n - 1) : 0.0) * pw; };
  auto py = [&](double v) { return kTop + ph - std::clamp(v, 0.0, y_max) / y_max * ph; };
  auto num = [](double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
    << "</text>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\""
    << kTop + ph << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0;
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">"
      << static_cast<int>(v) << "</text>\n";
    const double e = (n > 1 ? static_cast<double>(n - 1) : 0.0) * t / 4.0;
    s << "<text x=\"" << num(px(e)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << static_cast<int>(e) << "</text>\n";
  }
  s << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10
    << "\" text-anchor=\"middle\">epoch</text>\n";
  s << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 16 " << kTop + ph / 2
    << ")\" text-anchor=\"middle\">mean return</text>\n";

  for (std::size_t a = 0; a < curves.agents.size(); ++a) {
    const char* color = kColors[a % 4];
    auto polyline = [&](const std::vector<double>& ys, const char* extra) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" " << extra << " points=\"";
      for (std::size_t e = 0; e < ys.size(); ++e) {
        s << num(px(static_cast<double>(e))) << ',' << num(py(ys[e])) << ' ';
      }
      s << "\"/>\n";
    };
    polyline(curves.mean[a], "stroke-width=\"1\" stroke-opacity=\"0.45\"");
    polyline(curves.smooth[a], "stroke-width=\"2.5\"");
    s << "<text x=\"" << kLeft + 12 << "\" y=\"" << kTop + 16 + 16 * static_cast<double>(a)
      << "\" fill=\"" << color << "\">agent " << curves.agents[a] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

LoadedCurves load_curves(const std::filesystem::path& dir) {
  LoadedCurves out;
  out.label = dir.filename().string();
  if (std::ifstream meta(dir / "experiment.txt"); meta) {
    std::string line;
    while (std::getline(meta, line)) {
      if (line.rfind("label=", 0) == 0) out.label = line.substr(6);
    }
  }
  std::ifstream f(dir / "mean.csv");
  if (!f) throw std::runtime_error("cannot read " + (dir / "mean.csv").string());
  std::string line;
  std::getline(f, line);
  if (line != "agent,epoch,mean,smooth") throw std::runtime_error("unexpected mean.csv header");
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw std::runtime_error("malformed mean.csv row: " + line);
    auto it = std::find(out.agents.begin(), out.agents.end(), cells[0]);
    std::size_t a = static_cast<std::size_t>(it - out.agents.begin());
    if (it == out.agents.end()) {
      out.agents.push_back(cells[0]);
      out.mean.emplace_back();
    }
    const std::size_t e = std::stoul(cells[1]);
    if (e != out.mean[a].size()) throw std::runtime_error("mean.csv epochs out of order");
    out.mean[a].push_back(std::stod(cells[2]));
  }
  return out;
}

}  // namespace fedsplit
