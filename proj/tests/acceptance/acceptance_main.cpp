// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is non-zero if any hard criterion fails. The similarity
// ordering (7) is a statistical expectation: failing margins are flagged in
// the report and printed as FAIL, but do not change the exit status.
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "fedsplit/blackboard/blackboard.hpp"
#include "fedsplit/errors.hpp"
#include "fedsplit/experiment/polyfit.hpp"
#include "fedsplit/experiment/report.hpp"
#include "fedsplit/experiment/runner.hpp"
#include "fedsplit/random.hpp"
#include "support/fd_oracle.hpp"

#ifndef FEDSPLIT_GOLDEN_DIR
#error "FEDSPLIT_GOLDEN_DIR must point at tests/golden"
#endif

using namespace fedsplit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int prec = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

fs::path g_scratch;
std::ofstream g_report;

// Experiments shared between criteria, run once on first use.
std::map<std::string, CurveSet> g_cache;

const CurveSet& experiment(Group g, Mode m, std::size_t epochs) {
  const std::string key = to_string(g) + "/" + to_string(m) + "/" + std::to_string(epochs);
  if (auto it = g_cache.find(key); it != g_cache.end()) return it->second;
  ExperimentSpec spec = make_spec(g, m);
  spec.runs = 10;
  spec.epochs = epochs;
  spec.base_seed = 0;
  const auto t0 = Clock::now();
  CurveSet c = run_experiment(spec);
  std::cerr << "  ran " << key << " (10 runs) in " << fixed(seconds_since(t0), 1) << " s\n";
  emit(c, spec, g_scratch / (to_string(g) + "_" + to_string(m)));
  return g_cache.emplace(key, std::move(c)).first->second;
}

std::size_t agent_index(const CurveSet& c, const std::string& id) {
  return static_cast<std::size_t>(std::find(c.agents.begin(), c.agents.end(), id) - c.agents.begin());
}

double wmean(const CurveSet& c, const std::string& agent, Window w) {
  return window_mean(c.mean[agent_index(c, agent)], w);
}

// ---- 1 -------------------------------------------------------------------

Outcome gradient_exactness() {
  const auto t0 = Clock::now();
  constexpr long double h = 1e-5L;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> in(-2.0, 2.0), bias(-0.3, 0.3);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SplitModel m = init_model(derive_seed(s, "grad"), split_topology("A"), "A");
    for (const auto& l : m.layers())
      for (double& b : m.layer(l.id).bias) b = bias(gen);
    std::vector<double> x(4), w(2);
    for (double& v : x) v = in(gen);
    for (double& v : w) v = in(gen);
    Tape tape;
    forward(m, x, &tape);
    const GradientBundle g = backward(m, tape, w);

    fedsplit::testing::LongDoubleNet net(m);
    auto loss = [&] {
      const auto y = net.forward(x);
      return w[0] * y[0] + w[1] * y[1];
    };
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
      const LayerTensors& gl = g.layers.at(m.layers()[li].id);
      auto& l = net.layers[li];
      auto probe = [&](long double& p, double analytic) {
        const double numeric = static_cast<double>(net.central_difference(p, h, loss));
        const double rel = std::abs(numeric - analytic) /
                           std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        worst = std::max(worst, rel);
        ++checked;
      };
      for (std::size_t k = 0; k < l.w.size(); ++k) probe(l.w[k], gl.weights.data()[k]);
      for (std::size_t k = 0; k < l.b.size(); ++k) probe(l.b[k], gl.bias[k]);
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0, std::to_string(checked) + " partials, worst rel err " + sci(worst) +
                                           " (< 1e-4), " + fixed(secs) + " s (< 10 s)"};
}

// ---- 2 -------------------------------------------------------------------

Outcome physics_oracle() {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), vel(-1.5, 1.5), ang(-0.2, 0.2);
  std::bernoulli_distribution coin;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    EnvConfig c;
    EnvState s;
    s.vars = {pos(gen), vel(gen), ang(gen), vel(gen)};
    const int a = coin(gen);
    const StepResult r = step(c, s, a);
    // Frictionless cart-pole, textbook form.
    const double M = c.cart_mass, m = c.pole_mass, l = c.pole_half_length;
    const double F = a ? c.force_mag : -c.force_mag;
    const double th = s.vars[2], w = s.vars[3];
    const double th_acc = (c.gravity * std::sin(th) +
                           std::cos(th) * (-F - m * l * w * w * std::sin(th)) / (M + m)) /
                          (l * (4.0 / 3.0 - m * std::cos(th) * std::cos(th) / (M + m)));
    const double x_acc = (F + m * l * (w * w * std::sin(th) - th_acc * std::cos(th))) / (M + m);
    const double want[4] = {s.vars[0] + 0.02 * s.vars[1], s.vars[1] + 0.02 * x_acc,
                            s.vars[2] + 0.02 * s.vars[3], s.vars[3] + 0.02 * th_acc};
    for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(r.next.vars[k] - want[k]));
  }

  EnvConfig mc;
  mc.kind = EnvKind::kMountainCarMod;
  std::uniform_real_distribution<double> p(-1.2, 0.6), v(-0.07, 0.07);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    EnvState s;
    s.vars = {p(gen), v(gen), 0, 0};
    const int a = coin(gen);
    const StepResult r = step(mc, s, a);
    double vv = std::clamp(s.vars[1] + ((a ? 1.0 : -1.0) * 0.001 + std::cos(3 * s.vars[0]) * -0.0025),
                           -0.07, 0.07);
    double pp = std::clamp(s.vars[0] + vv, -1.2, 0.6);
    if (pp == -1.2 && vv < 0) vv = 0;
    const bool goal = pp >= 0.5;
    if (r.next.vars[0] != pp || r.next.vars[1] != vv || r.reward != (goal ? 1.0 : 0.0) || r.done != goal)
      ++mismatches;
  }
  return {worst <= 1e-12 && mismatches == 0,
          "cart-pole max abs err " + sci(worst) + " (<= 1e-12) over 100 steps; mountain-car " +
              std::to_string(mismatches) + "/1000 mismatches"};
}

// ---- 3 -------------------------------------------------------------------

Outcome global_consistency() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  std::map<TransportKind, std::string> raw;
  for (TransportKind t : {TransportKind::kInProcess, TransportKind::kNetwork}) {
    ExperimentSpec spec = make_spec(Group::kSame, Mode::kCoop);
    spec.runs = 1;
    spec.epochs = 50;
    spec.transport = t;
    std::size_t checked = 0, diverged = 0;
    const CurveSet c = run_experiment(spec, [&](std::size_t, std::size_t, std::span<const Participant> ps) {
      ++checked;
      if (!(ps[0].agent->model().global_layer() == ps[1].agent->model().global_layer())) ++diverged;
    });
    const fs::path dir = g_scratch / ("consistency_" + to_string(t));
    emit(c, spec, dir);
    std::ifstream f(dir / "raw.csv", std::ios::binary);
    raw[t] = std::string(std::istreambuf_iterator<char>(f), {});
    ok = ok && checked == 50 && diverged == 0;
    detail += to_string(t) + ": " + std::to_string(checked - diverged) + "/" + std::to_string(checked) +
              " epochs identical; ";
  }
  const bool same_csv = raw[TransportKind::kInProcess] == raw[TransportKind::kNetwork];
  const double secs = seconds_since(t0);
  detail += std::string("raw.csv ") + (same_csv ? "identical" : "DIFFERENT") + " across transports, " +
            fixed(secs, 1) + " s (< 120 s)";
  return {ok && same_csv && secs < 120.0, detail};
}

// ---- 4 -------------------------------------------------------------------

Outcome forwarder_opacity() {
  std::mutex mu;
  Bytes tapped;
  std::vector<Bytes> frames;
  BlackBoardOptions o;
  o.ingress_tap = [&](std::span<const std::uint8_t> b) {
    std::lock_guard lock(mu);
    tapped.insert(tapped.end(), b.begin(), b.end());
    frames.emplace_back(b.begin(), b.end());
  };
  BlackBoard bb(o);
  bb.start();

  const SharedKey key = SharedKey::generate();
  const std::uint64_t seed = 4;
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::unique_ptr<FederationSession>> sessions;
  std::vector<Participant> ps;
  for (const char* id : {"A", "B"}) {
    const std::uint64_t as = derive_seed(seed, id);
    agents.push_back(std::make_unique<Agent>(
        id, init_model(derive_seed(seed, "model"), split_topology(id), id), AgentHyperparams{}, as));
    const SenderId sid = sender_id_for(as);
    sessions.push_back(std::make_unique<FederationSession>(
        sid, key, TcpEndpoint::connect({"127.0.0.1", bb.port()}, sid)));
  }
  for (std::size_t i = 0; i < 2; ++i)
    ps.push_back({agents[i].get(), EnvConfig{}, derive_seed(seed, i), sessions[i].get()});

  std::vector<Bytes> plaintexts;
  for (std::uint32_t e = 0; e < 5; ++e) {
    const EpochResult r = run_epoch(ps, e);
    for (const auto& t : r.training) plaintexts.push_back(encode_delta_payload(t.global_delta));
  }
  sessions.clear();
  bb.stop();

  // Any 32-byte window of any plaintext delta appearing on the wire counts as a leak.
  std::size_t leaks = 0;
  for (const auto& p : plaintexts) {
    for (std::size_t off = 0; off + 32 <= p.size(); off += 32) {
      if (std::search(tapped.begin(), tapped.end(), p.begin() + off, p.begin() + off + 32) != tapped.end())
        ++leaks;
    }
  }

  std::size_t deltas = 0, tamper_caught = 0, tamper_tried = 0;
  for (const auto& wire : frames) {
    const GradientFrame f = decode_frame(wire);
    if (f.msg_type != MsgType::kDelta) continue;
    ++deltas;
    for (std::size_t at : {std::size_t{5 + 1 + 3}, std::size_t{22}, wire.size() / 2, wire.size() - 1}) {
      Bytes bad = wire;
      bad[at] ^= 0x01;
      ++tamper_tried;
      try {
        open(decode_frame(bad), key);
      } catch (const AuthError&) {
        ++tamper_caught;
      } catch (const DecodeError&) {
        ++tamper_caught;
      }
    }
  }
  const bool ok = leaks == 0 && deltas == 10 && plaintexts.size() == 10 && tamper_caught == tamper_tried;
  return {ok, std::to_string(tapped.size()) + " bytes observed, " + std::to_string(deltas) +
                  " DELTA frames, plaintext hits " + std::to_string(leaks) + "; tampered frames rejected " +
                  std::to_string(tamper_caught) + "/" + std::to_string(tamper_tried)};
}

// ---- 5 -------------------------------------------------------------------

Outcome same_group_benefit() {
  const auto t0 = Clock::now();
  const Window w{20, 40};
  const double coop = wmean(experiment(Group::kSame, Mode::kCoop, 100), "A", w);
  const double solo = wmean(experiment(Group::kSame, Mode::kSoloA, 100), "A", w);
  const MarginCheck c = check_margin("SAME coop A", coop, "SOLO_A", solo, 0.20);
  g_report << "criterion 5, epochs [20,40):\n  " << format_check(c) << "\n";
  const double secs = seconds_since(t0);
  return {c.pass && secs < 600.0, "coop A " + fixed(coop) + " vs SOLO_A " + fixed(solo) + " over [20,40), ratio " +
                                      fixed(coop / solo, 3) + " (>= 1.200), " + fixed(secs, 1) + " s"};
}

// ---- 6 -------------------------------------------------------------------

Outcome totally_diff_degeneracy() {
  const CurveSet& c = experiment(Group::kTotallyDiff, Mode::kCoop, 100);
  const std::size_t b = agent_index(c, "B");
  std::size_t nonzero = 0, total = 0;
  for (const auto& run : c.raw) {
    for (double r : run[b]) {
      nonzero += r != 0.0;
      ++total;
    }
  }
  return {nonzero == 0 && total == 1000,
          std::to_string(nonzero) + " non-zero returns for agent B in " + std::to_string(total) + " episodes"};
}

// ---- 7 -------------------------------------------------------------------

bool g_ordering_flagged = false;

Outcome similarity_ordering() {
  const Window w{20, 60};
  const double same = wmean(experiment(Group::kSame, Mode::kCoop, 100), "A", w);
  const double similar = wmean(experiment(Group::kSimilar, Mode::kCoop, 60), "A", w);
  const double tall = wmean(experiment(Group::kDiffTall, Mode::kCoop, 60), "A", w);
  const double fat = wmean(experiment(Group::kDiffFat, Mode::kCoop, 60), "A", w);
  const double totally = wmean(experiment(Group::kTotallyDiff, Mode::kCoop, 100), "A", w);
  const double solo = wmean(experiment(Group::kSame, Mode::kSoloA, 100), "A", w);

  std::vector<MarginCheck> checks{
      check_margin("SAME", same, "SIMILAR", similar, 0.05),
      check_margin("SIMILAR", similar, "max(DIFF_TALL,DIFF_FAT)", std::max(tall, fat), 0.05),
      check_margin("SAME", same, "SOLO_A", solo, 0.05),
      check_margin("SIMILAR", similar, "SOLO_A", solo, 0.05),
      check_margin("DIFF_TALL", tall, "SOLO_A", solo, 0.05),
      check_margin("DIFF_FAT", fat, "SOLO_A", solo, 0.05),
      check_margin("TOTALLY_DIFF", totally, "SOLO_A", solo, 0.05),
  };
  g_report << "criterion 7, coop agent A, epochs [20,60), seeds 0..9:\n";
  std::size_t flagged = 0;
  std::string which;
  for (const auto& c : checks) {
    g_report << "  " << format_check(c) << "\n";
    if (!c.pass) {
      ++flagged;
      which += (which.empty() ? "" : ", ") + c.lhs + ">=" + c.rhs;
    }
  }
  g_ordering_flagged = flagged > 0;
  std::string detail = "SAME " + fixed(same) + ", SIMILAR " + fixed(similar) + ", DIFF_TALL " + fixed(tall) +
                       ", DIFF_FAT " + fixed(fat) + ", TOTALLY_DIFF " + fixed(totally) + ", SOLO_A " +
                       fixed(solo) + "; " + std::to_string(checks.size() - flagged) + "/" +
                       std::to_string(checks.size()) + " margins hold";
  if (flagged) detail += "; FLAGGED: " + which + " (statistical, see report)";
  return {flagged == 0, detail};
}

// ---- 8 -------------------------------------------------------------------

Outcome polyfit_oracle() {
  std::mt19937_64 gen(8);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = std::uniform_int_distribution<int>(10, 200)(gen);
    std::uniform_real_distribution<double> xd(0.0, 4.0), yd(-100.0, 200.0);
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = xd(gen);
      ys[i] = yd(gen);
    }
    const auto got = polyfit(xs, ys, 4);
    long double a[5][6] = {};
    for (int k = 0; k < n; ++k) {
      long double p[9];
      p[0] = 1;
      for (int i = 1; i < 9; ++i) p[i] = p[i - 1] * xs[k];
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) a[i][j] += p[i + j];
        a[i][5] += p[i] * ys[k];
      }
    }
    for (int c = 0; c < 5; ++c) {
      int piv = c;
      for (int r = c + 1; r < 5; ++r)
        if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
      for (int j = 0; j < 6; ++j) std::swap(a[c][j], a[piv][j]);
      for (int r = 0; r < 5; ++r) {
        if (r == c) continue;
        const long double f = a[r][c] / a[c][c];
        for (int j = c; j < 6; ++j) a[r][j] -= f * a[c][j];
      }
    }
    long double diff = 0, norm = 0;
    for (int i = 0; i < 5; ++i) {
      const long double want = a[i][5] / a[i][i];
      diff += (got[i] - want) * (got[i] - want);
      norm += want * want;
    }
    worst = std::max(worst, static_cast<double>(std::sqrt(diff / norm)));
  }
  return {worst < 1e-8, "50 instances, worst relative coefficient error " + sci(worst) + " (< 1e-8)"};
}

// ---- 9 -------------------------------------------------------------------

Outcome turn_order_effect() {
  const Window w{20, 60};
  const CurveSet& c = experiment(Group::kSimilar, Mode::kCoop, 60);
  const double a = wmean(c, "A", w), b = wmean(c, "B", w);
  g_report << "criterion 9, SIMILAR coop, epochs [20,60): A " << fixed(a) << ", B " << fixed(b) << "\n";
  return {a >= b, "SIMILAR coop over [20,60): agent A " + fixed(a) + " >= agent B " + fixed(b)};
}

// ---- 10 ------------------------------------------------------------------

Outcome golden_vectors() {
  std::ifstream in(std::string(FEDSPLIT_GOLDEN_DIR) + "/frames.txt");
  if (!in) return {false, "cannot read golden/frames.txt"};
  SharedKey key = SharedKey::generate();
  std::vector<std::map<std::string, std::string>> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    const std::string k = line.substr(0, sp), v = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (k == "key") key = SharedKey::from_hex(v);
    else if (k == "frame") frames.push_back({{"name", v}});
    else if (k != "end" && !frames.empty()) frames.back()[k] = v;
  }
  auto doubles = [](const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      double d = 0;
      std::from_chars(tok.data(), tok.data() + tok.size(), d);
      out.push_back(d);
    }
    return out;
  };
  std::size_t ok = 0;
  for (auto& f : frames) {
    try {
      const Bytes wire = from_hex(f.at("wire"));
      const GradientFrame fr = decode_frame(wire);
      bool good = encode_frame(fr) == wire && sender_hex(fr.sender_id) == f.at("sender");
      if (f.at("type") == "DELTA") {
        const auto shape = doubles(f.at("shape"));
        const LayerDelta want{f.at("layer"),
                              Matrix(static_cast<std::size_t>(shape[0]), static_cast<std::size_t>(shape[1]),
                                     doubles(f.at("weights"))),
                              doubles(f.at("bias"))};
        good = good && open(fr, key) == want && fr.epoch == std::stoul(f.at("epoch")) &&
               fr.seq == std::stoull(f.at("seq"));
      } else {
        good = good && fr.msg_type == MsgType::kHello;
      }
      ok += good;
    } catch (const std::exception& e) {
      std::cerr << "  golden frame " << f["name"] << ": " << e.what() << "\n";
    }
  }
  return {ok == frames.size() && frames.size() >= 3,
          std::to_string(ok) + "/" + std::to_string(frames.size()) + " committed frames decode, open and re-encode exactly"};
}

}  // namespace

int main(int argc, char** argv) {
  g_scratch = fs::temp_directory_path() / "fedsplit_acceptance";
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--scratch") == 0 && i + 1 < argc) {
      g_scratch = argv[++i];
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--scratch DIR] [--only N]...\n";
      return 2;
    }
  }
  fs::create_directories(g_scratch);
  g_report.open(g_scratch / "report.txt");

  struct Criterion {
    int id;
    const char* name;
    bool statistical;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient exactness", false, gradient_exactness},
      {2, "physics oracle", false, physics_oracle},
      {3, "global consistency", false, global_consistency},
      {4, "forwarder opacity", false, forwarder_opacity},
      {5, "SAME-group benefit", false, same_group_benefit},
      {6, "TOTALLY_DIFF degeneracy", false, totally_diff_degeneracy},
      {7, "similarity ordering", true, similarity_ordering},
      {8, "polyfit oracle", false, polyfit_oracle},
      {9, "turn-order effect", false, turn_order_effect},
      {10, "protocol golden vectors", false, golden_vectors},
  };

  int hard_failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << std::setw(2) << c.id << "] " << c.name << ": "
              << o.detail << (c.statistical && !o.pass ? "  [statistical: flagged, non-fatal]" : "")
              << std::endl;
    g_report << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << "\n";
    if (!o.pass && !c.statistical) ++hard_failures;
  }
  std::cout << "report and curves: " << g_scratch.string() << std::endl;
  return hard_failures == 0 ? 0 : 1;
}
