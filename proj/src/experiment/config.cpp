#include "fedsplit/experiment/spec.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fedsplit {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used == v.size() && v.find('-') == std::string::npos) return n;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
}

void apply_env(const std::map<std::string, std::string>& kv, EnvConfig& env) {
  for (const auto& [k, v] : kv) {
    if (k == "kind") env.kind = env_kind_from_string(v);
    else if (k == "gravity") env.gravity = to_double(k, v);
    else if (k == "cart_mass") env.cart_mass = to_double(k, v);
    else if (k == "pole_mass") env.pole_mass = to_double(k, v);
    else if (k == "pole_half_length") env.pole_half_length = to_double(k, v);
    else if (k == "force_mag") env.force_mag = to_double(k, v);
    else if (k == "max_steps") env.max_steps = static_cast<int>(to_count(k, v));
    else if (k == "angle_limit") env.angle_limit = to_double(k, v);
    else if (k == "position_limit") env.position_limit = to_double(k, v);
    else throw std::invalid_argument("config: unknown env key '" + k + "'");
  }
}

void apply_agent(const std::map<std::string, std::string>& kv, AgentHyperparams& hp) {
  for (const auto& [k, v] : kv) {
    if (k == "gamma") hp.gamma = to_double(k, v);
    else if (k == "lr") hp.lr = to_double(k, v);
    else if (k == "epsilon_start") hp.epsilon_start = to_double(k, v);
    else if (k == "epsilon_end") hp.epsilon_end = to_double(k, v);
    else if (k == "epsilon_decay") hp.epsilon_decay = to_double(k, v);
    else if (k == "batch_size") hp.batch_size = to_count(k, v);
    else if (k == "train_steps_per_epoch") hp.train_steps_per_epoch = to_count(k, v);
    else if (k == "buffer_capacity") hp.buffer_capacity = to_count(k, v);
    else if (k == "reward_scale") hp.reward_scale = to_double(k, v);
    else throw std::invalid_argument("config: unknown agent key '" + k + "'");
  }
}

}  // namespace

ConfigSections parse_config(const std::string& text) {
  ConfigSections out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value inside a section");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    }
    out[section][key] = value;
  }
  return out;
}

ConfigSections load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void apply_config(const ConfigSections& cfg, ExperimentSpec& spec) {
  if (auto it = cfg.find("experiment"); it != cfg.end()) {
    const auto& kv = it->second;
    Group g = spec.group;
    Mode m = spec.mode;
    if (auto k = kv.find("group"); k != kv.end()) g = group_from_string(k->second);
    if (auto k = kv.find("mode"); k != kv.end()) m = mode_from_string(k->second);
    if (g != spec.group || m != spec.mode) {
      ExperimentSpec fresh = make_spec(g, m);
      fresh.epochs = spec.epochs;
      fresh.runs = spec.runs;
      fresh.base_seed = spec.base_seed;
      fresh.transport = spec.transport;
      fresh.blackboard = spec.blackboard;
      fresh.key_hex = spec.key_hex;
      spec = fresh;
    }
    for (const auto& [k, v] : kv) {
      if (k == "group" || k == "mode") continue;
      if (k == "runs") spec.runs = to_count(k, v);
      else if (k == "epochs") spec.epochs = to_count(k, v);
      else if (k == "seed") spec.base_seed = to_count(k, v);
      else throw std::invalid_argument("config: unknown experiment key '" + k + "'");
    }
  }
  for (const auto& [section, kv] : cfg) {
    if (section == "experiment") continue;
    if (section == "env.A") apply_env(kv, spec.agents[0].env);
    else if (section == "env.B") apply_env(kv, spec.agents[1].env);
    else if (section == "agent.A") apply_agent(kv, spec.agents[0].hp);
    else if (section == "agent.B") apply_agent(kv, spec.agents[1].hp);
    else if (section == "federation") {
      for (const auto& [k, v] : kv) {
        if (k == "transport") spec.transport = transport_from_string(v);
        else if (k == "bb") spec.blackboard = net::parse_address(v);
        else if (k == "key") spec.key_hex = v;
        else throw std::invalid_argument("config: unknown federation key '" + k + "'");
      }
    } else {
      throw std::invalid_argument("config: unknown section [" + section + "]");
    }
  }
}

}  // namespace fedsplit
