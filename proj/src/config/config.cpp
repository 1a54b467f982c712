// Copyright 2026 The ChainCraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chaincraft/config/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "chaincraft/errors.hpp"

namespace chaincraft::config {
namespace {

const char* KlName(agent::KlDirection d) {
  return d == agent::KlDirection::kReplayToCurrent ? "replay_to_current" : "current_to_replay";
}

// Single description of the file layout, walked by the reader, the YAML
// writer and the JSON writer.
template <typename V>
void Visit(V& v, Config& c) {
  v.Section("env", [&](V& s) {
    s.Field("grid_size", c.env.grid_size);
    s.Field("view_radius", c.env.view_radius);
    s.Field("max_frames", c.env.max_frames);
    s.Field("tree_density", c.env.tree_density);
    s.Field("stone_density", c.env.stone_density);
    s.Field("iron_density", c.env.iron_density);
    s.Field("diamond_ratio", c.env.diamond_ratio);
    s.Field("wall_density", c.env.wall_density);
    s.Field("lava", c.env.lava);
    s.Field("lava_density", c.env.lava_density);
    s.Field("turn_granularity_deg", c.env.turn_granularity_deg);
  });
  v.Section("demos", [&](V& s) {
    s.Field("count", c.demos.count);
    s.Field("noise", c.demos.noise);
    s.Field("seed", c.demos.seed);
    s.Field("fine_rotation", c.demos.fine_rotation);
    s.Field("max_attempts", c.demos.max_attempts);
  });
  v.Section("subsample", [&](V& s) {
    s.Field("truncation", c.subsample.truncation);
    s.Field("excluded_heads", c.subsample.excluded_heads);
    s.Field("turn_threshold_deg", c.subsample.turn_threshold_deg);
  });
  v.Section("network", [&](V& s) {
    s.Enum("encoder", c.network.encoder,
           {{"residual", agent::EncoderKind::kResidual}, {"mlp", agent::EncoderKind::kMlp}});
    s.Field("residual_blocks", c.network.residual_blocks);
    s.Field("convs_per_block", c.network.convs_per_block);
    s.Field("channels", c.network.channels);
    s.Field("spatial_units", c.network.spatial_units);
    s.Field("nonspatial_units", c.network.nonspatial_units);
    s.Field("lstm_hidden", c.network.lstm_hidden);
    s.Field("inventory_subnet", c.network.inventory_subnet);
    s.Field("inventory_units", c.network.inventory_units);
  });
  v.Section("pretrain", [&](V& s) {
    s.Field("epochs", c.pretrain.epochs);
    s.Field("learning_rate", c.pretrain.learning_rate);
    s.Field("batch_size", c.pretrain.batch_size);
    s.Field("bptt_window", c.pretrain.bptt_window);
    s.Field("holdout_fraction", c.pretrain.holdout_fraction);
    s.Field("max_grad_norm", c.pretrain.max_grad_norm);
    s.Field("head_weights", c.pretrain.head_weights);
    s.Field("seed", c.pretrain.seed);
  });
  v.Section("trainer", [&](V& s) {
    auto& t = c.trainer;
    s.Section("flags", [&](V& f) {
      f.Field("er", t.flags.er);
      f.Field("sac", t.flags.sac);
      f.Field("ac", t.flags.ac);
      f.Field("cl", t.flags.cl);
    });
    s.Field("replay_ratio", t.replay_ratio);
    s.Field("frame_budget", t.frame_budget);
    s.Field("warmup_fraction", t.warmup_fraction);
    s.Field("actors", t.actors);
    s.Field("segment_length", t.segment_length);
    s.Field("batch_segments", t.batch_segments);
    s.Field("replay_capacity", t.replay_capacity);
    s.Field("queue_capacity", t.queue_capacity);
    s.Field("discount", t.discount);
    s.Field("reward_scale", t.reward_scale);
    s.Field("rho_bar", t.rho_bar);
    s.Field("c_bar", t.c_bar);
    s.Section("loss_weights", [&](V& w) {
      w.Field("policy_gradient", t.loss_weights.policy_gradient);
      w.Field("value", t.loss_weights.value);
      w.Field("entropy", t.loss_weights.entropy);
      w.Field("policy_cloning", t.loss_weights.policy_cloning);
      w.Field("value_cloning", t.loss_weights.value_cloning);
    });
    s.Enum("kl_direction", t.kl_direction,
           {{KlName(agent::KlDirection::kReplayToCurrent), agent::KlDirection::kReplayToCurrent},
            {KlName(agent::KlDirection::kCurrentToReplay), agent::KlDirection::kCurrentToReplay}});
    s.Field("learning_rate", t.learning_rate);
    s.Field("max_grad_norm", t.max_grad_norm);
    s.Field("seed", t.seed);
    s.Field("curve_points", t.curve_points);
  });
  v.Section("eval", [&](V& s) {
    s.Field("episodes", c.eval.episodes);
    s.Field("seed_base", c.eval.seed_base);
    s.Field("greedy", c.eval.greedy);
  });
}

template <typename E>
using EnumTable = std::initializer_list<std::pair<const char*, E>>;

std::string Describe(const YAML::Node& node) {
  std::ostringstream s;
  if (node.Mark().line >= 0) s << " (line " << node.Mark().line + 1 << ")";
  return s.str();
}

class Reader {
 public:
  Reader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigurationError(Where() + ": expected a mapping" + Describe(node_));
    }
  }

  template <typename Fn>
  void Section(const char* key, Fn fn) {
    known_.insert(key);
    Reader child(Get(key), path_ + key + ".");
    fn(child);
    child.RejectUnknown();
  }

  template <typename T>
  void Field(const char* key, T& out) {
    known_.insert(key);
    const YAML::Node n = Get(key);
    if (!n || n.IsNull()) return;
    Convert(n, path_ + key, out);
  }

  template <typename E>
  void Enum(const char* key, E& out, EnumTable<E> table) {
    known_.insert(key);
    const YAML::Node n = Get(key);
    if (!n || n.IsNull()) return;
    std::string name;
    Convert(n, path_ + key, name);
    std::string options;
    for (const auto& [label, value] : table) {
      if (name == label) {
        out = value;
        return;
      }
      options += std::string(options.empty() ? "" : ", ") + label;
    }
    throw ConfigurationError(path_ + key + ": unknown value '" + name + "' (expected one of " +
                             options + ")" + Describe(n));
  }

  void RejectUnknown() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!known_.count(key)) {
        throw ConfigurationError("unknown key '" + path_ + key + "'" + Describe(kv.first));
      }
    }
  }

 private:
  YAML::Node Get(const char* key) const {
    if (!node_ || !node_.IsMap()) return YAML::Node();
    const YAML::Node& c = node_;
    return c[key];
  }

  std::string Where() const { return path_.empty() ? "<root>" : path_.substr(0, path_.size() - 1); }

  static void RequireScalar(const YAML::Node& n, const std::string& key, const char* type) {
    if (!n.IsScalar()) {
      throw ConfigurationError(key + ": expected " + type + Describe(n));
    }
  }

  template <typename T>
  static T Scalar(const YAML::Node& n, const std::string& key, const char* type) {
    RequireScalar(n, key, type);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigurationError(key + ": expected " + type + ", got '" + n.Scalar() + "'" +
                               Describe(n));
    }
  }

  static void Convert(const YAML::Node& n, const std::string& key, int& out) {
    out = Scalar<int>(n, key, "an integer");
  }
  static void Convert(const YAML::Node& n, const std::string& key, std::int64_t& out) {
    out = Scalar<std::int64_t>(n, key, "an integer");
  }
  static void Convert(const YAML::Node& n, const std::string& key, std::uint64_t& out) {
    RequireScalar(n, key, "a non-negative integer");
    if (!n.Scalar().empty() && n.Scalar()[0] == '-') {
      throw ConfigurationError(key + ": expected a non-negative integer" + Describe(n));
    }
    out = Scalar<std::uint64_t>(n, key, "a non-negative integer");
  }
  static void Convert(const YAML::Node& n, const std::string& key, double& out) {
    out = Scalar<double>(n, key, "a number");
  }
  static void Convert(const YAML::Node& n, const std::string& key, bool& out) {
    out = Scalar<bool>(n, key, "a boolean");
  }
  static void Convert(const YAML::Node& n, const std::string& key, std::string& out) {
    out = Scalar<std::string>(n, key, "a string");
  }
  static void Convert(const YAML::Node& n, const std::string& key, std::vector<int>& out) {
    if (!n.IsSequence()) throw ConfigurationError(key + ": expected a list" + Describe(n));
    out.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      int v = 0;
      Convert(n[i], key + "[" + std::to_string(i) + "]", v);
      out.push_back(v);
    }
  }
  template <std::size_t N>
  static void Convert(const YAML::Node& n, const std::string& key, std::array<double, N>& out) {
    if (!n.IsSequence() || n.size() != N) {
      throw ConfigurationError(key + ": expected a list of " + std::to_string(N) + " numbers" +
                               Describe(n));
    }
    for (std::size_t i = 0; i < N; ++i) Convert(n[i], key + "[" + std::to_string(i) + "]", out[i]);
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> known_;
};

class YamlWriter {
 public:
  explicit YamlWriter(YAML::Emitter& out) : out_(out) {}

  template <typename Fn>
  void Section(const char* key, Fn fn) {
    out_ << YAML::Key << key << YAML::Value << YAML::BeginMap;
    fn(*this);
    out_ << YAML::EndMap;
  }

  template <typename T>
  void Field(const char* key, const T& value) {
    out_ << YAML::Key << key << YAML::Value;
    Put(value);
  }

  template <typename E>
  void Enum(const char* key, const E& value, EnumTable<E> table) {
    for (const auto& [label, v] : table) {
      if (v == value) {
        out_ << YAML::Key << key << YAML::Value << label;
        return;
      }
    }
  }

 private:
  template <typename T>
  void Put(const T& v) {
    out_ << v;
  }
  void Put(const std::uint64_t& v) { out_ << static_cast<unsigned long long>(v); }
  void Put(const std::int64_t& v) { out_ << static_cast<long long>(v); }
  void Put(const std::vector<int>& v) {
    out_ << YAML::Flow << YAML::BeginSeq;
    for (int x : v) out_ << x;
    out_ << YAML::EndSeq;
  }
  template <std::size_t N>
  void Put(const std::array<double, N>& v) {
    out_ << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out_ << x;
    out_ << YAML::EndSeq;
  }

  YAML::Emitter& out_;
};

class JsonWriter {
 public:
  explicit JsonWriter(nlohmann::json& out) : out_(out) {}

  template <typename Fn>
  void Section(const char* key, Fn fn) {
    nlohmann::json child = nlohmann::json::object();
    JsonWriter w(child);
    fn(w);
    out_[key] = std::move(child);
  }

  template <typename T>
  void Field(const char* key, const T& value) {
    out_[key] = value;
  }

  template <typename E>
  void Enum(const char* key, const E& value, EnumTable<E> table) {
    for (const auto& [label, v] : table) {
      if (v == value) out_[key] = label;
    }
  }

 private:
  nlohmann::json& out_;
};

}  // namespace

void Config::Validate() {
  env.Validate();
  if (demos.count < 1) throw ConfigurationError("demos.count must be >= 1");
  if (!(demos.noise >= 0.0 && demos.noise <= 1.0)) {
    throw ConfigurationError("demos.noise must be in [0, 1]");
  }
  if (demos.max_attempts < 1) throw ConfigurationError("demos.max_attempts must be >= 1");
  if (subsample.turn_threshold_deg < 1) {
    throw ConfigurationError("subsample.turn_threshold_deg must be >= 1");
  }
  for (int h : subsample.excluded_heads) {
    if (h < 0 || h >= env::kHeadCount || h == env::kStep) {
      throw ConfigurationError("subsample.excluded_heads: invalid head index " +
                               std::to_string(h));
    }
  }
  network.Validate();
  if (network.view_side != 2 * env.view_radius + 1) {
    throw ConfigurationError("network view size must equal 2 * env.view_radius + 1");
  }
  pretrain.Validate();
  trainer.Normalize();
  eval.Validate();
}

Config ParseConfig(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigurationError(std::string("config is not valid YAML: ") + e.what());
  }
  Config config;
  Reader reader(root, "");
  Visit(reader, config);
  reader.RejectUnknown();
  config.network.view_side = 2 * config.env.view_radius + 1;
  config.Validate();
  return config;
}

Config LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseConfig(buffer.str());
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

std::string SerializeConfig(const Config& config) {
  Config copy = config;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  YamlWriter writer(out);
  Visit(writer, copy);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void SaveConfig(const std::filesystem::path& path, const Config& config) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write config file " + path.string());
  out << SerializeConfig(config);
}

nlohmann::json ConfigToJson(const Config& config) {
  Config copy = config;
  nlohmann::json j = nlohmann::json::object();
  JsonWriter writer(j);
  Visit(writer, copy);
  return j;
}

void ApplyOverride(Config& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigurationError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  YAML::Node root = YAML::Load(SerializeConfig(config));
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  YAML::Node node = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node[parts[i]] || !node[parts[i]].IsMap()) {
      throw ConfigurationError("unknown key '" + path + "'");
    }
    node.reset(node[parts[i]]);
  }
  if (!node[parts.back()]) throw ConfigurationError("unknown key '" + path + "'");
  try {
    node[parts.back()] = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigurationError("override " + path + ": " + e.what());
  }
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  config = ParseConfig(out.c_str());
}

void ApplyOverrides(Config& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) ApplyOverride(config, a);
}

std::string EncoderName(agent::EncoderKind kind) {
  return kind == agent::EncoderKind::kResidual ? "residual" : "mlp";
}

}  // namespace chaincraft::config
