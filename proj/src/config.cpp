#include "fedsel/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fedsel/error.hpp"

namespace fedsel {

using nlohmann::json;

std::string_view to_string(RewardMode m) noexcept { return m == RewardMode::oracle ? "oracle" : "federated"; }

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::quick_init_ucb: return "quick_init_ucb";
    case Algorithm::bp_ucb: return "bp_ucb";
    case Algorithm::random: return "random";
    case Algorithm::round_robin: return "round_robin";
    case Algorithm::conventional_ucb: return "conventional_ucb";
    case Algorithm::oracle: return "oracle";
  }
  return "?";
}

RewardMode parse_reward_mode(std::string_view s) {
  if (s == "oracle") return RewardMode::oracle;
  if (s == "federated") return RewardMode::federated;
  throw ConfigError("unknown reward mode '" + std::string(s) + "' (oracle | federated)");
}

Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::quick_init_ucb, Algorithm::bp_ucb, Algorithm::random, Algorithm::round_robin,
                      Algorithm::conventional_ucb, Algorithm::oracle})
    if (s == to_string(a)) return a;
  throw ConfigError("unknown algorithm '" + std::string(s) +
                    "' (quick_init_ucb | bp_ucb | random | round_robin | conventional_ucb | oracle)");
}

BpParams BpConfig::params() const {
  BpParams p;
  p.c_linear = BpParams::db_to_linear(c_db);
  p.beta = beta;
  p.tol = tol;
  p.max_iter = max_iter;
  p.damping = damping;
  p.potentials = potentials;
  return p;
}

namespace {

// Reads keys from one JSON object and rejects whatever is left unread.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  std::string where(std::string_view key = {}) const {
    std::string p = path_.empty() ? "config" : path_;
    if (!key.empty()) p += "." + std::string(key);
    return p;
  }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const char* key, T& out) {
    if (const json* v = find(key)) out = convert<T>(*v, where(key));
  }

  Section child(const char* key, const json& empty) {
    const json* v = find(key);
    return Section(v ? *v : empty, where(key));
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(where(item.key()) + ": unknown key");
  }

  template <class T>
  static T convert(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
        return v.get<T>();
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        return v.get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
        return v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where + ": expected a string");
        return v.get<std::string>();
      } else {
        // std::vector<...>
        if (!v.is_array()) throw ConfigError(where + ": expected an array");
        T out;
        for (std::size_t i = 0; i < v.size(); ++i)
          out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
        return out;
      }
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E>
E parse_enum(Section& s, const char* key, E current, std::initializer_list<std::pair<const char*, E>> names) {
  const json* v = s.find(key);
  if (!v) return current;
  const std::string str = Section::convert<std::string>(*v, s.where(key));
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (str == name) return value;
    allowed += allowed.empty() ? name : std::string(" | ") + name;
  }
  throw ConfigError(s.where(key) + ": unknown value '" + str + "' (" + allowed + ")");
}

void parse_topology(Section s, TopologyConfig& t) {
  t.placement = parse_enum(s, "placement", t.placement, {{"uniform", Placement::uniform}, {"fixed", Placement::fixed}});
  s.get("area_km", t.area_km);
  if (const json* v = s.find("positions")) {
    if (!v->is_array()) throw ConfigError(s.where("positions") + ": expected an array of [x, y] pairs");
    t.positions.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto xy = Section::convert<std::vector<double>>((*v)[i], s.where("positions") + "[" + std::to_string(i) + "]");
      if (xy.size() != 2) throw ConfigError(s.where("positions") + "[" + std::to_string(i) + "]: expected [x, y]");
      t.positions.push_back({xy[0], xy[1]});
    }
  }
  s.get("link_radius_km", t.link_radius_km);
  s.get("require_connected", t.require_connected);
  s.get("placement_attempts", t.placement_attempts);
  s.finish();
}

void parse_channel(Section s, ChannelConfig& c) {
  c.mode = parse_enum(s, "mode", c.mode, {{"fixed", ChannelMode::fixed}, {"pathloss", ChannelMode::pathloss}});
  if (const json* v = s.find("theta")) {
    c.theta = v->is_array() ? Section::convert<std::vector<double>>(*v, s.where("theta"))
                            : std::vector<double>{Section::convert<double>(*v, s.where("theta"))};
  }
  s.get("tx_power_dbm", c.pathloss.tx_power_dbm);
  s.get("noise_dbm", c.pathloss.noise_dbm);
  s.get("snr_threshold_db", c.pathloss.snr_threshold_db);
  s.get("shadowing_std_db", c.pathloss.shadowing_std_db);
  s.get("min_distance_km", c.pathloss.min_distance_km);
  s.finish();
}

void parse_bp(Section s, BpConfig& b) {
  s.get("C_dB", b.c_db);
  s.get("beta", b.beta);
  s.get("tol", b.tol);
  s.get("max_iter", b.max_iter);
  s.get("damping", b.damping);
  b.potentials = parse_enum(s, "potentials", b.potentials, {{"separable", Potentials::separable}, {"ising", Potentials::ising}});
  s.finish();
}

void parse_training(Section s, TrainingParams& t) {
  s.get("batch", t.batch);
  s.get("epochs", t.epochs);
  s.get("step", t.step);
  s.get("reg", t.reg);
  s.finish();
}

void parse_data(Section s, DataConfig& d) {
  s.get("dim", d.dim);
  s.get("iid_clients", d.iid_clients);
  s.get("labels_per_noniid_client", d.labels_per_noniid_client);
  s.get("noniid_major_fraction", d.noniid_major_fraction);
  s.get("noniid_positive_share", d.noniid_positive_share);
  s.get("sizes", d.sizes);
  s.get("size_min", d.size_min);
  s.get("size_max", d.size_max);
  s.get("test_per_client", d.test_per_client);
  s.get("global_test_size", d.global_test_size);
  s.get("separation", d.separation);
  s.get("offset", d.offset);
  s.get("noise_std", d.noise_std);
  d.local_test = parse_enum(s, "local_test", d.local_test,
                            {{"global", LocalTestDistribution::global}, {"local", LocalTestDistribution::local}});
  s.finish();
}

void parse_oracle(Section s, OracleConfig& o) {
  s.get("client_quality", o.client_quality);
  s.get("arm_means", o.arm_means);
  o.distribution = parse_enum(s, "distribution", o.distribution,
                              {{"bernoulli", OpinionDistribution::bernoulli}, {"beta", OpinionDistribution::beta}});
  s.get("concentration", o.concentration);
  s.finish();
}

void parse_baselines(Section s, BaselineConfig& b) {
  s.get("round_robin_sets", b.round_robin_sets);
  s.get("optimal_set", b.optimal_set);
  s.finish();
}

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (N < 1) fail("N must be >= 1");
  if (K < 1 || K > N) fail("K must satisfy 1 <= K <= N");
  if (L < 1) fail("L must be >= 1");
  if (T < init_slots()) fail("T must be at least ceil(N/K) = " + std::to_string(init_slots()));
  if (!(mu >= 0.0) || !(mu_bp >= 0.0)) fail("mu and mu_bp must be >= 0");
  if (!(target_accuracy > 0.0 && target_accuracy < 1.0)) fail("target_accuracy must lie in (0,1)");
  for (std::size_t s : log_slots)
    if (s < 1 || s > T) fail("log_slots entries must lie in [1, T]");

  if (!(topology.area_km > 0.0)) fail("topology.area_km must be positive");
  if (!(topology.link_radius_km > 0.0)) fail("topology.link_radius_km must be positive");
  if (topology.placement == Placement::fixed && topology.positions.size() != N)
    fail("topology.positions must list N positions when placement is fixed");
  if (topology.placement_attempts < 1) fail("topology.placement_attempts must be >= 1");

  if (channel.mode == ChannelMode::fixed) {
    if (channel.theta.size() != 1 && channel.theta.size() != N) fail("channel.theta must hold 1 or N values");
    for (double t : channel.theta)
      if (!(t >= 0.0 && t <= 1.0)) fail("channel.theta values must lie in [0,1]");
  }
  if (channel.pathloss.shadowing_std_db < 0.0) fail("channel.shadowing_std_db must be >= 0");
  if (!(channel.pathloss.min_distance_km > 0.0)) fail("channel.min_distance_km must be positive");

  bp.params().validate();

  if (training.batch < 1) fail("training.batch must be >= 1");
  if (!(training.step > 0.0)) fail("training.step must be positive");
  if (!(training.reg >= 0.0)) fail("training.reg must be >= 0");

  if (data.dim < 1) fail("data.dim must be >= 1");
  for (ClientId c : data.iid_clients)
    if (c >= N) fail("data.iid_clients references a client id >= N");
  if (data.labels_per_noniid_client < 1 || data.labels_per_noniid_client > 2)
    fail("data.labels_per_noniid_client must be 1 or 2");
  if (!data.sizes.empty() && data.sizes.size() != N) fail("data.sizes must hold N values");
  for (std::size_t s : data.sizes)
    if (s < 1) fail("data.sizes entries must be >= 1");
  if (data.size_min < 1 || data.size_max < data.size_min) fail("data.size_min/size_max must satisfy 1 <= min <= max");
  if (data.test_per_client < 1 || data.global_test_size < 1) fail("data test-set sizes must be >= 1");
  if (!(data.noise_std > 0.0)) fail("data.noise_std must be positive");

  for (double q : oracle.client_quality)
    if (!(q >= 0.0 && q <= 1.0)) fail("oracle.client_quality values must lie in [0,1]");
  if (!oracle.client_quality.empty() && oracle.client_quality.size() != N) fail("oracle.client_quality must hold N values");
  for (double m : oracle.arm_means)
    if (!(m >= 0.0 && m <= 1.0)) fail("oracle.arm_means values must lie in [0,1]");
  if (!oracle.arm_means.empty() && oracle.arm_means.size() != binomial(N, K))
    fail("oracle.arm_means must hold C(N,K) values");
  if (!(oracle.concentration > 0.0)) fail("oracle.concentration must be positive");
  if (reward_mode == RewardMode::oracle && oracle.client_quality.empty() && oracle.arm_means.empty())
    fail("oracle reward mode needs oracle.client_quality or oracle.arm_means");

  for (const auto& s : baselines.round_robin_sets) normalize_client_set(s, N, K);
  if (!baselines.optimal_set.empty()) normalize_client_set(baselines.optimal_set, N, K);
  if (baselines.optimal_set.empty() && reward_mode == RewardMode::federated && data.iid_clients.size() < K)
    fail("baselines.optimal_set is required when fewer than K clients are i.i.d.");
}

ScenarioConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ScenarioConfig c;
  const json empty = json::object();
  Section s(j, "");
  s.get("N", c.N);
  s.get("K", c.K);
  s.get("T", c.T);
  s.get("L", c.L);
  s.get("mu", c.mu);
  s.get("mu_bp", c.mu_bp);
  s.get("seed", c.seed);
  c.reward_mode = parse_enum(s, "reward_mode", c.reward_mode,
                             {{"oracle", RewardMode::oracle}, {"federated", RewardMode::federated}});
  s.get("arm_cap", c.arm_cap);
  c.grouping = parse_enum(s, "grouping", c.grouping, {{"sequential", Grouping::sequential}, {"shuffled", Grouping::shuffled}});
  s.get("target_accuracy", c.target_accuracy);
  s.get("log_slots", c.log_slots);
  parse_topology(s.child("topology", empty), c.topology);
  parse_channel(s.child("channel", empty), c.channel);
  parse_bp(s.child("bp", empty), c.bp);
  parse_training(s.child("training", empty), c.training);
  parse_data(s.child("data", empty), c.data);
  parse_oracle(s.child("oracle", empty), c.oracle);
  parse_baselines(s.child("baselines", empty), c.baselines);
  s.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump_config(const ScenarioConfig& c) {
  json positions = json::array();
  for (const Point& p : c.topology.positions) positions.push_back({p.x, p.y});
  const char* pot = c.bp.potentials == Potentials::separable ? "separable" : "ising";
  json j = {
      {"N", c.N},
      {"K", c.K},
      {"T", c.T},
      {"L", c.L},
      {"mu", c.mu},
      {"mu_bp", c.mu_bp},
      {"seed", c.seed},
      {"reward_mode", std::string(to_string(c.reward_mode))},
      {"arm_cap", c.arm_cap},
      {"grouping", c.grouping == Grouping::sequential ? "sequential" : "shuffled"},
      {"target_accuracy", c.target_accuracy},
      {"log_slots", c.log_slots},
      {"topology",
       {{"placement", c.topology.placement == Placement::uniform ? "uniform" : "fixed"},
        {"area_km", c.topology.area_km},
        {"positions", positions},
        {"link_radius_km", c.topology.link_radius_km},
        {"require_connected", c.topology.require_connected},
        {"placement_attempts", c.topology.placement_attempts}}},
      {"channel",
       {{"mode", c.channel.mode == ChannelMode::fixed ? "fixed" : "pathloss"},
        {"theta", c.channel.theta},
        {"tx_power_dbm", c.channel.pathloss.tx_power_dbm},
        {"noise_dbm", c.channel.pathloss.noise_dbm},
        {"snr_threshold_db", c.channel.pathloss.snr_threshold_db},
        {"shadowing_std_db", c.channel.pathloss.shadowing_std_db},
        {"min_distance_km", c.channel.pathloss.min_distance_km}}},
      {"bp",
       {{"C_dB", c.bp.c_db},
        {"beta", c.bp.beta},
        {"tol", c.bp.tol},
        {"max_iter", c.bp.max_iter},
        {"damping", c.bp.damping},
        {"potentials", pot}}},
      {"training",
       {{"batch", c.training.batch}, {"epochs", c.training.epochs}, {"step", c.training.step}, {"reg", c.training.reg}}},
      {"data",
       {{"dim", c.data.dim},
        {"iid_clients", c.data.iid_clients},
        {"labels_per_noniid_client", c.data.labels_per_noniid_client},
        {"noniid_major_fraction", c.data.noniid_major_fraction},
        {"noniid_positive_share", c.data.noniid_positive_share},
        {"sizes", c.data.sizes},
        {"size_min", c.data.size_min},
        {"size_max", c.data.size_max},
        {"test_per_client", c.data.test_per_client},
        {"global_test_size", c.data.global_test_size},
        {"separation", c.data.separation},
        {"offset", c.data.offset},
        {"noise_std", c.data.noise_std},
        {"local_test", c.data.local_test == LocalTestDistribution::global ? "global" : "local"}}},
      {"oracle",
       {{"client_quality", c.oracle.client_quality},
        {"arm_means", c.oracle.arm_means},
        {"distribution", c.oracle.distribution == OpinionDistribution::bernoulli ? "bernoulli" : "beta"},
        {"concentration", c.oracle.concentration}}},
      {"baselines", {{"round_robin_sets", c.baselines.round_robin_sets}, {"optimal_set", c.baselines.optimal_set}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace fedsel
