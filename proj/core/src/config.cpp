#include "mnl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mnl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t parse_size(std::string_view key, std::string_view text) {
  return static_cast<std::size_t>(parse_u64(key, text));
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

double parse_double(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("key '" + std::string(key) + "': not a number: '" +
                                std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("key '" + std::string(key) + "': not an unsigned integer: '" +
                                std::string(text) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

double ExperimentConfig::v0_for(std::size_t k) const {
  return v0_per_k_divisor > 0.0 ? static_cast<double>(k) / v0_per_k_divisor : v0;
}

PolicyParams ExperimentConfig::policy_params() const {
  PolicyParams p;
  p.delta = delta;
  p.beta_scale = beta_scale;
  p.c_ucb = c_ucb;
  p.ts_a = ts_a;
  p.lambda0 = lambda0;
  return p;
}

void ExperimentConfig::check() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (d == 0) fail("d must be positive");
  if (k_values.empty()) fail("k needs at least one value");
  if (std::find(k_values.begin(), k_values.end(), std::size_t{0}) != k_values.end()) {
    fail("k must be positive");
  }
  if (t_rounds == 0) fail("t_rounds must be >= 1");
  if (num_instances == 0) fail("num_instances must be >= 1");
  if (v0_per_k_divisor <= 0.0 && !(v0 > 0.0)) fail("v0 must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) fail("delta must lie in (0, 1]");
  if (!(beta_scale >= 0.0)) fail("beta_scale must be nonnegative");
  if (!(c_ucb >= 0.0)) fail("c_ucb must be nonnegative");
  if (!(ts_a >= 0.0)) fail("ts_a must be nonnegative");
  if (!(lambda0 > 0.0)) fail("lambda0 must be positive");
  if (policies.empty()) fail("policies must name at least one policy");
  const auto known = known_policies();
  for (const auto& p : policies) {
    if (std::find(known.begin(), known.end(), p) == known.end()) fail("unknown policy '" + p + "'");
  }
  if (reward_mode == RewardMode::kAdversarial) {
    if (d % 4 != 0) fail("adversarial instances need d divisible by 4");
  } else if (n_items == 0) {
    fail("n_items must be positive");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  const KeyValues kv = parse_key_values(text);
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "d") {
      c.d = parse_size(key, value);
    } else if (key == "n_items") {
      c.n_items = parse_size(key, value);
    } else if (key == "k") {
      c.k_values.clear();
      for (const auto& item : split_list(value)) c.k_values.push_back(parse_size(key, item));
    } else if (key == "t_rounds") {
      c.t_rounds = parse_size(key, value);
    } else if (key == "v0") {
      std::string_view v = value;
      if (v.size() > 2 && (v[0] == 'k' || v[0] == 'K') && v[1] == '/') {
        c.v0_per_k_divisor = parse_double(key, v.substr(2));
        if (!(c.v0_per_k_divisor > 0.0)) throw std::invalid_argument("v0: divisor must be positive");
      } else {
        c.v0 = parse_double(key, v);
        c.v0_per_k_divisor = 0.0;
      }
    } else if (key == "reward_mode") {
      c.reward_mode = parse_reward_mode(value);
    } else if (key == "policies") {
      c.policies = split_list(value);
    } else if (key == "num_instances") {
      c.num_instances = parse_size(key, value);
    } else if (key == "base_seed") {
      c.base_seed = parse_u64(key, value);
    } else if (key == "delta") {
      c.delta = parse_double(key, value);
    } else if (key == "beta_scale") {
      c.beta_scale = parse_double(key, value);
    } else if (key == "c_ucb") {
      c.c_ucb = parse_double(key, value);
    } else if (key == "ts_a") {
      c.ts_a = parse_double(key, value);
    } else if (key == "lambda0") {
      c.lambda0 = parse_double(key, value);
    } else if (key == "out_path") {
      c.out_path = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.check();
  return c;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto join = [](const auto& items) {
    std::string s;
    for (const auto& item : items) {
      if (!s.empty()) s += ',';
      if constexpr (std::is_same_v<std::decay_t<decltype(item)>, std::string>) {
        s += item;
      } else {
        s += std::to_string(item);
      }
    }
    return s;
  };
  out << "d = " << c.d << '\n'
      << "n_items = " << c.n_items << '\n'
      << "k = " << join(c.k_values) << '\n'
      << "t_rounds = " << c.t_rounds << '\n'
      << "v0 = " << (c.v0_per_k_divisor > 0.0 ? "k/" + format_double(c.v0_per_k_divisor)
                                              : format_double(c.v0))
      << '\n'
      << "reward_mode = " << to_string(c.reward_mode) << '\n'
      << "policies = " << join(c.policies) << '\n'
      << "num_instances = " << c.num_instances << '\n'
      << "base_seed = " << c.base_seed << '\n'
      << "delta = " << format_double(c.delta) << '\n'
      << "beta_scale = " << format_double(c.beta_scale) << '\n'
      << "c_ucb = " << format_double(c.c_ucb) << '\n'
      << "ts_a = " << format_double(c.ts_a) << '\n'
      << "lambda0 = " << format_double(c.lambda0) << '\n'
      << "out_path = " << c.out_path << '\n';
  return out.str();
}

}  // namespace mnl
