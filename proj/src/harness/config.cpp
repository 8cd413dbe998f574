#include "cvo/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cvo::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string> parse_list(const std::string& raw) {
  std::string body = raw;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw std::invalid_argument("config: unterminated list '" + raw + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("config: " + key + " expects true or false, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(v, &used));
    } else if constexpr (std::is_signed_v<T>) {
      out = static_cast<T>(std::stoll(v, &used));
    } else {
      if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
      out = static_cast<T>(std::stoull(v, &used));
    }
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::logic_error&) {
    throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::filesystem::path RunConfig::resolved_cache_dir() const {
  return cache_dir.empty() ? output_dir / "data" : cache_dir;
}

strategies::StrategyConfig RunConfig::strategy(const std::string& label) const {
  strategies::StrategyConfig s = strategies::parse_strategy(label);
  s.max_epochs = max_epochs;
  s.batch_size = batch_size;
  s.learning_rate = learning_rate;
  s.patience = patience;
  s.fisher_samples = fisher_samples;
  s.action_conditioned = action_conditioned;
  return s;
}

void RunConfig::validate() const {
  if (n_train_apartments < 1) throw std::invalid_argument("config: n_train_apartments must be >= 1");
  if (n_holdout_apartments < 0)
    throw std::invalid_argument("config: n_holdout_apartments must be >= 0");
  if (samples_per_apartment < 50)
    throw std::invalid_argument("config: samples_per_apartment must be >= 50");
  if (strategies.empty()) throw std::invalid_argument("config: strategies must be nonempty");
  for (const auto& label : strategies) strategy(label).validate();
}

std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  os << "master_seed = " << master_seed << "\n";
  os << "n_train_apartments = " << n_train_apartments << "\n";
  os << "n_holdout_apartments = " << n_holdout_apartments << "\n";
  os << "samples_per_apartment = " << samples_per_apartment << "\n";
  os << "strategies = [";
  for (std::size_t i = 0; i < strategies.size(); ++i) os << (i ? ", " : "") << strategies[i];
  os << "]\n";
  os << "action_conditioned = " << (action_conditioned ? "true" : "false") << "\n";
  os << "preset = " << nn::preset_name(preset) << "\n";
  os << "scratch = " << (scratch ? "true" : "false") << "\n";
  os << "joint = " << (joint ? "true" : "false") << "\n";
  os << "max_epochs = " << max_epochs << "\n";
  os << "batch_size = " << batch_size << "\n";
  os << "learning_rate = " << format_double(learning_rate) << "\n";
  os << "patience = " << patience << "\n";
  os << "fisher_samples = " << fisher_samples << "\n";
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section headers are ignored
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    const std::string v = unquote(raw);

    if (key == "master_seed" || key == "seed") c.master_seed = parse_number<std::uint64_t>(key, v);
    else if (key == "n_train_apartments") c.n_train_apartments = parse_number<int>(key, v);
    else if (key == "n_holdout_apartments") c.n_holdout_apartments = parse_number<int>(key, v);
    else if (key == "samples_per_apartment") c.samples_per_apartment = parse_number<int>(key, v);
    else if (key == "strategies") c.strategies = parse_list(raw);
    else if (key == "action_conditioned") c.action_conditioned = parse_bool(key, v);
    else if (key == "preset") c.preset = nn::parse_preset(v);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "cache_dir") c.cache_dir = v;
    else if (key == "scratch") c.scratch = parse_bool(key, v);
    else if (key == "joint") c.joint = parse_bool(key, v);
    else if (key == "save_checkpoints") c.save_checkpoints = parse_bool(key, v);
    else if (key == "max_epochs") c.max_epochs = parse_number<int>(key, v);
    else if (key == "batch_size") c.batch_size = parse_number<int>(key, v);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, v);
    else if (key == "patience") c.patience = parse_number<int>(key, v);
    else if (key == "fisher_samples") c.fisher_samples = parse_number<std::size_t>(key, v);
    else throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void apply_env_overrides(RunConfig& config) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0')
    config.output_dir = dir;
}

}  // namespace cvo::harness
