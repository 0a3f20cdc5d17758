#include "ccf/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <vector>

#include "ccf/errors.hpp"
#include "ccf/io.hpp"

namespace ccf {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("config key '" + std::string(key) + "': invalid value '" + std::string(value) +
                    "' (expected " + std::string(want) + ")");
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "unsigned integer");
  return out;
}

double to_real(std::string_view key, std::string_view value) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad_value(key, value, "finite real");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true/false");
}

std::string real_text(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

struct Field {
  std::string_view key;
  std::function<void(CcfConfig&, std::string_view)> set;
  std::function<std::string(const CcfConfig&)> get;
};

#define CCF_SIZE_FIELD(name)                                                                     \
  Field {                                                                                        \
    #name, [](CcfConfig& c, std::string_view v) { c.name = static_cast<std::size_t>(to_uint(#name, v)); }, \
        [](const CcfConfig& c) { return std::to_string(c.name); }                                \
  }
#define CCF_REAL_FIELD(name)                                                                     \
  Field {                                                                                        \
    #name, [](CcfConfig& c, std::string_view v) { c.name = to_real(#name, v); },                 \
        [](const CcfConfig& c) { return real_text(c.name); }                                     \
  }
#define CCF_BOOL_FIELD(name)                                                                     \
  Field {                                                                                        \
    #name, [](CcfConfig& c, std::string_view v) { c.name = to_bool(#name, v); },                 \
        [](const CcfConfig& c) { return std::string(c.name ? "true" : "false"); }                \
  }

const std::vector<Field>& schema() {
  static const std::vector<Field> fields{
      CCF_SIZE_FIELD(t_ob),
      CCF_SIZE_FIELD(t_pred),
      CCF_SIZE_FIELD(k),
      CCF_SIZE_FIELD(d),
      CCF_SIZE_FIELD(heads),
      CCF_SIZE_FIELD(ff_mult),
      CCF_SIZE_FIELD(l_e),
      CCF_SIZE_FIELD(l_d),
      CCF_SIZE_FIELD(dnet_hidden),
      CCF_SIZE_FIELD(max_neighbors),
      CCF_REAL_FIELD(alpha),
      CCF_REAL_FIELD(lambda),
      CCF_REAL_FIELD(huber_delta),
      CCF_REAL_FIELD(learning_rate),
      CCF_SIZE_FIELD(batch_size),
      CCF_SIZE_FIELD(epochs),
      Field{"seed", [](CcfConfig& c, std::string_view v) { c.seed = to_uint("seed", v); },
            [](const CcfConfig& c) { return std::to_string(c.seed); }},
      CCF_REAL_FIELD(train_fraction),
      CCF_SIZE_FIELD(n_best),
      CCF_BOOL_FIELD(no_secondary_task),
      CCF_BOOL_FIELD(no_cross_correction),
      Field{"diversity_mode",
            [](CcfConfig& c, std::string_view v) { c.diversity_mode = parse_diversity_mode(v); },
            [](const CcfConfig& c) { return std::string(to_string(c.diversity_mode)); }},
      Field{"traj_loss",
            [](CcfConfig& c, std::string_view v) { c.traj_loss = parse_trajectory_loss(v); },
            [](const CcfConfig& c) { return std::string(to_string(c.traj_loss)); }},
      CCF_BOOL_FIELD(dnet_grad_from_b),
      CCF_BOOL_FIELD(single_subnet),
  };
  return fields;
}

#undef CCF_SIZE_FIELD
#undef CCF_REAL_FIELD
#undef CCF_BOOL_FIELD

}  // namespace

std::string_view to_string(DiversityMode mode) {
  switch (mode) {
    case DiversityMode::dnet: return "dnet";
    case DiversityMode::noise: return "noise";
    case DiversityMode::drop: return "drop";
    case DiversityMode::mask: return "mask";
  }
  return "dnet";
}

std::string_view to_string(TrajectoryLoss loss) { return loss == TrajectoryLoss::mse ? "mse" : "huber"; }

DiversityMode parse_diversity_mode(std::string_view text) {
  if (text == "dnet") return DiversityMode::dnet;
  if (text == "noise") return DiversityMode::noise;
  if (text == "drop") return DiversityMode::drop;
  if (text == "mask") return DiversityMode::mask;
  bad_value("diversity_mode", text, "dnet|noise|drop|mask");
}

TrajectoryLoss parse_trajectory_loss(std::string_view text) {
  if (text == "huber") return TrajectoryLoss::huber;
  if (text == "mse") return TrajectoryLoss::mse;
  bad_value("traj_loss", text, "huber|mse");
}

void CcfConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  require(t_ob > 0 && t_pred > 0, "t_ob and t_pred must be positive");
  require(k >= 2, "k must be at least 2");
  require(d > 0 && heads > 0 && d % heads == 0, "heads must divide d");
  require(ff_mult > 0 && dnet_hidden > 0, "ff_mult and dnet_hidden must be positive");
  require(l_d > 0, "l_d must be positive");
  require(alpha >= 0.0, "alpha must be nonnegative");
  require(lambda >= 0.0, "lambda must be nonnegative");
  require(huber_delta > 0.0, "huber_delta must be positive");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(train_fraction > 0.0 && train_fraction <= 1.0, "train_fraction must lie in (0, 1]");
  require(n_best > 0, "n_best must be positive");
  require(diversity_mode == DiversityMode::noise || diversity_mode == DiversityMode::dnet ||
              t_ob >= 2,
          "drop/mask diversity needs t_ob >= 2");
}

void set_config_value(CcfConfig& config, std::string_view key, std::string_view value) {
  for (const auto& field : schema()) {
    if (field.key == key) {
      field.set(config, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

CcfConfig parse_config(std::string_view text, CcfConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  base.validate();
  return base;
}

CcfConfig load_config(const std::filesystem::path& path, CcfConfig base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const FormatError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_config(text, base);
}

std::string format_config(const CcfConfig& config) {
  std::string out;
  for (const auto& field : schema()) {
    out += field.key;
    out += " = ";
    out += field.get(config);
    out += '\n';
  }
  return out;
}

std::string config_digest(const CcfConfig& config) {
  return sha256_hex(format_config(config)).substr(0, 16);
}

}  // namespace ccf
