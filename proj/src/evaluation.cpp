#include "ccf/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ccf/errors.hpp"

namespace ccf {
namespace {

void require_pair(std::span<const double> pred, std::span<const double> gt, const char* what) {
  if (pred.size() != gt.size() || gt.empty() || gt.size() % 2 != 0) {
    throw DimensionError(std::string(what) + ": trajectories of " + std::to_string(pred.size()) +
                         " and " + std::to_string(gt.size()) + " values");
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ade(std::span<const double> pred, std::span<const double> gt) {
  require_pair(pred, gt, "ade");
  const std::size_t steps = gt.size() / 2;
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    total += std::hypot(pred[2 * t] - gt[2 * t], pred[2 * t + 1] - gt[2 * t + 1]);
  }
  return total / static_cast<double>(steps);
}

double fde(std::span<const double> pred, std::span<const double> gt) {
  require_pair(pred, gt, "fde");
  const std::size_t last = gt.size() - 2;
  return std::hypot(pred[last] - gt[last], pred[last + 1] - gt[last + 1]);
}

BestOfN best_of_n(std::span<const double> candidates, std::size_t count, std::span<const double> gt) {
  if (count == 0) throw ValidationError("best_of_n: no candidates");
  if (candidates.size() != count * gt.size()) {
    throw DimensionError("best_of_n: " + std::to_string(candidates.size()) + " values for " +
                         std::to_string(count) + " candidates of " + std::to_string(gt.size()));
  }
  BestOfN best;
  for (std::size_t c = 0; c < count; ++c) {
    const auto cand = candidates.subspan(c * gt.size(), gt.size());
    const double a = ade(cand, gt);
    const double f = fde(cand, gt);
    if (c == 0 || a < best.min_ade) {
      best.min_ade = a;
      best.ade_index = c;
    }
    if (c == 0 || f < best.min_fde) {
      best.min_fde = f;
      best.fde_index = c;
    }
  }
  return best;
}

EvalReport evaluate(std::span<const TrajectoryWindow> windows, const Subnet& subnet,
                    const TrajectoryClassSet& classes, const EvalOptions& options) {
  if (windows.empty()) throw ValidationError("evaluate: empty test set");
  const SubnetShape& shape = subnet.shape();
  if (windows.front().t_ob != shape.t_ob || windows.front().t_pred != shape.t_pred) {
    throw ValidationError("evaluate: windows are " + std::to_string(windows.front().t_ob) + "/" +
                          std::to_string(windows.front().t_pred) + " steps, model expects " +
                          std::to_string(shape.t_ob) + "/" + std::to_string(shape.t_pred));
  }
  const std::size_t k = shape.k;
  const std::size_t width = shape.t_pred * 2;
  const std::size_t n_best = std::min(options.n_best, k);
  const std::size_t batch_size = std::max<std::size_t>(options.batch_size, 1);

  NoGradGuard no_grad;
  std::vector<WindowRecord> records;
  records.reserve(windows.size());
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const auto chunk = windows.subspan(start, std::min(batch_size, windows.size() - start));
    const SubnetBatchOutput out = subnet.forward(make_batch(chunk), classes);
    const auto cand = out.candidates.data();
    const auto probs = out.class_probs.data();
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const TrajectoryWindow& w = chunk[i];
      std::vector<std::size_t> ranked(k);
      std::iota(ranked.begin(), ranked.end(), 0);
      std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        return probs[i * k + a] > probs[i * k + b];
      });
      ranked.resize(n_best);
      // Keep the kept classes in index order so candidate positions are stable.
      std::vector<std::size_t> kept = ranked;
      std::sort(kept.begin(), kept.end());

      WindowRecord r;
      r.window = start + i;
      r.pedestrian_id = w.pedestrian_id;
      r.start_frame = w.start_frame;
      r.origin = w.origin;
      r.past = w.past;
      r.future = w.future;
      r.candidate_classes = kept;
      for (std::size_t c : kept) {
        const double* src = cand.data() + (i * k + c) * width;
        r.candidates.insert(r.candidates.end(), src, src + width);
      }
      r.selected = static_cast<std::size_t>(
          std::find(kept.begin(), kept.end(), ranked.front()) - kept.begin());
      records.push_back(std::move(r));
    }
  }
  for (auto& r : records) {
    const auto selected = std::span<const double>(r.candidates).subspan(r.selected * width, width);
    r.ade = ade(selected, r.future);
    r.fde = fde(selected, r.future);
    const BestOfN best = best_of_n(r.candidates, r.candidate_classes.size(), r.future);
    r.min_ade = best.min_ade;
    r.min_fde = best.min_fde;
    r.best_ade_index = best.ade_index;
    r.best_fde_index = best.fde_index;
  }
  return aggregate(std::move(records), n_best, options.config_digest);
}

EvalReport evaluate(std::span<const TrajectoryWindow> windows, const TrainingState& state) {
  EvalOptions options;
  options.n_best = state.config.n_best;
  options.config_digest = config_digest(state.config);
  return evaluate(windows, state.subnet_a, state.classes, options);
}

EvalReport aggregate(std::vector<WindowRecord> records, std::size_t n_best, std::string digest) {
  if (records.empty()) throw ValidationError("aggregate: no records");
  EvalReport report;
  report.n_best = n_best;
  report.config_digest = std::move(digest);
  for (const auto& r : records) {
    report.ade += r.ade;
    report.fde += r.fde;
    report.min_ade += r.min_ade;
    report.min_fde += r.min_fde;
  }
  const double n = static_cast<double>(records.size());
  report.ade /= n;
  report.fde /= n;
  report.min_ade /= n;
  report.min_fde /= n;
  report.records = std::move(records);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "windows,n_best,ade,fde,min_ade,min_fde,config_digest\n";
  out += std::to_string(report.records.size()) + "," + std::to_string(report.n_best) + "," +
         num(report.ade) + "," + num(report.fde) + "," + num(report.min_ade) + "," +
         num(report.min_fde) + "," + report.config_digest + "\n";
  return out;
}

std::string report_table(const EvalReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "windows      %zu\n"
                "ADE          %.4f m\n"
                "FDE          %.4f m\n"
                "minADE%-4zu   %.4f m\n"
                "minFDE%-4zu   %.4f m\n"
                "config       %s\n",
                report.records.size(), report.ade, report.fde, report.n_best, report.min_ade,
                report.n_best, report.min_fde, report.config_digest.c_str());
  return buf;
}

// One row per window. Trajectory blocks are semicolon-separated flattened
// coordinates so that the column count does not depend on K.
std::string records_csv(const EvalReport& report) {
  std::string out =
      "window,pedestrian_id,start_frame,ade,fde,min_ade,min_fde,selected,best_ade_index,"
      "best_fde_index,origin_x,origin_y,candidate_classes,past,future,candidates\n";
  auto join = [](const auto& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ';';
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(values[0])>>) {
        s += num(values[i]);
      } else {
        s += std::to_string(values[i]);
      }
    }
    return s;
  };
  for (const auto& r : report.records) {
    out += std::to_string(r.window) + "," + std::to_string(r.pedestrian_id) + "," +
           std::to_string(r.start_frame) + "," + num(r.ade) + "," + num(r.fde) + "," +
           num(r.min_ade) + "," + num(r.min_fde) + "," + std::to_string(r.selected) + "," +
           std::to_string(r.best_ade_index) + "," + std::to_string(r.best_fde_index) + "," +
           num(r.origin[0]) + "," + num(r.origin[1]) + "," + join(r.candidate_classes) + "," +
           join(r.past) + "," + join(r.future) + "," + join(r.candidates) + "\n";
  }
  return out;
}

std::vector<WindowRecord> parse_records_csv(std::string_view text) {
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
      const auto next = s.find(sep, pos);
      parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return parts;
  };
  auto to_double = [](std::string_view s, std::size_t line) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError("records line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return v;
  };
  auto to_int = [](std::string_view s, std::size_t line) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError("records line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<WindowRecord> records;
  auto lines = split(text, '\n');
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    auto f = split(lines[li], ',');
    if (f.size() != 16) {
      throw ParseError("records line " + std::to_string(li + 1) + ": expected 16 fields, found " +
                       std::to_string(f.size()));
    }
    WindowRecord r;
    const std::size_t line = li + 1;
    r.window = static_cast<std::size_t>(to_int(f[0], line));
    r.pedestrian_id = to_int(f[1], line);
    r.start_frame = to_int(f[2], line);
    r.ade = to_double(f[3], line);
    r.fde = to_double(f[4], line);
    r.min_ade = to_double(f[5], line);
    r.min_fde = to_double(f[6], line);
    r.selected = static_cast<std::size_t>(to_int(f[7], line));
    r.best_ade_index = static_cast<std::size_t>(to_int(f[8], line));
    r.best_fde_index = static_cast<std::size_t>(to_int(f[9], line));
    r.origin = {to_double(f[10], line), to_double(f[11], line)};
    for (auto s : split(f[12], ';')) r.candidate_classes.push_back(static_cast<std::size_t>(to_int(s, line)));
    for (auto s : split(f[13], ';')) r.past.push_back(to_double(s, line));
    for (auto s : split(f[14], ';')) r.future.push_back(to_double(s, line));
    for (auto s : split(f[15], ';')) r.candidates.push_back(to_double(s, line));
    if (r.future.empty() || r.candidates.size() != r.candidate_classes.size() * r.future.size()) {
      throw ParseError("records line " + std::to_string(line) + ": inconsistent trajectory sizes");
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace ccf
