#include "ccf/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "ccf/errors.hpp"
#include "ccf/io.hpp"

namespace ccf {
namespace {

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::string_view s) { out_.append(s); }
  void text(std::string_view s) {
    u64(s.size());
    bytes(s);
  }
  void section(const Writer& payload) {
    u64(payload.out_.size());
    bytes(payload.out_);
  }
  const std::string& str() const { return out_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string text() { return std::string(bytes(checked_size(u64()))); }
  std::string_view rest() {
    auto s = data_.substr(pos_);
    pos_ = data_.size();
    return s;
  }
  Reader section(const char* name) { return Reader(bytes(checked_size(u64())), name); }
  void finish() const {
    if (pos_ != data_.size()) throw FormatError("checkpoint " + what_ + ": trailing bytes");
  }

 private:
  std::size_t checked_size(std::uint64_t n) {
    if (n > data_.size() - pos_) need(data_.size() + 1);
    return static_cast<std::size_t>(n);
  }
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw FormatError("checkpoint " + what_ + ": truncated");
  }
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

Writer write_params(const ParamList& params) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.text(p.name);
    w.u32(static_cast<std::uint32_t>(p.tensor.rank()));
    for (auto d : p.tensor.shape()) w.u64(d);
    for (double v : p.tensor.data()) w.f64(v);
  }
  return w;
}

void read_params(Reader r, const ParamList& params, const char* what) {
  const std::uint32_t count = r.u32();
  if (count != params.size()) {
    throw FormatError(std::string("checkpoint ") + what + ": expected " +
                      std::to_string(params.size()) + " tensors, found " + std::to_string(count));
  }
  for (const auto& p : params) {
    const std::string name = r.text();
    const std::uint32_t rank = r.u32();
    Shape shape(rank);
    for (auto& d : shape) d = r.u64();
    if (name != p.name || shape != p.tensor.shape()) {
      throw FormatError(std::string("checkpoint ") + what + ": tensor " + name + " " +
                        shape_str(shape) + " does not match expected " + p.name + " " +
                        shape_str(p.tensor.shape()));
    }
    Tensor t = p.tensor;
    for (auto& v : t.mutable_data()) v = r.f64();
  }
  r.finish();
}

}  // namespace

std::string serialize_checkpoint(const TrainingState& state) {
  Writer out;
  out.bytes("CCF1");
  out.u32(kCheckpointVersion);

  Writer config;
  config.bytes(format_config(state.config));
  out.section(config);

  Writer classes;
  classes.u64(state.classes.k);
  classes.u64(state.classes.t_pred);
  classes.u64(state.classes.seed);
  for (double v : state.classes.means) classes.f64(v);
  out.section(classes);

  out.section(write_params(state.subnet_a.params()));
  out.section(write_params(state.subnet_b.params()));
  out.section(write_params(state.dnet.params()));

  Writer optimizer;
  optimizer.u64(state.optimizer.step);
  optimizer.u64(state.epoch);
  optimizer.u32(static_cast<std::uint32_t>(state.optimizer.first_moment.size()));
  for (std::size_t i = 0; i < state.optimizer.first_moment.size(); ++i) {
    const auto& m = state.optimizer.first_moment[i];
    const auto& v = state.optimizer.second_moment[i];
    optimizer.u64(m.size());
    for (double x : m) optimizer.f64(x);
    for (double x : v) optimizer.f64(x);
  }
  out.section(optimizer);

  Writer rng;
  rng.text(state.shuffle_rng.serialize());
  rng.text(state.noise_rng.serialize());
  out.section(rng);
  return out.str();
}

TrainingState deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes, "header");
  if (in.bytes(4) != "CCF1") throw FormatError("not a checkpoint: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Reader config_section = in.section("config");
  CcfConfig config;
  try {
    config = parse_config(config_section.rest());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }

  Reader classes_section = in.section("classes");
  TrajectoryClassSet classes;
  classes.k = classes_section.u64();
  classes.t_pred = classes_section.u64();
  classes.seed = classes_section.u64();
  if (classes.k != config.k || classes.t_pred != config.t_pred) {
    throw FormatError("checkpoint classes do not match the stored config");
  }
  classes.means.resize(classes.k * classes.t_pred * 2);
  for (auto& v : classes.means) v = classes_section.f64();
  classes_section.finish();

  TrainingState state = TrainingState::create(config, std::move(classes));
  read_params(in.section("subnet A"), state.subnet_a.params(), "subnet A");
  read_params(in.section("subnet B"), state.subnet_b.params(), "subnet B");
  read_params(in.section("dnet"), state.dnet.params(), "dnet");

  Reader optimizer = in.section("optimizer");
  state.optimizer.step = optimizer.u64();
  state.epoch = optimizer.u64();
  const std::uint32_t count = optimizer.u32();
  const ParamList trainable = state.trainable();
  if (count != 0 && count != trainable.size()) {
    throw FormatError("checkpoint optimizer: " + std::to_string(count) + " moment slots for " +
                      std::to_string(trainable.size()) + " parameters");
  }
  state.optimizer.first_moment.resize(count);
  state.optimizer.second_moment.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t n = optimizer.u64();
    if (n != trainable[i].tensor.size()) {
      throw FormatError("checkpoint optimizer: moment size mismatch for " + trainable[i].name);
    }
    auto& m = state.optimizer.first_moment[i];
    auto& v = state.optimizer.second_moment[i];
    m.resize(n);
    v.resize(n);
    for (auto& x : m) x = optimizer.f64();
    for (auto& x : v) x = optimizer.f64();
  }
  optimizer.finish();

  Reader rng = in.section("rng");
  state.shuffle_rng = Rng::deserialize(rng.text());
  state.noise_rng = Rng::deserialize(rng.text());
  rng.finish();
  in.finish();
  return state;
}

void save_checkpoint(const TrainingState& state, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(state));
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

std::string weights_digest(const TrainingState& state) {
  std::string blob = write_params(state.subnet_a.params()).str();
  blob += write_params(state.subnet_b.params()).str();
  blob += write_params(state.dnet.params()).str();
  return sha256_hex(blob);
}

}  // namespace ccf
