#include "edmlp/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "edmlp/types.hpp"

namespace edmlp {
namespace {

constexpr char kMagic[8] = {'E', 'D', 'M', 'L', 'P', 'N', 'N', '\0'};

// Caps that keep a corrupt header from requesting absurd allocations.
constexpr std::uint64_t kMaxLayers = 1024;
constexpr std::uint64_t kMaxWidth = std::uint64_t{1} << 32;

class Writer {
public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class Reader {
public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DataError("truncated model file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool match(const char* p, std::size_t n) {
    need(n);
    const bool ok = std::memcmp(in_.data() + pos_, p, n) == 0;
    pos_ += n;
    return ok;
  }
  bool done() const { return pos_ == in_.size(); }

private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_model(const MlpModel& model) {
  const auto& s = model.structure();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(s.cost));
  w.u64(model.seed());
  w.u64(s.input_width);
  w.u64(s.hidden_layers.size());
  for (auto h : s.hidden_layers) w.u64(h);
  w.u64(s.output_width);
  w.u64(model.parameters().size());
  for (double v : model.parameters()) w.f64(v);
  return w.take();
}

MlpModel decode_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (!r.match(kMagic, sizeof kMagic)) throw DataError("not a model file (bad magic)");
  const auto version = r.u32();
  if (version != kModelFormatVersion) throw DataError("unsupported model format version " + std::to_string(version));
  const auto cost = r.u32();
  if (cost > 1) throw DataError("unknown cost function code " + std::to_string(cost));

  MlpStructure s;
  s.cost = static_cast<CostFunction>(cost);
  const auto seed = r.u64();
  s.input_width = r.u64();
  const auto n_hidden = r.u64();
  if (n_hidden > kMaxLayers) throw DataError("model file declares too many layers");
  for (std::uint64_t k = 0; k < n_hidden; ++k) s.hidden_layers.push_back(r.u64());
  s.output_width = r.u64();
  for (auto w : s.layer_widths()) {
    if (w > kMaxWidth) throw DataError("model file declares an implausible layer width");
  }
  try {
    s.validate();
  } catch (const DimensionError& e) {
    throw DataError(std::string("invalid structure in model file: ") + e.what());
  }
  const auto n_params = r.u64();
  if (n_params != s.parameter_count()) throw DataError("model parameter count does not match its structure");
  r.need(n_params * 8);
  std::vector<double> params(n_params);
  for (auto& v : params) v = r.f64();
  if (!r.done()) throw DataError("trailing bytes after model parameters");
  return MlpModel(std::move(s), std::move(params), seed);
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing model: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model: " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_model(bytes);
}

}  // namespace edmlp
