#include "fedsplit/nn/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <limits>

namespace fedsplit {
namespace {

constexpr std::string_view kMagic = "FSRL";

void put_string(ByteWriter& w, const std::string& s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("string too long for checkpoint");
  }
  w.u16(static_cast<std::uint16_t>(s.size()));
  w.raw(s);
}

}  // namespace

Bytes encode_checkpoint(const SplitModel& model) {
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kCheckpointVersion);
  put_string(w, model.owner());
  w.u16(static_cast<std::uint16_t>(model.layers().size()));
  for (const auto& l : model.layers()) {
    put_string(w, l.id);
    w.u8(static_cast<std::uint8_t>(l.scope));
    w.u8(static_cast<std::uint8_t>(l.activation));
    w.u32(static_cast<std::uint32_t>(l.in_dim()));
    w.u32(static_cast<std::uint32_t>(l.out_dim()));
    for (double v : l.weights.data()) w.f64(v);
    for (double v : l.bias) w.f64(v);
  }
  return w.take();
}

SplitModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.str(4) != kMagic) throw DecodeError("bad checkpoint magic");
  if (const auto v = r.u16(); v != kCheckpointVersion) {
    throw DecodeError("unsupported checkpoint version " + std::to_string(v));
  }
  std::string owner = r.str(r.u16());
  const std::uint16_t count = r.u16();
  std::vector<DenseLayer> layers;
  for (std::uint16_t k = 0; k < count; ++k) {
    DenseLayer l;
    l.id = r.str(r.u16());
    const auto scope = r.u8();
    const auto act = r.u8();
    if (scope > 1) throw DecodeError("bad scope byte");
    if (act > 2) throw DecodeError("bad activation byte");
    l.scope = static_cast<Scope>(scope);
    l.activation = static_cast<Activation>(act);
    const std::size_t in = r.u32();
    const std::size_t out = r.u32();
    if (in * out > r.remaining() / 8) throw DecodeError("truncated weights");
    std::vector<double> w(in * out);
    for (double& v : w) v = r.f64();
    l.weights = Matrix(in, out, std::move(w));
    l.bias.resize(out);
    for (double& v : l.bias) v = r.f64();
    layers.push_back(std::move(l));
  }
  if (r.remaining() != 0) throw DecodeError("trailing bytes after checkpoint");
  return SplitModel(std::move(owner), std::move(layers));
}

void save_checkpoint(const SplitModel& model, const std::filesystem::path& path) {
  const Bytes b = encode_checkpoint(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

SplitModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  Bytes b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(b);
}

}  // namespace fedsplit
