#include "fedsplit/federation/frame.hpp"

#include <limits>

namespace fedsplit {
namespace {

void put_short_bytes(ByteWriter& w, std::span<const std::uint8_t> b, const char* what) {
  if (b.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument(std::string(what) + " too long");
  }
  w.u16(static_cast<std::uint16_t>(b.size()));
  w.raw(b);
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

MsgType checked_msg_type(std::uint8_t v) {
  if (v < 1 || v > 3) throw DecodeError("unknown msg_type " + std::to_string(v));
  return static_cast<MsgType>(v);
}

}  // namespace

Bytes encode_frame(const GradientFrame& f) {
  ByteWriter w;
  w.u32(0);  // patched below
  w.u8(f.version);
  w.u8(static_cast<std::uint8_t>(f.msg_type));
  w.raw(f.sender_id);
  w.u32(f.epoch);
  w.u64(f.seq);
  put_short_bytes(w, as_bytes(f.layer_id), "layer_id");
  put_short_bytes(w, f.nonce, "nonce");
  w.raw(f.ciphertext);
  w.raw(f.auth_tag);
  Bytes out = w.take();
  const std::size_t body = out.size() - kLengthPrefixBytes;
  if (body > kMaxFrameBody) throw std::invalid_argument("frame exceeds maximum size");
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(body >> (8 * i));
  return out;
}

std::optional<std::size_t> peek_frame_size(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kLengthPrefixBytes) return std::nullopt;
  const std::uint32_t body = ByteReader(bytes).u32();
  if (body < kMinFrameBody || body > kMaxFrameBody) {
    throw DecodeError("frame length " + std::to_string(body) + " out of range");
  }
  return kLengthPrefixBytes + body;
}

GradientFrame decode_frame(std::span<const std::uint8_t> bytes) {
  const auto total = peek_frame_size(bytes);
  if (!total) throw DecodeError("truncated length prefix");
  if (*total != bytes.size()) throw DecodeError("frame length does not match buffer");

  ByteReader r(bytes.subspan(kLengthPrefixBytes));
  GradientFrame f;
  f.version = r.u8();
  if (f.version != kFrameVersion) throw DecodeError("unsupported frame version");
  f.msg_type = checked_msg_type(r.u8());
  auto id = r.raw(16);
  std::copy(id.begin(), id.end(), f.sender_id.begin());
  f.epoch = r.u32();
  f.seq = r.u64();
  f.layer_id = r.str(r.u16());
  auto nonce = r.raw(r.u16());
  f.nonce.assign(nonce.begin(), nonce.end());
  auto rest = r.raw(r.remaining());

  if (f.msg_type == MsgType::kHello) {
    if (!f.nonce.empty() || !rest.empty()) throw DecodeError("HELLO must carry no payload");
    return f;
  }
  if (f.nonce.size() != kNonceBytes) throw DecodeError("bad nonce length");
  if (rest.size() < kTagBytes) throw DecodeError("payload shorter than auth tag");
  f.ciphertext.assign(rest.begin(), rest.end() - kTagBytes);
  f.auth_tag.assign(rest.end() - kTagBytes, rest.end());
  return f;
}

void stamp_seq(std::span<std::uint8_t> encoded, std::uint64_t seq) {
  if (encoded.size() < kSeqOffset + 8) throw DecodeError("frame too short to stamp");
  for (int i = 0; i < 8; ++i) encoded[kSeqOffset + i] = static_cast<std::uint8_t>(seq >> (8 * i));
}

Bytes associated_data(const GradientFrame& f) {
  ByteWriter w;
  w.u8(f.version);
  w.u8(static_cast<std::uint8_t>(f.msg_type));
  w.raw(f.sender_id);
  w.u32(f.epoch);
  put_short_bytes(w, as_bytes(f.layer_id), "layer_id");
  return w.take();
}

Bytes encode_delta_payload(const LayerDelta& d) {
  if (d.bias.size() != d.weights.cols()) throw DimensionError("delta bias length != cols");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(d.weights.rows()));
  w.u32(static_cast<std::uint32_t>(d.weights.cols()));
  for (double v : d.weights.data()) w.f64(v);
  w.u32(static_cast<std::uint32_t>(d.bias.size()));
  for (double v : d.bias) w.f64(v);
  return w.take();
}

LayerDelta decode_delta_payload(const std::string& layer_id, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (rows * cols > r.remaining() / 8) throw DecodeError("delta payload truncated");
  std::vector<double> w(rows * cols);
  for (double& v : w) v = r.f64();
  const std::size_t n = r.u32();
  if (n != cols) throw DecodeError("delta bias length != cols");
  Vector b(n);
  for (double& v : b) v = r.f64();
  if (r.remaining() != 0) throw DecodeError("trailing bytes in delta payload");
  return {layer_id, Matrix(rows, cols, std::move(w)), std::move(b)};
}

GradientFrame seal(const LayerDelta& delta, const SharedKey& key, std::uint32_t epoch,
                   const SenderId& sender) {
  return seal(delta, key, epoch, sender, random_nonce());
}

GradientFrame seal(const LayerDelta& delta, const SharedKey& key, std::uint32_t epoch,
                   const SenderId& sender, const Nonce& nonce) {
  GradientFrame f;
  f.msg_type = MsgType::kDelta;
  f.sender_id = sender;
  f.epoch = epoch;
  f.layer_id = delta.layer_id;
  f.nonce.assign(nonce.begin(), nonce.end());
  Bytes sealed = aead_encrypt(key, nonce, encode_delta_payload(delta), associated_data(f));
  f.ciphertext.assign(sealed.begin(), sealed.end() - kTagBytes);
  f.auth_tag.assign(sealed.end() - kTagBytes, sealed.end());
  return f;
}

LayerDelta open(const GradientFrame& f, const SharedKey& key) {
  if (f.msg_type != MsgType::kDelta) throw ProtocolError("open() on a non-DELTA frame");
  if (f.nonce.size() != kNonceBytes || f.auth_tag.size() != kTagBytes) {
    throw DecodeError("frame nonce/tag length invalid");
  }
  Nonce nonce;
  std::copy(f.nonce.begin(), f.nonce.end(), nonce.begin());
  Bytes sealed = f.ciphertext;
  sealed.insert(sealed.end(), f.auth_tag.begin(), f.auth_tag.end());
  const Bytes plain = aead_decrypt(key, nonce, sealed, associated_data(f));
  return decode_delta_payload(f.layer_id, plain);
}

GradientFrame make_hello(const SenderId& sender) {
  GradientFrame f;
  f.msg_type = MsgType::kHello;
  f.sender_id = sender;
  return f;
}

std::string to_string(MsgType t) {
  switch (t) {
    case MsgType::kHello:
      return "HELLO";
    case MsgType::kDelta:
      return "DELTA";
    case MsgType::kEpochDone:
      return "EPOCH_DONE";
  }
  return "UNKNOWN";
}

std::string sender_hex(const SenderId& id) { return to_hex(id); }

}  // namespace fedsplit
