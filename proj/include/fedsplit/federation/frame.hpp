#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "fedsplit/bytes.hpp"
#include "fedsplit/federation/crypto.hpp"
#include "fedsplit/nn/model.hpp"

namespace fedsplit {

// Wire layout (all integers little-endian):
//
//   u32 length            bytes that follow this field
//   u8  version           = 1
//   u8  msg_type          1 HELLO, 2 DELTA, 3 EPOCH_DONE
//   16B sender_id
//   u32 epoch
//   u64 seq               0 on send, filled in by the forwarder
//   u16 layer_id length, layer_id bytes
//   u16 nonce length, nonce bytes
//   ciphertext || tag     (rest of frame)
//
// The AEAD associated data is every header field except length and seq, so
// the forwarder can sequence frames without invalidating them.
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kLengthPrefixBytes = 4;
inline constexpr std::size_t kSeqOffset = 4 + 1 + 1 + 16 + 4;
inline constexpr std::size_t kMinFrameBody = 1 + 1 + 16 + 4 + 8 + 2 + 2;
inline constexpr std::uint32_t kMaxFrameBody = 16u << 20;

enum class MsgType : std::uint8_t { kHello = 1, kDelta = 2, kEpochDone = 3 };

using SenderId = std::array<std::uint8_t, 16>;

struct GradientFrame {
  std::uint8_t version = kFrameVersion;
  MsgType msg_type = MsgType::kDelta;
  SenderId sender_id{};
  std::uint32_t epoch = 0;
  std::uint64_t seq = 0;
  std::string layer_id;
  Bytes nonce;
  Bytes ciphertext;
  Bytes auth_tag;

  friend bool operator==(const GradientFrame&, const GradientFrame&) = default;
};

Bytes encode_frame(const GradientFrame& frame);

// Parses one complete frame, length prefix included. Throws DecodeError.
GradientFrame decode_frame(std::span<const std::uint8_t> bytes);

// Total encoded size (prefix included) announced by the first four bytes, or
// nullopt if fewer than four bytes are available. Throws DecodeError when the
// announced body is out of range.
std::optional<std::size_t> peek_frame_size(std::span<const std::uint8_t> bytes);

// Overwrites the seq field of an encoded frame in place.
void stamp_seq(std::span<std::uint8_t> encoded, std::uint64_t seq);

Bytes associated_data(const GradientFrame& frame);

// Delta plaintext: u32 rows | u32 cols | rows*cols f64 | u32 n | n f64.
Bytes encode_delta_payload(const LayerDelta& delta);
LayerDelta decode_delta_payload(const std::string& layer_id, std::span<const std::uint8_t> bytes);

GradientFrame seal(const LayerDelta& delta, const SharedKey& key, std::uint32_t epoch,
                   const SenderId& sender);
// Deterministic variant for test vectors.
GradientFrame seal(const LayerDelta& delta, const SharedKey& key, std::uint32_t epoch,
                   const SenderId& sender, const Nonce& nonce);

// AuthError on a bad tag, DecodeError on a malformed (but authentic) payload.
LayerDelta open(const GradientFrame& frame, const SharedKey& key);

GradientFrame make_hello(const SenderId& sender);

std::string to_string(MsgType t);
std::string sender_hex(const SenderId& id);

}  // namespace fedsplit
