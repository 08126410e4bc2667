#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "fedsplit/bytes.hpp"

namespace fedsplit {

// XChaCha20-Poly1305 (IETF) via libsodium.
inline constexpr std::size_t kKeyBytes = 32;
inline constexpr std::size_t kNonceBytes = 24;
inline constexpr std::size_t kTagBytes = 16;

using Nonce = std::array<std::uint8_t, kNonceBytes>;

// Symmetric key shared by the agents of one session. Never handed to the
// forwarder. Wiped on destruction.
class SharedKey {
 public:
  static SharedKey generate();
  static SharedKey from_bytes(std::span<const std::uint8_t> bytes);
  static SharedKey from_hex(std::string_view hex);

  SharedKey(const SharedKey&) = default;
  SharedKey& operator=(const SharedKey&) = default;
  ~SharedKey();

  std::span<const std::uint8_t, kKeyBytes> bytes() const { return key_; }
  std::string hex() const;

 private:
  SharedKey() = default;
  std::array<std::uint8_t, kKeyBytes> key_{};
};

Nonce random_nonce();

// Returns ciphertext || tag.
Bytes aead_encrypt(const SharedKey& key, const Nonce& nonce, std::span<const std::uint8_t> plaintext,
                   std::span<const std::uint8_t> associated_data);

// Throws AuthError when the tag does not verify.
Bytes aead_decrypt(const SharedKey& key, const Nonce& nonce,
                   std::span<const std::uint8_t> ciphertext_and_tag,
                   std::span<const std::uint8_t> associated_data);

}  // namespace fedsplit
