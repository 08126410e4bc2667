#include "fedsplit/federation/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

#include "fedsplit/errors.hpp"

namespace fedsplit {
namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

static_assert(kKeyBytes == crypto_aead_xchacha20poly1305_ietf_KEYBYTES);
static_assert(kNonceBytes == crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
static_assert(kTagBytes == crypto_aead_xchacha20poly1305_ietf_ABYTES);

}  // namespace

SharedKey SharedKey::generate() {
  ensure_sodium();
  SharedKey k;
  crypto_aead_xchacha20poly1305_ietf_keygen(k.key_.data());
  return k;
}

SharedKey SharedKey::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kKeyBytes) throw std::invalid_argument("shared key must be 32 bytes");
  SharedKey k;
  std::copy(bytes.begin(), bytes.end(), k.key_.begin());
  return k;
}

SharedKey SharedKey::from_hex(std::string_view hex) { return from_bytes(fedsplit::from_hex(hex)); }

SharedKey::~SharedKey() { sodium_memzero(key_.data(), key_.size()); }

std::string SharedKey::hex() const { return to_hex(key_); }

Nonce random_nonce() {
  ensure_sodium();
  Nonce n;
  randombytes_buf(n.data(), n.size());
  return n;
}

Bytes aead_encrypt(const SharedKey& key, const Nonce& nonce, std::span<const std::uint8_t> plaintext,
                   std::span<const std::uint8_t> associated_data) {
  ensure_sodium();
  Bytes out(plaintext.size() + kTagBytes);
  unsigned long long out_len = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data(), &out_len, plaintext.data(),
                                             plaintext.size(), associated_data.data(),
                                             associated_data.size(), nullptr, nonce.data(),
                                             key.bytes().data());
  out.resize(out_len);
  return out;
}

Bytes aead_decrypt(const SharedKey& key, const Nonce& nonce,
                   std::span<const std::uint8_t> ciphertext_and_tag,
                   std::span<const std::uint8_t> associated_data) {
  ensure_sodium();
  if (ciphertext_and_tag.size() < kTagBytes) throw AuthError("ciphertext shorter than tag");
  Bytes out(ciphertext_and_tag.size() - kTagBytes);
  unsigned long long out_len = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(
          out.data(), &out_len, nullptr, ciphertext_and_tag.data(), ciphertext_and_tag.size(),
          associated_data.data(), associated_data.size(), nonce.data(), key.bytes().data()) != 0) {
    throw AuthError("authentication failed");
  }
  out.resize(out_len);
  return out;
}

}  // namespace fedsplit
