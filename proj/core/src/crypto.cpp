#include "gridtrade/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

namespace gridtrade::crypto {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

}  // namespace

Hash32 sha256(std::span<const std::uint8_t> data) {
  ensure_sodium();
  static_assert(crypto_hash_sha256_BYTES == 32);
  Hash32 out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

KeyPair keypair_from_seed(std::span<const std::uint8_t> seed) {
  ensure_sodium();
  static_assert(crypto_sign_SEEDBYTES == 32);
  static_assert(crypto_sign_PUBLICKEYBYTES == 32);
  static_assert(crypto_sign_SECRETKEYBYTES == 64);
  const Hash32 s = sha256(seed);
  KeyPair kp;
  crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), s.data());
  return kp;
}

Signature sign(const SecretKey& sk, std::span<const std::uint8_t> msg) {
  ensure_sodium();
  static_assert(crypto_sign_BYTES == 64);
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
  return sig;
}

bool verify(const PublicKey& pk, std::span<const std::uint8_t> msg, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

WalletAddress wallet_address(const PublicKey& pk) {
  return sha256(std::span<const std::uint8_t>(pk.data(), pk.size()));
}

std::string hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

std::string hex(const Hash32& h) { return hex(std::span<const std::uint8_t>(h.data(), h.size())); }

}  // namespace gridtrade::crypto
