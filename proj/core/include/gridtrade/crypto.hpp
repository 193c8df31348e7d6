#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "gridtrade/types.hpp"

namespace gridtrade::crypto {

// Thin wrapper around libsodium: SHA-256 for hashing and Ed25519 for the
// signature scheme. The rest of the codebase only sees sign/verify/hash over
// canonical bytes, so the scheme is swappable behind this header.

using PublicKey = std::array<std::uint8_t, 32>;
using SecretKey = std::array<std::uint8_t, 64>;
using Signature = std::array<std::uint8_t, 64>;
using Seed = std::array<std::uint8_t, 32>;

struct KeyPair {
  PublicKey pk{};
  SecretKey sk{};
};

Hash32 sha256(std::span<const std::uint8_t> data);

/// Deterministic keypair: an arbitrary seed byte string is first hashed down
/// to the scheme's 32-byte seed, so any registrant blob works.
KeyPair keypair_from_seed(std::span<const std::uint8_t> seed);

Signature sign(const SecretKey& sk, std::span<const std::uint8_t> msg);
bool verify(const PublicKey& pk, std::span<const std::uint8_t> msg, const Signature& sig);

/// Wallet pseudonym: one-way digest of the public key.
WalletAddress wallet_address(const PublicKey& pk);

std::string hex(std::span<const std::uint8_t> data);
std::string hex(const Hash32& h);

}  // namespace gridtrade::crypto
