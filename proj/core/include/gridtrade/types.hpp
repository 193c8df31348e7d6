#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace gridtrade {

using Bytes = std::vector<std::uint8_t>;
using Hash32 = std::array<std::uint8_t, 32>;

/// Pseudonymous wallet address: a one-way digest of the owner's public key.
using WalletAddress = Hash32;

/// Integer settlement unit. 1 energy coin == 1,000,000 micro-coins.
using MicroCoins = std::int64_t;
inline constexpr MicroCoins kMicroCoinsPerCoin = 1'000'000;

/// Simulation clock tick.
using Tick = std::uint64_t;

/// Address of a node inside the simulated ecosystem.
/// Each city hosts one APG plus its CCHPs; APGs double as chain nodes.
struct NodeRef {
  enum class Kind : std::uint8_t { Apg = 0, Cchp = 1 };

  std::uint32_t city = 0;
  Kind kind = Kind::Apg;
  std::uint32_t index = 0;  // CCHP index within the city; 0 for the APG

  auto operator<=>(const NodeRef&) const = default;

  std::string str() const {
    std::string s = "c" + std::to_string(city);
    if (kind == Kind::Apg) return s + ".apg";
    return s + ".cchp" + std::to_string(index);
  }

  static NodeRef apg(std::uint32_t city) { return NodeRef{city, Kind::Apg, 0}; }
  static NodeRef cchp(std::uint32_t city, std::uint32_t index) {
    return NodeRef{city, Kind::Cchp, index};
  }
};

}  // namespace gridtrade
