#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gridtrade/chain.hpp"
#include "gridtrade/game.hpp"
#include "gridtrade/ioe.hpp"

namespace gridtrade {

struct LatencyModel {
  enum class Kind { Fixed, SeededUniform };
  Kind kind = Kind::Fixed;
  Tick fixed = 1;
  Tick lo = 1;
  Tick hi = 3;
};

struct FaultSpec {
  enum class Kind { DropMessage, DelayMessage, TamperMessage, ReplayMessage, StaleTip };

  Kind kind = Kind::DropMessage;

  // Message faults match on (src, dst, message kind name) and fire on the
  // n-th matching delivery.
  NodeRef src;
  NodeRef dst;
  std::string msg_kind;  // "Response", "Verdict", ...; empty matches any
  std::uint64_t occurrence = 1;
  Tick delay = 5;  // DelayMessage / ReplayMessage echo offset

  // StaleTip truncates the node's chain by one block before the consensus
  // of the given trading round.
  NodeRef node;
  std::uint64_t at_round = 1;
};

struct GameConfig {
  int iterations = 100;
  int rounds = 1;  // trading rounds; one block is proposed per round
};

struct WalletConfig {
  MicroCoins apg_initial = 1'000'000'000;
  MicroCoins cchp_initial = 0;
};

struct CityScenario {
  MarketParams market;
  std::vector<CchpParams> cchps;
};

/// A fully resolved run description: the seed determines everything.
struct Scenario {
  std::uint64_t seed = 1;
  GameConfig game;
  WalletConfig wallets;
  std::vector<CityScenario> cities;
  ChainConfig chain;
  LatencyModel latency;
  std::vector<double> hash_power;  // per-city APG; empty means all equal
  std::vector<FaultSpec> faults;
  ValidationMode validation = ValidationMode::Lenient;
};

/// Registers a fault after checking its target exists. Throws UnknownTarget.
Scenario inject_fault(Scenario scenario, const FaultSpec& fault);

struct LogRecord {
  Tick tick = 0;
  std::uint64_t seq = 0;
  NodeRef src;
  NodeRef dst;
  std::string kind;
  Hash32 payload_hash{};

  std::string line() const;
};

struct RunReport {
  std::vector<EquilibriumResult> equilibria;               // per city
  std::vector<std::vector<TradingRoundResult>> trading;    // [city][round]
  std::vector<Bytes> chain_dumps;                          // per APG node
  std::map<WalletAddress, MicroCoins> final_balances;      // account servers
  std::map<WalletAddress, MicroCoins> chain_balances;      // replay of node 0
  std::vector<LogRecord> events;
  std::vector<std::string> warnings;    // scenario validation notes
  std::vector<std::string> rejected;    // handled faults / dropped messages
  std::vector<std::string> violations;  // failed invariants; empty on success
  std::size_t consensus_messages = 0;
  int blocks_committed = 0;
  MicroCoins initial_supply = 0;

  /// Deterministic byte serialization of the whole report.
  Bytes serialize() const;
};

/// Executes equilibrium -> trading -> mining race -> consensus for every
/// city and round, over a deterministic discrete-event loop. Identical
/// (scenario, seed) produce byte-identical reports.
RunReport run_scenario(const Scenario& scenario);

}  // namespace gridtrade
