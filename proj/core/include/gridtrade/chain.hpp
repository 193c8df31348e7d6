#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gridtrade/ioe.hpp"

namespace gridtrade {

struct ChainConfig {
  std::uint32_t difficulty_bits = 16;  // leading zero bits required of a header hash
  MicroCoins reward = 50 * kMicroCoinsPerCoin;
  std::optional<std::size_t> quorum;  // approvals required; absent means all nodes
};

/// Mining reward credit; has no counterparty and is not signed.
struct Coinbase {
  WalletAddress miner{};
  MicroCoins amount = 0;
  Tick timestamp = 0;
  std::uint64_t height = 0;

  Bytes canonical_bytes() const;
  Hash32 id() const;
  static Coinbase decode(WireReader& r);
};

struct BlockHeader {
  Hash32 prev_hash{};
  Hash32 merkle_root{};
  Tick timestamp = 0;
  std::uint32_t difficulty_bits = 0;
  std::uint64_t nonce = 0;
  WalletAddress miner{};

  Bytes canonical_bytes() const;
  Hash32 hash() const;
  static BlockHeader decode(WireReader& r);
};

struct Block {
  BlockHeader header;
  std::vector<EnergyTransaction> txs;
  std::optional<Coinbase> coinbase;  // absent only in the genesis block

  Bytes canonical_bytes() const;
  static Block decode(WireReader& r);

  /// Merkle leaves in block order: coinbase id first, then transaction ids.
  std::vector<Hash32> leaf_ids() const;
};

/// Pairwise SHA-256 tree over transaction ids; odd levels duplicate the last
/// node. A singleton's root is the leaf itself. Throws EmptyBlock on empty.
Hash32 merkle_root(const std::vector<Hash32>& leaves);

bool meets_difficulty(const Hash32& h, std::uint32_t bits);

struct MineOutcome {
  std::optional<std::uint64_t> nonce;  // absent: NotFound within max_attempts
  std::uint64_t attempts = 0;
};

/// Seeded-deterministic nonce search over the header template.
MineOutcome mine(const BlockHeader& header_template, std::uint64_t max_attempts,
                 std::uint64_t rng_seed);

/// Replicated ledger state of one APG node. The balance cache is maintained
/// incrementally on append; replay_balances() is the independent fold.
class Chain {
 public:
  Chain(ChainConfig cfg, std::map<WalletAddress, MicroCoins> genesis_alloc, KeyDirectory keys);

  static Block make_genesis(const ChainConfig& cfg);

  const ChainConfig& config() const { return cfg_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& tip() const { return blocks_.back(); }
  std::uint64_t height() const { return blocks_.size() - 1; }
  const std::map<WalletAddress, MicroCoins>& balances() const { return balances_; }
  const std::map<WalletAddress, MicroCoins>& genesis_alloc() const { return genesis_alloc_; }
  const KeyDirectory& keys() const { return keys_; }
  bool contains_tx(const Hash32& tx_id) const { return tx_index_.count(tx_id) != 0; }

  /// Appends without validation (callers validate first) and updates caches.
  void append(Block b);

  void truncate_to_height(std::uint64_t height);

  Bytes encode() const;
  static Chain decode(std::span<const std::uint8_t> data);

 private:
  void index_block(const Block& b);
  void rebuild_caches();

  ChainConfig cfg_;
  std::map<WalletAddress, MicroCoins> genesis_alloc_;
  KeyDirectory keys_;
  std::vector<Block> blocks_;
  std::map<WalletAddress, MicroCoins> balances_;
  std::set<Hash32> tx_index_;
};

enum class RejectReason : std::uint32_t {
  None = 0,
  PrevHashMismatch,
  TimestampOrder,
  DifficultyMismatch,
  PowInvalid,
  MerkleMismatch,
  CoinbaseInvalid,
  TxInvalid,
  SignatureInvalid,
  DuplicateTx,
  NegativeBalance,
  Malformed,
};

const char* to_string(RejectReason r);

struct Rejection {
  RejectReason reason = RejectReason::None;
  std::string detail;
};

/// Full audit of a candidate block against a chain tip. Checks run in order:
/// linkage, proof-of-work, merkle root, transaction validity and signatures,
/// duplicate ids, balance replay, coinbase. Returns the first failure.
std::optional<Rejection> validate_block(const Chain& chain, const Block& block);

/// Validates the genesis structure and then every block against its prefix.
std::optional<Rejection> validate_chain(const Chain& chain);

/// Deterministic fold of all transactions and coinbases over the genesis
/// allocation. Throws NegativeBalance naming the offending tx id.
std::map<WalletAddress, MicroCoins> replay_balances(const Chain& chain);

// --- Block protocol messages -------------------------------------------------

enum class BlockMsgKind : std::uint8_t {
  TxAnnounce = 0,  // memory servers exchange settled transactions
  Proposal = 1,    // leader broadcasts proof-of-work + block
  Verdict = 2,     // validator's signed audit result
  ReVerify = 3,    // leader re-sends the block (plus any missing prefix)
  Commit = 4,      // unanimous approval: append everywhere
  Discard = 5,     // persistent rejection: drop the candidate
};

const char* to_string(BlockMsgKind k);

struct BlockMessage {
  BlockMsgKind kind = BlockMsgKind::TxAnnounce;
  std::vector<EnergyTransaction> txs;  // TxAnnounce
  std::optional<Block> block;          // Proposal / ReVerify / Commit
  std::vector<Block> sync_blocks;      // ReVerify: blocks the rejector is missing
  Hash32 block_hash{};                 // Verdict / Commit / Discard subject
  bool approve = false;                // Verdict
  std::uint32_t reason = 0;            // Verdict: RejectReason value
  std::uint64_t tip_height = 0;        // Verdict: voter's tip at audit time
  Hash32 tip_hash{};                   // Verdict
  WalletAddress voter{};               // Verdict signer
  crypto::Signature signature{};       // Verdict: over verdict_bytes()

  Bytes verdict_bytes() const;
  Bytes canonical_bytes() const;  // for event-log hashing
};

struct BlockEnvelope {
  NodeRef src;
  NodeRef dst;
  BlockMessage msg;
};

/// One APG in its role as blockchain node: holds the replicated chain, a
/// memory pool of announced transactions, and audits candidate blocks.
class ApgChainNode {
 public:
  ApgChainNode(Identity ident, NodeRef self, Chain chain);

  const NodeRef& ref() const { return self_; }
  const Identity& identity() const { return ident_; }
  Chain& chain() { return chain_; }
  const Chain& chain() const { return chain_; }
  const std::vector<EnergyTransaction>& mempool() const { return mempool_; }

  /// Adds transactions settled in this node's own city.
  void add_local_txs(const std::vector<EnergyTransaction>& txs);
  /// Accepts announced transactions; invalid or duplicate ones are neglected.
  void on_tx_announce(const std::vector<EnergyTransaction>& txs);

  /// Assembles and mines a candidate over the current mempool, sorted by
  /// (timestamp, id) so every honest proposer builds the same block.
  std::optional<Block> build_candidate(Tick now, std::uint64_t mine_seed,
                                       std::uint64_t max_attempts) const;

  /// Audits a candidate and returns the signed verdict message.
  BlockMessage make_verdict(const Block& candidate) const;
  bool verify_verdict(const BlockMessage& verdict) const;

  /// Appends an accepted block and drops its transactions from the mempool.
  void commit(const Block& block);

  /// Appends any of the given blocks that extend this node's tip (used by
  /// re-verification to heal a stale tip).
  void sync_from(const std::vector<Block>& blocks);

 private:
  Identity ident_;
  NodeRef self_;
  Chain chain_;
  std::vector<EnergyTransaction> mempool_;
};

struct ConsensusOutcome {
  bool accepted = false;
  int verification_rounds = 1;
  std::size_t messages = 0;  // message-count proxy for consensus cost
  std::vector<std::string> notes;
};

/// Leader-driven all-approve consensus: the proposer broadcasts its proof and
/// block, validators return signed verdicts, and a unanimous (or quorum)
/// tally commits on every node. Rejectors get exactly one re-verification
/// pass, preceded by a tip sync from the leader. Persistent rejection
/// discards the candidate everywhere.
ConsensusOutcome consensus_round(std::vector<ApgChainNode*>& nodes, const Block& candidate,
                                 std::size_t proposer);

/// The simulated mining race: each node's time-to-solve is exponential with
/// rate proportional to its hash power; the winner then actually mines.
struct RaceOutcome {
  std::size_t winner = 0;
  Tick delay = 1;
};

RaceOutcome mining_race(const std::vector<double>& hash_power, std::mt19937_64& rng,
                        double tick_scale = 8.0);

}  // namespace gridtrade
