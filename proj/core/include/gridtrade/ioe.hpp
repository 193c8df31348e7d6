#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridtrade/crypto.hpp"
#include "gridtrade/game.hpp"
#include "gridtrade/types.hpp"
#include "gridtrade/wire.hpp"

namespace gridtrade {

/// Credentials issued by the trusted registration institution.
struct Identity {
  std::string id;  // registry handle; never appears in protocol messages
  crypto::PublicKey public_key{};
  crypto::SecretKey private_key{};
  Bytes certificate;  // registry signature binding id <-> public_key
  WalletAddress wallet_address{};
};

/// The trusted institution entities register with. Issues deterministic
/// keypairs from registrant seeds and certificates under its root key.
class Registry {
 public:
  explicit Registry(std::span<const std::uint8_t> root_seed);

  /// Throws DuplicateId when the seed-derived key was already registered.
  Identity register_entity(std::span<const std::uint8_t> entity_seed);

  const crypto::PublicKey& public_key() const { return root_.pk; }
  bool verify_certificate(const Identity& ident) const;
  static bool verify_certificate(const Identity& ident, const crypto::PublicKey& registry_pk);

 private:
  crypto::KeyPair root_;
  std::set<crypto::PublicKey> registered_;
  std::uint64_t next_handle_ = 1;
};

/// Pseudonym -> verification key mapping shared across the ecosystem.
class KeyDirectory {
 public:
  void add(const WalletAddress& addr, const crypto::PublicKey& pk) { keys_[addr] = pk; }
  const crypto::PublicKey* find(const WalletAddress& addr) const;
  const std::map<WalletAddress, crypto::PublicKey>& all() const { return keys_; }

 private:
  std::map<WalletAddress, crypto::PublicKey> keys_;
};

/// Per-receiver replay protection: a sender's nonces must strictly increase.
class NonceTracker {
 public:
  bool would_accept(const WalletAddress& sender, std::uint64_t nonce) const;
  bool accept(const WalletAddress& sender, std::uint64_t nonce);

 private:
  std::map<WalletAddress, std::uint64_t> last_;
};

/// A city's account server: the single-writer balance ledger for the wallets
/// of the APG and its CCHPs. Balances never go negative.
class AccountServer {
 public:
  void open_account(const WalletAddress& addr, MicroCoins initial);
  bool has(const WalletAddress& addr) const { return accounts_.count(addr) != 0; }
  MicroCoins balance(const WalletAddress& addr) const;
  void transfer(const WalletAddress& from, const WalletAddress& to, MicroCoins amount);
  void deposit(const WalletAddress& addr, MicroCoins amount);
  MicroCoins total() const;
  const std::map<WalletAddress, MicroCoins>& accounts() const { return accounts_; }

 private:
  std::map<WalletAddress, MicroCoins> accounts_;
};

/// Dual-signed record of energy sold and coins paid between two pseudonyms.
struct EnergyTransaction {
  WalletAddress seller{};
  WalletAddress buyer{};
  double energy_j = 0;
  double unit_price = 0;   // coin/J
  MicroCoins amount = 0;   // settlement_amount(energy_j, unit_price)
  Tick timestamp = 0;
  crypto::Signature seller_sig{};
  crypto::Signature buyer_sig{};

  /// The signed core: all fields except the signatures, in declared order.
  Bytes core_bytes() const;
  Hash32 id() const;
  /// Core plus both signatures; the layout used in blocks and dumps.
  Bytes canonical_bytes() const;
  static EnergyTransaction decode(WireReader& r);

  /// Integer micro-coins: round-half-away-from-zero at the single
  /// price * energy multiplication.
  static MicroCoins settlement_amount(double energy_j, double unit_price);
};

enum class TradeKind : std::uint8_t {
  EnergyRequest = 0,  // APG broadcasts its bid
  Response = 1,       // CCHP offers energy (or declines)
  TradeStart = 2,     // APG commits to the final bid
  WalletReveal = 3,   // CCHP reveals its payout address
  Payment = 4,        // APG sends the buyer-signed transaction
  RecordAck = 5,      // CCHP returns its countersignature
};

const char* to_string(TradeKind k);

/// Signed intra-city protocol message. Only pseudonymous wallet addresses
/// appear on the wire; registry handles never do.
struct TradeMessage {
  TradeKind kind = TradeKind::EnergyRequest;

  double bid = 0;                       // EnergyRequest
  bool declined = false;                // Response
  double energy_j = 0;                  // Response
  WalletAddress reveal{};               // WalletReveal
  std::optional<EnergyTransaction> tx;  // Payment
  Hash32 ack_tx_id{};                   // RecordAck
  crypto::Signature ack_seller_sig{};   // RecordAck

  WalletAddress sender{};
  std::uint64_t city = 0;
  std::uint64_t nonce = 0;
  crypto::Signature signature{};

  /// Canonical bytes of everything the signature covers.
  Bytes signed_bytes() const;
  Bytes canonical_bytes() const;
};

/// True iff the signature verifies under the sender's registered key and the
/// nonce strictly exceeds the sender's last accepted nonce (which this call
/// then records).
bool verify_message(const TradeMessage& msg, const KeyDirectory& keys, NonceTracker& nonces);

struct TradeEnvelope {
  NodeRef src;
  NodeRef dst;
  TradeMessage msg;
};

struct TradingRoundResult {
  std::vector<EnergyTransaction> transactions;
  std::vector<std::string> rejections;  // dropped/excluded message notes
  bool complete = false;
  bool aborted = false;  // InsufficientFunds: nothing settled
};

/// Follower half of the smart contract: responds to bids with the energy it
/// is willing to sell, reveals its wallet, and countersigns its payment.
class CchpTrader {
 public:
  CchpTrader(Identity ident, CchpParams params, MarketParams market, std::uint32_t city,
             NodeRef self, NodeRef apg_ref, WalletAddress apg_addr, const KeyDirectory* keys);

  std::vector<TradeEnvelope> on_message(const TradeEnvelope& env, Tick now);

  const Identity& identity() const { return ident_; }
  const NodeRef& ref() const { return self_; }
  std::uint64_t rejected_messages() const { return rejected_; }

 private:
  TradeMessage stamp_and_sign(TradeMessage msg);
  bool accept(const TradeMessage& msg);

  Identity ident_;
  CchpParams params_;
  MarketParams market_;
  std::uint32_t city_;
  NodeRef self_;
  NodeRef apg_ref_;
  WalletAddress apg_addr_{};
  const KeyDirectory* keys_;
  NonceTracker nonces_;
  std::uint64_t next_nonce_ = 1;
  std::uint64_t rejected_ = 0;
  double last_bid_ = 0;
  double last_energy_ = 0;
};

/// Leader half of the smart contract. Replays the converged bid schedule,
/// starts the trade, generates buyer-signed transactions, collects seller
/// countersignatures, and settles atomically through the account server.
class ApgTrader {
 public:
  struct Member {
    NodeRef ref;
    WalletAddress address{};
  };

  ApgTrader(Identity ident, std::uint32_t city, NodeRef self, std::vector<Member> members,
            AccountServer* accounts, const KeyDirectory* keys);

  /// Emits the first bid broadcast. The schedule is the equilibrium trace
  /// followed by a final request at the equilibrium bid itself.
  std::vector<TradeEnvelope> start_round(const EquilibriumResult& eq, Tick now);
  std::vector<TradeEnvelope> on_message(const TradeEnvelope& env, Tick now);

  bool round_complete() const { return phase_ == Phase::Done; }
  bool aborted() const { return phase_ == Phase::Aborted; }
  const TradingRoundResult& result() const { return result_; }

  /// Settled transactions awaiting inclusion in a block.
  std::vector<EnergyTransaction> take_mempool();

  const Identity& identity() const { return ident_; }
  const NodeRef& ref() const { return self_; }

 private:
  enum class Phase { Idle, Sweep, FinalBid, Reveal, Settle, Done, Aborted };

  TradeMessage stamp_and_sign(TradeMessage msg);
  std::vector<TradeEnvelope> broadcast(TradeMessage msg);
  std::vector<TradeEnvelope> advance(Tick now);
  void exclude(const WalletAddress& addr, const std::string& why);
  std::size_t expected_responders() const;

  Identity ident_;
  std::uint32_t city_;
  NodeRef self_;
  std::vector<Member> members_;
  AccountServer* accounts_;
  const KeyDirectory* keys_;
  NonceTracker nonces_;
  std::uint64_t next_nonce_ = 1;

  Phase phase_ = Phase::Idle;
  std::vector<double> schedule_;
  double final_bid_ = 0;
  std::size_t sweep_index_ = 0;
  std::set<WalletAddress> excluded_;
  std::set<WalletAddress> responded_;
  std::map<WalletAddress, double> final_energy_;
  std::set<WalletAddress> revealed_;
  std::vector<EnergyTransaction> pending_txs_;
  std::set<Hash32> pending_acks_;
  TradingRoundResult result_;
  std::vector<EnergyTransaction> mempool_;
};

/// Delivery tap for fault injection: may mutate the envelope in flight;
/// returning false drops it.
using TradeInterceptor = std::function<bool(TradeEnvelope&)>;

/// Runs one complete trading round over an in-order local delivery loop.
/// Throws InsufficientFunds when the APG cannot cover the total payment;
/// in that case no balance has moved.
TradingRoundResult run_trading_round(ApgTrader& apg, std::vector<CchpTrader>& cchps,
                                     const EquilibriumResult& eq,
                                     const TradeInterceptor& tap = {});

}  // namespace gridtrade
