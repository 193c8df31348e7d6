#include "gridtrade/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace gridtrade {

namespace {

std::span<const std::uint8_t> as_span(const Bytes& b) { return {b.data(), b.size()}; }

Hash32 hash_pair(const Hash32& a, const Hash32& b) {
  std::array<std::uint8_t, 64> buf{};
  std::memcpy(buf.data(), a.data(), 32);
  std::memcpy(buf.data() + 32, b.data(), 32);
  return crypto::sha256(std::span<const std::uint8_t>(buf.data(), buf.size()));
}

}  // namespace

// --- Coinbase / header / block ------------------------------------------------

Bytes Coinbase::canonical_bytes() const {
  WireWriter w;
  w.bytes(miner);
  w.i64(amount);
  w.u64(timestamp);
  w.u64(height);
  return w.take();
}

Hash32 Coinbase::id() const { return crypto::sha256(as_span(canonical_bytes())); }

Coinbase Coinbase::decode(WireReader& r) {
  Coinbase c;
  c.miner = r.hash32();
  c.amount = r.i64();
  c.timestamp = r.u64();
  c.height = r.u64();
  return c;
}

Bytes BlockHeader::canonical_bytes() const {
  WireWriter w;
  w.bytes(prev_hash);
  w.bytes(merkle_root);
  w.u64(timestamp);
  w.u64(difficulty_bits);
  w.u64(nonce);
  w.bytes(miner);
  return w.take();
}

Hash32 BlockHeader::hash() const { return crypto::sha256(as_span(canonical_bytes())); }

BlockHeader BlockHeader::decode(WireReader& r) {
  BlockHeader h;
  h.prev_hash = r.hash32();
  h.merkle_root = r.hash32();
  h.timestamp = r.u64();
  h.difficulty_bits = static_cast<std::uint32_t>(r.u64());
  h.nonce = r.u64();
  h.miner = r.hash32();
  return h;
}

Bytes Block::canonical_bytes() const {
  WireWriter w;
  w.bytes(as_span(header.canonical_bytes()));
  w.u64(coinbase ? 1 : 0);
  if (coinbase) w.bytes(as_span(coinbase->canonical_bytes()));
  w.u64(txs.size());
  for (const auto& tx : txs) w.bytes(as_span(tx.canonical_bytes()));
  return w.take();
}

Block Block::decode(WireReader& r) {
  Block b;
  {
    const Bytes hb = r.bytes();
    WireReader hr(as_span(hb));
    b.header = BlockHeader::decode(hr);
    if (!hr.done()) throw WireError("trailing bytes in header");
  }
  if (r.u64() != 0) {
    const Bytes cb = r.bytes();
    WireReader cr(as_span(cb));
    b.coinbase = Coinbase::decode(cr);
    if (!cr.done()) throw WireError("trailing bytes in coinbase");
  }
  const std::uint64_t n = r.u64();
  b.txs.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const Bytes tb = r.bytes();
    WireReader tr(as_span(tb));
    b.txs.push_back(EnergyTransaction::decode(tr));
    if (!tr.done()) throw WireError("trailing bytes in transaction");
  }
  return b;
}

std::vector<Hash32> Block::leaf_ids() const {
  std::vector<Hash32> leaves;
  leaves.reserve(txs.size() + 1);
  if (coinbase) leaves.push_back(coinbase->id());
  for (const auto& tx : txs) leaves.push_back(tx.id());
  return leaves;
}

// --- Merkle and proof-of-work ---------------------------------------------------

Hash32 merkle_root(const std::vector<Hash32>& leaves) {
  if (leaves.empty()) throw EmptyBlock("merkle root over empty transaction list");
  std::vector<Hash32> level = leaves;
  while (level.size() > 1) {
    if (level.size() % 2 == 1) level.push_back(level.back());
    std::vector<Hash32> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      next.push_back(hash_pair(level[i], level[i + 1]));
    }
    level = std::move(next);
  }
  return level[0];
}

bool meets_difficulty(const Hash32& h, std::uint32_t bits) {
  std::uint32_t zeros = 0;
  for (std::uint8_t byte : h) {
    if (byte == 0) {
      zeros += 8;
      if (zeros >= bits) return true;
      continue;
    }
    for (int bit = 7; bit >= 0; --bit) {
      if ((byte >> bit) & 1) return zeros >= bits;
      if (++zeros >= bits) return true;
    }
  }
  return zeros >= bits;
}

MineOutcome mine(const BlockHeader& header_template, std::uint64_t max_attempts,
                 std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  BlockHeader h = header_template;
  MineOutcome out;
  while (out.attempts < max_attempts) {
    ++out.attempts;
    h.nonce = rng();
    if (meets_difficulty(h.hash(), h.difficulty_bits)) {
      out.nonce = h.nonce;
      return out;
    }
  }
  return out;
}

// --- Chain ----------------------------------------------------------------------

Block Chain::make_genesis(const ChainConfig& cfg) {
  Block g;
  g.header.prev_hash = Hash32{};
  g.header.merkle_root = Hash32{};
  g.header.timestamp = 0;
  g.header.difficulty_bits = cfg.difficulty_bits;
  g.header.nonce = 0;
  g.header.miner = WalletAddress{};
  return g;
}

Chain::Chain(ChainConfig cfg, std::map<WalletAddress, MicroCoins> genesis_alloc, KeyDirectory keys)
    : cfg_(cfg), genesis_alloc_(std::move(genesis_alloc)), keys_(std::move(keys)) {
  blocks_.push_back(make_genesis(cfg_));
  balances_ = genesis_alloc_;
}

void Chain::index_block(const Block& b) {
  if (b.coinbase) {
    tx_index_.insert(b.coinbase->id());
    balances_[b.coinbase->miner] += b.coinbase->amount;
  }
  for (const auto& tx : b.txs) {
    tx_index_.insert(tx.id());
    balances_[tx.buyer] -= tx.amount;  // may go negative on a corrupt chain
    balances_[tx.seller] += tx.amount;
  }
}

void Chain::append(Block b) {
  index_block(b);
  blocks_.push_back(std::move(b));
}

void Chain::rebuild_caches() {
  balances_ = genesis_alloc_;
  tx_index_.clear();
  for (std::size_t i = 1; i < blocks_.size(); ++i) index_block(blocks_[i]);
}

void Chain::truncate_to_height(std::uint64_t height) {
  if (height + 1 >= blocks_.size()) return;
  blocks_.resize(height + 1);
  rebuild_caches();
}

Bytes Chain::encode() const {
  WireWriter w;
  w.u64(cfg_.difficulty_bits);
  w.i64(cfg_.reward);
  w.u64(cfg_.quorum ? *cfg_.quorum : 0);
  w.u64(genesis_alloc_.size());
  for (const auto& [addr, bal] : genesis_alloc_) {
    w.bytes(addr);
    w.i64(bal);
  }
  const auto& keys = keys_.all();
  w.u64(keys.size());
  for (const auto& [addr, pk] : keys) {
    w.bytes(addr);
    w.bytes(std::span<const std::uint8_t>(pk.data(), pk.size()));
  }
  w.u64(blocks_.size());
  for (const auto& b : blocks_) w.bytes(as_span(b.canonical_bytes()));
  return w.take();
}

Chain Chain::decode(std::span<const std::uint8_t> data) {
  WireReader r(data);
  ChainConfig cfg;
  cfg.difficulty_bits = static_cast<std::uint32_t>(r.u64());
  cfg.reward = r.i64();
  const std::uint64_t quorum = r.u64();
  if (quorum != 0) cfg.quorum = quorum;

  std::map<WalletAddress, MicroCoins> alloc;
  const std::uint64_t nalloc = r.u64();
  for (std::uint64_t i = 0; i < nalloc; ++i) {
    const Hash32 addr = r.hash32();
    alloc[addr] = r.i64();
  }

  KeyDirectory keys;
  const std::uint64_t nkeys = r.u64();
  for (std::uint64_t i = 0; i < nkeys; ++i) {
    const Hash32 addr = r.hash32();
    const Bytes pkb = r.bytes();
    crypto::PublicKey pk{};
    if (pkb.size() != pk.size()) throw WireError("bad public key length");
    std::copy(pkb.begin(), pkb.end(), pk.begin());
    keys.add(addr, pk);
  }

  const std::uint64_t nblocks = r.u64();
  if (nblocks == 0) throw WireError("chain dump has no blocks");
  std::vector<Block> blocks;
  blocks.reserve(nblocks);
  for (std::uint64_t i = 0; i < nblocks; ++i) {
    const Bytes bb = r.bytes();
    WireReader br(as_span(bb));
    blocks.push_back(Block::decode(br));
    if (!br.done()) throw WireError("trailing bytes in block");
  }
  if (!r.done()) throw WireError("trailing bytes in chain dump");

  Chain chain(cfg, std::move(alloc), std::move(keys));
  chain.blocks_ = std::move(blocks);
  chain.rebuild_caches();
  return chain;
}

// --- Validation -------------------------------------------------------------------

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "Ok";
    case RejectReason::PrevHashMismatch: return "PrevHashMismatch";
    case RejectReason::TimestampOrder: return "TimestampOrder";
    case RejectReason::DifficultyMismatch: return "DifficultyMismatch";
    case RejectReason::PowInvalid: return "PowInvalid";
    case RejectReason::MerkleMismatch: return "MerkleMismatch";
    case RejectReason::CoinbaseInvalid: return "CoinbaseInvalid";
    case RejectReason::TxInvalid: return "TxInvalid";
    case RejectReason::SignatureInvalid: return "SignatureInvalid";
    case RejectReason::DuplicateTx: return "DuplicateTx";
    case RejectReason::NegativeBalance: return "NegativeBalance";
    case RejectReason::Malformed: return "Malformed";
  }
  return "?";
}

std::optional<Rejection> validate_block(const Chain& chain, const Block& block) {
  const BlockHeader& h = block.header;

  if (h.prev_hash != chain.tip().header.hash()) {
    return Rejection{RejectReason::PrevHashMismatch, "prev_hash does not match chain tip"};
  }
  if (h.timestamp < chain.tip().header.timestamp) {
    return Rejection{RejectReason::TimestampOrder, "timestamp precedes chain tip"};
  }
  if (h.difficulty_bits != chain.config().difficulty_bits) {
    return Rejection{RejectReason::DifficultyMismatch, "difficulty differs from chain config"};
  }
  if (!meets_difficulty(h.hash(), h.difficulty_bits)) {
    return Rejection{RejectReason::PowInvalid, "header hash does not meet difficulty"};
  }

  if (!block.coinbase) {
    return Rejection{RejectReason::CoinbaseInvalid, "block has no coinbase"};
  }
  if (merkle_root(block.leaf_ids()) != h.merkle_root) {
    return Rejection{RejectReason::MerkleMismatch, "merkle root mismatch"};
  }

  for (const auto& tx : block.txs) {
    if (!(tx.energy_j > 0.0) ||
        tx.amount != EnergyTransaction::settlement_amount(tx.energy_j, tx.unit_price)) {
      return Rejection{RejectReason::TxInvalid,
                       "tx " + crypto::hex(tx.id()) + " violates the settlement formula"};
    }
    const crypto::PublicKey* seller_pk = chain.keys().find(tx.seller);
    const crypto::PublicKey* buyer_pk = chain.keys().find(tx.buyer);
    const Bytes core = tx.core_bytes();
    if (seller_pk == nullptr || buyer_pk == nullptr ||
        !crypto::verify(*seller_pk, as_span(core), tx.seller_sig) ||
        !crypto::verify(*buyer_pk, as_span(core), tx.buyer_sig)) {
      return Rejection{RejectReason::SignatureInvalid,
                       "tx " + crypto::hex(tx.id()) + " signature check failed"};
    }
  }

  std::set<Hash32> in_block;
  for (const auto& tx : block.txs) {
    const Hash32 id = tx.id();
    if (chain.contains_tx(id) || !in_block.insert(id).second) {
      return Rejection{RejectReason::DuplicateTx, "tx " + crypto::hex(id) + " already recorded"};
    }
  }

  std::map<WalletAddress, MicroCoins> balances = chain.balances();
  for (const auto& tx : block.txs) {
    balances[tx.buyer] -= tx.amount;
    if (balances[tx.buyer] < 0) {
      return Rejection{RejectReason::NegativeBalance,
                       "tx " + crypto::hex(tx.id()) + " overdraws the buyer"};
    }
    balances[tx.seller] += tx.amount;
  }

  const Coinbase& cb = *block.coinbase;
  if (cb.amount != chain.config().reward || cb.miner != h.miner ||
      cb.height != chain.height() + 1 || cb.timestamp != h.timestamp) {
    return Rejection{RejectReason::CoinbaseInvalid, "coinbase fields inconsistent"};
  }
  return std::nullopt;
}

std::optional<Rejection> validate_chain(const Chain& chain) {
  const Block& g = chain.blocks().front();
  const Block expected = Chain::make_genesis(chain.config());
  if (g.canonical_bytes() != expected.canonical_bytes()) {
    return Rejection{RejectReason::Malformed, "genesis block malformed"};
  }

  Chain prefix(chain.config(), chain.genesis_alloc(), chain.keys());
  for (std::size_t i = 1; i < chain.blocks().size(); ++i) {
    if (auto r = validate_block(prefix, chain.blocks()[i])) {
      r->detail = "block " + std::to_string(i) + ": " + r->detail;
      return r;
    }
    prefix.append(chain.blocks()[i]);
  }
  return std::nullopt;
}

std::map<WalletAddress, MicroCoins> replay_balances(const Chain& chain) {
  std::map<WalletAddress, MicroCoins> balances = chain.genesis_alloc();
  for (std::size_t i = 1; i < chain.blocks().size(); ++i) {
    const Block& b = chain.blocks()[i];
    for (const auto& tx : b.txs) {
      balances[tx.buyer] -= tx.amount;
      if (balances[tx.buyer] < 0) {
        throw NegativeBalance("replay drove a balance negative at tx " + crypto::hex(tx.id()));
      }
      balances[tx.seller] += tx.amount;
    }
    if (b.coinbase) balances[b.coinbase->miner] += b.coinbase->amount;
  }
  return balances;
}

// --- Block protocol --------------------------------------------------------------

const char* to_string(BlockMsgKind k) {
  switch (k) {
    case BlockMsgKind::TxAnnounce: return "TxAnnounce";
    case BlockMsgKind::Proposal: return "Proposal";
    case BlockMsgKind::Verdict: return "Verdict";
    case BlockMsgKind::ReVerify: return "ReVerify";
    case BlockMsgKind::Commit: return "Commit";
    case BlockMsgKind::Discard: return "Discard";
  }
  return "?";
}

Bytes BlockMessage::verdict_bytes() const {
  WireWriter w;
  w.bytes(block_hash);
  w.u64(approve ? 1 : 0);
  w.u64(reason);
  w.u64(tip_height);
  w.bytes(tip_hash);
  w.bytes(voter);
  return w.take();
}

Bytes BlockMessage::canonical_bytes() const {
  WireWriter w;
  w.u64(static_cast<std::uint64_t>(kind));
  w.u64(txs.size());
  for (const auto& tx : txs) w.bytes(as_span(tx.canonical_bytes()));
  w.u64(block ? 1 : 0);
  if (block) w.bytes(as_span(block->canonical_bytes()));
  w.u64(sync_blocks.size());
  for (const auto& b : sync_blocks) w.bytes(as_span(b.canonical_bytes()));
  w.bytes(block_hash);
  w.u64(approve ? 1 : 0);
  w.u64(reason);
  w.u64(tip_height);
  w.bytes(tip_hash);
  w.bytes(voter);
  w.bytes(std::span<const std::uint8_t>(signature.data(), signature.size()));
  return w.take();
}

// --- Chain node --------------------------------------------------------------------

ApgChainNode::ApgChainNode(Identity ident, NodeRef self, Chain chain)
    : ident_(std::move(ident)), self_(self), chain_(std::move(chain)) {}

namespace {

bool tx_valid_standalone(const EnergyTransaction& tx, const KeyDirectory& keys) {
  if (!(tx.energy_j > 0.0)) return false;
  if (tx.amount != EnergyTransaction::settlement_amount(tx.energy_j, tx.unit_price)) return false;
  const crypto::PublicKey* seller_pk = keys.find(tx.seller);
  const crypto::PublicKey* buyer_pk = keys.find(tx.buyer);
  const Bytes core = tx.core_bytes();
  return seller_pk != nullptr && buyer_pk != nullptr &&
         crypto::verify(*seller_pk, std::span<const std::uint8_t>(core.data(), core.size()),
                        tx.seller_sig) &&
         crypto::verify(*buyer_pk, std::span<const std::uint8_t>(core.data(), core.size()),
                        tx.buyer_sig);
}

}  // namespace

void ApgChainNode::add_local_txs(const std::vector<EnergyTransaction>& txs) {
  on_tx_announce(txs);
}

void ApgChainNode::on_tx_announce(const std::vector<EnergyTransaction>& txs) {
  for (const auto& tx : txs) {
    const Hash32 id = tx.id();
    if (chain_.contains_tx(id)) continue;
    const bool pooled = std::any_of(mempool_.begin(), mempool_.end(),
                                    [&](const EnergyTransaction& t) { return t.id() == id; });
    if (pooled) continue;
    if (!tx_valid_standalone(tx, chain_.keys())) continue;  // neglected
    mempool_.push_back(tx);
  }
}

std::optional<Block> ApgChainNode::build_candidate(Tick now, std::uint64_t mine_seed,
                                                   std::uint64_t max_attempts) const {
  Block b;
  b.txs = mempool_;
  std::sort(b.txs.begin(), b.txs.end(), [](const EnergyTransaction& a, const EnergyTransaction& x) {
    if (a.timestamp != x.timestamp) return a.timestamp < x.timestamp;
    return a.id() < x.id();
  });

  Coinbase cb;
  cb.miner = ident_.wallet_address;
  cb.amount = chain_.config().reward;
  cb.timestamp = now;
  cb.height = chain_.height() + 1;
  b.coinbase = cb;

  b.header.prev_hash = chain_.tip().header.hash();
  b.header.merkle_root = merkle_root(b.leaf_ids());
  b.header.timestamp = now;
  b.header.difficulty_bits = chain_.config().difficulty_bits;
  b.header.miner = ident_.wallet_address;

  const MineOutcome mined = mine(b.header, max_attempts, mine_seed);
  if (!mined.nonce) return std::nullopt;
  b.header.nonce = *mined.nonce;
  return b;
}

BlockMessage ApgChainNode::make_verdict(const Block& candidate) const {
  BlockMessage v;
  v.kind = BlockMsgKind::Verdict;
  v.block_hash = candidate.header.hash();
  const auto rej = validate_block(chain_, candidate);
  v.approve = !rej.has_value();
  v.reason = static_cast<std::uint32_t>(rej ? rej->reason : RejectReason::None);
  v.tip_height = chain_.height();
  v.tip_hash = chain_.tip().header.hash();
  v.voter = ident_.wallet_address;
  const Bytes body = v.verdict_bytes();
  v.signature = crypto::sign(ident_.private_key, std::span<const std::uint8_t>(body.data(), body.size()));
  return v;
}

bool ApgChainNode::verify_verdict(const BlockMessage& verdict) const {
  const crypto::PublicKey* pk = chain_.keys().find(verdict.voter);
  if (pk == nullptr) return false;
  const Bytes body = verdict.verdict_bytes();
  return crypto::verify(*pk, std::span<const std::uint8_t>(body.data(), body.size()),
                        verdict.signature);
}

void ApgChainNode::commit(const Block& block) {
  chain_.append(block);
  std::erase_if(mempool_, [&](const EnergyTransaction& t) { return chain_.contains_tx(t.id()); });
}

void ApgChainNode::sync_from(const std::vector<Block>& blocks) {
  for (const auto& b : blocks) {
    if (b.header.prev_hash != chain_.tip().header.hash()) continue;
    if (validate_block(chain_, b)) continue;
    commit(b);
  }
}

// --- Synchronous consensus round ------------------------------------------------

ConsensusOutcome consensus_round(std::vector<ApgChainNode*>& nodes, const Block& candidate,
                                 std::size_t proposer) {
  ConsensusOutcome out;
  const std::size_t n = nodes.size();
  ApgChainNode* leader = nodes.at(proposer);
  const std::size_t needed = leader->chain().config().quorum.value_or(n);

  std::vector<BlockMessage> verdicts(n);
  std::vector<bool> approved(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    if (i != proposer) ++out.messages;  // proposal broadcast
    verdicts[i] = nodes[i]->make_verdict(candidate);
    if (i != proposer) ++out.messages;  // verdict reply
    approved[i] = leader->verify_verdict(verdicts[i]) && verdicts[i].approve;
  }

  auto tally = [&]() { return static_cast<std::size_t>(std::count(approved.begin(), approved.end(), true)); };

  if (tally() < needed) {
    // Second verification for rejectors: sync their tip from the leader's
    // chain first, then audit again.
    out.verification_rounds = 2;
    for (std::size_t i = 0; i < n; ++i) {
      if (approved[i]) continue;
      std::vector<Block> sync;
      for (std::uint64_t h = verdicts[i].tip_height + 1; h <= leader->chain().height(); ++h) {
        sync.push_back(leader->chain().blocks()[h]);
      }
      nodes[i]->sync_from(sync);
      ++out.messages;  // re-verification request
      verdicts[i] = nodes[i]->make_verdict(candidate);
      ++out.messages;  // second verdict
      approved[i] = leader->verify_verdict(verdicts[i]) && verdicts[i].approve;
      if (!approved[i]) {
        out.notes.push_back(nodes[i]->ref().str() + " persists in rejection: " +
                            to_string(static_cast<RejectReason>(verdicts[i].reason)));
      }
    }
  }

  if (tally() >= needed) {
    out.accepted = true;
    for (auto* node : nodes) node->commit(candidate);
    out.messages += n - 1;  // commit broadcast
  } else {
    out.accepted = false;
    out.messages += n - 1;  // discard broadcast
  }
  return out;
}

RaceOutcome mining_race(const std::vector<double>& hash_power, std::mt19937_64& rng,
                        double tick_scale) {
  RaceOutcome out;
  double best = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t i = 0; i < hash_power.size(); ++i) {
    const double rate = hash_power[i] > 0 ? hash_power[i] : 1e-12;
    const double t = -std::log(1.0 - uni(rng)) / rate;
    if (t < best) {
      best = t;
      out.winner = i;
    }
  }
  out.delay = 1 + static_cast<Tick>(std::floor(best * tick_scale));
  return out;
}

}  // namespace gridtrade
