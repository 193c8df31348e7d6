#include "gridtrade/ioe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>

#include "gridtrade/errors.hpp"

namespace gridtrade {

// --- Registry ---------------------------------------------------------------

namespace {

Bytes certificate_payload(const std::string& id, const crypto::PublicKey& pk) {
  WireWriter w;
  w.bytes(id);
  w.bytes(std::span<const std::uint8_t>(pk.data(), pk.size()));
  return w.take();
}

std::span<const std::uint8_t> as_span(const Bytes& b) { return {b.data(), b.size()}; }

}  // namespace

Registry::Registry(std::span<const std::uint8_t> root_seed)
    : root_(crypto::keypair_from_seed(root_seed)) {}

Identity Registry::register_entity(std::span<const std::uint8_t> entity_seed) {
  const crypto::KeyPair kp = crypto::keypair_from_seed(entity_seed);
  if (registered_.count(kp.pk) != 0) {
    throw DuplicateId("seed already registered");
  }
  registered_.insert(kp.pk);

  char handle[16];
  std::snprintf(handle, sizeof handle, "ENT-%06llu", static_cast<unsigned long long>(next_handle_++));

  Identity ident;
  ident.id = handle;
  ident.public_key = kp.pk;
  ident.private_key = kp.sk;
  ident.wallet_address = crypto::wallet_address(kp.pk);
  const Bytes payload = certificate_payload(ident.id, ident.public_key);
  const crypto::Signature sig = crypto::sign(root_.sk, as_span(payload));
  ident.certificate.assign(sig.begin(), sig.end());
  return ident;
}

bool Registry::verify_certificate(const Identity& ident) const {
  return verify_certificate(ident, root_.pk);
}

bool Registry::verify_certificate(const Identity& ident, const crypto::PublicKey& registry_pk) {
  if (ident.certificate.size() != sizeof(crypto::Signature)) return false;
  crypto::Signature sig{};
  std::copy(ident.certificate.begin(), ident.certificate.end(), sig.begin());
  const Bytes payload = certificate_payload(ident.id, ident.public_key);
  return crypto::verify(registry_pk, as_span(payload), sig);
}

// --- Directories and accounts -----------------------------------------------

const crypto::PublicKey* KeyDirectory::find(const WalletAddress& addr) const {
  auto it = keys_.find(addr);
  return it == keys_.end() ? nullptr : &it->second;
}

bool NonceTracker::would_accept(const WalletAddress& sender, std::uint64_t nonce) const {
  auto it = last_.find(sender);
  return it == last_.end() ? nonce > 0 : nonce > it->second;
}

bool NonceTracker::accept(const WalletAddress& sender, std::uint64_t nonce) {
  if (!would_accept(sender, nonce)) return false;
  last_[sender] = nonce;
  return true;
}

void AccountServer::open_account(const WalletAddress& addr, MicroCoins initial) {
  if (initial < 0) throw DomainError("initial balance must be >= 0");
  if (!accounts_.emplace(addr, initial).second) throw DuplicateId("account already exists");
}

MicroCoins AccountServer::balance(const WalletAddress& addr) const {
  auto it = accounts_.find(addr);
  if (it == accounts_.end()) throw UnknownTarget("no such account");
  return it->second;
}

void AccountServer::transfer(const WalletAddress& from, const WalletAddress& to,
                             MicroCoins amount) {
  if (amount < 0) throw DomainError("transfer amount must be >= 0");
  auto f = accounts_.find(from);
  auto t = accounts_.find(to);
  if (f == accounts_.end() || t == accounts_.end()) throw UnknownTarget("no such account");
  if (f->second < amount) throw InsufficientFunds("balance too low");
  f->second -= amount;
  t->second += amount;
}

void AccountServer::deposit(const WalletAddress& addr, MicroCoins amount) {
  if (amount < 0) throw DomainError("deposit must be >= 0");
  auto it = accounts_.find(addr);
  if (it == accounts_.end()) throw UnknownTarget("no such account");
  it->second += amount;
}

MicroCoins AccountServer::total() const {
  MicroCoins sum = 0;
  for (const auto& [addr, bal] : accounts_) sum += bal;
  return sum;
}

// --- Transactions -----------------------------------------------------------

MicroCoins EnergyTransaction::settlement_amount(double energy_j, double unit_price) {
  return std::llround(energy_j * unit_price * static_cast<double>(kMicroCoinsPerCoin));
}

Bytes EnergyTransaction::core_bytes() const {
  WireWriter w;
  w.bytes(seller);
  w.bytes(buyer);
  w.f64(energy_j);
  w.f64(unit_price);
  w.i64(amount);
  w.u64(timestamp);
  return w.take();
}

Hash32 EnergyTransaction::id() const {
  const Bytes core = core_bytes();
  return crypto::sha256(as_span(core));
}

Bytes EnergyTransaction::canonical_bytes() const {
  WireWriter w;
  const Bytes core = core_bytes();
  w.bytes(as_span(core));
  w.bytes(std::span<const std::uint8_t>(seller_sig.data(), seller_sig.size()));
  w.bytes(std::span<const std::uint8_t>(buyer_sig.data(), buyer_sig.size()));
  return w.take();
}

EnergyTransaction EnergyTransaction::decode(WireReader& r) {
  const Bytes core = r.bytes();
  WireReader cr(as_span(core));
  EnergyTransaction tx;
  tx.seller = cr.hash32();
  tx.buyer = cr.hash32();
  tx.energy_j = cr.f64();
  tx.unit_price = cr.f64();
  tx.amount = cr.i64();
  tx.timestamp = cr.u64();
  if (!cr.done()) throw WireError("trailing bytes in transaction core");

  const Bytes ssig = r.bytes();
  const Bytes bsig = r.bytes();
  if (ssig.size() != tx.seller_sig.size() || bsig.size() != tx.buyer_sig.size()) {
    throw WireError("bad signature length in transaction");
  }
  std::copy(ssig.begin(), ssig.end(), tx.seller_sig.begin());
  std::copy(bsig.begin(), bsig.end(), tx.buyer_sig.begin());
  return tx;
}

// --- Messages ----------------------------------------------------------------

const char* to_string(TradeKind k) {
  switch (k) {
    case TradeKind::EnergyRequest: return "EnergyRequest";
    case TradeKind::Response: return "Response";
    case TradeKind::TradeStart: return "TradeStart";
    case TradeKind::WalletReveal: return "WalletReveal";
    case TradeKind::Payment: return "Payment";
    case TradeKind::RecordAck: return "RecordAck";
  }
  return "?";
}

Bytes TradeMessage::signed_bytes() const {
  WireWriter w;
  w.u64(static_cast<std::uint64_t>(kind));
  switch (kind) {
    case TradeKind::EnergyRequest:
      w.f64(bid);
      break;
    case TradeKind::Response:
      w.u64(declined ? 1 : 0);
      w.f64(energy_j);
      break;
    case TradeKind::TradeStart:
      break;
    case TradeKind::WalletReveal:
      w.bytes(reveal);
      break;
    case TradeKind::Payment: {
      if (!tx) throw DomainError("Payment message without transaction");
      const Bytes t = tx->canonical_bytes();
      w.bytes(as_span(t));
      break;
    }
    case TradeKind::RecordAck:
      w.bytes(ack_tx_id);
      w.bytes(std::span<const std::uint8_t>(ack_seller_sig.data(), ack_seller_sig.size()));
      break;
  }
  w.bytes(sender);
  w.u64(city);
  w.u64(nonce);
  return w.take();
}

Bytes TradeMessage::canonical_bytes() const {
  WireWriter w;
  const Bytes body = signed_bytes();
  w.bytes(as_span(body));
  w.bytes(std::span<const std::uint8_t>(signature.data(), signature.size()));
  return w.take();
}

bool verify_message(const TradeMessage& msg, const KeyDirectory& keys, NonceTracker& nonces) {
  const crypto::PublicKey* pk = keys.find(msg.sender);
  if (pk == nullptr) return false;
  const Bytes body = msg.signed_bytes();
  if (!crypto::verify(*pk, as_span(body), msg.signature)) return false;
  return nonces.accept(msg.sender, msg.nonce);
}

// --- CCHP trader ---------------------------------------------------------------

CchpTrader::CchpTrader(Identity ident, CchpParams params, MarketParams market, std::uint32_t city,
                       NodeRef self, NodeRef apg_ref, WalletAddress apg_addr,
                       const KeyDirectory* keys)
    : ident_(std::move(ident)),
      params_(params),
      market_(market),
      city_(city),
      self_(self),
      apg_ref_(apg_ref),
      apg_addr_(apg_addr),
      keys_(keys) {}

TradeMessage CchpTrader::stamp_and_sign(TradeMessage msg) {
  msg.sender = ident_.wallet_address;
  msg.city = city_;
  msg.nonce = next_nonce_++;
  const Bytes body = msg.signed_bytes();
  msg.signature = crypto::sign(ident_.private_key, as_span(body));
  return msg;
}

bool CchpTrader::accept(const TradeMessage& msg) {
  if (msg.sender != apg_addr_ || msg.city != city_) {
    ++rejected_;
    return false;
  }
  const crypto::PublicKey* pk = keys_->find(msg.sender);
  const Bytes body = msg.signed_bytes();
  if (pk == nullptr || !crypto::verify(*pk, as_span(body), msg.signature)) {
    ++rejected_;
    return false;
  }
  if (!nonces_.accept(msg.sender, msg.nonce)) {
    ++rejected_;  // replayed or out-of-order
    return false;
  }
  return true;
}

std::vector<TradeEnvelope> CchpTrader::on_message(const TradeEnvelope& env, Tick /*now*/) {
  if (!accept(env.msg)) return {};

  std::vector<TradeEnvelope> out;
  switch (env.msg.kind) {
    case TradeKind::EnergyRequest: {
      if (!(env.msg.bid >= market_.p_m && env.msg.bid <= market_.p_c)) {
        ++rejected_;
        break;
      }
      const double beta = best_response(params_, market_, env.msg.bid);
      last_bid_ = env.msg.bid;
      last_energy_ = params_.capacity() * (1.0 - beta);
      TradeMessage reply;
      reply.kind = TradeKind::Response;
      reply.declined = false;
      reply.energy_j = last_energy_;
      out.push_back({self_, apg_ref_, stamp_and_sign(std::move(reply))});
      break;
    }
    case TradeKind::TradeStart: {
      TradeMessage reply;
      reply.kind = TradeKind::WalletReveal;
      reply.reveal = ident_.wallet_address;
      out.push_back({self_, apg_ref_, stamp_and_sign(std::move(reply))});
      break;
    }
    case TradeKind::Payment: {
      const EnergyTransaction& tx = *env.msg.tx;
      const crypto::PublicKey* buyer_pk = keys_->find(tx.buyer);
      const Bytes core = tx.core_bytes();
      const bool ok = tx.seller == ident_.wallet_address && tx.buyer == apg_addr_ &&
                      tx.unit_price == last_bid_ && tx.energy_j == last_energy_ &&
                      tx.energy_j > 0.0 &&
                      tx.amount == EnergyTransaction::settlement_amount(tx.energy_j, tx.unit_price) &&
                      buyer_pk != nullptr && crypto::verify(*buyer_pk, as_span(core), tx.buyer_sig);
      if (!ok) {
        ++rejected_;
        break;
      }
      TradeMessage reply;
      reply.kind = TradeKind::RecordAck;
      reply.ack_tx_id = tx.id();
      reply.ack_seller_sig = crypto::sign(ident_.private_key, as_span(core));
      out.push_back({self_, apg_ref_, stamp_and_sign(std::move(reply))});
      break;
    }
    default:
      ++rejected_;
      break;
  }
  return out;
}

// --- APG trader ----------------------------------------------------------------

ApgTrader::ApgTrader(Identity ident, std::uint32_t city, NodeRef self, std::vector<Member> members,
                     AccountServer* accounts, const KeyDirectory* keys)
    : ident_(std::move(ident)),
      city_(city),
      self_(self),
      members_(std::move(members)),
      accounts_(accounts),
      keys_(keys) {}

TradeMessage ApgTrader::stamp_and_sign(TradeMessage msg) {
  msg.sender = ident_.wallet_address;
  msg.city = city_;
  msg.nonce = next_nonce_++;
  const Bytes body = msg.signed_bytes();
  msg.signature = crypto::sign(ident_.private_key, as_span(body));
  return msg;
}

std::vector<TradeEnvelope> ApgTrader::broadcast(TradeMessage msg) {
  const TradeMessage signed_msg = stamp_and_sign(std::move(msg));
  std::vector<TradeEnvelope> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back({self_, m.ref, signed_msg});
  return out;
}

std::size_t ApgTrader::expected_responders() const {
  return members_.size() - excluded_.size();
}

void ApgTrader::exclude(const WalletAddress& addr, const std::string& why) {
  if (!excluded_.insert(addr).second) return;
  responded_.erase(addr);
  revealed_.erase(addr);
  final_energy_.erase(addr);
  for (auto it = pending_txs_.begin(); it != pending_txs_.end();) {
    if (it->seller == addr) {
      pending_acks_.erase(it->id());
      it = pending_txs_.erase(it);
    } else {
      ++it;
    }
  }
  result_.rejections.push_back(why);
}

std::vector<TradeEnvelope> ApgTrader::start_round(const EquilibriumResult& eq, Tick now) {
  phase_ = Phase::Sweep;
  schedule_.clear();
  for (const auto& t : eq.trace) schedule_.push_back(t.bid);
  final_bid_ = eq.p_b_star;
  sweep_index_ = 0;
  excluded_.clear();
  responded_.clear();
  final_energy_.clear();
  revealed_.clear();
  pending_txs_.clear();
  pending_acks_.clear();
  result_ = {};

  if (schedule_.empty()) {
    phase_ = Phase::FinalBid;
    TradeMessage req;
    req.kind = TradeKind::EnergyRequest;
    req.bid = final_bid_;
    return broadcast(std::move(req));
  }
  TradeMessage req;
  req.kind = TradeKind::EnergyRequest;
  req.bid = schedule_[0];
  auto out = broadcast(std::move(req));
  // Degenerate city (every member excluded up front) cannot respond at all.
  auto more = advance(now);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

std::vector<TradeEnvelope> ApgTrader::advance(Tick now) {
  std::vector<TradeEnvelope> out;
  bool progressed = true;
  while (progressed) {
    progressed = false;

    if ((phase_ == Phase::Sweep || phase_ == Phase::FinalBid) &&
        responded_.size() >= expected_responders()) {
      responded_.clear();
      if (phase_ == Phase::Sweep && ++sweep_index_ < schedule_.size()) {
        TradeMessage req;
        req.kind = TradeKind::EnergyRequest;
        req.bid = schedule_[sweep_index_];
        auto msgs = broadcast(std::move(req));
        out.insert(out.end(), msgs.begin(), msgs.end());
      } else if (phase_ == Phase::Sweep) {
        phase_ = Phase::FinalBid;
        TradeMessage req;
        req.kind = TradeKind::EnergyRequest;
        req.bid = final_bid_;
        auto msgs = broadcast(std::move(req));
        out.insert(out.end(), msgs.begin(), msgs.end());
      } else {
        phase_ = Phase::Reveal;
        TradeMessage start;
        start.kind = TradeKind::TradeStart;
        auto msgs = broadcast(std::move(start));
        out.insert(out.end(), msgs.begin(), msgs.end());
      }
      if (expected_responders() > 0) continue;
      progressed = true;  // nobody left to wait for; fall through the phases
      continue;
    }

    if (phase_ == Phase::Reveal && revealed_.size() >= expected_responders()) {
      pending_txs_.clear();
      pending_acks_.clear();
      for (const auto& m : members_) {
        auto it = final_energy_.find(m.address);
        if (it == final_energy_.end() || excluded_.count(m.address) != 0 ||
            revealed_.count(m.address) == 0) {
          continue;
        }
        EnergyTransaction tx;
        tx.seller = m.address;
        tx.buyer = ident_.wallet_address;
        tx.energy_j = it->second;
        tx.unit_price = final_bid_;
        tx.amount = EnergyTransaction::settlement_amount(tx.energy_j, tx.unit_price);
        tx.timestamp = now;
        const Bytes core = tx.core_bytes();
        tx.buyer_sig = crypto::sign(ident_.private_key, as_span(core));
        pending_acks_.insert(tx.id());
        pending_txs_.push_back(tx);
      }
      if (pending_txs_.empty()) {
        phase_ = Phase::Done;
        result_.complete = true;
        return out;
      }
      phase_ = Phase::Settle;
      for (const auto& tx : pending_txs_) {
        auto ref = std::find_if(members_.begin(), members_.end(),
                                [&](const Member& m) { return m.address == tx.seller; });
        TradeMessage pay;
        pay.kind = TradeKind::Payment;
        pay.tx = tx;
        out.push_back({self_, ref->ref, stamp_and_sign(std::move(pay))});
      }
      continue;
    }

    if (phase_ == Phase::Settle && pending_acks_.empty()) {
      MicroCoins total = 0;
      for (const auto& tx : pending_txs_) total += tx.amount;
      if (accounts_->balance(ident_.wallet_address) < total) {
        phase_ = Phase::Aborted;
        result_.aborted = true;
        result_.rejections.push_back("insufficient funds: round aborted, nothing settled");
        return out;
      }
      for (const auto& tx : pending_txs_) {
        accounts_->transfer(tx.buyer, tx.seller, tx.amount);
      }
      result_.transactions = pending_txs_;
      result_.complete = true;
      mempool_.insert(mempool_.end(), pending_txs_.begin(), pending_txs_.end());
      pending_txs_.clear();
      phase_ = Phase::Done;
      return out;
    }
  }
  return out;
}

std::vector<TradeEnvelope> ApgTrader::on_message(const TradeEnvelope& env, Tick now) {
  const TradeMessage& msg = env.msg;
  if (phase_ == Phase::Done || phase_ == Phase::Aborted || phase_ == Phase::Idle) return {};

  const bool member = std::any_of(members_.begin(), members_.end(),
                                  [&](const Member& m) { return m.address == msg.sender; });
  if (!member || msg.city != city_) {
    result_.rejections.push_back("message from unknown sender dropped");
    return {};
  }
  if (excluded_.count(msg.sender) != 0) return {};

  const crypto::PublicKey* pk = keys_->find(msg.sender);
  const Bytes body = msg.signed_bytes();
  if (pk == nullptr || !crypto::verify(*pk, as_span(body), msg.signature)) {
    exclude(msg.sender, std::string("signature invalid on ") + to_string(msg.kind) +
                            "; sender excluded from round");
    return advance(now);
  }
  if (!nonces_.accept(msg.sender, msg.nonce)) {
    result_.rejections.push_back(std::string("replayed ") + to_string(msg.kind) + " dropped");
    return {};
  }

  switch (msg.kind) {
    case TradeKind::Response:
      if (phase_ != Phase::Sweep && phase_ != Phase::FinalBid) return {};
      responded_.insert(msg.sender);
      if (phase_ == Phase::FinalBid && !msg.declined && msg.energy_j > 0.0) {
        final_energy_[msg.sender] = msg.energy_j;
      }
      return advance(now);

    case TradeKind::WalletReveal:
      if (phase_ != Phase::Reveal) return {};
      if (msg.reveal != msg.sender) {
        exclude(msg.sender, "wallet reveal does not match sender pseudonym");
        return advance(now);
      }
      revealed_.insert(msg.sender);
      return advance(now);

    case TradeKind::RecordAck: {
      if (phase_ != Phase::Settle) return {};
      auto it = std::find_if(pending_txs_.begin(), pending_txs_.end(),
                             [&](const EnergyTransaction& tx) { return tx.id() == msg.ack_tx_id; });
      if (it == pending_txs_.end() || it->seller != msg.sender) {
        result_.rejections.push_back("ack for unknown transaction dropped");
        return {};
      }
      const Bytes core = it->core_bytes();
      if (!crypto::verify(*pk, as_span(core), msg.ack_seller_sig)) {
        exclude(msg.sender, "seller countersignature invalid; sender excluded from round");
        return advance(now);
      }
      it->seller_sig = msg.ack_seller_sig;
      pending_acks_.erase(msg.ack_tx_id);
      return advance(now);
    }

    default:
      result_.rejections.push_back(std::string("unexpected ") + to_string(msg.kind) + " dropped");
      return {};
  }
}

std::vector<EnergyTransaction> ApgTrader::take_mempool() {
  std::vector<EnergyTransaction> out = std::move(mempool_);
  mempool_.clear();
  return out;
}

// --- Local round driver ----------------------------------------------------------

TradingRoundResult run_trading_round(ApgTrader& apg, std::vector<CchpTrader>& cchps,
                                     const EquilibriumResult& eq, const TradeInterceptor& tap) {
  std::deque<TradeEnvelope> queue;
  Tick tick = 0;
  for (auto& env : apg.start_round(eq, tick)) queue.push_back(std::move(env));

  while (!queue.empty()) {
    TradeEnvelope env = std::move(queue.front());
    queue.pop_front();
    ++tick;
    if (tap && !tap(env)) continue;
    std::vector<TradeEnvelope> out;
    if (env.dst.kind == NodeRef::Kind::Apg) {
      out = apg.on_message(env, tick);
    } else {
      out = cchps.at(env.dst.index).on_message(env, tick);
    }
    for (auto& e : out) queue.push_back(std::move(e));
  }

  if (apg.aborted()) {
    throw InsufficientFunds("APG wallet cannot cover the round's total payment");
  }
  if (!apg.round_complete()) {
    throw Error("trading round stalled before completion");
  }
  return apg.result();
}

}  // namespace gridtrade
