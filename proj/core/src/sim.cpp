#include "gridtrade/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <set>

namespace gridtrade {

namespace {

constexpr Tick kConsensusTimeout = 32;
constexpr std::uint64_t kMaxMineAttempts = std::uint64_t{1} << 22;

struct ControlEvent {
  std::uint64_t token = 0;
};

using SimPayload = std::variant<TradeEnvelope, BlockEnvelope, ControlEvent>;

struct PendingEvent {
  Tick at = 0;
  std::uint64_t seq = 0;
  SimPayload payload;
};

struct LaterFirst {
  bool operator()(const PendingEvent& a, const PendingEvent& b) const {
    if (a.at != b.at) return a.at > b.at;
    return a.seq > b.seq;  // equal ticks process in scheduling order
  }
};

Bytes string_seed(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::span<const std::uint8_t> as_span(const Bytes& b) { return {b.data(), b.size()}; }

void tamper_trade(TradeMessage& msg) {
  switch (msg.kind) {
    case TradeKind::EnergyRequest:
      msg.bid *= 1.0 + 1e-9;
      break;
    case TradeKind::Response:
      msg.energy_j += 1.0;
      break;
    case TradeKind::Payment:
      if (msg.tx) msg.tx->amount += 1;
      break;
    default:
      msg.signature[0] ^= 0x01;
      break;
  }
}

void tamper_block(BlockMessage& msg) { msg.signature[0] ^= 0x01; }

}  // namespace

Scenario inject_fault(Scenario scenario, const FaultSpec& fault) {
  auto check_node = [&](const NodeRef& ref) {
    if (ref.city >= scenario.cities.size()) {
      throw UnknownTarget("fault targets unknown city " + ref.str());
    }
    if (ref.kind == NodeRef::Kind::Cchp &&
        ref.index >= scenario.cities[ref.city].cchps.size()) {
      throw UnknownTarget("fault targets unknown node " + ref.str());
    }
  };
  if (fault.kind == FaultSpec::Kind::StaleTip) {
    check_node(fault.node);
    if (fault.node.kind != NodeRef::Kind::Apg) {
      throw UnknownTarget("stale-tip fault must target an APG node");
    }
    if (fault.at_round < 1 || fault.at_round > static_cast<std::uint64_t>(scenario.game.rounds)) {
      throw UnknownTarget("stale-tip fault round out of range");
    }
  } else {
    check_node(fault.src);
    check_node(fault.dst);
    if (fault.occurrence < 1) throw UnknownTarget("fault occurrence must be >= 1");
  }
  scenario.faults.push_back(fault);
  return scenario;
}

std::string LogRecord::line() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%llu,%llu,", static_cast<unsigned long long>(tick),
                static_cast<unsigned long long>(seq));
  return std::string(buf) + src.str() + "," + dst.str() + "," + kind + "," +
         crypto::hex(payload_hash).substr(0, 16);
}

namespace {

class SimEngine {
 public:
  explicit SimEngine(const Scenario& scenario) : scn_(scenario), rng_(scenario.seed) {}

  RunReport run();

 private:
  struct CityState {
    MarketParams market;
    std::vector<CchpParams> params;
    AccountServer accounts;
    std::vector<CchpTrader> cchps;
    std::unique_ptr<ApgTrader> apg;
    std::unique_ptr<ApgChainNode> node;
    WalletAddress apg_wallet{};
  };

  struct ConsensusState {
    bool active = false;
    bool reverified = false;
    bool done = false;
    std::uint64_t token = 0;
    std::size_t leader = 0;
    Block candidate;
    std::map<std::size_t, BlockMessage> verdicts;
    std::set<std::size_t> awaiting;
  };

  void setup();
  Tick latency();
  void enqueue(Tick at, SimPayload payload);
  void schedule_trade(TradeEnvelope env, Tick from);
  void schedule_block(BlockEnvelope env, Tick from);
  void pump();
  void deliver_trade(const TradeEnvelope& env);
  void deliver_block(const BlockEnvelope& env);
  void run_round(int round_index);
  void begin_consensus(std::size_t winner, Block candidate);
  void conclude_consensus();
  void finalize();

  const Scenario& scn_;
  std::mt19937_64 rng_;
  RunReport report_;
  std::vector<std::unique_ptr<CityState>> cities_;
  KeyDirectory keydir_;
  std::map<WalletAddress, MicroCoins> genesis_alloc_;
  std::priority_queue<PendingEvent, std::vector<PendingEvent>, LaterFirst> queue_;
  std::vector<std::uint64_t> fault_hits_;
  Tick tick_ = 0;
  std::uint64_t next_seq_ = 0;
  ConsensusState cons_;
  bool any_abort_ = false;
  bool any_discard_ = false;
};

void SimEngine::setup() {
  Registry registry(string_seed("gridtrade:registry:" + std::to_string(scn_.seed)));

  for (std::size_t c = 0; c < scn_.cities.size(); ++c) {
    const CityScenario& cs = scn_.cities[c];
    auto city = std::make_unique<CityState>();
    city->market = cs.market;
    city->params = cs.cchps;

    const std::string base = "gridtrade:" + std::to_string(scn_.seed) + ":c" + std::to_string(c);
    Identity apg_ident = registry.register_entity(string_seed(base + ":apg"));
    city->apg_wallet = apg_ident.wallet_address;
    keydir_.add(apg_ident.wallet_address, apg_ident.public_key);
    city->accounts.open_account(apg_ident.wallet_address, scn_.wallets.apg_initial);
    genesis_alloc_[apg_ident.wallet_address] = scn_.wallets.apg_initial;

    std::vector<ApgTrader::Member> members;
    for (std::size_t i = 0; i < cs.cchps.size(); ++i) {
      Identity ident = registry.register_entity(string_seed(base + ":cchp" + std::to_string(i)));
      keydir_.add(ident.wallet_address, ident.public_key);
      city->accounts.open_account(ident.wallet_address, scn_.wallets.cchp_initial);
      genesis_alloc_[ident.wallet_address] = scn_.wallets.cchp_initial;
      members.push_back({NodeRef::cchp(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(i)),
                         ident.wallet_address});
      city->cchps.emplace_back(std::move(ident), cs.cchps[i], cs.market,
                               static_cast<std::uint32_t>(c),
                               NodeRef::cchp(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(i)),
                               NodeRef::apg(static_cast<std::uint32_t>(c)), apg_ident.wallet_address,
                               &keydir_);
    }

    city->apg = std::make_unique<ApgTrader>(apg_ident, static_cast<std::uint32_t>(c),
                                            NodeRef::apg(static_cast<std::uint32_t>(c)),
                                            std::move(members), &city->accounts, &keydir_);
    cities_.push_back(std::move(city));
  }

  // Every APG's chain starts from the same genesis allocation and key set.
  for (std::size_t c = 0; c < cities_.size(); ++c) {
    Chain chain(scn_.chain, genesis_alloc_, keydir_);
    cities_[c]->node = std::make_unique<ApgChainNode>(cities_[c]->apg->identity(),
                                                      NodeRef::apg(static_cast<std::uint32_t>(c)),
                                                      std::move(chain));
  }

  for (const auto& [addr, bal] : genesis_alloc_) report_.initial_supply += bal;
  fault_hits_.assign(scn_.faults.size(), 0);
}

Tick SimEngine::latency() {
  if (scn_.latency.kind == LatencyModel::Kind::Fixed) return scn_.latency.fixed;
  std::uniform_int_distribution<Tick> d(scn_.latency.lo, scn_.latency.hi);
  return d(rng_);
}

void SimEngine::enqueue(Tick at, SimPayload payload) {
  queue_.push(PendingEvent{at, next_seq_++, std::move(payload)});
}

void SimEngine::schedule_trade(TradeEnvelope env, Tick from) {
  Tick extra = 0;
  for (std::size_t f = 0; f < scn_.faults.size(); ++f) {
    const FaultSpec& spec = scn_.faults[f];
    if (spec.kind == FaultSpec::Kind::StaleTip) continue;
    if (spec.src != env.src || spec.dst != env.dst) continue;
    if (!spec.msg_kind.empty() && spec.msg_kind != to_string(env.msg.kind)) continue;
    if (++fault_hits_[f] != spec.occurrence) continue;
    switch (spec.kind) {
      case FaultSpec::Kind::DropMessage:
        report_.rejected.push_back("fault: dropped " + std::string(to_string(env.msg.kind)) +
                                   " " + env.src.str() + "->" + env.dst.str());
        return;
      case FaultSpec::Kind::DelayMessage:
        extra += spec.delay;
        report_.rejected.push_back("fault: delayed " + std::string(to_string(env.msg.kind)));
        break;
      case FaultSpec::Kind::TamperMessage:
        tamper_trade(env.msg);
        report_.rejected.push_back("fault: tampered " + std::string(to_string(env.msg.kind)) +
                                   " from " + env.src.str());
        break;
      case FaultSpec::Kind::ReplayMessage:
        enqueue(from + latency() + spec.delay, env);
        report_.rejected.push_back("fault: replayed " + std::string(to_string(env.msg.kind)) +
                                   " from " + env.src.str());
        break;
      default:
        break;
    }
  }
  enqueue(from + latency() + extra, std::move(env));
}

void SimEngine::schedule_block(BlockEnvelope env, Tick from) {
  Tick extra = 0;
  for (std::size_t f = 0; f < scn_.faults.size(); ++f) {
    const FaultSpec& spec = scn_.faults[f];
    if (spec.kind == FaultSpec::Kind::StaleTip) continue;
    if (spec.src != env.src || spec.dst != env.dst) continue;
    if (!spec.msg_kind.empty() && spec.msg_kind != to_string(env.msg.kind)) continue;
    if (++fault_hits_[f] != spec.occurrence) continue;
    switch (spec.kind) {
      case FaultSpec::Kind::DropMessage:
        report_.rejected.push_back("fault: dropped " + std::string(to_string(env.msg.kind)) +
                                   " " + env.src.str() + "->" + env.dst.str());
        return;
      case FaultSpec::Kind::DelayMessage:
        extra += spec.delay;
        break;
      case FaultSpec::Kind::TamperMessage:
        tamper_block(env.msg);
        report_.rejected.push_back("fault: tampered " + std::string(to_string(env.msg.kind)));
        break;
      case FaultSpec::Kind::ReplayMessage:
        enqueue(from + latency() + spec.delay, env);
        break;
      default:
        break;
    }
  }
  enqueue(from + latency() + extra, std::move(env));
}

void SimEngine::pump() {
  while (!queue_.empty()) {
    PendingEvent ev = queue_.top();
    queue_.pop();
    tick_ = std::max(tick_, ev.at);
    if (std::holds_alternative<TradeEnvelope>(ev.payload)) {
      const auto& env = std::get<TradeEnvelope>(ev.payload);
      report_.events.push_back(LogRecord{ev.at, ev.seq, env.src, env.dst,
                                         to_string(env.msg.kind),
                                         crypto::sha256(as_span(env.msg.canonical_bytes()))});
      deliver_trade(env);
    } else if (std::holds_alternative<BlockEnvelope>(ev.payload)) {
      const auto& env = std::get<BlockEnvelope>(ev.payload);
      report_.events.push_back(LogRecord{ev.at, ev.seq, env.src, env.dst,
                                         to_string(env.msg.kind),
                                         crypto::sha256(as_span(env.msg.canonical_bytes()))});
      if (env.msg.kind != BlockMsgKind::TxAnnounce) ++report_.consensus_messages;
      deliver_block(env);
    } else {
      const auto& ctl = std::get<ControlEvent>(ev.payload);
      if (cons_.active && !cons_.done && ctl.token == cons_.token) conclude_consensus();
    }
  }
}

void SimEngine::deliver_trade(const TradeEnvelope& env) {
  if (env.src.city != env.dst.city) {
    report_.violations.push_back("isolation: trade message crossed cities " + env.src.str() +
                                 "->" + env.dst.str());
    return;
  }
  CityState& city = *cities_.at(env.dst.city);
  std::vector<TradeEnvelope> out;
  if (env.dst.kind == NodeRef::Kind::Apg) {
    out = city.apg->on_message(env, tick_);
  } else {
    out = city.cchps.at(env.dst.index).on_message(env, tick_);
  }
  for (auto& e : out) schedule_trade(std::move(e), tick_);
}

void SimEngine::deliver_block(const BlockEnvelope& env) {
  const std::size_t me = env.dst.city;
  ApgChainNode& node = *cities_.at(me)->node;
  switch (env.msg.kind) {
    case BlockMsgKind::TxAnnounce:
      node.on_tx_announce(env.msg.txs);
      break;
    case BlockMsgKind::Proposal: {
      if (!env.msg.block) break;
      BlockMessage v = node.make_verdict(*env.msg.block);
      schedule_block({env.dst, env.src, std::move(v)}, tick_);
      break;
    }
    case BlockMsgKind::ReVerify: {
      if (!env.msg.block) break;
      node.sync_from(env.msg.sync_blocks);
      BlockMessage v = node.make_verdict(*env.msg.block);
      schedule_block({env.dst, env.src, std::move(v)}, tick_);
      break;
    }
    case BlockMsgKind::Verdict: {
      if (!cons_.active || cons_.done || me != cons_.leader) break;
      if (env.msg.block_hash != cons_.candidate.header.hash()) break;
      const std::size_t voter_city = env.src.city;
      cons_.verdicts[voter_city] = env.msg;
      cons_.awaiting.erase(voter_city);
      if (cons_.awaiting.empty()) conclude_consensus();
      break;
    }
    case BlockMsgKind::Commit:
      if (env.msg.block) node.commit(*env.msg.block);
      break;
    case BlockMsgKind::Discard:
      break;
  }
}

void SimEngine::begin_consensus(std::size_t winner, Block candidate) {
  cons_.active = true;
  cons_.reverified = false;
  cons_.done = false;
  ++cons_.token;
  cons_.leader = winner;
  cons_.candidate = std::move(candidate);
  cons_.verdicts.clear();
  cons_.awaiting.clear();

  ApgChainNode& leader = *cities_[winner]->node;
  cons_.verdicts[winner] = leader.make_verdict(cons_.candidate);

  const NodeRef src = NodeRef::apg(static_cast<std::uint32_t>(winner));
  for (std::size_t c = 0; c < cities_.size(); ++c) {
    if (c == winner) continue;
    cons_.awaiting.insert(c);
    BlockMessage m;
    m.kind = BlockMsgKind::Proposal;
    m.block = cons_.candidate;
    m.block_hash = cons_.candidate.header.hash();
    schedule_block({src, NodeRef::apg(static_cast<std::uint32_t>(c)), std::move(m)}, tick_);
  }
  if (cities_.size() == 1) {
    conclude_consensus();
  } else {
    enqueue(tick_ + kConsensusTimeout, ControlEvent{cons_.token});
  }
}

void SimEngine::conclude_consensus() {
  if (!cons_.active || cons_.done) return;
  ApgChainNode& leader = *cities_[cons_.leader]->node;
  const std::size_t n = cities_.size();
  const std::size_t needed = scn_.chain.quorum.value_or(n);

  auto approvals = [&]() {
    std::size_t count = 0;
    for (const auto& [i, v] : cons_.verdicts) {
      if (v.approve && leader.verify_verdict(v)) ++count;
    }
    return count;
  };

  if (approvals() >= needed) {
    cons_.done = true;
    const NodeRef src = NodeRef::apg(static_cast<std::uint32_t>(cons_.leader));
    leader.commit(cons_.candidate);
    for (std::size_t c = 0; c < n; ++c) {
      if (c == cons_.leader) continue;
      BlockMessage m;
      m.kind = BlockMsgKind::Commit;
      m.block = cons_.candidate;
      m.block_hash = cons_.candidate.header.hash();
      schedule_block({src, NodeRef::apg(static_cast<std::uint32_t>(c)), std::move(m)}, tick_);
    }
    // The proposer earns the mining reward in its own city's account ledger;
    // the chain records the same credit through the coinbase.
    cities_[cons_.leader]->accounts.deposit(cons_.candidate.header.miner,
                                            cons_.candidate.coinbase->amount);
    ++report_.blocks_committed;
    return;
  }

  if (!cons_.reverified) {
    cons_.reverified = true;
    ++cons_.token;  // retire the previous timeout
    const NodeRef src = NodeRef::apg(static_cast<std::uint32_t>(cons_.leader));
    for (std::size_t c = 0; c < n; ++c) {
      if (c == cons_.leader) continue;
      auto it = cons_.verdicts.find(c);
      const bool ok = it != cons_.verdicts.end() && it->second.approve &&
                      leader.verify_verdict(it->second);
      if (ok) continue;
      std::uint64_t from_height = 0;
      if (it != cons_.verdicts.end()) from_height = it->second.tip_height;
      BlockMessage m;
      m.kind = BlockMsgKind::ReVerify;
      m.block = cons_.candidate;
      m.block_hash = cons_.candidate.header.hash();
      for (std::uint64_t h = from_height + 1; h <= leader.chain().height(); ++h) {
        m.sync_blocks.push_back(leader.chain().blocks()[h]);
      }
      cons_.awaiting.insert(c);
      cons_.verdicts.erase(c);
      report_.rejected.push_back("consensus: re-verification requested from c" +
                                 std::to_string(c));
      schedule_block({src, NodeRef::apg(static_cast<std::uint32_t>(c)), std::move(m)}, tick_);
    }
    enqueue(tick_ + kConsensusTimeout, ControlEvent{cons_.token});
    return;
  }

  cons_.done = true;
  any_discard_ = true;
  report_.rejected.push_back("consensus: candidate rejected after re-verification; discarded");
  const NodeRef src = NodeRef::apg(static_cast<std::uint32_t>(cons_.leader));
  for (std::size_t c = 0; c < n; ++c) {
    if (c == cons_.leader) continue;
    BlockMessage m;
    m.kind = BlockMsgKind::Discard;
    m.block_hash = cons_.candidate.header.hash();
    schedule_block({src, NodeRef::apg(static_cast<std::uint32_t>(c)), std::move(m)}, tick_);
  }
}

void SimEngine::run_round(int round_index) {
  // Trading inside every city, over the shared event queue.
  for (std::size_t c = 0; c < cities_.size(); ++c) {
    auto out = cities_[c]->apg->start_round(report_.equilibria[c], tick_);
    for (auto& e : out) schedule_trade(std::move(e), tick_);
  }
  pump();

  for (std::size_t c = 0; c < cities_.size(); ++c) {
    ApgTrader& apg = *cities_[c]->apg;
    if (apg.aborted()) {
      any_abort_ = true;
    } else if (!apg.round_complete()) {
      report_.violations.push_back("liveness: trading round stalled in city " +
                                   std::to_string(c));
    }
    report_.trading[c].push_back(apg.result());

    // Step 6: record locally, then announce to every other memory server.
    const std::vector<EnergyTransaction> txs = apg.take_mempool();
    if (txs.empty()) continue;
    cities_[c]->node->add_local_txs(txs);
    for (std::size_t other = 0; other < cities_.size(); ++other) {
      if (other == c) continue;
      BlockMessage m;
      m.kind = BlockMsgKind::TxAnnounce;
      m.txs = txs;
      schedule_block({NodeRef::apg(static_cast<std::uint32_t>(c)),
                      NodeRef::apg(static_cast<std::uint32_t>(other)), std::move(m)},
                     tick_);
    }
  }
  pump();

  for (const FaultSpec& f : scn_.faults) {
    if (f.kind != FaultSpec::Kind::StaleTip) continue;
    if (f.at_round != static_cast<std::uint64_t>(round_index + 1)) continue;
    ApgChainNode& node = *cities_.at(f.node.city)->node;
    if (node.chain().height() >= 1) {
      node.chain().truncate_to_height(node.chain().height() - 1);
      report_.rejected.push_back("fault: " + f.node.str() + " given a stale chain tip");
    }
  }

  if (cities_[0]->node->mempool().empty()) return;  // nothing to seal this round

  // Mining race: everyone draws a time-to-solve, the fastest actually mines.
  std::vector<double> power = scn_.hash_power;
  power.resize(cities_.size(), 1.0);
  const RaceOutcome race = mining_race(power, rng_);

  std::optional<Block> candidate;
  while (!candidate) {
    candidate = cities_[race.winner]->node->build_candidate(tick_ + race.delay, rng_(),
                                                            kMaxMineAttempts);
    if (!candidate) report_.rejected.push_back("mining: search exhausted, rescheduled");
  }
  tick_ += race.delay;
  begin_consensus(race.winner, std::move(*candidate));
  pump();
}

void SimEngine::finalize() {
  for (const auto& city : cities_) {
    for (const auto& [addr, bal] : city->accounts.accounts()) {
      report_.final_balances[addr] = bal;
    }
  }

  for (const auto& city : cities_) {
    report_.chain_dumps.push_back(city->node->chain().encode());
  }
  for (std::size_t c = 1; c < cities_.size(); ++c) {
    if (report_.chain_dumps[c] != report_.chain_dumps[0]) {
      report_.violations.push_back("replication: chain of c" + std::to_string(c) +
                                   " differs from c0");
    }
  }

  try {
    report_.chain_balances = replay_balances(cities_[0]->node->chain());
  } catch (const NegativeBalance& e) {
    report_.violations.push_back(std::string("replay: ") + e.what());
  }

  MicroCoins total = 0;
  for (const auto& [addr, bal] : report_.final_balances) total += bal;
  const MicroCoins expected =
      report_.initial_supply + scn_.chain.reward * report_.blocks_committed;
  if (total != expected) {
    report_.violations.push_back("conservation: account total " + std::to_string(total) +
                                 " != initial supply + rewards " + std::to_string(expected));
  }

  if (!any_abort_ && !any_discard_) {
    if (report_.chain_balances != report_.final_balances) {
      report_.violations.push_back("ledger: chain replay disagrees with account balances");
    }
    for (std::size_t c = 0; c < cities_.size(); ++c) {
      if (!cities_[c]->node->mempool().empty()) {
        report_.violations.push_back("liveness: mempool of c" + std::to_string(c) +
                                     " not empty at end of run");
      }
    }
  }

  if (auto r = validate_chain(cities_[0]->node->chain())) {
    report_.violations.push_back("chain: " + std::string(to_string(r->reason)) + " " + r->detail);
  }
}

RunReport SimEngine::run() {
  if (scn_.cities.empty()) throw DomainError("scenario has no cities");
  setup();

  for (std::size_t c = 0; c < scn_.cities.size(); ++c) {
    City city{scn_.cities[c].market, scn_.cities[c].cchps};
    auto warnings = validate_city(city, scn_.validation);
    for (auto& w : warnings) report_.warnings.push_back("city " + std::to_string(c) + ": " + w);
    report_.equilibria.push_back(solve_distributed(city, scn_.game.iterations));
  }
  report_.trading.resize(scn_.cities.size());

  for (int r = 0; r < scn_.game.rounds; ++r) {
    ++tick_;
    run_round(r);
  }

  finalize();
  return report_;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario) { return SimEngine(scenario).run(); }

Bytes RunReport::serialize() const {
  WireWriter w;
  w.u64(equilibria.size());
  for (const auto& eq : equilibria) {
    w.f64(eq.p_b_star);
    w.f64(eq.profit_star);
    w.u64(eq.betas_star.size());
    for (double b : eq.betas_star) w.f64(b);
    for (double u : eq.utilities_star) w.f64(u);
    w.u64(eq.trace.size());
    for (const auto& t : eq.trace) {
      w.u64(static_cast<std::uint64_t>(t.iteration));
      w.f64(t.bid);
      w.f64(t.profit);
      for (double b : t.betas) w.f64(b);
    }
  }
  w.u64(trading.size());
  for (const auto& rounds : trading) {
    w.u64(rounds.size());
    for (const auto& round : rounds) {
      w.u64(round.complete ? 1 : 0);
      w.u64(round.aborted ? 1 : 0);
      w.u64(round.transactions.size());
      for (const auto& tx : round.transactions) w.bytes(as_span(tx.canonical_bytes()));
      w.u64(round.rejections.size());
      for (const auto& s : round.rejections) w.bytes(s);
    }
  }
  w.u64(chain_dumps.size());
  for (const auto& d : chain_dumps) w.bytes(as_span(d));
  w.u64(final_balances.size());
  for (const auto& [addr, bal] : final_balances) {
    w.bytes(addr);
    w.i64(bal);
  }
  w.u64(chain_balances.size());
  for (const auto& [addr, bal] : chain_balances) {
    w.bytes(addr);
    w.i64(bal);
  }
  w.u64(events.size());
  for (const auto& e : events) w.bytes(e.line());
  for (const auto* list : {&warnings, &rejected, &violations}) {
    w.u64(list->size());
    for (const auto& s : *list) w.bytes(s);
  }
  w.u64(consensus_messages);
  w.u64(static_cast<std::uint64_t>(blocks_committed));
  w.i64(initial_supply);
  return w.take();
}

}  // namespace gridtrade
