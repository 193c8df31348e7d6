#include "gridtrade/game.hpp"

#include <algorithm>
#include <cmath>

namespace gridtrade {

double City::total_capacity() const {
  double sum = 0;
  for (const auto& c : cchps) sum += c.capacity();
  return sum;
}

std::vector<std::string> validate_city(const City& city, ValidationMode mode) {
  const auto& m = city.market;
  if (!(m.p_m > 0 && m.p_m < m.p_c && m.p_c < m.p_s)) {
    throw DomainError("market prices must satisfy 0 < p_m < p_c < p_s");
  }
  if (city.cchps.empty()) throw DomainError("city has no CCHPs");

  std::vector<std::string> warnings;
  auto issue = [&](std::string msg) {
    if (mode == ValidationMode::Strict) throw DomainError(std::move(msg));
    warnings.push_back(std::move(msg));
  };

  for (std::size_t i = 0; i < city.cchps.size(); ++i) {
    const auto& c = city.cchps[i];
    validate_params(c);
    const auto [lo, hi] = k1_range(c, m);  // throws InfeasiblePrices when p_c > e*p_m
    if (c.k1 < lo || c.k1 > hi) {
      issue("cchp " + std::to_string(i) + ": k1=" + std::to_string(c.k1) +
            " outside admissible range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }

  if (m.r_load < city.total_capacity()) {
    issue("r_load " + std::to_string(m.r_load) + " below total CCHP capacity " +
          std::to_string(city.total_capacity()));
  }
  return warnings;
}

double best_response(const CchpParams& p, const MarketParams& market, double p_b) {
  if (!(p_b >= market.p_m && p_b <= market.p_c)) {
    throw DomainError("bid outside [p_m, p_c]");
  }
  const double gen = p.capacity();
  const double beta = (p.k1 / p_b - 1.0 / p.b1) / gen;
  return std::clamp(beta, 0.0, 1.0);
}

double apg_profit_from_energy(const MarketParams& market, double p_b, double energy_sold) {
  return (market.p_c - p_b) * energy_sold + (market.p_s - market.p_c) * market.r_load;
}

double apg_profit(const City& city, double p_b, const std::vector<double>& betas) {
  if (betas.size() != city.cchps.size()) {
    throw DomainError("betas length does not match the number of CCHPs");
  }
  double sold = 0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] >= 0.0 && betas[i] <= 1.0)) throw DomainError("beta outside [0,1]");
    sold += city.cchps[i].capacity() * (1.0 - betas[i]);
  }
  return apg_profit_from_energy(city.market, p_b, sold);
}

double optimal_bid_closed_form(const City& city) {
  double num = 0, den = 0;
  for (const auto& c : city.cchps) {
    num += c.k1;
    den += c.capacity() + 1.0 / c.b1;
  }
  const double p_opt = std::sqrt(city.market.p_c * num / den);
  if (p_opt >= city.market.p_c) return city.market.p_c;
  if (p_opt <= city.market.p_m) return city.market.p_m;
  return p_opt;
}

namespace {

std::vector<double> responses_at(const City& city, double p_b) {
  std::vector<double> betas;
  betas.reserve(city.cchps.size());
  for (const auto& c : city.cchps) betas.push_back(best_response(c, city.market, p_b));
  return betas;
}

std::vector<double> utilities_at(const City& city, double p_b, const std::vector<double>& betas) {
  std::vector<double> us;
  us.reserve(city.cchps.size());
  for (std::size_t i = 0; i < city.cchps.size(); ++i) {
    us.push_back(utility(city.cchps[i], betas[i], p_b));
  }
  return us;
}

}  // namespace

EquilibriumResult solve_centralized(const City& city) {
  EquilibriumResult r;
  r.method = SolveMethod::Centralized;
  r.p_b_star = optimal_bid_closed_form(city);
  r.betas_star = responses_at(city, r.p_b_star);
  r.profit_star = apg_profit(city, r.p_b_star, r.betas_star);
  r.utilities_star = utilities_at(city, r.p_b_star, r.betas_star);
  r.trace.push_back(TraceEntry{0, r.p_b_star, r.betas_star, r.profit_star});
  return r;
}

EquilibriumResult solve_distributed(const City& city, int iterations) {
  if (iterations < 2) throw DomainError("iterations must be >= 2");
  const auto& m = city.market;

  EquilibriumResult r;
  r.method = SolveMethod::Distributed;
  r.p_b_star = m.p_m;
  r.betas_star.assign(city.cchps.size(), 0.0);
  r.profit_star = (m.p_s - m.p_c) * m.r_load;

  const double stride = (m.p_c - m.p_m) / (iterations - 1);
  for (int it = 0; it < iterations; ++it) {
    const double p_b = (it == iterations - 1) ? m.p_c : m.p_m + stride * it;

    // Followers compute their own responses; the leader only sees the energy
    // each one offers (and its partition), never the parameters behind it.
    std::vector<double> betas(city.cchps.size());
    double sold = 0;
    for (std::size_t i = 0; i < city.cchps.size(); ++i) {
      const auto& c = city.cchps[i];
      betas[i] = best_response(c, m, p_b);
      sold += c.capacity() * (1.0 - betas[i]);
    }

    const double profit = apg_profit_from_energy(m, p_b, sold);
    if (profit >= r.profit_star) {
      r.p_b_star = p_b;
      r.profit_star = profit;
      r.betas_star = betas;
    }
    r.trace.push_back(TraceEntry{it, p_b, std::move(betas), profit});
  }

  r.utilities_star = utilities_at(city, r.p_b_star, r.betas_star);
  return r;
}

bool verify_se(const City& city, const EquilibriumResult& result, int grid, double tol) {
  if (grid < 2 || result.betas_star.size() != city.cchps.size()) return false;
  const auto& m = city.market;

  // Inequality on each follower: its chosen partition must be within tol of
  // the best utility on a grid mesh of [0,1], holding the bid fixed.
  for (std::size_t i = 0; i < city.cchps.size(); ++i) {
    const double mine = utility(city.cchps[i], result.betas_star[i], result.p_b_star);
    for (int g = 0; g < grid; ++g) {
      const double beta = static_cast<double>(g) / (grid - 1);
      if (utility(city.cchps[i], beta, result.p_b_star) > mine + tol) return false;
    }
  }

  // Inequality on the leader: no mesh bid, with followers re-responding,
  // may beat the candidate profit beyond tol.
  const double mine = apg_profit(city, result.p_b_star, result.betas_star);
  for (int g = 0; g < grid; ++g) {
    const double p_b = m.p_m + (m.p_c - m.p_m) * static_cast<double>(g) / (grid - 1);
    const double profit = apg_profit(city, p_b, responses_at(city, p_b));
    if (profit > mine + tol) return false;
  }
  return true;
}

}  // namespace gridtrade
