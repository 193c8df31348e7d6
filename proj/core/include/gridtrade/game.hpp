#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridtrade/cchp.hpp"

namespace gridtrade {

/// APG-side prices and daily electric load.
struct MarketParams {
  double p_s = 0;     // retail price, coin/J
  double p_c = 0;     // APG self-generation cost price, coin/J
  double p_m = 0;     // minimum bid, coin/J
  double r_load = 0;  // APG electric load, J/day
};

/// One city: its market and the set of participating CCHPs.
struct City {
  MarketParams market;
  std::vector<CchpParams> cchps;

  /// Total daily electric capacity of the city's CCHPs, J.
  double total_capacity() const;
};

enum class SolveMethod { Centralized, Distributed };

struct TraceEntry {
  int iteration = 0;
  double bid = 0;
  std::vector<double> betas;
  double profit = 0;
};

struct EquilibriumResult {
  double p_b_star = 0;
  std::vector<double> betas_star;
  double profit_star = 0;
  std::vector<double> utilities_star;
  std::vector<TraceEntry> trace;
  SolveMethod method = SolveMethod::Centralized;
};

enum class ValidationMode { Lenient, Strict };

/// Checks market ordering (hard), price feasibility (hard), per-CCHP k1
/// ranges and the load-vs-capacity assumption (warnings unless Strict).
/// Returns the warning messages issued in lenient mode.
std::vector<std::string> validate_city(const City& city, ValidationMode mode);

/// The follower's optimal electric partition for a bid, clamped to [0,1].
/// Throws DomainError if p_b lies outside [p_m, p_c].
double best_response(const CchpParams& p, const MarketParams& market, double p_b);

/// Leader profit at a bid given the followers' partitions. Evaluated in the
/// substituted form (p_c - p_b) * E_sold + (p_s - p_c) * R, which equals the
/// two-term retail form algebraically.
double apg_profit(const City& city, double p_b, const std::vector<double>& betas);

/// Profit from the energy amounts the followers offer, without reading any
/// CCHP parameters. This is the only profit path the distributed solver uses.
double apg_profit_from_energy(const MarketParams& market, double p_b, double energy_sold);

/// Closed-form optimal bid from complete information, clamped to [p_m, p_c].
double optimal_bid_closed_form(const City& city);

/// Complete-information solution: closed-form bid plus per-CCHP responses.
EquilibriumResult solve_centralized(const City& city);

/// The iterative sweep: bids move across [p_m, p_c] on an even grid with
/// stride (p_c - p_m)/(iterations - 1); the incumbent updates whenever the
/// observed profit is >= the best so far, so the highest tying bid wins.
/// The leader sees only the followers' responses, never their parameters.
EquilibriumResult solve_distributed(const City& city, int iterations);

/// Definition check on a candidate equilibrium: no follower can improve its
/// utility on a grid-point mesh of [0,1], and no leader deviation on a mesh
/// of [p_m, p_c] (with followers re-responding) improves profit beyond tol.
bool verify_se(const City& city, const EquilibriumResult& result, int grid, double tol);

}  // namespace gridtrade
