#pragma once

#include <optional>

#include "gridtrade/errors.hpp"

namespace gridtrade {

struct MarketParams;  // game.hpp

/// Physical constants and calibrated preference weights of one community's
/// combined cooling/heating/power plant. Units are SI throughout: J, m^3,
/// coin/J, in double precision. Construct via calibrate().
struct CchpParams {
  double f_tot = 0;    // daily fuel quota, m^3
  double eta_pgu = 0;  // fuel heat -> electricity conversion efficiency
  double eta_rec = 0;  // waste-heat recovery efficiency
  double eta_boi = 0;  // boiler thermal efficiency
  double eta_com = 0;  // comprehensive cooling+heating thermal efficiency
  double q = 0;        // calorific value of the fuel, J/m^3

  double k1 = 0;  // electric-utility weight, coin
  double k2 = 0;  // heat-utility weight, coin

  // Saturation coefficients, 1/J. b1 scales the electric log-utility so it
  // saturates at exactly k1 when the community keeps all its electricity.
  // b2 is undefined when eta_pgu == 1: no recoverable waste heat exists and
  // the heat-utility term is identically zero.
  double b1 = 0;
  std::optional<double> b2;

  // Optional chiller/coil efficiencies; used only to bound eta_com.
  std::optional<double> cop_cc;
  std::optional<double> eta_hc;

  /// Electric energy the plant can generate per day at full fuel, J.
  double capacity() const { return q * f_tot * eta_pgu; }
};

/// Daily energy flows for one fuel/electricity split.
struct EnergyBalance {
  double e_pgu = 0;       // electricity generated, J
  double e_building = 0;  // electricity kept for the community, J
  double e_exc = 0;       // electricity offered for sale, J
  double f_pgu = 0;       // fuel routed to the generator, m^3
  double f_boi = 0;       // fuel routed to the boiler, m^3
  double q_w = 0;         // waste heat, J
  double q_r = 0;         // recovered heat, J
  double q_boi = 0;       // boiler heat, J
  double q_com = 0;       // combined cooling+heating delivered, J
  double alpha = 0;       // fuel partition f_pgu / f_tot
  double beta = 0;        // electric partition e_building / e_pgu
};

/// Builds a parameter set with b1/b2 derived from the physical constants.
/// Throws NonPositiveParameter if any physical constant is <= 0.
CchpParams calibrate(double f_tot, double eta_pgu, double eta_rec, double eta_boi, double eta_com,
                     double q, double k1, double k2);

/// Checks the optional chiller/coil bound on eta_com and basic positivity.
/// Returns a diagnostic string per violated soft constraint.
void validate_params(const CchpParams& p);

/// Full daily balance for a fuel split alpha and electric split beta.
EnergyBalance energy_balance(const CchpParams& p, double alpha, double beta);

/// Community utility as a function of both partition coefficients:
/// electric log-utility + heat log-utility + sale revenue at bid p_b.
double utility_full(const CchpParams& p, double alpha, double beta, double p_b);

/// Community utility with all fuel routed to the generator (alpha == 1).
/// The heat term is constant in beta but still included, so reported
/// utilities are absolute rather than shifted.
double utility(const CchpParams& p, double beta, double p_b);

/// Second derivative of utility() with respect to beta; strictly negative.
double utility_beta_second_derivative(const CchpParams& p, double beta);

/// The admissible range of the electric-utility weight k1 such that the
/// best response stays inside [0,1] for every bid in [p_m, p_c].
/// Throws InfeasiblePrices when p_c > e * p_m and no such k1 exists.
std::pair<double, double> k1_range(const CchpParams& p, const MarketParams& market);

}  // namespace gridtrade
