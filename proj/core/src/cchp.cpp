#include "gridtrade/cchp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gridtrade/game.hpp"

namespace gridtrade {

namespace {

constexpr double kE = std::numbers::e;

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    throw NonPositiveParameter(std::string(name) + " must be > 0, got " + std::to_string(v));
  }
}

void require_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
  }
}

}  // namespace

CchpParams calibrate(double f_tot, double eta_pgu, double eta_rec, double eta_boi, double eta_com,
                     double q, double k1, double k2) {
  require_positive(f_tot, "f_tot");
  require_positive(eta_pgu, "eta_pgu");
  require_positive(eta_rec, "eta_rec");
  require_positive(eta_boi, "eta_boi");
  require_positive(eta_com, "eta_com");
  require_positive(q, "q");
  if (eta_pgu > 1.0) throw DomainError("eta_pgu must lie in (0,1]");

  CchpParams p;
  p.f_tot = f_tot;
  p.eta_pgu = eta_pgu;
  p.eta_rec = eta_rec;
  p.eta_boi = eta_boi;
  p.eta_com = eta_com;
  p.q = q;
  p.k1 = k1;
  p.k2 = k2;

  p.b1 = (kE - 1.0) / (q * f_tot * eta_pgu);
  if (eta_pgu < 1.0) {
    p.b2 = (kE - 1.0) / (q * f_tot * (1.0 - eta_pgu) * eta_rec * eta_com);
  }
  return p;
}

void validate_params(const CchpParams& p) {
  require_positive(p.f_tot, "f_tot");
  require_positive(p.eta_pgu, "eta_pgu");
  require_positive(p.eta_rec, "eta_rec");
  require_positive(p.eta_boi, "eta_boi");
  require_positive(p.eta_com, "eta_com");
  require_positive(p.q, "q");
  if (p.cop_cc && p.eta_hc) {
    const double lo = std::min(*p.cop_cc, *p.eta_hc);
    const double hi = std::max(*p.cop_cc, *p.eta_hc);
    if (p.eta_com < lo || p.eta_com > hi) {
      throw DomainError("eta_com " + std::to_string(p.eta_com) +
                        " outside [min,max] of chiller/coil efficiencies");
    }
  }
}

EnergyBalance energy_balance(const CchpParams& p, double alpha, double beta) {
  require_fraction(alpha, "alpha");
  require_fraction(beta, "beta");

  EnergyBalance b;
  b.alpha = alpha;
  b.beta = beta;
  b.f_pgu = alpha * p.f_tot;
  b.f_boi = (1.0 - alpha) * p.f_tot;
  b.e_pgu = p.eta_pgu * p.q * b.f_pgu;
  b.e_building = beta * b.e_pgu;
  b.e_exc = b.e_pgu - b.e_building;
  b.q_w = (1.0 - p.eta_pgu) * p.q * b.f_pgu;
  b.q_r = p.eta_rec * b.q_w;
  b.q_boi = p.eta_boi * p.q * b.f_boi;
  b.q_com = p.eta_com * (b.q_r + b.q_boi);
  return b;
}

double utility_full(const CchpParams& p, double alpha, double beta, double p_b) {
  require_fraction(alpha, "alpha");
  require_fraction(beta, "beta");
  if (!(p_b > 0.0)) throw DomainError("p_b must be > 0");

  const double gen = p.q * p.f_tot * p.eta_pgu;
  const double electric = p.k1 * std::log1p(p.b1 * gen * alpha * beta);

  double heat = 0.0;
  if (p.b2) {
    const double recovered = p.q * p.f_tot * p.eta_rec * (1.0 - p.eta_pgu) * alpha;
    const double boiler = p.q * p.f_tot * p.eta_boi * (1.0 - alpha);
    heat = p.k2 * std::log1p(*p.b2 * (recovered + boiler) * p.eta_com);
  }

  const double revenue = p_b * gen * alpha * (1.0 - beta);
  return electric + heat + revenue;
}

double utility(const CchpParams& p, double beta, double p_b) {
  require_fraction(beta, "beta");
  if (!(p_b > 0.0)) throw DomainError("p_b must be > 0");

  const double gen = p.capacity();
  const double electric = p.k1 * std::log1p(p.b1 * gen * beta);

  double heat = 0.0;
  if (p.b2) {
    heat = p.k2 * std::log1p(*p.b2 * p.q * p.f_tot * (1.0 - p.eta_pgu) * p.eta_rec * p.eta_com);
  }

  return electric + heat + p_b * gen * (1.0 - beta);
}

double utility_beta_second_derivative(const CchpParams& p, double beta) {
  require_fraction(beta, "beta");
  const double g = p.b1 * p.capacity();
  const double r = g / (1.0 + g * beta);
  return -p.k1 * r * r;
}

std::pair<double, double> k1_range(const CchpParams& p, const MarketParams& market) {
  if (market.p_c > kE * market.p_m) {
    throw InfeasiblePrices("p_c exceeds e*p_m: no k1 keeps the best response in [0,1]");
  }
  const double gen = p.capacity();
  const double lo = market.p_c * gen / (kE - 1.0);
  const double hi = market.p_m * kE * gen / (kE - 1.0);
  return {lo, hi};
}

}  // namespace gridtrade
