#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridtrade/sim.hpp"

namespace gridtrade {

/// splitmix64 combination of two seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Samples n utility weights uniformly from the CCHP's admissible k1 range.
std::vector<double> sample_k1_uniform(const CchpParams& base, const MarketParams& market,
                                      std::size_t n, std::uint64_t seed);

NodeRef parse_node_ref(const std::string& text);

struct LoadedScenario {
  Scenario scenario;
  std::vector<std::string> warnings;
};

/// Parses and validates a scenario document (JSON). Throws ConfigError on
/// parse/shape problems and InfeasiblePrices/DomainError on bad settings.
LoadedScenario parse_scenario(const std::string& text, const std::string& name,
                              ValidationMode mode);
LoadedScenario load_scenario(const std::string& path, ValidationMode mode);

}  // namespace gridtrade
