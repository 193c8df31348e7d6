#pragma once

#include <stdexcept>
#include <string>

namespace gridtrade {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A physical constant that must be strictly positive was not.
struct NonPositiveParameter : Error {
  using Error::Error;
};

/// A value fell outside its contractual range (fractions, price bounds, sizes).
struct DomainError : Error {
  using Error::Error;
};

/// p_c > e * p_m: no utility weight keeps the best response inside [0,1].
struct InfeasiblePrices : Error {
  using Error::Error;
};

/// Registration collision: the seed or derived key is already registered.
struct DuplicateId : Error {
  using Error::Error;
};

struct SignatureInvalid : Error {
  using Error::Error;
};

struct InsufficientFunds : Error {
  using Error::Error;
};

/// Merkle root requested over an empty transaction list.
struct EmptyBlock : Error {
  using Error::Error;
};

/// Ledger replay drove a wallet below zero; message names the offending tx.
struct NegativeBalance : Error {
  using Error::Error;
};

/// A fault spec or lookup referenced a node/account that does not exist.
struct UnknownTarget : Error {
  using Error::Error;
};

/// Scenario file failed to parse or validate.
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed canonical byte stream.
struct WireError : Error {
  using Error::Error;
};

}  // namespace gridtrade
