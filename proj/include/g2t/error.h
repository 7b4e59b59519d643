//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef G2T_ERROR_H_
#define G2T_ERROR_H_

#include <stdexcept>
#include <string>

namespace g2t {

/// Base class of every exception thrown by the library. Each module derives
/// a typed error carrying its own kind enum, so callers can either catch
/// g2t::Error wholesale or dispatch on the specific kind.
class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Maps an error kind enum onto its stable name (used in ingest reports and
/// CLI diagnostics).
template <class Kind>
class TypedError: public Error {
public:
  TypedError(Kind kind, const std::string &message)
      : Error(message), kind_(kind) { }

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

}  // namespace g2t

#endif  // G2T_ERROR_H_
