// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace echo {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Structurally or semantically invalid input. Carries every violation found.
class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> violations);
    explicit ValidationError(const std::string& violation) : ValidationError(std::vector<std::string>{violation}) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

  private:
    std::vector<std::string> violations_;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

class NotFound : public Error {
  public:
    using Error::Error;
};

class Conflict : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

class IntegrityError : public Error {
  public:
    using Error::Error;
};

/// A remote endpoint could not be contacted or answered with a server error.
class UnreachableError : public Error {
  public:
    using Error::Error;
};

class CapacityError : public Error {
  public:
    using Error::Error;
};

}// namespace echo
