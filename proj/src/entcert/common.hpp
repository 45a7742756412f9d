// Copyright 2026 The entcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace entcert {

// Error hierarchy. The C API maps each class onto one error code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed inconsistent arguments (dimension mismatch, bad parameters).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Mathematical operation undefined for the input (entropy ratio of a constant).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A precondition on the mathematical objects failed (non-stationary kernel).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: singular block, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

using Rational = boost::multiprecision::cpp_rational;

// Per-scalar comparison slack. Exact types get zero slack.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double row_sum_tol() { return 1e-12; }
  static double stationary_tol() { return 1e-10; }
  static double mass_tol() { return 1e-12; }
  static double flow_eps() { return 1e-14; }
  static double to_double(double v) { return v; }
  static double from_double(double v) { return v; }
  static const char* name() { return "double"; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational row_sum_tol() { return Rational(0); }
  static Rational stationary_tol() { return Rational(0); }
  static Rational mass_tol() { return Rational(0); }
  static Rational flow_eps() { return Rational(0); }
  static double to_double(const Rational& v) {
    return static_cast<double>(v);
  }
  // Exact binary value of the double.
  static Rational from_double(double v) { return Rational(v); }
  static const char* name() { return "rational"; }
};

template <class S>
S abs_value(const S& v) {
  return v < S(0) ? S(-v) : v;
}

template <class S>
double to_double(const S& v) {
  return ScalarTraits<S>::to_double(v);
}

// Parses "3", "0.25", "-1/3" exactly.
Rational parse_rational(const std::string& text);

std::string rational_to_string(const Rational& r);

// Thread cap shared by every parallel loop in the library. 0 = hardware.
void set_max_threads(unsigned n);
unsigned max_threads();

}  // namespace entcert
