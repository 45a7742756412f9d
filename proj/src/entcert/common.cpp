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

#include "entcert/common.hpp"

#include <atomic>
#include <cctype>
#include <thread>

namespace entcert {

namespace {

std::atomic<unsigned> g_max_threads{0};

boost::multiprecision::cpp_int parse_integer(const std::string& digits,
                                             const std::string& whole) {
  if (digits.empty()) throw ParseError("empty number in '" + whole + "'");
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError("not a rational number: '" + whole + "'");
    }
  }
  // A leading zero would select octal.
  std::size_t first = digits.find_first_not_of('0');
  if (first == std::string::npos) return 0;
  return boost::multiprecision::cpp_int(digits.substr(first));
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw ParseError("empty rational");
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  Rational value;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    auto num = parse_integer(s.substr(0, slash), text);
    auto den = parse_integer(s.substr(slash + 1), text);
    if (den == 0) throw ParseError("zero denominator in '" + text + "'");
    value = Rational(num, den);
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string int_part = s.substr(0, dot);
    std::string frac_part = s.substr(dot + 1);
    if (int_part.empty()) int_part = "0";
    if (frac_part.empty()) frac_part = "0";
    auto num = parse_integer(int_part + frac_part, text);
    boost::multiprecision::cpp_int den = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
    value = Rational(num, den);
  } else {
    value = Rational(parse_integer(s, text));
  }
  return negative ? Rational(-value) : value;
}

std::string rational_to_string(const Rational& r) {
  return r.str();
}

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
  unsigned cap = g_max_threads.load();
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return cap == 0 ? hw : std::min(cap, hw);
}

}  // namespace entcert
