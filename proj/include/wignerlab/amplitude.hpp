// Copyright 2026 The wignerlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Amplitude expressions used in scenario documents.
 *
 *   expr   := term (('+' | '-') term)*
 *   term   := factor (('*' | '/') factor)*
 *   factor := decimal | 'sqrt(' decimal ')' | 'i' | '(' expr ')' | '-' factor
 *
 * 'i' is the imaginary unit. Spaces and tabs may separate tokens.
 */

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include "wignerlab/errors.hpp"

namespace wignerlab {

/// An amplitude together with the source text it was read from. The text is
/// what a serializer writes back.
struct Amplitude {
  std::string text;
  std::complex<double> value;

  bool operator==(const Amplitude&) const = default;
};

namespace detail {

/// Recursive-descent evaluator. Positions are byte offsets into `src`; the
/// caller maps them to line/column.
class ExprParser {
 public:
  struct Failure {
    std::size_t offset;
    std::string message;
  };

  ExprParser(std::string_view src, std::size_t pos) : src_(src), pos_(pos) {}

  std::complex<double> parse() {
    auto v = expr();
    skip_blanks();
    return v;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  using C = std::complex<double>;

  [[noreturn]] void fail(const std::string& msg) const { throw Failure{pos_, msg}; }

  void skip_blanks() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r')) ++pos_;
  }

  char peek() {
    skip_blanks();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  C expr() {
    C v = term();
    for (;;) {
      const char c = peek();
      if (c == '+') {
        ++pos_;
        v += term();
      } else if (c == '-') {
        ++pos_;
        v -= term();
      } else {
        return v;
      }
    }
  }

  C term() {
    C v = factor();
    for (;;) {
      const char c = peek();
      if (c == '*') {
        ++pos_;
        v *= factor();
      } else if (c == '/') {
        ++pos_;
        const std::size_t at = pos_;
        const C d = factor();
        if (d == C{}) {
          pos_ = at;
          fail("division by zero");
        }
        v /= d;
      } else {
        return v;
      }
    }
  }

  C factor() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return -factor();
    }
    if (c == '(') {
      ++pos_;
      C v = expr();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return v;
    }
    if (src_.substr(pos_, 4) == "sqrt") {
      pos_ += 4;
      if (peek() != '(') fail("expected '(' after sqrt");
      ++pos_;
      peek();
      const double d = decimal();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return {std::sqrt(d), 0.0};
    }
    if (c == 'i' && !ident_continues(pos_ + 1)) {
      ++pos_;
      return {0.0, 1.0};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return {decimal(), 0.0};
    if (c == '\0') fail("expected an amplitude");
    fail(std::string("unexpected character '") + c + "' in amplitude");
  }

  bool ident_continues(std::size_t p) const {
    return p < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[p])) || src_[p] == '_');
  }

  double decimal() {
    const std::size_t start = pos_;
    std::size_t p = pos_;
    while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
    if (p < src_.size() && src_[p] == '.') {
      ++p;
      while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
    }
    if (p == start || (p == start + 1 && src_[start] == '.')) fail("expected a decimal number");
    if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
        while (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) ++q;
        p = q;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + p, v);
    if (res.ec != std::errc{} || !std::isfinite(v)) fail("malformed decimal");
    pos_ = p;
    return v;
  }

  std::string_view src_;
  std::size_t pos_;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses a complete expression; throws ParseError (line 1) on failure.
inline Amplitude parse_amplitude(std::string_view text) {
  detail::ExprParser p(text, 0);
  try {
    const auto v = p.parse();
    if (p.position() != text.size())
      throw detail::ExprParser::Failure{p.position(), "trailing characters in amplitude"};
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw detail::ExprParser::Failure{0, "amplitude is not finite"};
    return {std::string(detail::trim(text)), v};
  } catch (const detail::ExprParser::Failure& f) {
    throw ParseError(1, f.offset + 1, f.message);
  }
}

}  // namespace wignerlab
