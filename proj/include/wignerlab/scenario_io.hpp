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
 * The .scn text format.
 *
 *   register <name> labels=<l1,l2,...>
 *   agent <name> ready=<label> labels=<l1,...>
 *   prepare <reg> : <amp>, <amp>, ...
 *   cprepare <reg> on <record> { <outcome>: <amps...> ; ... }
 *   ameasure <agent> on <reg,...> basis { <label>: <amps...> ; ... } record <record>
 *   xmeasure on <reg,...> basis { ... } record <record>      (or blocks { ... })
 *   unitary on <reg,...> matrix { row ; row ; ... }
 *
 * One statement per line; a brace group may span lines. '#' starts a comment.
 */

#pragma once

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wignerlab/amplitude.hpp"
#include "wignerlab/errors.hpp"
#include "wignerlab/scenario.hpp"

namespace wignerlab {

namespace detail {

class ScenarioParser {
 public:
  explicit ScenarioParser(std::string_view src) : src_(src) {}

  Scenario parse() {
    for (;;) {
      skip_space(true);
      if (at_end()) break;
      statement();
    }
    if (registers_.empty()) throw ScenarioError("no registers declared");
    try {
      return Scenario(std::move(registers_), std::move(steps_));
    } catch (const ScenarioError& e) {
      if (e.step()) throw ParseError(step_lines_.at(*e.step()), 1, e.what());
      throw;
    }
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char cur() const { return at_end() ? '\0' : src_[pos_]; }

  std::pair<std::size_t, std::size_t> line_col(std::size_t at) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src_[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
    return {line, col};
  }

  [[noreturn]] void fail_at(std::size_t at, const std::string& msg) const {
    const auto [l, c] = line_col(at);
    throw ParseError(l, c, msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }

  /// Skips blanks and comments; newlines too when `newlines`.
  void skip_space(bool newlines) {
    while (!at_end()) {
      const char c = cur();
      if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        ++pos_;
      } else if (c == '#') {
        while (!at_end() && cur() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  static bool word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '.' || c == '\'' || u >= 0x80;
  }

  std::string word(const char* what) {
    skip_space(false);
    const std::size_t start = pos_;
    while (!at_end() && word_char(cur())) ++pos_;
    if (pos_ == start) fail(std::string("expected ") + what);
    return std::string(src_.substr(start, pos_ - start));
  }

  void expect(char c, bool newlines = false) {
    skip_space(newlines);
    if (cur() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c, bool newlines = false) {
    skip_space(newlines);
    if (cur() != c) return false;
    ++pos_;
    return true;
  }

  void keyword(std::string_view kw) {
    skip_space(false);
    const std::size_t at = pos_;
    const std::string quoted = "'" + std::string(kw) + "'";
    if (word(quoted.c_str()) != kw) fail_at(at, "expected " + quoted);
  }

  std::vector<std::string> word_list(const char* what) {
    std::vector<std::string> out{word(what)};
    while (cur() == ',') {
      ++pos_;
      out.push_back(word(what));
    }
    return out;
  }

  Amplitude amplitude(bool newlines) {
    skip_space(newlines);
    const std::size_t start = pos_;
    ExprParser p(src_, pos_);
    try {
      const auto v = p.parse();
      pos_ = p.position();
      return {std::string(trim(src_.substr(start, pos_ - start))), v};
    } catch (const ExprParser::Failure& f) {
      fail_at(f.offset, f.message);
    }
  }

  /// amp (',' amp)*; inside braces the list may continue across lines.
  std::vector<Amplitude> amplitudes(bool newlines) {
    std::vector<Amplitude> out{amplitude(newlines)};
    while (accept(',', newlines)) out.push_back(amplitude(newlines));
    return out;
  }

  /// '{' label ':' amps (';' label ':' amps)* [';'] '}'
  std::vector<SpecEntry> labeled_group() {
    expect('{');
    std::vector<SpecEntry> out;
    for (;;) {
      skip_space(true);
      if (cur() == '}') break;
      SpecEntry e;
      e.label = word("an outcome label");
      expect(':');
      e.amplitudes = amplitudes(true);
      out.push_back(std::move(e));
      if (!accept(';', true)) break;
    }
    expect('}', true);
    if (out.empty()) fail("empty brace group");
    return out;
  }

  SpecText spec() {
    const std::size_t at = (skip_space(false), pos_);
    const std::string kind = word("'basis' or 'blocks'");
    SpecText s;
    if (kind == "basis") s.kind = SpecText::Kind::kBasis;
    else if (kind == "blocks") s.kind = SpecText::Kind::kBlocks;
    else fail_at(at, "expected 'basis' or 'blocks', got '" + kind + "'");
    s.entries = labeled_group();
    return s;
  }

  void declaration(bool agent) {
    const std::size_t at = pos_;
    Register r;
    r.name = word("a register name");
    r.agent = agent;
    bool have_labels = false, have_ready = false;
    for (;;) {
      skip_space(false);
      if (at_end() || cur() == '\n') break;
      const std::size_t kat = pos_;
      const std::string k = word("'labels='");
      expect('=');
      if (k == "labels" && !have_labels) {
        r.labels = word_list("a label");
        have_labels = true;
      } else if (k == "ready" && agent && !have_ready) {
        r.ready = word("a label");
        have_ready = true;
      } else {
        fail_at(kat, "unexpected key '" + k + "'");
      }
    }
    if (!have_labels) fail("missing labels=");
    if (agent && !have_ready) fail("missing ready=");
    for (const auto& o : registers_)
      if (o.name == r.name) fail_at(at, "register '" + r.name + "' declared twice");
    registers_.push_back(std::move(r));
  }

  void statement() {
    const std::size_t start = pos_;
    const std::size_t line = line_col(start).first;
    const std::string kw = word("a statement");
    if (kw == "register" || kw == "agent") {
      declaration(kw == "agent");
    } else if (kw == "prepare") {
      Prepare p;
      p.target = word("a register name");
      expect(':');
      p.amplitudes = amplitudes(false);
      push(std::move(p), line);
    } else if (kw == "cprepare") {
      ControlledPrepare c;
      c.target = word("a register name");
      keyword("on");
      c.control = word("a record name");
      c.cases = labeled_group();
      push(std::move(c), line);
    } else if (kw == "ameasure") {
      AgentMeasure a;
      a.agent = word("an agent name");
      keyword("on");
      a.targets = word_list("a register name");
      a.spec = spec();
      keyword("record");
      a.record = word("a record name");
      push(std::move(a), line);
    } else if (kw == "xmeasure") {
      ExternalMeasure x;
      keyword("on");
      x.targets = word_list("a register name");
      x.spec = spec();
      keyword("record");
      x.record = word("a record name");
      push(std::move(x), line);
    } else if (kw == "unitary") {
      ApplyUnitary u;
      keyword("on");
      u.targets = word_list("a register name");
      keyword("matrix");
      expect('{');
      for (;;) {
        skip_space(true);
        if (cur() == '}') break;
        u.rows.push_back(amplitudes(true));
        if (!accept(';', true)) break;
      }
      expect('}', true);
      push(std::move(u), line);
    } else {
      fail_at(start, "unknown statement '" + kw + "'");
    }
    skip_space(false);
    if (!at_end() && cur() != '\n') fail("unexpected text after statement");
  }

  void push(Step s, std::size_t line) {
    steps_.push_back(std::move(s));
    step_lines_.push_back(line);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Register> registers_;
  std::vector<Step> steps_;
  std::vector<std::size_t> step_lines_;
};

inline std::string join_amplitudes(const std::vector<Amplitude>& amps) {
  std::string out;
  for (std::size_t i = 0; i < amps.size(); ++i) out += (i ? ", " : "") + amps[i].text;
  return out;
}

inline std::string join_words(const std::vector<std::string>& ws) {
  std::string out;
  for (std::size_t i = 0; i < ws.size(); ++i) out += (i ? "," : "") + ws[i];
  return out;
}

inline std::string group(const std::vector<SpecEntry>& entries) {
  std::string out = "{ ";
  for (std::size_t i = 0; i < entries.size(); ++i)
    out += (i ? " ; " : "") + entries[i].label + ": " + join_amplitudes(entries[i].amplitudes);
  return out + " }";
}

inline std::string spec_text(const SpecText& s) {
  return std::string(s.kind == SpecText::Kind::kBasis ? "basis " : "blocks ") + group(s.entries);
}

}  // namespace detail

/// Throws ParseError with a 1-based line and column, or ScenarioError.
inline Scenario parse_scenario(std::string_view text) { return detail::ScenarioParser(text).parse(); }

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

/// Canonical text; parse_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const Scenario& s) {
  std::string out;
  for (const auto& r : s.registers()) {
    if (r.agent) out += "agent " + r.name + " ready=" + r.ready;
    else out += "register " + r.name;
    out += " labels=" + detail::join_words(r.labels) + "\n";
  }
  for (const auto& step : s.steps()) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Prepare>) {
            out += "prepare " + x.target + " : " + detail::join_amplitudes(x.amplitudes);
          } else if constexpr (std::is_same_v<T, ControlledPrepare>) {
            out += "cprepare " + x.target + " on " + x.control + " " + detail::group(x.cases);
          } else if constexpr (std::is_same_v<T, AgentMeasure>) {
            out += "ameasure " + x.agent + " on " + detail::join_words(x.targets) + " " + detail::spec_text(x.spec) +
                   " record " + x.record;
          } else if constexpr (std::is_same_v<T, ExternalMeasure>) {
            out += "xmeasure on " + detail::join_words(x.targets) + " " + detail::spec_text(x.spec) + " record " +
                   x.record;
          } else {
            out += "unitary on " + detail::join_words(x.targets) + " matrix { ";
            for (std::size_t r = 0; r < x.rows.size(); ++r)
              out += (r ? " ; " : "") + detail::join_amplitudes(x.rows[r]);
            out += " }";
          }
        },
        step);
    out += "\n";
  }
  return out;
}

}  // namespace wignerlab
