#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ope/hard_instances.hpp"

namespace ope {

// Shortest decimal form that round-trips a double ("%.17g").
std::string format_double(double v);

// Canonical structured-text encoding; serialize(parse(s)) == s byte for
// byte whenever s was produced by serialize.
std::string serialize_problem(const OpeProblem& p);
OpeProblem parse_problem(const std::string& text);

// FNV-1a 64-bit hash, used to fingerprint configurations in reports.
std::uint64_t fnv1a(const std::string& s);

// Flat key/value report: one "key<TAB>value" line per entry.
struct Report {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::uint64_t value);
  void add(const std::string& key, int value);
  std::string to_text() const;
};

}  // namespace ope
