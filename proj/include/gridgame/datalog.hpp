#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gridgame::datalog {

/// Ground atom, e.g. netAccess(h1,h2,tcp,502).
struct Fact {
  std::string predicate;
  std::vector<std::string> args;

  std::string to_string() const;
  auto operator<=>(const Fact&) const = default;
  bool operator==(const Fact&) const = default;
};

struct Term {
  bool variable = false;
  std::string name;

  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  std::string to_string() const;
  bool operator==(const Atom&) const = default;
};

/// Horn clause `head :- body`. No negation, no function symbols.
struct Rule {
  std::string label;
  std::string technique;  // ATT&CK technique id
  Atom head;
  std::vector<Atom> body;

  std::string to_string() const;
  bool operator==(const Rule&) const = default;
};

/// Predicate name -> arity.
const std::map<std::string, std::size_t, std::less<>>& vocabulary();

/// Parses `pred(a,b,...)`. Every argument is a constant.
Fact parse_fact(std::string_view text);

/// Parses `head(X,..) :- b1(..), b2(..).` Identifiers starting with an
/// upper-case letter or '_' are variables; quoted or other tokens are constants.
Rule parse_rule(std::string_view text, std::string label = {}, std::string technique = {});

/// Throws ValidationError unless every head variable occurs in the body and
/// all predicates are in the vocabulary with the right arity.
void validate_rule(const Rule& rule);

/// One ground rule application.
struct Derivation {
  std::size_t rule = 0;
  std::vector<std::size_t> body;  // fact indices, in rule-body order
  std::size_t head = 0;           // fact index
};

/// Least fixpoint of `rules` over `facts`, computed semi-naively.
/// facts[0..input_count) are the inputs in their given order (duplicates
/// removed); derived facts follow in the order first derived. Every ground
/// rule instance whose body holds is listed exactly once, in the order
/// discovered, so the first derivation of a fact only uses facts with
/// smaller indices.
struct Model {
  std::vector<Fact> facts;
  std::size_t input_count = 0;
  std::vector<Derivation> derivations;
};

Model evaluate(const std::vector<Fact>& facts, const std::vector<Rule>& rules);

}  // namespace gridgame::datalog
