#include "gridgame/datalog.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include "gridgame/error.hpp"

namespace gridgame::datalog {

namespace {

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct RawAtom {
  std::string predicate;
  std::vector<std::pair<std::string, bool>> args;  // (text, was quoted)
};

// Parses one atom starting at `pos`; leaves `pos` after the closing ')'.
RawAtom parse_raw_atom(std::string_view text, std::size_t& pos) {
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip_ws();
  const auto open = text.find('(', pos);
  if (open == std::string_view::npos) throw ParseError({}, "expected '(' in '" + std::string(text) + "'");
  RawAtom atom;
  atom.predicate = std::string(trim(text.substr(pos, open - pos)));
  if (atom.predicate.empty()) throw ParseError({}, "missing predicate name in '" + std::string(text) + "'");
  pos = open + 1;
  std::string cur;
  bool quoted = false;
  bool any_quote = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (quoted) {
      if (c == '\'' || c == '"') quoted = false;
      else cur += c;
      continue;
    }
    if (c == '\'' || c == '"') {
      quoted = true;
      any_quote = true;
    } else if (c == ',' || c == ')') {
      auto arg = std::string(any_quote ? std::string_view(cur) : trim(cur));
      if (arg.empty() && !any_quote) {
        if (c == ')' && atom.args.empty()) break;
        throw ParseError({}, "empty argument in '" + std::string(text) + "'");
      }
      atom.args.emplace_back(std::move(arg), any_quote);
      cur.clear();
      any_quote = false;
      if (c == ')') break;
    } else if (!any_quote) {
      cur += c;
    }
  }
  if (pos >= text.size()) throw ParseError({}, "unterminated atom in '" + std::string(text) + "'");
  ++pos;
  return atom;
}

bool looks_like_variable(const std::string& s) {
  return !s.empty() && (std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_');
}

Atom to_atom(const RawAtom& raw) {
  Atom a{raw.predicate, {}};
  for (const auto& [text, quoted] : raw.args) a.args.push_back({!quoted && looks_like_variable(text), text});
  return a;
}

}  // namespace

std::string Fact::to_string() const { return predicate + "(" + join_args(args) + ")"; }

std::string Atom::to_string() const {
  std::vector<std::string> parts;
  for (const auto& t : args) parts.push_back(t.name);
  return predicate + "(" + join_args(parts) + ")";
}

std::string Rule::to_string() const {
  std::string out = head.to_string() + " :- ";
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (i) out += ", ";
    out += body[i].to_string();
  }
  return out + ".";
}

const std::map<std::string, std::size_t, std::less<>>& vocabulary() {
  static const std::map<std::string, std::size_t, std::less<>> vocab = {
      {"attackerLocated", 1}, {"netAccess", 4},       {"vulExists", 4},
      {"hasAccount", 2},      {"execCode", 2},        {"netReach", 3},
      {"denialOfService", 1}, {"dataExfiltration", 1},
  };
  return vocab;
}

Fact parse_fact(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  std::size_t pos = 0;
  auto raw = parse_raw_atom(text, pos);
  if (!trim(text.substr(pos)).empty()) throw ParseError({}, "trailing text after fact '" + std::string(text) + "'");
  Fact f{raw.predicate, {}};
  for (auto& [arg, quoted] : raw.args) f.args.push_back(std::move(arg));
  return f;
}

Rule parse_rule(std::string_view text, std::string label, std::string technique) {
  text = trim(text);
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  const auto arrow = text.find(":-");
  if (arrow == std::string_view::npos) throw ParseError({}, "rule without ':-': '" + std::string(text) + "'");
  Rule rule;
  rule.label = std::move(label);
  rule.technique = std::move(technique);
  std::size_t pos = 0;
  auto head_text = text.substr(0, arrow);
  rule.head = to_atom(parse_raw_atom(head_text, pos));
  auto body_text = text.substr(arrow + 2);
  pos = 0;
  while (true) {
    rule.body.push_back(to_atom(parse_raw_atom(body_text, pos)));
    while (pos < body_text.size() && std::isspace(static_cast<unsigned char>(body_text[pos]))) ++pos;
    if (pos >= body_text.size()) break;
    if (body_text[pos] != ',') throw ParseError({}, "expected ',' between body atoms in '" + std::string(text) + "'");
    ++pos;
  }
  return rule;
}

void validate_rule(const Rule& rule) {
  const auto& vocab = vocabulary();
  auto check = [&](const Atom& a) {
    auto it = vocab.find(a.predicate);
    if (it == vocab.end())
      throw ValidationError("rule '" + rule.label + "': unknown predicate '" + a.predicate + "'");
    if (it->second != a.args.size())
      throw ValidationError("rule '" + rule.label + "': predicate '" + a.predicate + "' has arity " +
                            std::to_string(it->second));
  };
  check(rule.head);
  if (rule.body.empty()) throw ValidationError("rule '" + rule.label + "': empty body");
  std::set<std::string> body_vars;
  for (const auto& a : rule.body) {
    check(a);
    for (const auto& t : a.args)
      if (t.variable) body_vars.insert(t.name);
  }
  for (const auto& t : rule.head.args)
    if (t.variable && !body_vars.count(t.name))
      throw ValidationError("rule '" + rule.label + "' is not range-restricted: head variable " + t.name +
                            " does not occur in the body");
}

namespace {

// Argument slot of a compiled atom: variable index (>= 0) or ~constant id.
struct Slot {
  bool variable;
  int value;
};

struct CompiledAtom {
  int predicate;
  std::vector<Slot> slots;
};

struct CompiledRule {
  CompiledAtom head;
  std::vector<CompiledAtom> body;
  int variables = 0;
};

class Evaluator {
public:
  Model run(const std::vector<Fact>& input, const std::vector<Rule>& rules) {
    for (const auto& r : rules) {
      validate_rule(r);
      compiled_.push_back(compile(r));
    }
    for (const auto& f : input) {
      if (f.args.size() != arity_of(f.predicate))
        throw ValidationError("fact '" + f.to_string() + "' has wrong arity");
      add(ground(f));
    }
    model_.input_count = model_.facts.size();

    std::size_t lo = 0;
    std::size_t hi = store_.size();
    while (lo < hi) {
      for (std::size_t r = 0; r < compiled_.size(); ++r) {
        const auto& rule = compiled_[r];
        for (std::size_t d = 0; d < rule.body.size(); ++d) {
          std::vector<int> binding(static_cast<std::size_t>(rule.variables), -1);
          std::vector<std::size_t> chosen(rule.body.size());
          fire(r, d, lo, hi, binding, chosen, 0);
        }
      }
      lo = hi;
      hi = store_.size();
    }
    return std::move(model_);
  }

private:
  using Tuple = std::vector<int>;
  struct Ground {
    int predicate;
    Tuple args;
    auto operator<=>(const Ground&) const = default;
  };

  std::size_t arity_of(const std::string& p) const {
    auto it = vocabulary().find(p);
    if (it == vocabulary().end()) throw ValidationError("unknown predicate '" + p + "'");
    return it->second;
  }

  int intern_const(const std::string& s) {
    auto [it, inserted] = const_ids_.emplace(s, static_cast<int>(consts_.size()));
    if (inserted) consts_.push_back(s);
    return it->second;
  }

  int intern_pred(const std::string& s) {
    auto [it, inserted] = pred_ids_.emplace(s, static_cast<int>(preds_.size()));
    if (inserted) {
      preds_.push_back(s);
      by_pred_.emplace_back();
    }
    return it->second;
  }

  Ground ground(const Fact& f) {
    Ground g{intern_pred(f.predicate), {}};
    for (const auto& a : f.args) g.args.push_back(intern_const(a));
    return g;
  }

  CompiledAtom compile(const Atom& a, std::map<std::string, int>& vars) {
    CompiledAtom c{intern_pred(a.predicate), {}};
    for (const auto& t : a.args) {
      if (t.variable) {
        auto [it, _] = vars.emplace(t.name, static_cast<int>(vars.size()));
        c.slots.push_back({true, it->second});
      } else {
        c.slots.push_back({false, intern_const(t.name)});
      }
    }
    return c;
  }

  CompiledRule compile(const Rule& r) {
    std::map<std::string, int> vars;
    CompiledRule c;
    for (const auto& b : r.body) c.body.push_back(compile(b, vars));
    c.head = compile(r.head, vars);
    c.variables = static_cast<int>(vars.size());
    return c;
  }

  static std::uint64_t index_key(int pred, std::size_t pos, int value) {
    return (static_cast<std::uint64_t>(pred) << 40) | (static_cast<std::uint64_t>(pos) << 32) |
           static_cast<std::uint32_t>(value);
  }

  // Returns (index, was new).
  std::pair<std::size_t, bool> add(Ground g) {
    auto it = lookup_.find(g);
    if (it != lookup_.end()) return {it->second, false};
    const auto idx = store_.size();
    for (std::size_t p = 0; p < g.args.size(); ++p) index_[index_key(g.predicate, p, g.args[p])].push_back(idx);
    by_pred_[static_cast<std::size_t>(g.predicate)].push_back(idx);
    Fact f{preds_[static_cast<std::size_t>(g.predicate)], {}};
    for (int a : g.args) f.args.push_back(consts_[static_cast<std::size_t>(a)]);
    model_.facts.push_back(std::move(f));
    lookup_.emplace(g, idx);
    store_.push_back(std::move(g));
    return {idx, true};
  }

  const std::vector<std::size_t>& candidates(const CompiledAtom& atom, const std::vector<int>& binding) const {
    static const std::vector<std::size_t> none;
    for (std::size_t p = 0; p < atom.slots.size(); ++p) {
      const auto& s = atom.slots[p];
      int v = s.variable ? binding[static_cast<std::size_t>(s.value)] : s.value;
      if (v < 0) continue;
      auto it = index_.find(index_key(atom.predicate, p, v));
      return it == index_.end() ? none : it->second;
    }
    return by_pred_[static_cast<std::size_t>(atom.predicate)];
  }

  bool unify(const CompiledAtom& atom, const Ground& g, std::vector<int>& binding, std::vector<int>& bound) const {
    for (std::size_t p = 0; p < atom.slots.size(); ++p) {
      const auto& s = atom.slots[p];
      if (!s.variable) {
        if (s.value != g.args[p]) return false;
        continue;
      }
      auto& b = binding[static_cast<std::size_t>(s.value)];
      if (b < 0) {
        b = g.args[p];
        bound.push_back(s.value);
      } else if (b != g.args[p]) {
        return false;
      }
    }
    return true;
  }

  // Step 0 matches the delta atom `d`; later steps walk the remaining body
  // atoms in order. Atoms before `d` only see facts older than `lo`.
  void fire(std::size_t r, std::size_t d, std::size_t lo, std::size_t hi, std::vector<int>& binding,
            std::vector<std::size_t>& chosen, std::size_t step) {
    const auto& rule = compiled_[r];
    if (step == rule.body.size()) {
      Ground head{rule.head.predicate, {}};
      for (const auto& s : rule.head.slots)
        head.args.push_back(s.variable ? binding[static_cast<std::size_t>(s.value)] : s.value);
      auto [idx, _] = add(std::move(head));
      model_.derivations.push_back({r, chosen, idx});
      return;
    }
    std::size_t pos;
    if (step == 0) pos = d;
    else pos = step - 1 < d ? step - 1 : step;
    const auto& atom = rule.body[pos];
    const std::size_t lower = pos == d ? lo : 0;
    const std::size_t upper = pos < d ? lo : hi;
    const auto& cands = candidates(atom, binding);
    auto start = std::lower_bound(cands.begin(), cands.end(), lower) - cands.begin();
    for (auto i = static_cast<std::size_t>(start); i < cands.size(); ++i) {
      const auto fi = cands[i];
      if (fi >= upper) break;
      const auto& g = store_[fi];
      if (g.predicate != atom.predicate) continue;
      std::vector<int> bound;
      if (unify(atom, g, binding, bound)) {
        chosen[pos] = fi;
        fire(r, d, lo, hi, binding, chosen, step + 1);
      }
      for (int v : bound) binding[static_cast<std::size_t>(v)] = -1;
    }
  }

  std::vector<CompiledRule> compiled_;
  std::map<std::string, int> const_ids_;
  std::vector<std::string> consts_;
  std::map<std::string, int> pred_ids_;
  std::vector<std::string> preds_;
  std::vector<Ground> store_;
  std::map<Ground, std::size_t> lookup_;
  std::vector<std::vector<std::size_t>> by_pred_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index_;
  Model model_;
};

}  // namespace

Model evaluate(const std::vector<Fact>& facts, const std::vector<Rule>& rules) {
  return Evaluator{}.run(facts, rules);
}

}  // namespace gridgame::datalog
