#pragma once

#include <cctype>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosm/policy/expr.hpp"
#include "gen.hpp"

// Independent reading of rendered conditions, plus small typed domains for
// exhaustive comparison against evaluate_policy.
namespace oracle {

using Env = std::map<std::string, cosm::Value>;

class Interpreter {
 public:
  Interpreter(std::string text, const Env& env) : s_(std::move(text)), env_(env) {}

  bool run() {
    const bool v = disj();
    skip();
    expect(i_ == s_.size(), "trailing input");
    return v;
  }

 private:
  static void expect(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("oracle: ") + what);
  }
  void skip() {
    while (i_ < s_.size() && s_[i_] == ' ') ++i_;
  }
  bool eat(const std::string& w) {
    skip();
    if (s_.compare(i_, w.size(), w) != 0) return false;
    i_ += w.size();
    return true;
  }
  std::string word() {
    skip();
    std::size_t j = i_;
    while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
    std::string w = s_.substr(i_, j - i_);
    i_ = j;
    return w;
  }
  bool disj() {
    bool v = conj();
    while (eat("or ")) v = conj() || v;
    return v;
  }
  bool conj() {
    bool v = unary();
    while (eat("and ")) v = unary() && v;
    return v;
  }
  bool unary() {
    if (eat("not ")) return !unary();
    if (eat("(")) {
      const bool v = disj();
      expect(eat(")"), "missing )");
      return v;
    }
    const std::string var = word();
    skip();
    std::string op;
    while (i_ < s_.size() && std::string("<>=!").find(s_[i_]) != std::string::npos) op += s_[i_++];
    skip();
    cosm::Value lit;
    if (s_[i_] == '"') {
      std::string t;
      for (++i_; s_[i_] != '"'; ++i_) {
        if (s_[i_] == '\\') ++i_;
        t += s_[i_];
      }
      ++i_;
      lit = t;
    } else {
      std::size_t j = i_;
      while (j < s_.size() && s_[j] != ' ' && s_[j] != ')') ++j;
      const std::string tok = s_.substr(i_, j - i_);
      i_ = j;
      if (tok == "true" || tok == "false")
        lit = tok == "true";
      else
        lit = std::stod(tok);
    }
    const cosm::Value& x = env_.at(var);
    expect(x.index() == lit.index(), "ill-typed comparison");
    if (op == "==") return x == lit;
    if (op == "!=") return x != lit;
    const double a = std::get<double>(x), b = std::get<double>(lit);
    if (op == "<") return a < b;
    if (op == "<=") return a <= b;
    if (op == ">") return a > b;
    expect(op == ">=", "unknown operator");
    return a >= b;
  }

  std::string s_;
  std::size_t i_ = 0;
  const Env& env_;
};

struct Var {
  std::string name;
  std::vector<cosm::Value> domain;
};

/// One to three variables, each over a domain of at most 8 values.
inline std::vector<Var> small_vars(gen::Rng& rng) {
  std::vector<Var> vars;
  for (std::size_t i = 0, n = 1 + gen::below(rng, 3); i < n; ++i) {
    Var v{"v" + std::to_string(i), {}};
    switch (gen::below(rng, 3)) {
      case 0:
        for (std::size_t k = 0, m = 2 + gen::below(rng, 7); k < m; ++k) v.domain.push_back(static_cast<double>(k) - 3.0);
        break;
      case 1: v.domain = {false, true}; break;
      default: v.domain = {std::string("gps"), std::string("wifi"), std::string("a \"q\""), std::string("cell")};
    }
    vars.push_back(std::move(v));
  }
  return vars;
}

inline cosm::policy::BoolExpr typed_condition(gen::Rng& rng, const std::vector<Var>& vars, int depth = 0) {
  using cosm::policy::BoolExpr;
  if (depth < 3 && gen::coin(rng, 0.45)) {
    switch (gen::below(rng, 3)) {
      case 0: return BoolExpr::negation(typed_condition(rng, vars, depth + 1));
      case 1: return BoolExpr::all_of({typed_condition(rng, vars, depth + 1), typed_condition(rng, vars, depth + 1)});
      default: return BoolExpr::any_of({typed_condition(rng, vars, depth + 1), typed_condition(rng, vars, depth + 1)});
    }
  }
  const auto& v = gen::pick(rng, vars);
  const cosm::Value lit = gen::pick(rng, v.domain);
  return BoolExpr::compare(v.name, gen::op_for(rng, lit), lit);
}

inline void for_each_point(const std::vector<Var>& vars, std::size_t i, Env& env, const std::function<void()>& fn) {
  if (i == vars.size()) return fn();
  for (const auto& x : vars[i].domain) {
    env[vars[i].name] = x;
    for_each_point(vars, i + 1, env, fn);
  }
}

}  // namespace oracle
