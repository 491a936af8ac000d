#pragma once

// Shannon quantities (bits) of finite joint distributions.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ctxkit/error.hpp"

namespace ctxkit {

struct Variable {
  std::string name;
  int arity = 2;
};

/// Table over the product space, first variable slowest.
class JointDistribution {
 public:
  JointDistribution(std::vector<Variable> vars, std::vector<double> probs, double eps_sum = 1e-9)
      : vars_(std::move(vars)), p_(std::move(probs)) {
    std::size_t n = 1;
    for (const auto& v : vars_) {
      if (v.arity < 1) fail(ErrorKind::contract, "variable \"" + v.name + "\" has no values");
      n *= static_cast<std::size_t>(v.arity);
    }
    if (p_.size() != n)
      fail(ErrorKind::structural, "joint table has " + std::to_string(p_.size()) +
                                      " entries, expected " + std::to_string(n));
    double s = 0;
    for (double x : p_) {
      if (x < 0) fail(ErrorKind::contract, "negative probability in joint table");
      s += x;
    }
    if (std::fabs(s - 1) > eps_sum) fail(ErrorKind::contract, "joint table sums to " + std::to_string(s));
  }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<double>& probabilities() const { return p_; }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].name == name) return i;
    fail(ErrorKind::lookup, "unknown variable \"" + name + "\"");
  }

  /// Marginal over the named variables, keyed by their values.
  std::map<std::vector<int>, double> marginal(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(index_of(n));
    std::map<std::vector<int>, double> out;
    std::vector<int> value(vars_.size(), 0);
    for (std::size_t k = 0; k < p_.size(); ++k) {
      std::size_t r = k;
      for (std::size_t i = vars_.size(); i-- > 0;) {
        value[i] = static_cast<int>(r % static_cast<std::size_t>(vars_[i].arity));
        r /= static_cast<std::size_t>(vars_[i].arity);
      }
      std::vector<int> key;
      for (auto i : idx) key.push_back(value[i]);
      out[key] += p_[k];
    }
    return out;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<double> p_;
};

inline double entropy(const JointDistribution& d, const std::vector<std::string>& vars) {
  double h = 0;
  for (const auto& [k, p] : d.marginal(vars))
    if (p > 0) h -= p * std::log2(p);
  return h;
}

inline double conditional_entropy(const JointDistribution& d, const std::vector<std::string>& vars,
                                  const std::vector<std::string>& given) {
  auto both = vars;
  both.insert(both.end(), given.begin(), given.end());
  return entropy(d, both) - entropy(d, given);
}

inline double mutual_information(const JointDistribution& d, const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  auto both = a;
  both.insert(both.end(), b.begin(), b.end());
  return entropy(d, a) + entropy(d, b) - entropy(d, both);
}

}  // namespace ctxkit
