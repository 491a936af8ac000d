#pragma once

// Dense two-phase simplex, templated on the scalar so the same code runs in
// exact rational arithmetic (Rational) and in floating point (double).
//
//   maximize   c . x
//   subject to A_eq x  = b_eq
//              A_le x <= b_le
//              x >= 0
//
// Infeasible problems come back with a Farkas certificate (y_eq free,
// y_le >= 0) such that y^T A >= 0 componentwise and y^T b < 0. Callers are
// expected to check it with verify_farkas() rather than trust the solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ctxkit/error.hpp"
#include "ctxkit/rational.hpp"

namespace ctxkit::lp {

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr double eps = 1e-11;
  static bool is_zero(double v) { return std::fabs(v) <= eps; }
  static bool positive(double v) { return v > eps; }
  static bool negative(double v) { return v < -eps; }
  static double abs(double v) { return std::fabs(v); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& v) { return sgn(v) == 0; }
  static bool positive(const Rational& v) { return sgn(v) > 0; }
  static bool negative(const Rational& v) { return sgn(v) < 0; }
  static Rational abs(const Rational& v) { return ::abs(v); }
};

enum class Status { optimal, infeasible, unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "?";
}

template <class T>
struct Problem {
  std::size_t num_vars = 0;
  std::vector<std::vector<T>> eq;
  std::vector<T> eq_rhs;
  std::vector<std::vector<T>> le;
  std::vector<T> le_rhs;
  std::vector<T> objective;  // maximize; empty means pure feasibility

  explicit Problem(std::size_t n = 0) : num_vars(n) {}

  void add_eq(std::vector<T> row, T rhs) {
    check_row(row);
    eq.push_back(std::move(row));
    eq_rhs.push_back(std::move(rhs));
  }
  void add_le(std::vector<T> row, T rhs) {
    check_row(row);
    le.push_back(std::move(row));
    le_rhs.push_back(std::move(rhs));
  }

 private:
  void check_row(const std::vector<T>& row) const {
    if (row.size() != num_vars)
      fail(ErrorKind::structural, "LP row has " + std::to_string(row.size()) +
                                      " coefficients, expected " + std::to_string(num_vars));
  }
};

template <class T>
struct Result {
  Status status = Status::infeasible;
  std::vector<T> x;
  T value{};
  std::vector<T> farkas_eq;
  std::vector<T> farkas_le;
  std::size_t iterations = 0;
};

namespace detail {

template <class T>
class Tableau {
 public:
  using Tr = ScalarTraits<T>;

  Tableau(const Problem<T>& p) : n_(p.num_vars) {
    m_ = p.eq.size() + p.le.size();
    slack0_ = n_;
    art0_ = n_ + p.le.size();
    cols_ = art0_ + m_;
    rows_.assign(m_, std::vector<T>(cols_ + 1, T(0)));
    sign_.assign(m_, 1);
    basis_.assign(m_, 0);
    active_.assign(m_, true);
    for (std::size_t i = 0; i < m_; ++i) {
      const bool is_eq = i < p.eq.size();
      const auto& src = is_eq ? p.eq[i] : p.le[i - p.eq.size()];
      T rhs = is_eq ? p.eq_rhs[i] : p.le_rhs[i - p.eq.size()];
      auto& r = rows_[i];
      for (std::size_t j = 0; j < n_; ++j) r[j] = src[j];
      if (!is_eq) r[slack0_ + (i - p.eq.size())] = T(1);
      r[cols_] = rhs;
      if (Tr::negative(rhs)) {
        sign_[i] = -1;
        for (auto& v : r) v = -v;
      }
      r[art0_ + i] = T(1);
      basis_[i] = art0_ + i;
    }
  }

  // Returns false when the iteration budget runs out.
  bool optimize(const std::vector<T>& cost, bool allow_artificial, std::size_t budget,
                bool& unbounded) {
    unbounded = false;
    for (;;) {
      if (iterations_ >= budget) return false;
      std::vector<T> z = reduced_costs(cost);
      // Dantzig's rule for floats (with Bland once things look degenerate),
      // Bland's rule throughout for exact arithmetic.
      const bool bland = Tr::exact || iterations_ > bland_after_;
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!allow_artificial && j >= art0_) break;
        if (is_basic(j) || !Tr::negative(z[j])) continue;
        if (enter == cols_) {
          enter = j;
          if (bland) break;
        } else if (z[j] < z[enter]) {
          enter = j;
        }
      }
      if (enter == cols_) return true;

      std::size_t leave = m_;
      T best{};
      for (std::size_t i = 0; i < m_; ++i) {
        if (!active_[i] || !Tr::positive(rows_[i][enter])) continue;
        T ratio = rows_[i][cols_] / rows_[i][enter];
        if (leave == m_ || ratio < best ||
            (!(best < ratio) && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) {
        unbounded = true;
        return true;
      }
      pivot(leave, enter);
      ++iterations_;
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    auto& pr = rows_[r];
    T inv = T(1) / pr[c];
    for (auto& v : pr) v *= inv;
    pr[c] = T(1);
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || !active_[i]) continue;
      auto& row = rows_[i];
      if (Tr::is_zero(row[c])) {
        row[c] = T(0);
        continue;
      }
      T f = row[c];
      for (std::size_t j = 0; j <= cols_; ++j) {
        if (Tr::is_zero(pr[j])) continue;
        row[j] -= f * pr[j];
      }
      row[c] = T(0);
    }
    basis_[r] = c;
  }

  std::vector<T> reduced_costs(const std::vector<T>& cost) const {
    std::vector<T> z(cost);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const T& cb = cost[basis_[i]];
      if (Tr::is_zero(cb)) continue;
      for (std::size_t j = 0; j < cols_; ++j) z[j] -= cb * rows_[i][j];
    }
    return z;
  }

  T objective_value(const std::vector<T>& cost) const {
    T v(0);
    for (std::size_t i = 0; i < m_; ++i)
      if (active_[i]) v += cost[basis_[i]] * rows_[i][cols_];
    return v;
  }

  bool is_basic(std::size_t j) const {
    for (std::size_t i = 0; i < m_; ++i)
      if (active_[i] && basis_[i] == j) return true;
    return false;
  }

  // Pivot zero-level artificials out of the basis; rows where that is
  // impossible are linearly dependent and get dropped.
  void purge_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i] || basis_[i] < art0_) continue;
      std::size_t c = cols_;
      for (std::size_t j = 0; j < art0_; ++j)
        if (!Tr::is_zero(rows_[i][j]) && !is_basic(j)) {
          c = j;
          break;
        }
      if (c == cols_)
        active_[i] = false;
      else
        pivot(i, c);
    }
  }

  std::vector<T> primal() const {
    std::vector<T> x(n_, T(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (active_[i] && basis_[i] < n_) x[basis_[i]] = rows_[i][cols_];
    return x;
  }

  // Phase-one dual y' = c_B^T B^{-1}; B^{-1} sits in the artificial columns.
  std::vector<T> phase_one_duals() const {
    std::vector<T> pi(m_, T(0));
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i] || basis_[i] < art0_) continue;
      for (std::size_t k = 0; k < m_; ++k) pi[k] += rows_[i][art0_ + k];
    }
    for (std::size_t k = 0; k < m_; ++k) pi[k] = -pi[k] * T(sign_[k]);
    return pi;
  }

  std::size_t cols() const { return cols_; }
  std::size_t art0() const { return art0_; }
  std::size_t iterations() const { return iterations_; }

 private:
  std::size_t n_, m_ = 0, slack0_ = 0, art0_ = 0, cols_ = 0;
  std::vector<std::vector<T>> rows_;
  std::vector<int> sign_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
  std::size_t iterations_ = 0;
  std::size_t bland_after_ = 5000;
};

}  // namespace detail

/// Solves the problem; throws ErrorKind::not_converged if the pivot budget
/// is exhausted (Bland's rule makes that a symptom of a huge instance, not
/// of cycling).
template <class T>
Result<T> solve(const Problem<T>& p, std::size_t max_pivots = 200000) {
  for (const auto& r : p.eq)
    if (r.size() != p.num_vars) fail(ErrorKind::structural, "LP row width mismatch");
  if (!p.objective.empty() && p.objective.size() != p.num_vars)
    fail(ErrorKind::structural, "LP objective width mismatch");

  detail::Tableau<T> tab(p);
  const std::size_t cols = tab.cols();
  std::vector<T> phase1(cols, T(0));
  for (std::size_t j = tab.art0(); j < cols; ++j) phase1[j] = T(1);

  Result<T> res;
  bool unbounded = false;
  if (!tab.optimize(phase1, true, max_pivots, unbounded))
    fail(ErrorKind::not_converged, "simplex phase one exceeded pivot budget");
  if (ScalarTraits<T>::positive(tab.objective_value(phase1))) {
    res.status = Status::infeasible;
    auto y = tab.phase_one_duals();
    res.farkas_eq.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(p.eq.size()));
    res.farkas_le.assign(y.begin() + static_cast<std::ptrdiff_t>(p.eq.size()), y.end());
    res.iterations = tab.iterations();
    return res;
  }
  tab.purge_artificials();

  std::vector<T> phase2(cols, T(0));
  for (std::size_t j = 0; j < p.objective.size(); ++j) phase2[j] = -p.objective[j];
  if (!p.objective.empty()) {
    if (!tab.optimize(phase2, false, max_pivots, unbounded))
      fail(ErrorKind::not_converged, "simplex phase two exceeded pivot budget");
  }
  res.iterations = tab.iterations();
  if (unbounded) {
    res.status = Status::unbounded;
    return res;
  }
  res.status = Status::optimal;
  res.x = tab.primal();
  res.value = T(0);
  for (std::size_t j = 0; j < p.objective.size(); ++j) res.value += p.objective[j] * res.x[j];
  return res;
}

/// Largest constraint violation of x (equality residuals, positive parts of
/// inequality residuals, negative parts of x).
template <class T>
T max_violation(const Problem<T>& p, const std::vector<T>& x) {
  using Tr = ScalarTraits<T>;
  T worst(0);
  auto bump = [&](const T& v) {
    T a = Tr::abs(v);
    if (worst < a) worst = a;
  };
  for (std::size_t i = 0; i < p.eq.size(); ++i) {
    T s(0);
    for (std::size_t j = 0; j < p.num_vars; ++j) s += p.eq[i][j] * x[j];
    bump(s - p.eq_rhs[i]);
  }
  for (std::size_t i = 0; i < p.le.size(); ++i) {
    T s(0);
    for (std::size_t j = 0; j < p.num_vars; ++j) s += p.le[i][j] * x[j];
    if (p.le_rhs[i] < s) bump(s - p.le_rhs[i]);
  }
  for (const auto& v : x)
    if (v < T(0)) bump(v);
  return worst;
}

/// Checks y^T A >= -tol componentwise, y_le >= -tol and y^T b < -tol.
template <class T>
bool verify_farkas(const Problem<T>& p, const std::vector<T>& y_eq, const std::vector<T>& y_le,
                   const T& tol = T(0)) {
  if (y_eq.size() != p.eq.size() || y_le.size() != p.le.size()) return false;
  for (const auto& v : y_le)
    if (v < -tol) return false;
  for (std::size_t j = 0; j < p.num_vars; ++j) {
    T s(0);
    for (std::size_t i = 0; i < p.eq.size(); ++i) s += y_eq[i] * p.eq[i][j];
    for (std::size_t i = 0; i < p.le.size(); ++i) s += y_le[i] * p.le[i][j];
    if (s < -tol) return false;
  }
  T rhs(0);
  for (std::size_t i = 0; i < p.eq.size(); ++i) rhs += y_eq[i] * p.eq_rhs[i];
  for (std::size_t i = 0; i < p.le.size(); ++i) rhs += y_le[i] * p.le_rhs[i];
  return rhs < -tol;
}

template <class T>
bool verify_farkas(const Problem<T>& p, const Result<T>& r, const T& tol = T(0)) {
  return r.status == Status::infeasible && verify_farkas(p, r.farkas_eq, r.farkas_le, tol);
}

}  // namespace ctxkit::lp
