#pragma once

// Dense two-phase tableau simplex for small feasibility problems.
//
//   minimize c^T x  subject to  A x = b,  x >= 0.
//
// Scalar is double or an exact rational type (boost::multiprecision
// cpp_rational). Exact runs use Bland's rule throughout; double runs use
// Dantzig's rule and switch to Bland's rule after a pivot budget.

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace duality::lp {

enum class Status { optimal, infeasible, unbounded };

template <class Scalar>
struct Problem {
  std::size_t num_vars = 0;
  /// Row-major, rows.size() == rhs.size(), each row num_vars long.
  std::vector<std::vector<Scalar>> rows;
  std::vector<Scalar> rhs;
  std::vector<Scalar> cost;

  void add_row(std::vector<Scalar> row, Scalar b) {
    if (row.size() != num_vars) throw std::invalid_argument("LP row has the wrong length");
    rows.push_back(std::move(row));
    rhs.push_back(std::move(b));
  }
};

template <class Scalar>
struct Solution {
  Status status = Status::infeasible;
  Scalar objective{};
  std::vector<Scalar> x;
  std::size_t pivots = 0;
};

template <class Scalar>
struct Tolerance {
  static Scalar eps() {
    if constexpr (std::is_floating_point_v<Scalar>) {
      return Scalar(1e-11);
    } else {
      return Scalar(0);
    }
  }
  static constexpr bool exact = !std::is_floating_point_v<Scalar>;
};

namespace detail {

template <class Scalar>
class Tableau {
 public:
  Tableau(const Problem<Scalar>& p) : m_(p.rows.size()), n_(p.num_vars), width_(n_ + m_ + 1) {
    t_.assign((m_ + 1) * width_, Scalar(0));
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const bool flip = p.rhs[i] < Scalar(0);
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = flip ? Scalar(-p.rows[i][j]) : p.rows[i][j];
      at(i, n_ + i) = Scalar(1);
      at(i, rhs_col()) = flip ? Scalar(-p.rhs[i]) : p.rhs[i];
      basis_[i] = n_ + i;
    }
    allowed_.assign(width_ - 1, true);
  }

  Scalar& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  const Scalar& at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }
  std::size_t rhs_col() const { return width_ - 1; }
  std::size_t obj_row() const { return m_; }

  // Objective row holds reduced costs; its rhs entry is -(objective value).
  void set_objective(const std::vector<Scalar>& cost_of_column) {
    for (std::size_t j = 0; j < width_; ++j) at(obj_row(), j) = Scalar(0);
    for (std::size_t j = 0; j + 1 < width_; ++j) at(obj_row(), j) = cost_of_column[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const Scalar cb = cost_of_column[basis_[i]];
      if (cb == Scalar(0)) continue;
      for (std::size_t j = 0; j < width_; ++j) at(obj_row(), j) -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const Scalar inv = Scalar(1) / at(r, c);
    for (std::size_t j = 0; j < width_; ++j) at(r, j) *= inv;
    at(r, c) = Scalar(1);
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const Scalar f = at(i, c);
      if (f == Scalar(0)) continue;
      for (std::size_t j = 0; j < width_; ++j) {
        if (at(r, j) != Scalar(0)) at(i, j) -= f * at(r, j);
      }
      at(i, c) = Scalar(0);
    }
    basis_[r] = c;
    ++pivots_;
  }

  // Returns false when the objective is unbounded below.
  bool optimize() {
    const Scalar eps = Tolerance<Scalar>::eps();
    const std::size_t budget = 50 * (m_ + width_);
    for (std::size_t iter = 0;; ++iter) {
      const bool bland = Tolerance<Scalar>::exact || iter > budget;
      std::size_t enter = width_;
      Scalar best = -eps;
      for (std::size_t j = 0; j + 1 < width_; ++j) {
        if (!allowed_[j]) continue;
        const Scalar& d = at(obj_row(), j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter == width_) return true;

      std::size_t leave = m_;
      Scalar ratio{};
      for (std::size_t i = 0; i < m_; ++i) {
        const Scalar& a = at(i, enter);
        if (!(a > eps)) continue;
        const Scalar q = at(i, rhs_col()) / a;
        if (leave == m_ || q < ratio || (q == ratio && basis_[i] < basis_[leave])) {
          leave = i;
          ratio = q;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  // After phase one: pivot artificial columns out of the basis and drop rows
  // that turn out to be redundant.
  void expel_artificials() {
    const Scalar eps = Tolerance<Scalar>::eps();
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < n_) {
        ++i;
        continue;
      }
      std::size_t col = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        const Scalar& a = at(i, j);
        if (a > eps || a < -eps) {
          col = j;
          break;
        }
      }
      if (col < n_) {
        pivot(i, col);
        ++i;
      } else {
        remove_row(i);
      }
    }
    for (std::size_t j = n_; j + 1 < width_; ++j) allowed_[j] = false;
  }

  Scalar objective_value() const { return -at(obj_row(), rhs_col()); }

  std::vector<Scalar> primal() const {
    std::vector<Scalar> x(n_, Scalar(0));
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) x[basis_[i]] = at(i, rhs_col());
    }
    return x;
  }

  std::size_t num_original() const { return n_; }
  std::size_t num_columns() const { return width_ - 1; }
  std::size_t pivots() const { return pivots_; }

 private:
  void remove_row(std::size_t r) {
    std::vector<Scalar> next;
    next.reserve(m_ * width_);
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      for (std::size_t j = 0; j < width_; ++j) next.push_back(at(i, j));
    }
    t_ = std::move(next);
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --m_;
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<Scalar> t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> allowed_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Solves the problem. Infeasibility is declared when the phase-one optimum
/// exceeds the tolerance (zero for exact arithmetic).
template <class Scalar>
Solution<Scalar> solve(const Problem<Scalar>& problem) {
  if (problem.rows.size() != problem.rhs.size()) {
    throw std::invalid_argument("LP rows and right-hand side differ in length");
  }
  if (problem.cost.size() != problem.num_vars) {
    throw std::invalid_argument("LP cost vector has the wrong length");
  }
  for (const auto& row : problem.rows) {
    if (row.size() != problem.num_vars) throw std::invalid_argument("LP row has the wrong length");
  }

  detail::Tableau<Scalar> t(problem);
  const std::size_t n = problem.num_vars;
  std::vector<Scalar> phase1(t.num_columns(), Scalar(0));
  for (std::size_t j = n; j < phase1.size(); ++j) phase1[j] = Scalar(1);
  t.set_objective(phase1);
  t.optimize();

  Solution<Scalar> out;
  if (t.objective_value() > Tolerance<Scalar>::eps() * Scalar(100)) {
    out.status = Status::infeasible;
    out.pivots = t.pivots();
    return out;
  }
  t.expel_artificials();

  std::vector<Scalar> phase2(t.num_columns(), Scalar(0));
  for (std::size_t j = 0; j < n; ++j) phase2[j] = problem.cost[j];
  t.set_objective(phase2);
  const bool bounded = t.optimize();
  out.pivots = t.pivots();
  out.status = bounded ? Status::optimal : Status::unbounded;
  out.x = t.primal();
  if constexpr (std::is_floating_point_v<Scalar>) {
    for (auto& v : out.x) {
      if (v < Scalar(0)) v = Scalar(0);
    }
  }
  Scalar obj(0);
  for (std::size_t j = 0; j < n; ++j) obj += problem.cost[j] * out.x[j];
  out.objective = obj;
  return out;
}

}  // namespace duality::lp
