#include "duality/lp.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <optional>
#include <random>

using duality::lp::Problem;
using duality::lp::Solution;
using duality::lp::Status;
using duality::lp::solve;
using Rational = boost::multiprecision::cpp_rational;

namespace {

// Brute-force optimum over basic solutions: pick m columns, solve the square
// system with Eigen, keep nonnegative solutions. Requires full row rank.
std::optional<double> vertex_optimum(const Problem<double>& p) {
  const int m = static_cast<int>(p.rows.size());
  const int n = static_cast<int>(p.num_vars);
  std::optional<double> best;
  std::vector<int> pick(m);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == m) {
      Eigen::MatrixXd a(m, m);
      Eigen::VectorXd b(m);
      for (int i = 0; i < m; ++i) {
        b(i) = p.rhs[i];
        for (int j = 0; j < m; ++j) a(i, j) = p.rows[i][pick[j]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < m) return;
      const Eigen::VectorXd x = lu.solve(b);
      double obj = 0;
      for (int j = 0; j < m; ++j) {
        if (x(j) < -1e-9) return;
        obj += p.cost[pick[j]] * x(j);
      }
      if (!best || obj < *best) best = obj;
      return;
    }
    for (int c = start; c < n; ++c) {
      pick[depth] = c;
      rec(c + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST(Simplex, SmallKnownOptimum) {
  // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
  Problem<double> p;
  p.num_vars = 4;
  p.add_row({1, 2, 1, 0}, 4);
  p.add_row({3, 1, 0, 1}, 6);
  p.cost = {-1, -1, 0, 0};
  const auto s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, -2.8, 1e-12);
  EXPECT_NEAR(s.x[0], 1.6, 1e-12);
  EXPECT_NEAR(s.x[1], 1.2, 1e-12);
}

TEST(Simplex, ExactRationalOptimum) {
  Problem<Rational> p;
  p.num_vars = 4;
  p.add_row({1, 2, 1, 0}, 4);
  p.add_row({3, 1, 0, 1}, 6);
  p.cost = {-1, -1, 0, 0};
  const auto s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_EQ(s.objective, Rational(-14, 5));
  EXPECT_EQ(s.x[0], Rational(8, 5));
  EXPECT_EQ(s.x[1], Rational(6, 5));
}

TEST(Simplex, DetectsInfeasibility) {
  Problem<Rational> p;
  p.num_vars = 2;
  p.add_row({1, 1}, 1);
  p.add_row({1, 1}, 2);
  p.cost = {0, 0};
  EXPECT_EQ(solve(p).status, Status::infeasible);
  Problem<double> q;
  q.num_vars = 1;
  q.add_row({1}, -1);
  q.cost = {0};
  EXPECT_EQ(solve(q).status, Status::infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
  Problem<double> p;
  p.num_vars = 2;
  p.add_row({1, -1}, 1);
  p.cost = {-1, 0};
  EXPECT_EQ(solve(p).status, Status::unbounded);
}

TEST(Simplex, RedundantRowsAreDropped) {
  Problem<Rational> p;
  p.num_vars = 3;
  p.add_row({1, 1, 1}, 1);
  p.add_row({2, 2, 2}, 2);
  p.add_row({1, 0, 0}, Rational(1, 3));
  p.cost = {0, 1, 0};
  const auto s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_EQ(s.objective, 0);
  EXPECT_EQ(s.x[0], Rational(1, 3));
  EXPECT_EQ(s.x[2], Rational(2, 3));
}

TEST(Simplex, DegenerateCyclingExample) {
  // Beale's example in equality form; Dantzig's rule without safeguards cycles.
  Problem<Rational> p;
  p.num_vars = 7;
  p.add_row({Rational(1, 4), -8, -1, 9, 1, 0, 0}, 0);
  p.add_row({Rational(1, 2), -12, Rational(-1, 2), 3, 0, 1, 0}, 0);
  p.add_row({0, 0, 1, 0, 0, 0, 1}, 1);
  p.cost = {Rational(-3, 4), 20, Rational(-1, 2), 6, 0, 0, 0};
  const auto s = solve(p);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_EQ(s.objective, Rational(-5, 4));

  Problem<double> d;
  d.num_vars = 7;
  d.add_row({0.25, -8, -1, 9, 1, 0, 0}, 0);
  d.add_row({0.5, -12, -0.5, 3, 0, 1, 0}, 0);
  d.add_row({0, 0, 1, 0, 0, 0, 1}, 1);
  d.cost = {-0.75, 20, -0.5, 6, 0, 0, 0};
  const auto sd = solve(d);
  ASSERT_EQ(sd.status, Status::optimal);
  EXPECT_NEAR(sd.objective, -1.25, 1e-12);
}

TEST(Simplex, RejectsMalformedProblems) {
  Problem<double> p;
  p.num_vars = 2;
  EXPECT_THROW(p.add_row({1}, 1), std::invalid_argument);
  p.add_row({1, 1}, 1);
  p.cost = {1};
  EXPECT_THROW(solve(p), std::invalid_argument);
}

// Property: on random bounded feasible problems the simplex optimum equals
// the brute-force best vertex, in both arithmetics.
TEST(Properties, MatchesVertexEnumeration) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> coef(-3, 5);
  std::uniform_int_distribution<int> pos(1, 5);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int m = 2 + trial % 3;
    const int n = m + 2 + trial % 3;
    Problem<double> p;
    Problem<Rational> q;
    p.num_vars = q.num_vars = n;
    // A positive first row keeps the feasible set bounded.
    std::vector<double> row(n);
    std::vector<Rational> rrow(n);
    for (int j = 0; j < n; ++j) {
      row[j] = pos(rng);
      rrow[j] = static_cast<int>(row[j]);
    }
    const int b0 = pos(rng) * 3;
    p.add_row(row, b0);
    q.add_row(rrow, b0);
    for (int i = 1; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        row[j] = coef(rng);
        rrow[j] = static_cast<int>(row[j]);
      }
      const int b = coef(rng);
      p.add_row(row, b);
      q.add_row(rrow, b);
    }
    for (int j = 0; j < n; ++j) {
      const int c = coef(rng);
      p.cost.push_back(c);
      q.cost.push_back(c);
    }
    const auto oracle = vertex_optimum(p);
    const auto sd = solve(p);
    const auto sq = solve(q);
    if (!oracle) {
      EXPECT_EQ(sd.status, Status::infeasible);
      EXPECT_EQ(sq.status, Status::infeasible);
      continue;
    }
    ASSERT_EQ(sd.status, Status::optimal) << trial;
    ASSERT_EQ(sq.status, Status::optimal) << trial;
    EXPECT_NEAR(sd.objective, *oracle, 1e-9) << trial;
    EXPECT_NEAR(static_cast<double>(sq.objective), *oracle, 1e-9) << trial;
    // Exact primal satisfies the constraints exactly.
    for (std::size_t i = 0; i < q.rows.size(); ++i) {
      Rational lhs = 0;
      for (int j = 0; j < n; ++j) lhs += q.rows[i][j] * sq.x[j];
      EXPECT_EQ(lhs, q.rhs[i]);
    }
    ++checked;
  }
  EXPECT_GT(checked, 50);
}
