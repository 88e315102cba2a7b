#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rattack/core.hpp"

namespace rattack {

enum class Sense { LessEqual, Equal, GreaterEqual };

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus status) {
  switch (status) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  Sense sense = Sense::Equal;
  double rhs = 0.0;
};

/// maximize c^T x subject to the constraint rows, 0 <= x <= upper.
class LinearProgram {
 public:
  LinearProgram() = default;
  explicit LinearProgram(int variable_count)
      : objective_(variable_count, 0.0), upper_(variable_count, kInfinity) {}

  int add_variable(double objective = 0.0, double upper = kInfinity) {
    objective_.push_back(objective);
    upper_.push_back(upper);
    return static_cast<int>(objective_.size()) - 1;
  }

  void set_objective(int var, double coef) { objective_[var] = coef; }
  void set_upper_bound(int var, double upper) { upper_[var] = upper; }

  void add_constraint(std::vector<std::pair<int, double>> terms, Sense sense, double rhs) {
    if (!std::isfinite(rhs)) throw Error("lp-malformed", "constraint rhs must be finite");
    for (const auto& [var, coef] : terms) {
      if (var < 0 || var >= variable_count()) throw Error("lp-malformed", "variable index out of range");
      (void)coef;
    }
    constraints_.push_back({std::move(terms), sense, rhs});
  }

  int variable_count() const { return static_cast<int>(objective_.size()); }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }

  /// Largest violation of any constraint or bound by `x`.
  double residual(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int v = 0; v < variable_count(); ++v) {
      worst = std::max(worst, -x[v]);
      if (!is_infinite(upper_[v])) worst = std::max(worst, x[v] - upper_[v]);
    }
    for (const LinearConstraint& row : constraints_) {
      double lhs = 0.0;
      for (const auto& [var, coef] : row.terms) lhs += coef * x[var];
      double gap = lhs - row.rhs;
      if (row.sense == Sense::LessEqual) worst = std::max(worst, gap);
      if (row.sense == Sense::GreaterEqual) worst = std::max(worst, -gap);
      if (row.sense == Sense::Equal) worst = std::max(worst, std::fabs(gap));
    }
    return worst;
  }

 private:
  std::vector<double> objective_;
  std::vector<double> upper_;
  std::vector<LinearConstraint> constraints_;
};

struct LPSolution {
  LPStatus status = LPStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

/// Destination for tableau dumps; null disables tracing. Per thread so that
/// concurrent solves never interleave.
inline std::ostream*& lp_trace() {
  thread_local std::ostream* stream = nullptr;
  return stream;
}

namespace detail {

class Tableau {
 public:
  static constexpr double kPivotTol = 1e-9;

  Tableau(int rows, int cols) : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

  double& at(int r, int c) { return data_[r * (cols_ + 1) + c]; }
  double at(int r, int c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  double& cost(int c) { return at(rows_, c); }

  void pivot(int pr, int pc) {
    const int width = cols_ + 1;
    double* prow = &data_[pr * width];
    double inv = 1.0 / prow[pc];
    for (int c = 0; c < width; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * width];
      double factor = row[pc];
      if (factor == 0.0) continue;
      for (int c = 0; c < width; ++c) row[c] -= factor * prow[c];
      row[pc] = 0.0;
    }
  }

  void dump(std::ostream& os, const std::string& label, const std::vector<int>& basis) const {
    os << "-- " << label << " (" << rows_ << "x" << cols_ << ")\n";
    for (int r = 0; r <= rows_; ++r) {
      os << (r < rows_ ? "x" + std::to_string(basis[r]) : std::string("z")) << "\t";
      for (int c = 0; c <= cols_; ++c) os << std::setw(10) << std::setprecision(4) << at(r, c) << ' ';
      os << '\n';
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
};

/// Runs simplex iterations on the cost row until optimal: most negative
/// reduced cost while the objective moves, Bland's rule after a run of
/// degenerate pivots. Among near-tied ratios the largest pivot leaves.
/// Columns at or beyond `allowed` never enter. Returns false if unbounded.
inline bool run_simplex(Tableau& t, std::vector<int>& basis, int allowed, long& budget,
                        const char* phase) {
  int degenerate = 0;
  for (;;) {
    const bool bland = degenerate > 50;
    int enter = -1;
    double most = -Tableau::kPivotTol;
    for (int c = 0; c < allowed; ++c) {
      if (t.cost(c) < most) {
        enter = c;
        if (bland) break;
        most = t.cost(c);
      }
    }
    if (enter < 0) return true;
    double best = kInfinity;
    for (int r = 0; r < t.rows(); ++r) {
      double a = t.at(r, enter);
      if (a > Tableau::kPivotTol) best = std::min(best, std::max(0.0, t.rhs(r)) / a);
    }
    if (is_infinite(best)) return false;
    const double window = best + 1e-9 * std::max(1.0, best);
    int leave = -1;
    for (int r = 0; r < t.rows(); ++r) {
      double a = t.at(r, enter);
      if (a <= Tableau::kPivotTol || std::max(0.0, t.rhs(r)) / a > window) continue;
      if (leave < 0) {
        leave = r;
      } else if (bland ? basis[r] < basis[leave] : a > t.at(leave, enter)) {
        leave = r;
      }
    }
    if (--budget < 0) throw Error("lp-numerical", "simplex iteration cap exceeded");
    degenerate = best == 0.0 ? degenerate + 1 : 0;
    t.pivot(leave, enter);
    basis[leave] = enter;
    if (lp_trace()) t.dump(*lp_trace(), std::string(phase) + " pivot", basis);
  }
}

}  // namespace detail

/// Two-phase dense simplex. Throws lp-numerical rather than return a point
/// that misses the constraints.
inline LPSolution solve(const LinearProgram& lp) {
  const int n = lp.variable_count();

  struct Row {
    std::vector<std::pair<int, double>> terms;
    Sense sense;
    double rhs;
  };
  std::vector<Row> rows;
  rows.reserve(lp.constraints().size() + n);
  for (const LinearConstraint& c : lp.constraints()) rows.push_back({c.terms, c.sense, c.rhs});
  for (int v = 0; v < n; ++v) {
    if (!is_infinite(lp.upper()[v])) rows.push_back({{{v, 1.0}}, Sense::LessEqual, lp.upper()[v]});
  }
  for (Row& row : rows) {
    if (row.rhs < 0.0) {
      row.rhs = -row.rhs;
      for (auto& term : row.terms) term.second = -term.second;
      if (row.sense == Sense::LessEqual) row.sense = Sense::GreaterEqual;
      else if (row.sense == Sense::GreaterEqual) row.sense = Sense::LessEqual;
    }
  }

  const int m = static_cast<int>(rows.size());
  int slack_count = 0, artificial_count = 0;
  for (const Row& row : rows) {
    if (row.sense != Sense::Equal) ++slack_count;
    if (row.sense != Sense::LessEqual) ++artificial_count;
  }
  const int first_artificial = n + slack_count;
  const int cols = first_artificial + artificial_count;

  detail::Tableau t(m, cols);
  std::vector<int> basis(m, -1);
  int next_slack = n, next_artificial = first_artificial;
  for (int r = 0; r < m; ++r) {
    for (const auto& [var, coef] : rows[r].terms) t.at(r, var) += coef;
    t.rhs(r) = rows[r].rhs;
    if (rows[r].sense == Sense::LessEqual) {
      t.at(r, next_slack) = 1.0;
      basis[r] = next_slack++;
    } else {
      if (rows[r].sense == Sense::GreaterEqual) t.at(r, next_slack++) = -1.0;
      t.at(r, next_artificial) = 1.0;
      basis[r] = next_artificial++;
    }
  }

  long budget = 200L * (m + cols) + 10000;

  // Phase 1: maximize -sum(artificials).
  if (artificial_count > 0) {
    for (int r = 0; r < m; ++r) {
      if (basis[r] < first_artificial) continue;
      for (int c = 0; c <= cols; ++c) {
        if (c < first_artificial) t.cost(c) -= t.at(r, c);
      }
      t.at(m, cols) -= t.rhs(r);
    }
    if (lp_trace()) t.dump(*lp_trace(), "phase 1 start", basis);
    detail::run_simplex(t, basis, first_artificial, budget, "phase 1");
    double scale = 1.0;
    for (const Row& row : rows) scale = std::max(scale, row.rhs);
    if (-t.at(m, cols) > 1e-9 * scale) return {LPStatus::Infeasible, {}, 0.0};
    // Drive remaining zero-level artificials out of the basis.
    for (int r = 0; r < m; ++r) {
      if (basis[r] < first_artificial) continue;
      for (int c = 0; c < first_artificial; ++c) {
        if (std::fabs(t.at(r, c)) > detail::Tableau::kPivotTol) {
          t.pivot(r, c);
          basis[r] = c;
          break;
        }
      }
    }
  }

  // Phase 2: original objective, artificial columns locked out.
  for (int c = 0; c <= cols; ++c) t.cost(c) = 0.0;
  for (int v = 0; v < n; ++v) t.cost(v) = -lp.objective()[v];
  for (int r = 0; r < m; ++r) {
    double coef = t.cost(basis[r]);
    if (coef == 0.0) continue;
    for (int c = 0; c <= cols; ++c) t.cost(c) -= coef * t.at(r, c);
  }
  if (lp_trace()) t.dump(*lp_trace(), "phase 2 start", basis);
  if (!detail::run_simplex(t, basis, first_artificial, budget, "phase 2")) {
    return {LPStatus::Unbounded, {}, 0.0};
  }

  LPSolution sol;
  sol.status = LPStatus::Optimal;
  sol.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r) {
    if (basis[r] < n) sol.x[basis[r]] = std::max(0.0, t.rhs(r));
  }
  for (int v = 0; v < n; ++v) sol.objective += lp.objective()[v] * sol.x[v];
  double scale = 1.0;
  for (const Row& row : rows) {
    scale = std::max(scale, row.rhs);
    for (const auto& term : row.terms) scale = std::max(scale, std::fabs(term.second));
  }
  if (lp.residual(sol.x) > 1e-7 * scale) {
    throw Error("lp-numerical", "simplex solution violates its constraints");
  }
  if (lp_trace()) *lp_trace() << "-- optimal objective " << sol.objective << '\n';
  return sol;
}

}  // namespace rattack
