#pragma once

// Dense-tableau primal simplex for the restricted master. Rows are
// ">=" or "=" with rhs >= 0; variables are nonnegative. Every row gets a
// penalty artificial so the all-artificial basis is always feasible.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace jrsp::lp {

struct SparseCol {
    std::vector<int> row;
    std::vector<double> coef;
    double cost = 0.0;
};

enum class RowSense { Ge, Eq };

struct Problem {
    std::vector<RowSense> sense;
    std::vector<double> rhs;
    std::vector<SparseCol> cols;  // structural variables
    double penalty = 1e9;
};

struct Result {
    bool solved = false;
    double objective = 0.0;          // structural objective (penalties excluded)
    std::vector<double> x;           // structural primal values
    std::vector<double> y;           // row duals
    double artificial_sum = 0.0;     // > 0 means the LP is infeasible
    std::int64_t pivots = 0;
};

class Simplex {
  public:
    explicit Simplex(const Problem& p) : p_(p) {}

    Result solve() {
        const int m = static_cast<int>(p_.rhs.size());
        const int ns = static_cast<int>(p_.cols.size());
        int n_ge = 0;
        for (auto s : p_.sense)
            if (s == RowSense::Ge) ++n_ge;
        // variable order: structural | surplus (Ge rows) | artificial per row
        const int n_surplus = n_ge;
        const int N = ns + n_surplus + m;
        surplus_of_.assign(m, -1);
        {
            int k = ns;
            for (int i = 0; i < m; ++i)
                if (p_.sense[i] == RowSense::Ge) surplus_of_[i] = k++;
        }
        art_of_.assign(m, 0);
        for (int i = 0; i < m; ++i) art_of_[i] = ns + n_surplus + i;

        // tableau: m rows x (N + 1), last column is rhs
        T_.assign(m, std::vector<double>(N + 1, 0.0));
        for (int j = 0; j < ns; ++j) {
            const auto& c = p_.cols[j];
            for (std::size_t k = 0; k < c.row.size(); ++k) T_[c.row[k]][j] = c.coef[k];
        }
        for (int i = 0; i < m; ++i) {
            if (surplus_of_[i] >= 0) T_[i][surplus_of_[i]] = -1.0;
            T_[i][art_of_[i]] = 1.0;
            T_[i][N] = p_.rhs[i];
        }
        cost_.assign(N, 0.0);
        for (int j = 0; j < ns; ++j) cost_[j] = p_.cols[j].cost;
        for (int i = 0; i < m; ++i) cost_[art_of_[i]] = p_.penalty;

        basis_.assign(m, 0);
        for (int i = 0; i < m; ++i) basis_[i] = art_of_[i];

        // reduced-cost row z_ = c - y A, starting from the artificial basis
        z_.assign(N + 1, 0.0);
        for (int j = 0; j < N; ++j) {
            double yaj = 0.0;
            for (int i = 0; i < m; ++i) yaj += p_.penalty * T_[i][j];
            z_[j] = cost_[j] - yaj;
        }
        double obj0 = 0.0;
        for (int i = 0; i < m; ++i) obj0 += p_.penalty * T_[i][N];
        z_[N] = -obj0;

        iterate(m, N, ns);
        return extract(m, N, ns);
    }

  private:
    // dense column of the ORIGINAL constraint matrix
    void original_column(int j, int m, int ns, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        if (j < ns) {
            const auto& c = p_.cols[j];
            for (std::size_t k = 0; k < c.row.size(); ++k) out[c.row[k]] = c.coef[k];
        } else if (j < ns + static_cast<int>(surplus_of_.size())) {
            for (int i = 0; i < m; ++i)
                if (surplus_of_[i] == j) out[i] = -1.0;
        } else {
            for (int i = 0; i < m; ++i)
                if (art_of_[i] == j) out[i] = 1.0;
        }
    }

    // rebuild T = B^-1 A and the reduced-cost row from the current basis,
    // killing accumulated pivot drift
    bool refactorize(int m, int N, int ns) {
        // invert B by Gauss-Jordan
        std::vector<std::vector<double>> aug(m, std::vector<double>(2 * m, 0.0));
        std::vector<double> col(m);
        for (int c = 0; c < m; ++c) {
            original_column(basis_[c], m, ns, col);
            for (int r = 0; r < m; ++r) aug[r][c] = col[r];
        }
        for (int r = 0; r < m; ++r) aug[r][m + r] = 1.0;
        for (int c = 0; c < m; ++c) {
            int piv = -1;
            double best = 1e-12;
            for (int r = c; r < m; ++r)
                if (std::fabs(aug[r][c]) > best) {
                    best = std::fabs(aug[r][c]);
                    piv = r;
                }
            if (piv < 0) return false;  // singular; caller restarts
            std::swap(aug[c], aug[piv]);
            double d = aug[c][c];
            for (int k = c; k < 2 * m; ++k) aug[c][k] /= d;
            for (int r = 0; r < m; ++r) {
                if (r == c) continue;
                double f = aug[r][c];
                if (f == 0.0) continue;
                for (int k = c; k < 2 * m; ++k) aug[r][k] -= f * aug[c][k];
            }
        }
        // y = c_B B^-1
        std::vector<double> y(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            for (int r = 0; r < m; ++r) y[r] += cb * aug[i][m + r];
        }
        // T = B^-1 A, column by column
        for (int j = 0; j < N; ++j) {
            original_column(j, m, ns, col);
            for (int r = 0; r < m; ++r) {
                double s = 0.0;
                for (int k = 0; k < m; ++k) s += aug[r][m + k] * col[k];
                T_[r][j] = s;
            }
            double yaj = 0.0;
            if (j < ns) {
                const auto& c = p_.cols[j];
                for (std::size_t k = 0; k < c.row.size(); ++k) yaj += y[c.row[k]] * c.coef[k];
            } else {
                original_column(j, m, ns, col);
                for (int r = 0; r < m; ++r) yaj += y[r] * col[r];
            }
            z_[j] = cost_[j] - yaj;
        }
        for (int r = 0; r < m; ++r) {
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += aug[r][m + k] * p_.rhs[k];
            T_[r][N] = s;
        }
        return true;
    }

  private:
    void iterate(int m, int N, int ns) {
        const double eps_rc = 1e-7;
        const double eps_piv = 1e-9;
        const std::int64_t stall_cap = 10LL * (m + N);
        std::int64_t degenerate_streak = 0;
        bool bland = false;

        for (;;) {
            // periodic refactorization plus a drift cleanup when a
            // degenerate streak first looks like a stall
            if ((pivots_ > 0 && pivots_ % 3000 == 0 && last_refactor_ != pivots_) ||
                degenerate_streak == 2 * m || degenerate_streak == m + N) {
                if (last_refactor_ != pivots_) {
                    last_refactor_ = pivots_;
                    refactorize(m, N, ns);
                }
            }
            int enter = -1;
            if (!bland) {
                double best = -eps_rc;
                for (int j = 0; j < N; ++j)
                    if (z_[j] < best) {
                        best = z_[j];
                        enter = j;
                    }
            } else {
                for (int j = 0; j < N; ++j)
                    if (z_[j] < -eps_rc) {
                        enter = j;
                        break;
                    }
            }
            if (enter < 0) return;  // optimal

            int leave = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < m; ++i) {
                double a = T_[i][enter];
                if (a <= eps_piv) continue;
                double ratio = T_[i][N] / a;
                bool better = leave < 0 || ratio < best_ratio - 1e-12;
                if (!better && leave >= 0 && std::fabs(ratio - best_ratio) <= 1e-12) {
                    if (bland) {
                        // strict lowest-index tie break, required for the
                        // anti-cycling guarantee
                        better = basis_[i] < basis_[leave];
                    } else {
                        // kick artificials out first, then take the more
                        // stable pivot, then lowest basis index
                        bool i_art = basis_[i] >= art_floor();
                        bool l_art = basis_[leave] >= art_floor();
                        if (i_art != l_art)
                            better = i_art;
                        else if (std::fabs(a - T_[leave][enter]) > 1e-9)
                            better = a > T_[leave][enter];
                        else
                            better = basis_[i] < basis_[leave];
                    }
                }
                if (better) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) throw std::logic_error("rmp lp unbounded");

            if (best_ratio <= 1e-12) {
                if (++degenerate_streak > (m + N) && !bland) bland = true;
                if (degenerate_streak > stall_cap)
                    throw std::runtime_error("rmp lp stalled under Bland's rule");
            } else {
                degenerate_streak = 0;
                bland = false;
            }
            pivot(leave, enter, m, N);
            ++pivots_;
        }
    }

    int art_floor() const { return art_of_[0]; }

    void pivot(int r, int c, int m, int N) {
        double piv = T_[r][c];
        auto& row = T_[r];
        for (int j = 0; j <= N; ++j) row[j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            double f = T_[i][c];
            if (f == 0.0) continue;
            auto& ri = T_[i];
            for (int j = 0; j <= N; ++j) ri[j] -= f * row[j];
        }
        double f = z_[c];
        if (f != 0.0)
            for (int j = 0; j <= N; ++j) z_[j] -= f * row[j];
        basis_[r] = c;
    }

    Result extract(int m, int N, int ns) {
        Result res;
        res.solved = true;
        res.pivots = pivots_;
        res.x.assign(ns, 0.0);
        std::vector<double> xfull(N, 0.0);
        for (int i = 0; i < m; ++i) xfull[basis_[i]] = T_[i][N];
        for (int j = 0; j < ns; ++j) res.x[j] = xfull[j];
        for (int i = 0; i < m; ++i) res.artificial_sum += xfull[art_of_[i]];
        for (int j = 0; j < ns; ++j) res.objective += p_.cols[j].cost * res.x[j];
        // y_i = cost(artificial_i) - reduced_cost(artificial_i)
        res.y.assign(m, 0.0);
        for (int i = 0; i < m; ++i) res.y[i] = p_.penalty - z_[art_of_[i]];
        return res;
    }

    const Problem& p_;
    std::vector<std::vector<double>> T_;
    std::vector<double> z_;
    std::vector<double> cost_;
    std::vector<int> basis_;
    std::vector<int> surplus_of_;
    std::vector<int> art_of_;
    std::int64_t pivots_ = 0;
    std::int64_t last_refactor_ = -1;
};

inline Result solve(const Problem& p) { return Simplex(p).solve(); }

}  // namespace jrsp::lp
