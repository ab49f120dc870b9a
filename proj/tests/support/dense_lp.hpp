#pragma once

// Small dense two-phase simplex (Bland's rule) used as an independent
// reference in tests. Not meant for anything larger than a few hundred
// variables.

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DenseLp {
    std::vector<double> c, lo, hi;
    std::vector<std::vector<double>> a;  // one coefficient vector per row
    std::vector<double> b;
    std::vector<char> sense;  // 'L' (<=), 'G' (>=), 'E' (=)

    int add_var(double cost, double lower = 0.0, double upper = kInf) {
        c.push_back(cost);
        lo.push_back(lower);
        hi.push_back(upper);
        for (auto& row : a) row.push_back(0.0);
        return static_cast<int>(c.size()) - 1;
    }
    std::vector<double>& add_row(char s, double rhs) {
        a.emplace_back(c.size(), 0.0);
        sense.push_back(s);
        b.push_back(rhs);
        return a.back();
    }
};

struct DenseResult {
    bool feasible = false;
    bool bounded = true;
    double objective = 0.0;
    std::vector<double> x;
};

namespace detail {

class Tableau {
public:
    Tableau(int rows, int cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, -1) {}
    double& at(int r, int c) { return t_[static_cast<std::size_t>(r * (n_ + 1) + c)]; }
    double& rhs(int r) { return at(r, n_); }
    double& obj(int c) { return at(m_, c); }
    std::vector<int>& basis() { return basis_; }

    void pivot(int pr, int pc) {
        const double piv = at(pr, pc);
        for (int c = 0; c <= n_; ++c) at(pr, c) /= piv;
        for (int r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (int c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
        }
        basis_[static_cast<std::size_t>(pr)] = pc;
    }

    // Minimizes the objective row; false when unbounded.
    bool run(const std::vector<bool>& allowed) {
        const double eps = 1e-9;
        for (int iter = 0; iter < 100000; ++iter) {
            int pc = -1;
            for (int c = 0; c < n_; ++c) {
                if (allowed[static_cast<std::size_t>(c)] && obj(c) < -eps) {
                    pc = c;
                    break;
                }
            }
            if (pc < 0) return true;
            int pr = -1;
            double best = 0.0;
            for (int r = 0; r < m_; ++r) {
                const double v = at(r, pc);
                if (v > eps) {
                    const double ratio = rhs(r) / v;
                    if (pr < 0 || ratio < best - 1e-12 ||
                        (std::abs(ratio - best) <= 1e-12 && basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(pr)])) {
                        pr = r;
                        best = ratio;
                    }
                }
            }
            if (pr < 0) return false;
            pivot(pr, pc);
        }
        return true;
    }

    int m_, n_;

private:
    std::vector<double> t_;
    std::vector<int> basis_;
};

}  // namespace detail

inline DenseResult solve_dense(const DenseLp& lp) {
    const int nv = static_cast<int>(lp.c.size());
    // Column map: x = lo + x1 (finite lo) or x = x1 - x2 (free).
    std::vector<int> pos(nv), neg(nv, -1);
    int ncol = 0;
    for (int j = 0; j < nv; ++j) {
        pos[j] = ncol++;
        if (!std::isfinite(lp.lo[j])) neg[j] = ncol++;
    }
    struct R {
        std::vector<double> a;
        double b;
        char s;
    };
    std::vector<R> rows;
    for (std::size_t i = 0; i < lp.a.size(); ++i) {
        R r{std::vector<double>(ncol, 0.0), lp.b[i], lp.sense[i]};
        for (int j = 0; j < nv; ++j) {
            const double v = lp.a[i][static_cast<std::size_t>(j)];
            if (v == 0.0) continue;
            r.a[pos[j]] += v;
            if (neg[j] >= 0) {
                r.a[neg[j]] -= v;
            } else {
                r.b -= v * lp.lo[j];
            }
        }
        rows.push_back(std::move(r));
    }
    for (int j = 0; j < nv; ++j) {
        if (std::isfinite(lp.hi[j])) {
            R r{std::vector<double>(ncol, 0.0), 0.0, 'L'};
            r.a[pos[j]] = 1.0;
            if (neg[j] >= 0) {
                r.a[neg[j]] = -1.0;
                r.b = lp.hi[j];
            } else {
                r.b = lp.hi[j] - lp.lo[j];
            }
            rows.push_back(std::move(r));
        }
    }
    for (auto& r : rows) {
        if (r.b < 0) {
            for (auto& v : r.a) v = -v;
            r.b = -r.b;
            r.s = r.s == 'L' ? 'G' : (r.s == 'G' ? 'L' : 'E');
        }
    }
    const int m = static_cast<int>(rows.size());
    int nslack = 0;
    int nart = 0;
    for (const auto& r : rows) {
        if (r.s != 'E') ++nslack;
        if (r.s != 'L') ++nart;
    }
    const int total = ncol + nslack + nart;
    detail::Tableau tab(m, total);
    int sc = ncol;
    int ac = ncol + nslack;
    std::vector<bool> is_art(static_cast<std::size_t>(total), false);
    for (int i = 0; i < m; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (int j = 0; j < ncol; ++j) tab.at(i, j) = r.a[static_cast<std::size_t>(j)];
        tab.rhs(i) = r.b;
        if (r.s == 'L') {
            tab.at(i, sc) = 1.0;
            tab.basis()[static_cast<std::size_t>(i)] = sc++;
        } else {
            if (r.s == 'G') tab.at(i, sc++) = -1.0;
            tab.at(i, ac) = 1.0;
            is_art[static_cast<std::size_t>(ac)] = true;
            tab.basis()[static_cast<std::size_t>(i)] = ac++;
        }
    }
    // Phase 1.
    for (int i = 0; i < m; ++i) {
        if (!is_art[static_cast<std::size_t>(tab.basis()[static_cast<std::size_t>(i)])]) continue;
        for (int c = 0; c <= total; ++c) tab.obj(c) -= tab.at(i, c);
    }
    for (int c = 0; c < total; ++c) {
        if (is_art[static_cast<std::size_t>(c)]) tab.obj(c) += 1.0;
    }
    std::vector<bool> all(static_cast<std::size_t>(total), true);
    tab.run(all);
    DenseResult out;
    if (-tab.obj(total) > 1e-7) return out;
    for (int i = 0; i < m; ++i) {
        const int bc = tab.basis()[static_cast<std::size_t>(i)];
        if (!is_art[static_cast<std::size_t>(bc)]) continue;
        for (int c = 0; c < total; ++c) {
            if (!is_art[static_cast<std::size_t>(c)] && std::abs(tab.at(i, c)) > 1e-9) {
                tab.pivot(i, c);
                break;
            }
        }
    }
    // Phase 2 with the real costs.
    std::vector<double> cost(static_cast<std::size_t>(total), 0.0);
    double offset = 0.0;
    for (int j = 0; j < nv; ++j) {
        cost[static_cast<std::size_t>(pos[j])] += lp.c[j];
        if (neg[j] >= 0) {
            cost[static_cast<std::size_t>(neg[j])] -= lp.c[j];
        } else {
            offset += lp.c[j] * lp.lo[j];
        }
    }
    for (int c = 0; c <= total; ++c) tab.obj(c) = c < total ? cost[static_cast<std::size_t>(c)] : 0.0;
    for (int i = 0; i < m; ++i) {
        const int bc = tab.basis()[static_cast<std::size_t>(i)];
        const double f = tab.obj(bc);
        if (f == 0.0) continue;
        for (int c = 0; c <= total; ++c) tab.obj(c) -= f * tab.at(i, c);
    }
    std::vector<bool> allowed(static_cast<std::size_t>(total));
    for (int c = 0; c < total; ++c) allowed[static_cast<std::size_t>(c)] = !is_art[static_cast<std::size_t>(c)];
    out.feasible = true;
    if (!tab.run(allowed)) {
        out.bounded = false;
        return out;
    }
    std::vector<double> col(static_cast<std::size_t>(total), 0.0);
    for (int i = 0; i < m; ++i) col[static_cast<std::size_t>(tab.basis()[static_cast<std::size_t>(i)])] = tab.rhs(i);
    out.x.resize(static_cast<std::size_t>(nv));
    out.objective = offset;
    for (int j = 0; j < nv; ++j) {
        double v = col[static_cast<std::size_t>(pos[j])];
        if (neg[j] >= 0) {
            v -= col[static_cast<std::size_t>(neg[j])];
        } else {
            v += lp.lo[j];
        }
        out.x[static_cast<std::size_t>(j)] = v;
        out.objective += lp.c[j] * v;
    }
    return out;
}

}  // namespace oracle
