#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {

template <class T>
std::vector<T> gauss(std::vector<std::vector<T>> A, std::vector<T> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        }
        if (std::abs(A[piv][c]) == 0.0) throw std::runtime_error("singular oracle system");
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const T f = A[r][c] / A[c][c];
            if (f == T(0)) continue;
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<T> x(n);
    for (std::size_t i = n; i-- > 0;) {
        T s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
        x[i] = s / A[i][i];
    }
    return x;
}

cd zf(const voc::InverterBranch& b, double w) { return {b.filter.R_f, w * b.filter.L_f}; }
cd zc(const voc::InverterBranch& b, double w) {
    return cd(b.filter.R_c, 0.0) + 1.0 / cd(0.0, w * b.filter.C_f);
}
cd zgl(const voc::InverterBranch& b, double w) {
    return {b.filter.R_g + b.line.R, w * (b.filter.L_g + b.line.L)};
}
cd zl(const voc::SeriesRlBranch& l, double w) { return {l.R, w * l.L}; }

}  // namespace

std::vector<cd> solve_dense(std::vector<std::vector<cd>> A, std::vector<cd> b) {
    return gauss(std::move(A), std::move(b));
}
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
    return gauss(std::move(A), std::move(b));
}

MeshResult mesh_single(cd v, const voc::InverterBranch& b, const voc::SeriesRlBranch& load,
                       double w) {
    // loop 1: v = z_f I1 + z_c (I1 - I2)
    // loop 2: 0 = z_c (I2 - I1) + (z_g + z_l + z_L) I2
    const cd f = zf(b, w), c = zc(b, w), g = zgl(b, w), L = zl(load, w);
    const auto I = solve_dense({{f + c, -c}, {-c, c + g + L}}, {v, 0.0});
    return {{I[0]}, {I[1]}, {I[1]}};
}

MeshResult mesh_two(cd v1, cd v2, const voc::InverterBranch& b1, const voc::InverterBranch& b2,
                    const std::vector<voc::SeriesRlBranch>& loads, double w) {
    // meshes: I1 source loop 1, I2 through load 0 from inverter 1, I3 source loop 2,
    // I4 through load 0 from inverter 2, J_b loop between load 0 and load b.
    const std::size_t nb = loads.size();
    const std::size_t n = 4 + nb - 1;
    std::vector<std::vector<cd>> A(n, std::vector<cd>(n, 0.0));
    std::vector<cd> rhs(n, 0.0);
    const cd f1 = zf(b1, w), c1 = zc(b1, w), g1 = zgl(b1, w);
    const cd f2 = zf(b2, w), c2 = zc(b2, w), g2 = zgl(b2, w);
    const cd L0 = zl(loads[0], w);
    // the current in load 0 is I2 + I4 - sum J
    auto load0 = [&](std::size_t row, cd coef) {
        A[row][1] += coef;
        A[row][3] += coef;
        for (std::size_t j = 1; j < nb; ++j) A[row][3 + j] -= coef;
    };
    A[0][0] = f1 + c1;
    A[0][1] = -c1;
    rhs[0] = v1;
    A[1][0] = -c1;
    A[1][1] = c1 + g1;
    load0(1, L0);
    A[2][2] = f2 + c2;
    A[2][3] = -c2;
    rhs[2] = v2;
    A[3][2] = -c2;
    A[3][3] = c2 + g2;
    load0(3, L0);
    for (std::size_t j = 1; j < nb; ++j) {
        A[3 + j][3 + j] += zl(loads[j], w);
        load0(3 + j, -L0);
    }
    const auto I = solve_dense(A, rhs);
    MeshResult r;
    r.I_f = {I[0], I[2]};
    r.I_g = {I[1], I[3]};
    cd j_sum = 0.0;
    for (std::size_t j = 1; j < nb; ++j) j_sum += I[3 + j];
    r.I_load.push_back(I[1] + I[3] - j_sum);
    for (std::size_t j = 1; j < nb; ++j) r.I_load.push_back(I[3 + j]);
    return r;
}

std::vector<double> emt_dense(const std::vector<double>& x, const std::vector<double>& v,
                              const std::vector<voc::InverterBranch>& br,
                              const std::vector<voc::SeriesRlBranch>& loads, double tau) {
    // unknowns: per inverter (di_f, dv_c, di_g, v_o), per load di_b, then v_pcc
    const std::size_t m = br.size(), nl = loads.size();
    const std::size_t n = 4 * m + nl + 1;
    const std::size_t pcc = n - 1;
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    double r = 0.0;
    std::size_t row = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const auto& f = br[k].filter;
        const double i_f = x[3 * k], v_c = x[3 * k + 1], i_g = x[3 * k + 2];
        const std::size_t o = 4 * k;
        // KVL across L_f: L_f di_f + v_o = v - R_f i_f
        A[row][o] = f.L_f;
        A[row][o + 3] = 1.0;
        b[row++] = v[k] - f.R_f * i_f;
        // capacitor: C_f dv_c = i_f - i_g
        A[row][o + 1] = f.C_f;
        b[row++] = i_f - i_g;
        // KVL across the grid-side inductor and line
        A[row][o + 2] = f.L_g + br[k].line.L;
        A[row][o + 3] = -1.0;
        A[row][pcc] = 1.0;
        b[row++] = -(f.R_g + br[k].line.R) * i_g;
        // capacitor branch: v_o = v_c + R_c (i_f - i_g)
        A[row][o + 3] = 1.0;
        b[row++] = v_c + f.R_c * (i_f - i_g);
        r += i_g;
    }
    for (std::size_t j = 0; j < nl; ++j) {
        const double i_b = x[3 * m + j];
        A[row][4 * m + j] = loads[j].L;
        A[row][pcc] = -1.0;
        b[row++] = -loads[j].R * i_b;
        r -= i_b;
    }
    // d/dt (sum i_g - sum i_b) = -r / tau
    for (std::size_t k = 0; k < m; ++k) A[row][4 * k + 2] = 1.0;
    for (std::size_t j = 0; j < nl; ++j) A[row][4 * m + j] = -1.0;
    b[row++] = -r / tau;

    const auto s = solve_dense(A, b);
    std::vector<double> out;
    for (std::size_t k = 0; k < m; ++k) {
        out.push_back(s[4 * k]);
        out.push_back(s[4 * k + 1]);
        out.push_back(s[4 * k + 2]);
    }
    for (std::size_t j = 0; j < nl; ++j) out.push_back(s[4 * m + j]);
    out.push_back(s[pcc]);
    return out;
}

LegacyRates legacy_averaged(double V, double P, double Q, const voc::VocParams& p,
                            double omega) {
    const double C = p.C;
    const double beta = 3.0 * p.alpha / (p.k_v * p.k_v * p.sigma);
    const double w_star = 1.0 / std::sqrt(p.L * p.C);
    return {p.sigma / (2.0 * C) * (V - beta / 2.0 * V * V * V) - p.k_v * p.k_i / (2.0 * C) * P / V,
            w_star - omega + p.k_v * p.k_i / (2.0 * C) * Q / (V * V)};
}

GridPoint grid_search_dispatch(voc::PowerPair sp, const voc::DispatchSystem& sys, double V1g,
                               double thg, double V2g) {
    const auto& p2 = sys.params2;
    const auto& p1 = sys.params1;
    const auto za1 = cd(sys.k1.C_alpha, sys.k1.S_alpha);
    const auto za2 = cd(sys.k2.C_alpha, sys.k2.S_alpha);
    const double cb1 = sys.k1.C_beta, sb1 = sys.k1.S_beta;
    const double cb2 = sys.k2.C_beta, sb2 = sys.k2.S_beta;
    const double sigma_b2 = p2.sigma - p2.k_v * p2.k_i * cb2;
    const double s_ref = p1.k_v / p1.k_i;

    struct Eval {
        double res;
        cd S2;
    };
    auto eval = [&](double V1, double th, double V2) -> Eval {
        const auto m = mesh_two(std::polar(V1, th), cd(V2, 0.0), sys.branch1, sys.branch2,
                                sys.loads, sys.omega);
        const cd S1 = std::polar(V1, th) * std::conj(m.I_f[0]);
        const cd S2 = cd(V2, 0.0) * std::conj(m.I_f[1]);
        const double load2 = za2.real() * S2.real() + za2.imag() * S2.imag();
        const double disc = sigma_b2 * sigma_b2 - 6.0 * p2.alpha * (p2.k_i / p2.k_v) * load2;
        if (disc < 0.0) return {std::numeric_limits<double>::infinity(), S2};
        const double vh = p2.k_v * std::sqrt((sigma_b2 + std::sqrt(disc)) / (3.0 * p2.alpha));
        const double res = std::max({std::abs(S1.real() - sp.P) / s_ref,
                                     std::abs(S1.imag() - sp.Q) / s_ref,
                                     std::abs(V2 - vh) / p2.k_v});
        return {res, S2};
    };

    double c[3] = {V1g, thg, V2g};
    double h[3] = {20.0, 0.4, 20.0};
    const int N = 6;
    double best = std::numeric_limits<double>::infinity();
    for (int level = 0; level < 60; ++level) {
        double nc[3] = {c[0], c[1], c[2]};
        for (int i = -N; i <= N; ++i) {
            for (int j = -N; j <= N; ++j) {
                for (int k = -N; k <= N; ++k) {
                    const double V1 = c[0] + h[0] * i / N;
                    const double th = c[1] + h[1] * j / N;
                    const double V2 = c[2] + h[2] * k / N;
                    if (V1 <= 0.0 || V2 <= 0.0) continue;
                    const double r = eval(V1, th, V2).res;
                    if (r < best) {
                        best = r;
                        nc[0] = V1;
                        nc[1] = th;
                        nc[2] = V2;
                    }
                }
            }
        }
        for (int d = 0; d < 3; ++d) {
            c[d] = nc[d];
            h[d] *= 0.6;
        }
        if (best < 1e-12) break;
    }
    const auto e = eval(c[0], c[1], c[2]);
    const double V1 = c[0], V2 = c[2];
    const double x1 = (za1.real() * sp.Q - za1.imag() * sp.P) / (V1 * V1) - sb1;
    const double x2 = (za2.real() * e.S2.imag() - za2.imag() * e.S2.real()) / (V2 * V2) - sb2;
    const double mu = p2.k_v * p2.k_i * (p1.C / p2.C) * x2 / x1;
    const double margin = p1.sigma * V1 * V1 - mu * (za1.real() * sp.P + za1.imag() * sp.Q + cb1 * V1 * V1);
    return {V1, c[1], V2, mu, margin, best};
}

}  // namespace oracle
