#include "frapdesign/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "frapdesign/parallel.hpp"
#include "frapdesign/special_functions.hpp"

namespace frapdesign {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi > lo)) throw std::invalid_argument("uniform_grid: bad range");
    const double count = (hi - lo) / step;
    const long n = std::lround(count);
    if (std::abs(count - n) > 1e-9)
        throw std::invalid_argument("uniform_grid: range is not a whole number of steps");
    std::vector<double> grid(n + 1);
    for (long i = 0; i <= n; ++i) grid[i] = lo + i * step;
    grid.back() = hi;
    return grid;
}

double kernel_beta0(double r, double s, int n_q, int n_theta) {
    if (r < 0.0 || s < 0.0) throw std::domain_error("kernel_beta0: radii must be nonnegative");
    if (r == 0.0 || s == 0.0) return 0.0;
    const QuadratureRule rq = gauss_legendre(n_q, 0.0, 1.0);
    const QuadratureRule rt = gauss_legendre(n_theta, 0.0, 2.0 * M_PI);
    const int nt = n_theta;
    std::vector<double> ct(nt);
    for (int l = 0; l < nt; ++l) ct[l] = std::cos(rt.nodes[l]);

    std::vector<double> Ar(nt), Ur(nt), As(nt), Us(nt);
    double acc = 0.0;
    for (int m = 0; m < n_q; ++m) {
        const double q = rq.nodes[m];
        for (int l = 0; l < nt; ++l) {
            Ar[l] = q * q + r * r - 2.0 * q * r * ct[l];
            Ur[l] = rt.weights[l] * (r - q * ct[l]);
            As[l] = q * q + s * s - 2.0 * q * s * ct[l];
            Us[l] = rt.weights[l] * (s - q * ct[l]);
        }
        double sum_q = 0.0;
        for (int l1 = 0; l1 < nt; ++l1) {
            const double a = Ar[l1];
            double t = 0.0;
            for (int l2 = 0; l2 < nt; ++l2) t += Us[l2] / (a + As[l2]);
            sum_q += Ur[l1] * t;
        }
        acc += rq.weights[m] * q * sum_q;
    }
    return acc * r * s / (4.0 * M_PI * M_PI);
}

std::vector<double> kernel_beta0_grid(const std::vector<double>& r_grid, int n_q, int n_theta,
                                      unsigned n_threads) {
    const int n = static_cast<int>(r_grid.size());
    const QuadratureRule rq = gauss_legendre(n_q, 0.0, 1.0);
    const QuadratureRule rt = gauss_legendre(n_theta, 0.0, 2.0 * M_PI);
    std::vector<double> ct(n_theta);
    for (int l = 0; l < n_theta; ++l) ct[l] = std::cos(rt.nodes[l]);

    // Precompute, for every (q node, radius), the angular rows
    //   A[l] = q^2 + r^2 - 2 q r cos(theta_l)   (denominator part)
    //   U[l] = w_l (r - q cos(theta_l))         (weighted numerator)
    const std::size_t stride = n_theta;
    std::vector<double> A(static_cast<std::size_t>(n_q) * n * stride);
    std::vector<double> U(A.size());
    for (int m = 0; m < n_q; ++m) {
        const double q = rq.nodes[m];
        for (int i = 0; i < n; ++i) {
            const double r = r_grid[i];
            double* a = &A[(static_cast<std::size_t>(m) * n + i) * stride];
            double* u = &U[(static_cast<std::size_t>(m) * n + i) * stride];
            for (int l = 0; l < n_theta; ++l) {
                a[l] = q * q + r * r - 2.0 * q * r * ct[l];
                u[l] = rt.weights[l] * (r - q * ct[l]);
            }
        }
    }

    // upper-triangle pair list
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) pairs.emplace_back(i, j);

    std::vector<double> K(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(
        pairs.size(),
        [&](std::size_t p) {
            const auto [i, j] = pairs[p];
            if (r_grid[i] == 0.0 || r_grid[j] == 0.0) {
                K[static_cast<std::size_t>(i) * n + j] = 0.0;
                K[static_cast<std::size_t>(j) * n + i] = 0.0;
                return;
            }
            double acc = 0.0;
            for (int m = 0; m < n_q; ++m) {
                const double* ai = &A[(static_cast<std::size_t>(m) * n + i) * stride];
                const double* ui = &U[(static_cast<std::size_t>(m) * n + i) * stride];
                const double* aj = &A[(static_cast<std::size_t>(m) * n + j) * stride];
                const double* uj = &U[(static_cast<std::size_t>(m) * n + j) * stride];
                double sum_q = 0.0;
                for (int l1 = 0; l1 < n_theta; ++l1) {
                    const double a = ai[l1];
                    double t = 0.0;
                    for (int l2 = 0; l2 < n_theta; ++l2) t += uj[l2] / (a + aj[l2]);
                    sum_q += ui[l1] * t;
                }
                acc += rq.weights[m] * rq.nodes[m] * sum_q;
            }
            const double value = acc * r_grid[i] * r_grid[j] / (4.0 * M_PI * M_PI);
            K[static_cast<std::size_t>(i) * n + j] = value;
            K[static_cast<std::size_t>(j) * n + i] = value;
        },
        n_threads);
    return K;
}

namespace {

// Integrand of the beta-derivative at a single q node:
//   F(q, r; rho) = e^{-rho (q-r)^2} ( r i0s(2 q r rho) - q i1s(2 q r rho) )
// so that d k / d beta = -r s * int_0^1 q F(q,r;beta) F(q,s;beta) dq.
inline double brace_term(double q, double r, double rho) {
    const double d = q - r;
    const double e = std::exp(-rho * d * d);
    if (e == 0.0) return 0.0;
    const double arg = 2.0 * q * r * rho;
    return e * (r * bessel_i0_scaled(arg) - q * bessel_i1_scaled(arg));
}

// Inner q integral of kernel_direct at fixed rho, windowed around the
// Gaussian ridge at (r+s)/2 of width 1/sqrt(2 rho).
double direct_inner(double r, double s, double rho, int q_order) {
    const double sig = 1.0 / std::sqrt(2.0 * rho);
    const double mid = 0.5 * (r + s);
    const double lo = std::max(0.0, mid - 12.0 * sig);
    const double hi = std::min(1.0, mid + 12.0 * sig);
    if (!(lo < hi)) return 0.0;
    const QuadratureRule rule = gauss_legendre(q_order, lo, hi);
    return rule.integrate(
        [&](double q) { return q * brace_term(q, r, rho) * brace_term(q, s, rho); });
}

struct AdaptiveState {
    double total = 0.0;
    double err = 0.0;
    int depth_exceeded = 0;
};

template <class F>
void adapt_panel(F&& f, double a, double b, int order, double budget_per_width, int depth,
                 int max_depth, AdaptiveState& st) {
    const QuadratureRule coarse = gauss_legendre(order, a, b);
    const QuadratureRule fine = gauss_legendre(2 * order, a, b);
    const double i1 = coarse.integrate(f);
    const double i2 = fine.integrate(f);
    const double err = std::abs(i1 - i2);
    if (err <= budget_per_width * (b - a) || depth >= max_depth) {
        st.total += i2;
        st.err += err;
        if (depth >= max_depth && err > budget_per_width * (b - a)) ++st.depth_exceeded;
        return;
    }
    const double m = 0.5 * (a + b);
    adapt_panel(f, a, m, order, budget_per_width, depth + 1, max_depth, st);
    adapt_panel(f, m, b, order, budget_per_width, depth + 1, max_depth, st);
}

}  // namespace

double kernel_direct(double r, double s, double beta, const KernelDirectConfig& config) {
    if (!(beta > 0.0)) throw std::invalid_argument("kernel_direct: beta must be positive");
    if (r < 0.0 || s < 0.0) throw std::domain_error("kernel_direct: radii must be nonnegative");
    if (r == 0.0 || s == 0.0) return 0.0;

    // rho = beta / tau maps [beta, inf) onto tau in (0, 1]; the additional
    // tau = u^2 change flattens the 1/sqrt(tau) diagonal tail so the
    // adaptive subdivision terminates quickly.
    auto integrand_u = [&](double u) {
        const double tau = u * u;
        const double rho = beta / tau;
        return 2.0 * u * (beta / (tau * tau)) * direct_inner(r, s, rho, config.q_order);
    };

    // L1-size estimate fixes the absolute error budget.
    double l1 = 0.0;
    for (int p = 0; p < 8; ++p) {
        const QuadratureRule rule = gauss_legendre(2 * config.panel_order, p / 8.0, (p + 1) / 8.0);
        l1 += rule.integrate([&](double u) { return std::abs(integrand_u(u)); });
    }
    const double budget = config.rel_tol * std::max(l1, 1e-290);

    AdaptiveState st;
    adapt_panel(integrand_u, 0.0, 1.0, config.panel_order, budget, 0, config.max_depth, st);
    const double value = r * s * st.total;
    if (st.depth_exceeded > 0 && st.err > 2.0 * budget)
        throw accuracy_error("kernel_direct: adaptive quadrature did not converge (estimate " +
                                 std::to_string(r * s * st.err) + " at value " +
                                 std::to_string(value) + ")",
                             value, r * s * st.err);
    return value;
}

namespace {

// Packed upper triangle addressing for the march state.
struct TriangleIndex {
    explicit TriangleIndex(int n) : n_(n), offset_(n) {
        std::size_t run = 0;
        for (int i = 0; i < n; ++i) {
            offset_[i] = run;
            run += n - i;
        }
        size_ = run;
    }
    std::size_t operator()(int i, int j) const { return offset_[i] + (j - i); }
    std::size_t size() const { return size_; }
    int n() const { return n_; }

private:
    int n_;
    std::vector<std::size_t> offset_;
    std::size_t size_ = 0;
};

// d/dbeta of the packed kernel state: build F rows per radius, then one
// Gram product over the quadrature nodes for every pair.
class MarchRhs {
public:
    MarchRhs(const std::vector<double>& r_grid, const TriangleIndex& tri, int q_order,
             unsigned n_threads)
        : r_grid_(r_grid), tri_(tri), q_(gauss_legendre(q_order, 0.0, 1.0)), n_threads_(n_threads) {
        sqrt_wq_.resize(q_.nodes.size());
        for (std::size_t m = 0; m < q_.nodes.size(); ++m)
            sqrt_wq_[m] = std::sqrt(q_.weights[m] * q_.nodes[m]);
        F_.resize(r_grid_.size() * q_.nodes.size());
    }

    void operator()(double beta, std::vector<double>& dy) {
        const int n = tri_.n();
        const std::size_t nm = q_.nodes.size();
        parallel_for(
            r_grid_.size(),
            [&](std::size_t i) {
                double* row = &F_[i * nm];
                const double r = r_grid_[i];
                for (std::size_t m = 0; m < nm; ++m)
                    row[m] = sqrt_wq_[m] * brace_term(q_.nodes[m], r, beta);
            },
            n_threads_);
        parallel_for(
            static_cast<std::size_t>(n),
            [&](std::size_t i) {
                const double* fi = &F_[i * nm];
                for (int j = static_cast<int>(i); j < n; ++j) {
                    const double* fj = &F_[static_cast<std::size_t>(j) * nm];
                    double dot = 0.0;
                    for (std::size_t m = 0; m < nm; ++m) dot += fi[m] * fj[m];
                    dy[tri_(static_cast<int>(i), j)] = -r_grid_[i] * r_grid_[j] * dot;
                }
            },
            n_threads_);
    }

private:
    const std::vector<double>& r_grid_;
    const TriangleIndex& tri_;
    QuadratureRule q_;
    unsigned n_threads_;
    std::vector<double> sqrt_wq_;
    std::vector<double> F_;
};

}  // namespace

KernelTable kernel_ode_march(const std::vector<double>& r_grid,
                             const std::vector<double>& beta_grid, const MarchConfig& config) {
    if (r_grid.size() < 2) throw std::invalid_argument("kernel_ode_march: r grid too small");
    if (beta_grid.empty() || beta_grid.front() != 0.0)
        throw std::invalid_argument("kernel_ode_march: beta grid must start at 0");
    for (std::size_t i = 1; i < beta_grid.size(); ++i)
        if (!(beta_grid[i] > beta_grid[i - 1]))
            throw std::invalid_argument("kernel_ode_march: beta grid must be increasing");

    const int n = static_cast<int>(r_grid.size());
    const TriangleIndex tri(n);
    if (config.log) config.log("tabulating the beta = 0 slice");
    const std::vector<double> k0 = kernel_beta0_grid(r_grid, config.beta0_q_order,
                                                     config.beta0_theta_order, config.n_threads);

    std::vector<double> y(tri.size());
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) y[tri(i, j)] = k0[static_cast<std::size_t>(i) * n + j];

    double k0_max = 0.0;
    for (double v : k0) k0_max = std::max(k0_max, std::abs(v));
    const double atol = config.ode_abs_tol_scale * k0_max;
    const double rtol = config.ode_rel_tol;

    std::vector<double> values(beta_grid.size() * static_cast<std::size_t>(n) * n);
    auto emit = [&](std::size_t ib, const std::vector<double>& state) {
        double* slice = &values[ib * static_cast<std::size_t>(n) * n];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = state[tri(i, j)];
                slice[static_cast<std::size_t>(i) * n + j] = v;
                slice[static_cast<std::size_t>(j) * n + i] = v;
            }
    };
    emit(0, y);

    MarchRhs rhs(r_grid, tri, config.ode_q_order, config.n_threads);

    // Dormand-Prince 5(4) with FSAL, one max-norm controller for all pairs.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const std::size_t dim = tri.size();
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim),
        y5(dim);
    double beta = 0.0;
    rhs(beta, k1);
    double h = std::min(0.01, beta_grid.back() / 100.0);
    std::size_t next_out = 1;

    while (next_out < beta_grid.size()) {
        const double target = beta_grid[next_out];
        bool hit_output = false;
        if (beta + h >= target - 1e-14 * target) {
            h = target - beta;
            hit_output = true;
        }
        if (h < 1e-12 * std::max(1.0, beta))
            throw std::runtime_error("kernel_ode_march: step size underflow at beta = " +
                                     std::to_string(beta));

        for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(beta + c2 * h, k2);
        for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(beta + c3 * h, k3);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(beta + c4 * h, k4);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(beta + c5 * h, k5);
        for (std::size_t i = 0; i < dim; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(beta + h, k6);
        for (std::size_t i = 0; i < dim; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(beta + h, k7);

        double err_ratio = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            const double scale = atol + rtol * std::abs(y[i]);
            err_ratio = std::max(err_ratio, std::abs(err) / scale);
        }

        if (err_ratio <= 1.0) {
            beta += h;
            y.swap(y5);
            k1.swap(k7);  // FSAL
            if (hit_output) {
                emit(next_out, y);
                ++next_out;
                if (config.log && next_out % 50 == 0)
                    config.log("marched to beta = " + std::to_string(beta));
            }
        }
        const double factor = (err_ratio > 0.0) ? 0.9 * std::pow(err_ratio, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }

    KernelTableMeta meta;
    meta.beta0_q_order = config.beta0_q_order;
    meta.beta0_theta_order = config.beta0_theta_order;
    meta.ode_q_order = config.ode_q_order;
    meta.ode_rel_tol = config.ode_rel_tol;
    meta.ode_abs_tol_scale = config.ode_abs_tol_scale;
    meta.creation_hash = march_config_hash(r_grid, beta_grid, config);
    return KernelTable(r_grid, beta_grid, std::move(values), meta);
}

std::uint64_t march_config_hash(const std::vector<double>& r_grid,
                                const std::vector<double>& beta_grid, const MarchConfig& config) {
    std::uint64_t h64 = fnv1a64(r_grid.data(), r_grid.size() * sizeof(double));
    h64 = fnv1a64(beta_grid.data(), beta_grid.size() * sizeof(double), h64);
    const int ints[3] = {config.beta0_q_order, config.beta0_theta_order, config.ode_q_order};
    h64 = fnv1a64(ints, sizeof(ints), h64);
    const double tols[2] = {config.ode_rel_tol, config.ode_abs_tol_scale};
    h64 = fnv1a64(tols, sizeof(tols), h64);
    return h64;
}

KernelTable::KernelTable(std::vector<double> r_grid, std::vector<double> beta_grid,
                         std::vector<double> values, KernelTableMeta meta)
    : r_grid_(std::move(r_grid)),
      beta_grid_(std::move(beta_grid)),
      values_(std::move(values)),
      meta_(meta) {
    if (values_.size() != r_grid_.size() * r_grid_.size() * beta_grid_.size())
        throw std::invalid_argument("KernelTable: value array does not match the grids");
}

int KernelTable::beta_index(double beta) const {
    const auto it = std::lower_bound(beta_grid_.begin(), beta_grid_.end(), beta - 1e-9);
    if (it == beta_grid_.end() || std::abs(*it - beta) > 1e-9 * std::max(1.0, std::abs(beta)))
        throw std::out_of_range("KernelTable: beta " + std::to_string(beta) +
                                " is not a grid point");
    return static_cast<int>(it - beta_grid_.begin());
}

namespace {

// position of x in grid for interpolation: cell index i with grid[i] <= x <= grid[i+1]
int locate(const std::vector<double>& grid, double x, const char* what) {
    if (x < grid.front() || x > grid.back())
        throw std::out_of_range(std::string("KernelTable: ") + what + " = " + std::to_string(x) +
                                " outside the tabulated range");
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    int i = static_cast<int>(it - grid.begin()) - 1;
    if (i == static_cast<int>(grid.size()) - 1) --i;
    return i;
}

}  // namespace

double KernelTable::interpolate(double r, double s, double beta) const {
    const int ib = locate(beta_grid_, beta, "beta");
    const int ir = locate(r_grid_, r, "r");
    const int is = locate(r_grid_, s, "s");
    const double tb = (beta_grid_[ib + 1] > beta_grid_[ib])
                          ? (beta - beta_grid_[ib]) / (beta_grid_[ib + 1] - beta_grid_[ib])
                          : 0.0;
    const double tr = (r - r_grid_[ir]) / (r_grid_[ir + 1] - r_grid_[ir]);
    const double ts = (s - r_grid_[is]) / (r_grid_[is + 1] - r_grid_[is]);
    auto bilinear = [&](int b) {
        const double k00 = at(b, ir, is), k01 = at(b, ir, is + 1);
        const double k10 = at(b, ir + 1, is), k11 = at(b, ir + 1, is + 1);
        return (1 - tr) * ((1 - ts) * k00 + ts * k01) + tr * ((1 - ts) * k10 + ts * k11);
    };
    return (1 - tb) * bilinear(ib) + tb * bilinear(ib + 1);
}

double KernelTable::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void KernelTable::validate() const {
    auto fail = [](const std::string& check) {
        throw std::runtime_error("KernelTable validation failed: " + check);
    };
    if (r_grid_.size() < 2 || beta_grid_.empty()) fail("grid sizes");
    for (std::size_t i = 1; i < r_grid_.size(); ++i)
        if (!(r_grid_[i] > r_grid_[i - 1])) fail("r grid ordering");
    for (std::size_t i = 1; i < beta_grid_.size(); ++i)
        if (!(beta_grid_[i] > beta_grid_[i - 1])) fail("beta grid ordering");
    for (double v : values_)
        if (!std::isfinite(v)) fail("finiteness");
    const double scale = std::max(1.0, max_abs());
    const int n = nr();
    for (int b = 0; b < nb(); ++b) {
        const double* slice_b = slice(b);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(slice_b[static_cast<std::size_t>(i) * n + j] -
                             slice_b[static_cast<std::size_t>(j) * n + i]) > 1e-12 * scale)
                    fail("kernel symmetry");
        if (r_grid_.front() == 0.0)
            for (int j = 0; j < n; ++j)
                if (slice_b[j] != 0.0 || slice_b[static_cast<std::size_t>(j) * n] != 0.0)
                    fail("zero-argument column");
    }
}

}  // namespace frapdesign
