#include "frapdesign/special_functions.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace frapdesign {

namespace {

template <std::size_t N>
double poly_eval(const double (&c)[N], double x) {
    double r = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
    return r;
}

// Rational minimax fits for I0/I1 (Holoborodko-style coefficients, double
// precision): power series in x^2/4 below 7.75, asymptotic form
// P(1/x) e^x / sqrt(x) above. The scaled variants simply drop the e^x.

const double kI0Small[] = {
    1.00000000000000000e+00, 2.49999999999999909e-01, 2.77777777777782257e-02,
    1.73611111111023792e-03, 6.94444444453352521e-05, 1.92901234513219920e-06,
    3.93675991102510739e-08, 6.15118672704439289e-10, 7.59407002058973446e-12,
    7.59389793369836367e-14, 6.27767773636292611e-16, 4.34709704153272287e-18,
    2.63417742690109154e-20, 1.13943037744822825e-22, 9.07926920085624812e-25,
};

const double kI0Mid[] = {
    3.98942280401425088e-01,  4.98677850604961985e-02,  2.80506233928312623e-02,
    2.92211225166047873e-02,  4.44207299493659561e-02,  1.30970574605856719e-01,
    -3.35052280231727022e+00, 2.33025711583514727e+02,  -1.13366350697172355e+04,
    4.24057674317867331e+05,  -1.23157028595698731e+07, 2.80231938155267516e+08,
    -5.01883999713777929e+09, 7.08029243015109113e+10,  -7.84261082124811106e+11,
    6.76825737854096565e+12,  -4.49034849696138065e+13, 2.24155239966958995e+14,
    -8.13426467865659318e+14, 2.02391097391687777e+15,  -3.08675715295370878e+15,
    2.17587543863819074e+15,
};

const double kI0Large[] = {
    3.98942280401432905e-01, 4.98677850491434560e-02, 2.80506308916506102e-02,
    2.92179096853915176e-02, 4.53371208762579442e-02,
};

const double kI1Small[] = {
    8.333333333333333803e-02, 6.944444444444341983e-03, 3.472222222225921045e-04,
    1.157407407354987232e-05, 2.755731926254790268e-07, 4.920949692800671435e-09,
    6.834657311305621830e-11, 7.593969849687574339e-13, 6.904822652741917551e-15,
    5.220157095351373194e-17, 3.410720494727771276e-19, 1.625212890947171108e-21,
    1.332898928162290861e-23,
};

const double kI1Mid[] = {
    3.989422804014406054e-01,  -1.496033551613111533e-01, -4.675104253598537322e-02,
    -4.090895951581637791e-02, -5.719036414430205390e-02, -1.528189554374492735e-01,
    3.458284470977172076e+00,  -2.426181371595021021e+02, 1.178785865993440669e+04,
    -4.404655582443487334e+05, 1.277677779341446497e+07,  -2.903390398236656519e+08,
    5.192386898222206474e+09,  -7.313784438967834057e+10, 8.087824484994859552e+11,
    -6.967602516005787001e+12, 4.614040809616582764e+13,  -2.298849639457172489e+14,
    8.325554073334618015e+14,  -2.067285045778906105e+15, 3.146401654361325073e+15,
    -2.213318202179221945e+15,
};

const double kI1Large[] = {
    3.989422804014314820e-01,  -1.496033551467584157e-01, -4.675105322571775911e-02,
    -4.090421597376992892e-02, -5.843630344778927582e-02,
};

}  // namespace

double bessel_i0_scaled(double x) {
    if (x < 0.0) throw std::domain_error("bessel_i0_scaled: negative argument");
    if (x < 7.75) {
        const double a = x * x / 4.0;
        return std::exp(-x) * (a * poly_eval(kI0Small, a) + 1.0);
    }
    if (x < 500.0) return poly_eval(kI0Mid, 1.0 / x) / std::sqrt(x);
    return poly_eval(kI0Large, 1.0 / x) / std::sqrt(x);
}

double bessel_i1_scaled(double x) {
    if (x < 0.0) throw std::domain_error("bessel_i1_scaled: negative argument");
    if (x < 7.75) {
        const double a = x * x / 4.0;
        const double series = 1.0 + a * (0.5 + a * poly_eval(kI1Small, a));
        return std::exp(-x) * 0.5 * x * series;
    }
    if (x < 500.0) return poly_eval(kI1Mid, 1.0 / x) / std::sqrt(x);
    return poly_eval(kI1Large, 1.0 / x) / std::sqrt(x);
}

namespace {

// Nodes/weights on the reference interval [-1, 1].
struct ReferenceRule {
    std::vector<double> x, w;
};

ReferenceRule compute_reference(int n) {
    ReferenceRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int k = 0; k < m; ++k) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // one clean-up iteration after convergence to settle the weight
        {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.x[k] = -x;
        rule.w[k] = w;
        rule.x[n - 1 - k] = x;
        rule.w[n - 1 - k] = w;
    }
    if (n % 2 == 1) rule.x[n / 2] = 0.0;
    return rule;
}

const ReferenceRule& reference_rule(int n) {
    static std::map<int, ReferenceRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_reference(n)).first;
    return it->second;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double lo, double hi) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    if (!(lo < hi)) throw std::invalid_argument("gauss_legendre: need lo < hi");
    const ReferenceRule& ref = reference_rule(n);
    QuadratureRule rule;
    rule.lo = lo;
    rule.hi = hi;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * ref.x[i];
        rule.weights[i] = half * ref.w[i];
    }
    return rule;
}

}  // namespace frapdesign
