#include "sensorpriv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sensorpriv/errors.hpp"

namespace sensorpriv {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727417803297;  // 0.5 * ln(2*pi)

// Legendre nodes/weights on [-1, 1] by Newton iteration on P_n. Nodes are
// symmetric; we solve the positive half and mirror.
void legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // one clean-up step so nodes are converged to machine precision
        {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(lower < upper))
        throw InvalidParameterError("QuadratureSpec: lower must be < upper");
    if (panels < 1)
        throw InvalidParameterError("QuadratureSpec: panels must be >= 1");
    if (nodes_per_panel < 2)
        throw InvalidParameterError("QuadratureSpec: nodes_per_panel must be >= 2");
}

double gaussian_logpdf(double z, double mean, double sigma) {
    if (!(sigma > 0.0))
        throw InvalidParameterError("gaussian_logpdf: sigma must be positive");
    const double t = (z - mean) / sigma;
    return -std::log(sigma) - kHalfLog2Pi - 0.5 * t * t;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty())
        throw InvalidParameterError("log_sum_exp: empty list");
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    if (std::isinf(m) && m < 0) return m;  // all -inf
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

QuadratureGrid make_grid(const QuadratureSpec& spec) {
    spec.validate();
    std::vector<double> ref_nodes, ref_weights;
    legendre_rule(spec.nodes_per_panel, ref_nodes, ref_weights);

    QuadratureGrid grid;
    grid.nodes.reserve(static_cast<size_t>(spec.panels) * spec.nodes_per_panel);
    grid.weights.reserve(grid.nodes.capacity());
    const double h = (spec.upper - spec.lower) / spec.panels;
    for (int p = 0; p < spec.panels; ++p) {
        const double a = spec.lower + p * h;
        const double mid = a + 0.5 * h;
        for (int i = 0; i < spec.nodes_per_panel; ++i) {
            grid.nodes.push_back(mid + 0.5 * h * ref_nodes[i]);
            grid.weights.push_back(0.5 * h * ref_weights[i]);
        }
    }
    return grid;
}

double integrate(const std::function<double(double)>& f, const QuadratureSpec& spec) {
    const QuadratureGrid grid = make_grid(spec);
    double sum = 0.0, c = 0.0;  // Kahan
    for (size_t i = 0; i < grid.nodes.size(); ++i) {
        const double term = grid.weights[i] * f(grid.nodes[i]) - c;
        const double t = sum + term;
        c = (t - sum) - term;
        sum = t;
    }
    return sum;
}

double binomial_log_pmf(long k, long n, double r) {
    if (n < 0 || k < 0 || k > n)
        throw InvalidParameterError("binomial_log_pmf: require 0 <= k <= n");
    if (!(r >= 0.0 && r <= 1.0))
        throw InvalidParameterError("binomial_log_pmf: r must be in [0, 1]");
    const double inf = std::numeric_limits<double>::infinity();
    double lp = std::lgamma(static_cast<double>(n) + 1.0) -
                std::lgamma(static_cast<double>(k) + 1.0) -
                std::lgamma(static_cast<double>(n - k) + 1.0);
    if (k > 0) lp += (r == 0.0) ? -inf : k * std::log(r);
    if (n - k > 0) lp += (r == 1.0) ? -inf : (n - k) * std::log1p(-r);
    return lp;
}

}  // namespace sensorpriv
