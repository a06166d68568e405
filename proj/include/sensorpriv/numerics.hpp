#pragma once

#include <functional>
#include <span>
#include <vector>

namespace sensorpriv {

/// Composite Gauss-Legendre rule: `panels` equal panels over [lower, upper],
/// `nodes_per_panel` nodes each. Deterministic for a fixed spec.
struct QuadratureSpec {
    double lower = 0.0;
    double upper = 1.0;
    int panels = 128;
    int nodes_per_panel = 8;

    void validate() const;
};

/// ln of the normal density at z. Throws InvalidParameterError if sigma <= 0.
double gaussian_logpdf(double z, double mean, double sigma);

/// ln sum_i exp(v_i), overflow-safe for entries up to +-1e6. Entries may be
/// -infinity. Throws InvalidParameterError on an empty list.
double log_sum_exp(std::span<const double> values);

/// Nodes and weights of the composite rule, in ascending node order.
/// Exposed so callers evaluating many integrands over one grid can share it.
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureGrid make_grid(const QuadratureSpec& spec);

double integrate(const std::function<double(double)>& f, const QuadratureSpec& spec);

/// ln C(n,k) r^k (1-r)^(n-k) via log-gamma, with 0^0 = 1 and ln 0 = -infinity.
double binomial_log_pmf(long k, long n, double r);

}  // namespace sensorpriv
