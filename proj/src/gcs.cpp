#include "nepid/gcs.hpp"

#include <cmath>

namespace nepid {

void GcsSpec::validate() const {
    if (n < 1 || k < 1 || k > n)
        throw Error(Errc::InvalidSpec, "GCS spec requires 1 <= k <= n (k=" + std::to_string(k) +
                                           ", n=" + std::to_string(n) + ")");
}

GcsSpec GcsSpec::from_index(Index s, Index T) {
    if (s < 0 || T < 1) throw Error(Errc::InvalidSpec, "GCS factor requires s >= 0 and T >= 1");
    return {s + 1, s + T};
}

void PeriodicPoly::validate() const {
    if (!(a > b && b >= 0))
        throw Error(Errc::InvalidSpec, "periodic polynomial requires a > b >= 0 (a=" + std::to_string(a) +
                                           ", b=" + std::to_string(b) + ")");
}

double PeriodicPoly::abs_derivative(double z) const {
    const double da = static_cast<double>(a) * std::pow(z, static_cast<double>(a - 1));
    const double db = b > 0 ? static_cast<double>(b) * std::pow(z, static_cast<double>(b - 1)) : 0.0;
    return da + db;
}

PeriodicPoly minimal_poly(const GcsSpec& spec) {
    spec.validate();
    return {spec.n, spec.k - 1};
}

Index reduce_exponent(Index s, Index T, Index t) {
    if (s < 0 || T < 1 || t < 0)
        throw Error(Errc::InvalidSpec, "reduce_exponent: need s >= 0, T >= 1, t >= 0");
    if (t <= s) return t;
    return s + (t - s) % T;
}

double poly_pert_bound(const PeriodicPoly& p, double delta) {
    p.validate();
    if (!(delta >= 0.0)) throw Error(Errc::InvalidSpec, "poly_pert_bound: delta must be >= 0");
    return (1.0 + p.abs_derivative(2.0 + delta)) * delta;
}

} // namespace nepid
