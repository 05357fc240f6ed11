#include "mf/scaling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mf {

double digamma(double z) {
    if (!(z > 0)) throw std::invalid_argument("digamma requires z > 0");
    double acc = 0.0;
    while (z < 10.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    const double inv = 1.0 / z, inv2 = inv * inv;
    // ln z - 1/(2z) - sum B_{2n} / (2n z^{2n})
    double series = std::log(z) - 0.5 * inv;
    double p = inv2;
    series -= p / 12.0;
    p *= inv2;
    series += p / 120.0;
    p *= inv2;
    series -= p / 252.0;
    p *= inv2;
    series += p / 240.0;
    p *= inv2;
    series -= p / 132.0;
    p *= inv2;
    series += p * 691.0 / 32760.0;
    return acc + series;
}

double page_law_density(int cut, int length) {
    if (cut < 0 || cut > length) throw std::invalid_argument("cut out of range");
    if (cut > length / 2) cut = length - cut;  // pure-state mirror
    if (cut == 0) return 0.0;
    const double l = length, la = cut;
    return (l - 0.5) * digamma(2 * l) + (0.5 + la - l) * digamma(2 * l - 2 * la) +
           (0.25 - la) * digamma(l) - 0.25 * digamma(l - la) - la;
}

double fermi_liquid_density(int cut, int length, double s0) {
    if (cut < 1 || cut > length - 1) throw std::invalid_argument("cut out of range for log law");
    return std::log(length * std::sin(std::numbers::pi * cut / length)) / 3.0 + s0;
}

double jacobi_theta3(double x) {
    if (!(x > 0)) throw std::invalid_argument("theta3 requires x > 0");
    double sum = 1.0;
    for (long n = 1;; ++n) {
        const double term = std::exp(-std::numbers::pi * x * n * n);
        if (term < 1e-15) break;
        sum += 2.0 * term;
    }
    return sum;
}

double dedekind_eta(double y) {
    if (!(y > 0)) throw std::invalid_argument("eta requires y > 0");
    const double q = std::exp(-2.0 * std::numbers::pi * y);
    double prod = 1.0;
    double qn = 1.0;
    for (long n = 1;; ++n) {
        qn *= q;
        if (qn < 1e-16) break;
        prod *= 1.0 - qn;
    }
    return std::exp(-std::numbers::pi * y / 12.0) * prod;
}

double lifshitz_J(double u, double lambda) {
    if (!(u > 0) || !(u < 1)) throw std::invalid_argument("lifshitz J requires u in (0,1)");
    if (!(lambda > 0)) throw std::invalid_argument("lifshitz J requires lambda > 0");
    return std::log(jacobi_theta3(lambda * u) * jacobi_theta3(lambda * (1.0 - u)) /
                    (dedekind_eta(2.0 * u) * dedekind_eta(2.0 * (1.0 - u))));
}

std::string scaling_law_name(ScalingLaw law) {
    switch (law) {
        case ScalingLaw::page: return "page";
        case ScalingLaw::fermi_liquid: return "fermi_liquid";
        case ScalingLaw::lifshitz: return "lifshitz";
        case ScalingLaw::area: return "area";
    }
    return "area";
}

namespace {

struct WeightedData {
    std::vector<int> cuts;
    std::vector<double> y, w;
};

WeightedData prepare(const ObservableSeries& series, int length) {
    WeightedData d;
    for (const auto& p : series.points) {
        const int cut = static_cast<int>(std::lround(p.x));
        if (cut < 1 || cut > length - 1) continue;
        d.cuts.push_back(cut);
        d.y.push_back(p.mean);
        const double sigma = p.stderr_ > 0 ? p.stderr_ : 1.0;
        d.w.push_back(1.0 / (sigma * sigma));
    }
    if (d.cuts.size() < 5) throw std::invalid_argument("scaling-law fit needs >= 5 points");
    return d;
}

double weighted_rms(const std::vector<double>& resid) {
    double s = 0;
    for (double r : resid) s += r * r;
    return std::sqrt(s / resid.size());
}

/// Linear LSQ of y against [J(u)/L, 1] at fixed lambda; returns residual RMS.
double lifshitz_linear_fit(const WeightedData& d, int length, double lambda, double& a, double& b) {
    double sww = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    std::vector<double> f(d.cuts.size());
    for (size_t i = 0; i < d.cuts.size(); ++i) {
        f[i] = lifshitz_J(static_cast<double>(d.cuts[i]) / length, lambda) / length;
        sww += d.w[i];
        swx += d.w[i] * f[i];
        swy += d.w[i] * d.y[i];
        swxx += d.w[i] * f[i] * f[i];
        swxy += d.w[i] * f[i] * d.y[i];
    }
    const double det = sww * swxx - swx * swx;
    if (std::abs(det) < 1e-14 * sww * (swxx + 1e-30)) throw std::runtime_error("flat data: lifshitz fit singular");
    a = (sww * swxy - swx * swy) / det;
    b = (swxx * swy - swx * swxy) / det;
    std::vector<double> resid(d.cuts.size());
    for (size_t i = 0; i < d.cuts.size(); ++i) resid[i] = d.y[i] - (a * f[i] + b);
    return weighted_rms(resid);
}

}  // namespace

ScalingLawFit fit_scaling_law(const ObservableSeries& series, int length, ScalingLaw law) {
    WeightedData d = prepare(series, length);
    ScalingLawFit fit;
    fit.law = law;

    switch (law) {
        case ScalingLaw::page: {
            std::vector<double> resid(d.cuts.size());
            for (size_t i = 0; i < d.cuts.size(); ++i)
                resid[i] = d.y[i] - page_law_density(d.cuts[i], length);
            fit.residual_rms = weighted_rms(resid);
            break;
        }
        case ScalingLaw::fermi_liquid: {
            double num = 0, den = 0;
            for (size_t i = 0; i < d.cuts.size(); ++i) {
                num += d.w[i] * (d.y[i] - fermi_liquid_density(d.cuts[i], length, 0.0));
                den += d.w[i];
            }
            fit.s0 = num / den;
            std::vector<double> resid(d.cuts.size());
            for (size_t i = 0; i < d.cuts.size(); ++i)
                resid[i] = d.y[i] - fermi_liquid_density(d.cuts[i], length, fit.s0);
            fit.residual_rms = weighted_rms(resid);
            break;
        }
        case ScalingLaw::area: {
            double num = 0, den = 0;
            for (size_t i = 0; i < d.cuts.size(); ++i) {
                num += d.w[i] * d.y[i];
                den += d.w[i];
            }
            fit.constant = num / den;
            std::vector<double> resid(d.cuts.size());
            for (size_t i = 0; i < d.cuts.size(); ++i) resid[i] = d.y[i] - fit.constant;
            fit.residual_rms = weighted_rms(resid);
            break;
        }
        case ScalingLaw::lifshitz: {
            // Linear (a, b) on a lambda grid, then golden-section polish.
            double best_lambda = 1.0, best_rms = std::numeric_limits<double>::infinity();
            for (double lambda = 0.2; lambda <= 3.0 + 1e-9; lambda += 0.1) {
                double a, b;
                const double rms = lifshitz_linear_fit(d, length, lambda, a, b);
                if (rms < best_rms) {
                    best_rms = rms;
                    best_lambda = lambda;
                }
            }
            double lo = std::max(0.05, best_lambda - 0.1), hi = best_lambda + 0.1;
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            for (int it = 0; it < 60 && hi - lo > 1e-8; ++it) {
                const double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
                double a, b;
                if (lifshitz_linear_fit(d, length, m1, a, b) <
                    lifshitz_linear_fit(d, length, m2, a, b))
                    hi = m2;
                else
                    lo = m1;
            }
            fit.lambda = 0.5 * (lo + hi);
            fit.residual_rms = lifshitz_linear_fit(d, length, fit.lambda, fit.a, fit.b);
            break;
        }
    }
    return fit;
}

PrefactorResult prefactor_extraction(const std::vector<int>& sizes,
                                     const std::vector<double>& half_cut_entropies) {
    if (sizes.size() != half_cut_entropies.size() || sizes.size() < 3)
        throw std::invalid_argument("prefactor extraction needs >= 3 sizes");
    PrefactorResult res;
    // Per-L slope of S/L~ against ln L~ over all sizes up to L.
    for (size_t top = 1; top < sizes.size(); ++top) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = top + 1;
        for (size_t i = 0; i <= top; ++i) {
            const double x = std::log(static_cast<double>(sizes[i]));
            const double y = half_cut_entropies[i] / sizes[i];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double det = n * sxx - sx * sx;
        if (std::abs(det) < 1e-14) continue;
        res.sizes.push_back(sizes[top]);
        res.c_of_l.push_back((n * sxy - sx * sy) / det);
        res.b_of_l.push_back((sxx * sy - sx * sxy) / det);
    }
    if (res.sizes.size() < 2) throw std::runtime_error("prefactor extrapolation needs >= 2 per-L slopes");
    // Extrapolate c = m/L + c(inf).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = res.sizes.size();
    for (size_t i = 0; i < res.sizes.size(); ++i) {
        const double x = 1.0 / res.sizes[i];
        sx += x;
        sy += res.c_of_l[i];
        sxx += x * x;
        sxy += x * res.c_of_l[i];
    }
    const double det = n * sxx - sx * sx;
    res.slope_m = (n * sxy - sx * sy) / det;
    res.c_infinity = (sxx * sy - sx * sxy) / det;
    return res;
}

}  // namespace mf
