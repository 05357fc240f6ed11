#include "mf/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mf {

CubicSpline CubicSpline::fit(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& w, int segments) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("spline fit: bad data");
    if (!w.empty() && w.size() != x.size()) throw std::invalid_argument("spline fit: bad weights");
    if (segments < 1) segments = 1;

    CubicSpline s;
    s.x_min_ = *std::min_element(x.begin(), x.end());
    s.x_max_ = *std::max_element(x.begin(), x.end());
    if (s.x_max_ <= s.x_min_) throw std::runtime_error("spline fit: degenerate abscissa");

    // Clamped knot vector: endpoints repeated 4 times, segments-1 interior knots.
    s.knots_.assign(4, s.x_min_);
    for (int i = 1; i < segments; ++i)
        s.knots_.push_back(s.x_min_ + (s.x_max_ - s.x_min_) * i / segments);
    s.knots_.insert(s.knots_.end(), 4, s.x_max_);

    const long nb = segments + 3;
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::VectorXd atb = Eigen::VectorXd::Zero(nb);
    for (size_t i = 0; i < x.size(); ++i) {
        long first;
        double b[4];
        s.basis_row(x[i], first, b);
        const double wi = w.empty() ? 1.0 : w[i];
        for (int a = 0; a < 4; ++a) {
            atb(first + a) += wi * b[a] * y[i];
            for (int c = 0; c < 4; ++c) ata(first + a, first + c) += wi * b[a] * b[c];
        }
    }
    // Tikhonov floor keeps unsupported basis functions from making the
    // system singular without visibly biasing supported ones.
    ata.diagonal().array() += 1e-10 * (ata.diagonal().maxCoeff() + 1.0);
    Eigen::LDLT<Eigen::MatrixXd> solver(ata);
    s.coef_ = solver.solve(atb);
    if (!s.coef_.allFinite()) throw std::runtime_error("spline fit: singular normal equations");
    return s;
}

void CubicSpline::basis_row(double x, long& first, double out[4]) const {
    x = std::clamp(x, x_min_, x_max_);
    // Find knot span: largest j with knots_[j] <= x < knots_[j+1], within [3, nk-5].
    const long nk = static_cast<long>(knots_.size());
    long j = std::upper_bound(knots_.begin() + 3, knots_.end() - 4, x) - knots_.begin() - 1;
    j = std::clamp(j, 3l, nk - 5);
    // Cox-de Boor for the 4 nonzero cubic basis functions on span j.
    double left[4], right[4];
    out[0] = 1.0;
    for (int d = 1; d <= 3; ++d) {
        left[d] = x - knots_[j + 1 - d];
        right[d] = knots_[j + d] - x;
        double saved = 0.0;
        for (int r = 0; r < d; ++r) {
            const double denom = right[r + 1] + left[d - r];
            const double tmp = denom != 0.0 ? out[r] / denom : 0.0;
            out[r] = saved + right[r + 1] * tmp;
            saved = left[d - r] * tmp;
        }
        out[d] = saved;
    }
    first = j - 3;
}

double CubicSpline::operator()(double x) const {
    long first;
    double b[4];
    basis_row(x, first, b);
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += coef_(first + a) * b[a];
    return v;
}

double CubicSpline::derivative(double x) const {
    const double h = 1e-6 * (x_max_ - x_min_);
    const double lo = std::clamp(x - h, x_min_, x_max_);
    const double hi = std::clamp(x + h, x_min_, x_max_);
    if (hi <= lo) return 0.0;
    return ((*this)(hi) - (*this)(lo)) / (hi - lo);
}

double CubicSpline::min_derivative(int grid) const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        const double x = x_min_ + (x_max_ - x_min_) * i / grid;
        m = std::min(m, derivative(x));
    }
    return m;
}

}  // namespace mf
