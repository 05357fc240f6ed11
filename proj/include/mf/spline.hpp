#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mf {

/// Least-squares cubic B-spline with uniformly spaced interior knots over
/// the data range. Used for spectral unfolding and the collapse cost.
class CubicSpline {
  public:
    /// Fits to (x, y) with weights w (empty = unweighted). `segments` is the
    /// number of knot spans; basis size is segments + 3. x need not be sorted.
    /// Throws std::runtime_error when the normal equations are degenerate.
    static CubicSpline fit(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& w, int segments);

    double operator()(double x) const;
    double derivative(double x) const;

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }

    /// Minimum of the derivative on a uniform scan grid.
    double min_derivative(int grid = 512) const;

  private:
    std::vector<double> knots_;   // clamped knot vector, degree 3
    Eigen::VectorXd coef_;
    double x_min_ = 0, x_max_ = 1;

    void basis_row(double x, long& first, double out[4]) const;
};

}  // namespace mf
