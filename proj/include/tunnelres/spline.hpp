#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tunnelres {

/// Natural cubic spline (zero second derivative at both end nodes).
/// Evaluation outside [x.front(), x.back()] extends the end cubic.
class NaturalCubicSpline {
public:
    NaturalCubicSpline() = default;

    NaturalCubicSpline(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("spline needs >= 2 matching nodes");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline nodes must be strictly increasing");

        // Tridiagonal solve for the second derivatives (Thomas algorithm).
        m_.assign(n, 0.0);
        if (n > 2) {
            std::vector<double> c(n, 0.0), d(n, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double h0 = x_[i] - x_[i - 1];
                const double h1 = x_[i + 1] - x_[i];
                const double a = h0 / 6.0;
                const double b = (h0 + h1) / 3.0;
                const double cc = h1 / 6.0;
                const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
                const double denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (rhs - a * d[i - 1]) / denom;
            }
            for (std::size_t i = n - 2; i >= 1; --i) {
                m_[i] = d[i] - c[i] * m_[i + 1];
                if (i == 1) break;
            }
        }
    }

    double operator()(double t) const { return eval(t, 0); }
    double derivative(double t) const { return eval(t, 1); }
    double second_derivative(double t) const { return eval(t, 2); }

    std::span<const double> nodes() const { return x_; }
    std::span<const double> values() const { return y_; }

private:
    std::size_t segment(double t) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(i, x_.size() - 2);
    }

    double eval(double t, int order) const {
        const std::size_t i = segment(t);
        const double h = x_[i + 1] - x_[i];
        const double A = (x_[i + 1] - t) / h;
        const double B = (t - x_[i]) / h;
        switch (order) {
        case 0:
            return A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
        case 1:
            return (y_[i + 1] - y_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
        default:
            return A * m_[i] + B * m_[i + 1];
        }
    }

    std::vector<double> x_, y_, m_;
};

}  // namespace tunnelres
