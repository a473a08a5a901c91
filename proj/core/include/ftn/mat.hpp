// Small dense row-major matrix and vector helpers used across the library.
// Sizes here are tiny (tens of rows/columns), so everything is plain loops
// over contiguous storage; no external linear algebra dependency.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ftn {

using Vec = std::vector<double>;

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a; // row-major, rows*cols entries

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    const double* row(std::size_t i) const { return a.data() + i * cols; }
    double* row(std::size_t i) { return a.data() + i * cols; }
};

// y = M x
inline Vec matvec(const Mat& m, const Vec& x)
{
    if (x.size() != m.cols)
        throw std::invalid_argument("matvec: dimension mismatch");
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j)
            s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

// y = M^T x
inline Vec matvec_t(const Mat& m, const Vec& x)
{
    if (x.size() != m.rows)
        throw std::invalid_argument("matvec_t: dimension mismatch");
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols; ++j)
            y[j] += r[j] * xi;
    }
    return y;
}

inline double dot(const Vec& u, const Vec& v)
{
    if (u.size() != v.size())
        throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += u[i] * v[i];
    return s;
}

inline double norm_sq(const Vec& v) { return dot(v, v); }

} // namespace ftn
