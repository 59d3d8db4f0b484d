#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdio>
#include <initializer_list>
#include <string>

namespace impdyn {

// Stack-allocated vector/matrix types sized for this problem family:
// ambient dimension <= 3, section chart dimension <= 2.

inline constexpr int kMaxDim = 3;

struct Vec {
    int n = 0;
    std::array<double, kMaxDim> a{};

    Vec() = default;
    explicit Vec(int size) : n(size) { assert(size >= 0 && size <= kMaxDim); }
    Vec(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
        assert(n <= kMaxDim);
        int i = 0;
        for (double x : xs) a[i++] = x;
    }
    static Vec zero(int size) { return Vec(size); }

    double& operator[](int i) { return a[i]; }
    double operator[](int i) const { return a[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) a[i] *= s;
        return *this;
    }
};

inline Vec operator+(Vec x, const Vec& y) { return x += y; }
inline Vec operator-(Vec x, const Vec& y) { return x -= y; }
inline Vec operator*(double s, Vec x) { return x *= s; }
inline Vec operator*(Vec x, double s) { return x *= s; }
inline Vec operator-(Vec x) { return x *= -1.0; }

inline double dot(const Vec& x, const Vec& y) {
    double s = 0;
    for (int i = 0; i < x.n; ++i) s += x.a[i] * y.a[i];
    return s;
}
inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }
inline double norm_inf(const Vec& x) {
    double m = 0;
    for (int i = 0; i < x.n; ++i) m = std::max(m, std::abs(x.a[i]));
    return m;
}
inline double dist(const Vec& x, const Vec& y) { return norm(x - y); }

// Row-major dense matrix, rows x cols each <= 3.
struct Mat {
    int rows = 0, cols = 0;
    std::array<double, kMaxDim * kMaxDim> a{};

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c) { assert(r <= kMaxDim && c <= kMaxDim); }

    double& operator()(int i, int j) { return a[i * cols + j]; }
    double operator()(int i, int j) const { return a[i * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat zero(int r, int c) { return Mat(r, c); }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < rows * cols; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (int i = 0; i < rows * cols; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (int i = 0; i < rows * cols; ++i) a[i] *= s;
        return *this;
    }
};

inline Mat operator+(Mat x, const Mat& y) { return x += y; }
inline Mat operator-(Mat x, const Mat& y) { return x -= y; }
inline Mat operator*(double s, Mat x) { return x *= s; }

inline Mat operator*(const Mat& x, const Mat& y) {
    assert(x.cols == y.rows);
    Mat r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            double v = x(i, k);
            for (int j = 0; j < y.cols; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

inline Vec operator*(const Mat& m, const Vec& v) {
    assert(m.cols == v.n);
    Vec r(m.rows);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

inline Mat transpose(const Mat& m) {
    Mat r(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(j, i) = m(i, j);
    return r;
}

inline Mat outer(const Vec& x, const Vec& y) {
    Mat r(x.n, y.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < y.n; ++j) r(i, j) = x[i] * y[j];
    return r;
}

inline double det(const Mat& m) {
    assert(m.rows == m.cols);
    switch (m.rows) {
        case 1:
            return m(0, 0);
        case 2:
            return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        case 3:
            return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                   m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                   m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        default:
            return 0.0;
    }
}

inline Mat inverse(const Mat& m) {
    assert(m.rows == m.cols);
    const double d = det(m);
    Mat r(m.rows, m.cols);
    switch (m.rows) {
        case 1:
            r(0, 0) = 1.0 / d;
            return r;
        case 2:
            r(0, 0) = m(1, 1) / d;
            r(0, 1) = -m(0, 1) / d;
            r(1, 0) = -m(1, 0) / d;
            r(1, 1) = m(0, 0) / d;
            return r;
        case 3: {
            r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
            r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
            r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
            r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
            r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
            r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
            r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
            r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
            r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
            return r;
        }
        default:
            return r;
    }
}

inline Vec solve(const Mat& m, const Vec& b) { return inverse(m) * b; }

inline double norm_fro(const Mat& m) {
    double s = 0;
    for (int i = 0; i < m.rows * m.cols; ++i) s += m.a[i] * m.a[i];
    return std::sqrt(s);
}

// Spectral norm. Exact for sizes 1 and 2; for 3x3 falls back to a tight
// power-iteration on A^T A (deterministic start vector).
inline double norm_op(const Mat& m) {
    if (m.rows == 1 && m.cols == 1) return std::abs(m(0, 0));
    if (m.rows <= 2 && m.cols <= 2 && m.rows == m.cols) {
        const double f2 = norm_fro(m) * norm_fro(m);
        const double d = det(m);
        const double disc = std::max(0.0, f2 * f2 - 4.0 * d * d);
        return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
    }
    if (m.rows == 1 || m.cols == 1) return norm_fro(m);
    Mat g = transpose(m) * m;
    Vec v(g.rows);
    for (int i = 0; i < v.n; ++i) v[i] = 1.0 / std::sqrt(double(g.rows));
    double lam = 0;
    for (int it = 0; it < 128; ++it) {
        Vec w = g * v;
        double nw = norm(w);
        if (nw == 0) return 0.0;
        v = (1.0 / nw) * w;
        lam = nw;
    }
    return std::sqrt(lam);
}

// Eigenvalues of a 1x1 or 2x2 matrix.
inline std::array<std::complex<double>, 2> eigenvalues2(const Mat& m, int* count) {
    assert(m.rows == m.cols && m.rows <= 2);
    std::array<std::complex<double>, 2> out{};
    if (m.rows == 1) {
        *count = 1;
        out[0] = m(0, 0);
        return out;
    }
    *count = 2;
    const double tr = m(0, 0) + m(1, 1);
    const double d = det(m);
    const double disc = tr * tr - 4.0 * d;
    if (disc >= 0) {
        const double s = std::sqrt(disc);
        out[0] = 0.5 * (tr + s);
        out[1] = 0.5 * (tr - s);
    } else {
        const double s = std::sqrt(-disc);
        out[0] = std::complex<double>(0.5 * tr, 0.5 * s);
        out[1] = std::complex<double>(0.5 * tr, -0.5 * s);
    }
    return out;
}

inline std::string format_vec(const Vec& v) {
    std::string s = "(";
    char buf[32];
    for (int i = 0; i < v.n; ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", v[i]);
        s += buf;
        if (i + 1 < v.n) s += ", ";
    }
    return s + ")";
}

// Deterministic splitmix64-based generator. Used instead of <random>
// distributions so emitted artifacts do not depend on the standard library
// implementation.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int n) { return int(next_u64() % std::uint64_t(n)); }
};

}  // namespace impdyn
