#pragma once
// Fixed-capacity vector with runtime dimension. The ambient dimension is a
// runtime parameter everywhere in this library (2 <= d <= 8), and hot loops
// allocate millions of these, so storage is inline.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace roadnet {

inline constexpr int kMaxDim = 8;

struct Vector {
    std::array<double, kMaxDim> c{};
    int d = 0;

    Vector() = default;
    explicit Vector(int dim) : d(dim) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Vector: dimension out of range");
    }
    Vector(std::initializer_list<double> xs) : d(static_cast<int>(xs.size())) {
        if (d < 1 || d > kMaxDim) throw std::invalid_argument("Vector: dimension out of range");
        int i = 0;
        for (double x : xs) c[i++] = x;
    }

    double operator[](int i) const { return c[i]; }
    double& operator[](int i) { return c[i]; }

    Vector& operator+=(const Vector& o) { for (int i = 0; i < d; ++i) c[i] += o.c[i]; return *this; }
    Vector& operator-=(const Vector& o) { for (int i = 0; i < d; ++i) c[i] -= o.c[i]; return *this; }
    Vector& operator*=(double s) { for (int i = 0; i < d; ++i) c[i] *= s; return *this; }

    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator*(Vector a, double s) { return a *= s; }
    friend Vector operator*(double s, Vector a) { return a *= s; }

    // e_k in dimension dim (k is 0-based)
    static Vector axis(int dim, int k) {
        Vector v(dim);
        v.c[k] = 1.0;
        return v;
    }
    static Vector zero(int dim) { return Vector(dim); }
};

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (int i = 0; i < a.d; ++i) s += a.c[i] * b.c[i];
    return s;
}

inline double norm2(const Vector& a) { return dot(a, a); }
inline double norm(const Vector& a) { return std::sqrt(norm2(a)); }

inline double dist(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (int i = 0; i < a.d; ++i) {
        const double t = a.c[i] - b.c[i];
        s += t * t;
    }
    return std::sqrt(s);
}

inline bool same_dim(const Vector& a, const Vector& b) { return a.d == b.d && a.d > 0; }

}  // namespace roadnet
