#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace saw {

struct LatticePoint {
    int i = 0;
    int j = 0;
    bool operator==(const LatticePoint&) const = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }

// Square grid of doubles, row-major, indexed (i, j) with 0 <= i, j < L.
class Grid {
public:
    Grid() = default;
    Grid(int L, double fill = 0.0) : L_(L), v_(std::size_t(L) * std::size_t(L), fill) {}

    int side() const { return L_; }
    std::size_t count() const { return v_.size(); }

    double& at(int i, int j) { return v_[std::size_t(i) * L_ + j]; }
    double at(int i, int j) const { return v_[std::size_t(i) * L_ + j]; }

    double* row(int i) { return v_.data() + std::size_t(i) * L_; }
    const double* row(int i) const { return v_.data() + std::size_t(i) * L_; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    bool operator==(const Grid&) const = default;

private:
    int L_ = 0;
    std::vector<double> v_;
};

}  // namespace saw
