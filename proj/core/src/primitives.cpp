#include "tactskin/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace tactskin::primitives {

TriMesh grid_plate(double size_x, double size_y, int nx, int ny) {
    std::vector<Vec3> v;
    std::vector<Face> f;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) v.emplace_back(size_x * i / nx, size_y * j / ny, 0.0);
    }
    auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * (nx + 1) + i); };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriMesh(std::move(v), std::move(f));
}

TriMesh cube(double s) {
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) v.emplace_back(s * (i & 1), s * ((i >> 1) & 1), s * ((i >> 2) & 1));
    std::vector<Face> f = {
        {0, 2, 3}, {0, 3, 1}, // z = 0
        {0, 1, 5}, {0, 5, 4}, // y = 0
        {0, 4, 6}, {0, 6, 2}, // x = 0
        {4, 5, 7}, {4, 7, 6}, // z = s
        {2, 6, 7}, {2, 7, 3}, // y = s
        {1, 3, 7}, {1, 7, 5}, // x = s
    };
    return TriMesh(std::move(v), std::move(f));
}

TriMesh icosphere(double radius, int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (auto& p : v) p.normalize();
    std::vector<Face> f = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            auto idx = static_cast<std::uint32_t>(v.size() - 1);
            mid.emplace(key, idx);
            return idx;
        };
        std::vector<Face> next;
        next.reserve(f.size() * 4);
        for (const auto& [a, b, c] : f) {
            auto ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
            next.push_back({a, ab, ca});
            next.push_back({b, bc, ab});
            next.push_back({c, ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    for (auto& p : v) p *= radius;
    return TriMesh(std::move(v), std::move(f));
}

TriMesh cylinder_patch(double radius, double angle, double length, int n_around, int n_along) {
    std::vector<Vec3> v;
    std::vector<Face> f;
    for (int j = 0; j <= n_along; ++j) {
        for (int i = 0; i <= n_around; ++i) {
            const double th = -0.5 * angle + angle * i / n_around;
            v.emplace_back(radius * std::cos(th), radius * std::sin(th), length * j / n_along);
        }
    }
    auto id = [n_around](int i, int j) { return static_cast<std::uint32_t>(j * (n_around + 1) + i); };
    for (int j = 0; j < n_along; ++j) {
        for (int i = 0; i < n_around; ++i) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriMesh(std::move(v), std::move(f));
}

TriMesh annulus(double inner_radius, double outer_radius, int n_radial, int n_around) {
    std::vector<Vec3> v;
    std::vector<Face> f;
    for (int k = 0; k <= n_radial; ++k) {
        const double r = inner_radius + (outer_radius - inner_radius) * k / n_radial;
        for (int i = 0; i < n_around; ++i) {
            const double th = 2.0 * std::numbers::pi * i / n_around;
            v.emplace_back(r * std::cos(th), r * std::sin(th), 0.0);
        }
    }
    auto id = [n_around](int k, int i) { return static_cast<std::uint32_t>(k * n_around + (i % n_around)); };
    for (int k = 0; k < n_radial; ++k) {
        for (int i = 0; i < n_around; ++i) {
            f.push_back({id(k, i), id(k + 1, i), id(k + 1, i + 1)});
            f.push_back({id(k, i), id(k + 1, i + 1), id(k, i + 1)});
        }
    }
    return TriMesh(std::move(v), std::move(f));
}

TriMesh v_groove(double wall_width, double length, int rows, int cols, double opening_angle_rad) {
    const double h = 0.5 * opening_angle_rad;
    std::vector<Vec3> v;
    // Crease row first, then wall A rows 1..rows, then wall B rows 1..rows.
    for (int i = 0; i <= cols; ++i) v.emplace_back(length * i / cols, 0.0, 0.0);
    for (int side = 0; side < 2; ++side) {
        const double sy = side == 0 ? 1.0 : -1.0;
        for (int k = 1; k <= rows; ++k) {
            const double s = wall_width * k / rows;
            for (int i = 0; i <= cols; ++i) v.emplace_back(length * i / cols, sy * s * std::sin(h), s * std::cos(h));
        }
    }
    auto id = [&](int side, int k, int i) {
        if (k == 0) return static_cast<std::uint32_t>(i);
        return static_cast<std::uint32_t>((cols + 1) * (1 + side * rows + (k - 1)) + i);
    };
    std::vector<Face> f;
    for (int k = 0; k < rows; ++k) {
        for (int i = 0; i < cols; ++i) {
            f.push_back({id(0, k, i), id(0, k, i + 1), id(0, k + 1, i + 1)});
            f.push_back({id(0, k, i), id(0, k + 1, i + 1), id(0, k + 1, i)});
            f.push_back({id(1, k, i), id(1, k + 1, i + 1), id(1, k, i + 1)});
            f.push_back({id(1, k, i), id(1, k + 1, i), id(1, k + 1, i + 1)});
        }
    }
    return TriMesh(std::move(v), std::move(f));
}

} // namespace tactskin::primitives
