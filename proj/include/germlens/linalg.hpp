#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace germlens {

using Point = Eigen::VectorXd;
using Cloud = std::vector<Point>;

// splitmix64 finaliser; used to derive independent child seeds
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0)
{
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(mix_seed(seed, stream)); }

inline double uniform01(Rng& rng)
{
    // 53 random bits, platform independent (std::uniform_real_distribution is not)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double gaussian(Rng& rng)
{
    // Box-Muller, again to stay independent of the standard library's distributions
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Point random_unit(Rng& rng, int n)
{
    Point p(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) p[i] = gaussian(rng);
        norm = p.norm();
    } while (norm < 1e-12);
    return p / norm;
}

/// Uniform point in the closed ball of radius r.
inline Point random_in_ball(Rng& rng, int n, double r)
{
    const double s = r * std::pow(uniform01(rng), 1.0 / n);
    return s * random_unit(rng, n);
}

/// Uniform point in the shell r/2 <= |x| <= r.
inline Point random_in_shell(Rng& rng, int n, double r)
{
    const double lo = std::pow(0.5, n);
    const double s = r * std::pow(lo + (1.0 - lo) * uniform01(rng), 1.0 / n);
    return s * random_unit(rng, n);
}

inline Point normalized(const Point& p)
{
    const double n = p.norm();
    if (n == 0.0) throw std::domain_error("cannot normalise the zero vector");
    return p / n;
}

/// Angle between two nonzero vectors, computed stably via atan2.
inline double angle_between(const Point& a, const Point& b)
{
    const Point ua = a / a.norm();
    const Point ub = b / b.norm();
    return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

inline double surface_area_unit_sphere(int n)
{
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

inline double ball_volume(int n, double r)
{
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0) * std::pow(r, n);
}

/// Area of a spherical cap of angular radius beta on S^{n-1}.
inline double cap_area(int n, double beta)
{
    beta = std::clamp(beta, 0.0, std::numbers::pi);
    if (n == 1) return beta > 0.0 ? 1.0 : 0.0;
    if (n == 2) return 2.0 * beta;
    if (n == 3) return 2.0 * std::numbers::pi * (1.0 - std::cos(beta));
    // |S^{n-2}| * int_0^beta sin^{n-2}(phi) dphi, by composite Simpson
    const int m = 2000;
    const double h = beta / m;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * std::pow(std::sin(i * h), n - 2);
    }
    return surface_area_unit_sphere(n - 1) * acc * h / 3.0;
}

/// Some unit vector orthogonal to u, drawn uniformly on the orthogonal great sphere.
inline Point random_orthogonal_unit(Rng& rng, const Point& u)
{
    const int n = static_cast<int>(u.size());
    for (;;) {
        Point v(n);
        for (int i = 0; i < n; ++i) v[i] = gaussian(rng);
        v -= v.dot(u) * u;
        const double norm = v.norm();
        if (norm > 1e-9) return v / norm;
    }
}

/// Uniform direction in the cap of angular radius beta (< pi/2) around unit vector d.
inline Point random_in_cap(Rng& rng, const Point& d, double beta)
{
    const int n = static_cast<int>(d.size());
    double phi = 0.0;
    if (n == 3) {
        const double c = 1.0 - uniform01(rng) * (1.0 - std::cos(beta));
        phi = std::acos(std::clamp(c, -1.0, 1.0));
    } else if (n == 2) {
        phi = beta * uniform01(rng);
    } else {
        const double sb = std::sin(beta);
        for (;;) {
            phi = beta * uniform01(rng);
            if (uniform01(rng) <= std::pow(std::sin(phi) / sb, n - 2)) break;
        }
    }
    if (n == 2) {
        const double sgn = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        Point v(2);
        v << -d[1], d[0];
        return std::cos(phi) * d + sgn * std::sin(phi) * v;
    }
    return std::cos(phi) * d + std::sin(phi) * random_orthogonal_unit(rng, d);
}

/// Uniform hash grid over points in R^n (n <= 4), for fixed-radius neighbour queries.
class HashGrid {
public:
    HashGrid() = default;
    HashGrid(const Cloud& pts, double cell) : cell_(cell), points_(&pts)
    {
        if (!(cell > 0.0)) throw std::invalid_argument("HashGrid: cell size must be positive");
        if (!pts.empty()) dim_ = static_cast<int>(pts.front().size());
        for (std::size_t i = 0; i < pts.size(); ++i) buckets_[key_of(pts[i])].push_back(i);
    }

    double cell() const { return cell_; }

    /// Calls fn(index) for every point within distance r (r <= cell) of q.
    template <class Fn>
    void for_each_within(const Point& q, double r, Fn&& fn) const
    {
        if (points_ == nullptr || points_->empty()) return;
        std::array<long long, 4> base{};
        for (int i = 0; i < dim_; ++i) base[i] = static_cast<long long>(std::floor(q[i] / cell_));
        const int span = r <= cell_ ? 1 : static_cast<int>(std::ceil(r / cell_));
        std::array<long long, 4> off{};
        for (int i = 0; i < dim_; ++i) off[i] = -span;
        const double r2 = r * r;
        for (;;) {
            std::array<long long, 4> k{};
            for (int i = 0; i < dim_; ++i) k[i] = base[i] + off[i];
            if (auto it = buckets_.find(hash(k)); it != buckets_.end()) {
                for (std::size_t idx : it->second) {
                    if (((*points_)[idx] - q).squaredNorm() <= r2) fn(idx);
                }
            }
            int i = 0;
            while (i < dim_ && ++off[i] > span) off[i++] = -span;
            if (i == dim_) break;
        }
    }

private:
    static std::uint64_t hash(const std::array<long long, 4>& k)
    {
        std::uint64_t h = 0x12345;
        for (long long v : k) h = mix_seed(h, static_cast<std::uint64_t>(v));
        return h;
    }
    std::uint64_t key_of(const Point& p) const
    {
        std::array<long long, 4> k{};
        for (int i = 0; i < dim_; ++i) k[i] = static_cast<long long>(std::floor(p[i] / cell_));
        return hash(k);
    }

    double cell_ = 1.0;
    int dim_ = 0;
    const Cloud* points_ = nullptr;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

/// Directed Hausdorff distance sup_{a in A} inf_{b in B} |a - b| (brute force with grid acceleration).
inline double directed_hausdorff(const Cloud& a, const Cloud& b)
{
    if (a.empty()) return 0.0;
    if (b.empty()) return std::numeric_limits<double>::infinity();
    const HashGrid grid(b, 0.05);
    double worst = 0.0;
    for (const Point& p : a) {
        double best = std::numeric_limits<double>::infinity();
        grid.for_each_within(p, 0.05, [&](std::size_t j) { best = std::min(best, (b[j] - p).norm()); });
        if (!std::isfinite(best)) {
            for (const Point& q : b) best = std::min(best, (q - p).norm());
        }
        worst = std::max(worst, best);
    }
    return worst;
}

inline double hausdorff(const Cloud& a, const Cloud& b)
{
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace germlens
