#pragma once

// Uniform 2D grids, fields with midpoint quadrature, discrete -Delta, and
// the ellipse potential. Header-only and templated on the scalar type.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gpx/errors.hpp"

namespace gpx {

template <typename S>
using Point2 = Eigen::Matrix<S, 2, 1>;
using Point = Point2<double>;

template <typename S>
struct EllipseMetric {
    S b1 = S(1.2);
    S b2 = S(1);
};

template <typename S>
S ellipse_norm(const Point2<S>& p, const EllipseMetric<S>& m) {
    using std::hypot;
    return hypot(p.x() / m.b1, p.y() / m.b2);
}

enum class PotentialKind { ellipse, zero };

struct ProblemParams {
    double a = 0.0;
    double q = 2.2;
    double b1 = 1.2;
    double b2 = 1.0;
    double A = 1.0;
    PotentialKind potential = PotentialKind::ellipse;

    EllipseMetric<double> metric() const { return {b1, b2}; }
    bool trapped() const { return potential == PotentialKind::ellipse; }
};

/// Throws RangeError naming the offending key. a is checked against a_star
/// only when a_star > 0.
inline void check_params(const ProblemParams& p, double a_star = 0.0) {
    auto bad = [](const char* key, const std::string& why) {
        throw Error(ErrorKind::RangeError, std::string(key) + ": " + why);
    };
    if (!(p.q > 2.0 && p.q <= 4.0)) bad("q", "must lie in (2, 4]");
    if (!(p.a > 0.0)) bad("a", "must be positive");
    if (a_star > 0.0 && !(p.a < a_star)) bad("a", "must be below a* = " + std::to_string(a_star));
    if (!(p.b2 > 0.0)) bad("b2", "must be positive");
    if (!(p.b1 > p.b2)) bad("b1", "must exceed b2");
    if (!(p.A > 0.0)) bad("A", "must be positive");
}

template <typename S>
S potential(const Point2<S>& p, const ProblemParams& prm) {
    if (!prm.trapped()) return S(0);
    const S d = ellipse_norm(p, EllipseMetric<S>{S(prm.b1), S(prm.b2)}) - S(prm.A);
    return d * d;
}

/// |x|_b (|x|_b - A), i.e. x.grad V / 2 for the ellipse potential.
template <typename S>
S ring_term(const Point2<S>& p, const ProblemParams& prm) {
    if (!prm.trapped()) return S(0);
    const S r = ellipse_norm(p, EllipseMetric<S>{S(prm.b1), S(prm.b2)});
    return r * (r - S(prm.A));
}

/// Local coordinates (s, z) about an anchor close to the ring |x|_b = A.
/// offset() returns |anchor + (s,z)|_b - A without cancellation, which is
/// needed when s, z are many orders of magnitude below the anchor.
struct RingFrame {
    Point anchor{0.0, 0.0};
    double b1 = 1.2, b2 = 1.0, A = 1.0;
    double defect = 0.0;  // |anchor|_b^2 - A^2

    RingFrame() = default;
    RingFrame(const Point& p, const ProblemParams& prm)
        : anchor(p), b1(prm.b1), b2(prm.b2), A(prm.A) {
        const double u = p.x() / b1, v = p.y() / b2;
        defect = std::fma(u, u, std::fma(v, v, -A * A));
    }

    double excess_sq(double s, double z) const {
        return defect + (2.0 * anchor.x() + s) * s / (b1 * b1) +
               (2.0 * anchor.y() + z) * z / (b2 * b2);
    }
    double offset(double s, double z) const {
        const double e = excess_sq(s, z);
        return e / (std::sqrt(A * A + e) + A);
    }
    double norm(double s, double z) const { return std::sqrt(A * A + excess_sq(s, z)); }
    /// gradient of |x|_b at anchor + (s,z)
    Point grad_norm(double s, double z) const {
        const double r = norm(s, z);
        return {(anchor.x() + s) / (b1 * b1 * r), (anchor.y() + z) / (b2 * b2 * r)};
    }
};

enum class Stencil { five_point, fourth_order };

/// Nodes x_i = origin + i*h, i = 0..n-1. All nodes are interior; the field is
/// extended by zero outside (homogeneous Dirichlet).
template <typename S>
struct Grid2D {
    int nx = 16;
    int ny = 16;
    S hx = S(1);
    S hy = S(1);
    Point2<S> origin = Point2<S>::Zero();
    Stencil stencil = Stencil::five_point;

    Eigen::Index size() const { return Eigen::Index(nx) * ny; }
    S cell() const { return hx * hy; }
    S x(int i) const { return origin.x() + S(i) * hx; }
    S y(int j) const { return origin.y() + S(j) * hy; }
    Point2<S> node(int i, int j) const { return {x(i), y(j)}; }
    Point2<S> center() const {
        return {origin.x() + S(nx - 1) * hx / S(2), origin.y() + S(ny - 1) * hy / S(2)};
    }

    /// Grid whose Dirichlet box is [c - half, c + half] in each direction.
    static Grid2D centered(const Point2<S>& c, S half_x, S half_y, int nx, int ny,
                           Stencil st = Stencil::five_point) {
        Grid2D g;
        g.nx = nx;
        g.ny = ny;
        g.hx = S(2) * half_x / S(nx + 1);
        g.hy = S(2) * half_y / S(ny + 1);
        g.origin = {c.x() - S(nx - 1) * g.hx / S(2), c.y() - S(ny - 1) * g.hy / S(2)};
        g.stencil = st;
        return g;
    }

    void validate() const {
        if (nx < 16 || ny < 16) throw Error(ErrorKind::RangeError, "nx: grid needs at least 16 nodes per side");
        if (!(hx > S(0) && hy > S(0))) throw Error(ErrorKind::RangeError, "grid spacing must be positive");
    }
};

template <typename S>
bool operator==(const Grid2D<S>& a, const Grid2D<S>& b) {
    return a.nx == b.nx && a.ny == b.ny && a.hx == b.hx && a.hy == b.hy && a.origin == b.origin &&
           a.stencil == b.stencil;
}

/// Real field on a Grid2D, row-major: value(i, j) sits at index j*nx + i.
template <typename S>
class Field2D {
public:
    using Array = Eigen::Array<S, Eigen::Dynamic, 1>;

    Field2D() = default;
    explicit Field2D(const Grid2D<S>& g) : grid_(g), values_(Array::Zero(g.size())) {}
    Field2D(const Grid2D<S>& g, Array v) : grid_(g), values_(std::move(v)) {
        if (values_.size() != g.size()) throw Error(ErrorKind::DomainError, "field size does not match grid");
    }

    const Grid2D<S>& grid() const { return grid_; }
    const Array& values() const { return values_; }
    Array& values() { return values_; }

    S& operator()(int i, int j) { return values_[Eigen::Index(j) * grid_.nx + i]; }
    S operator()(int i, int j) const { return values_[Eigen::Index(j) * grid_.nx + i]; }

    /// Zero outside the grid.
    S at(int i, int j) const {
        if (i < 0 || j < 0 || i >= grid_.nx || j >= grid_.ny) return S(0);
        return (*this)(i, j);
    }

    bool all_finite() const { return values_.isFinite().all(); }

private:
    Grid2D<S> grid_;
    Array values_;
};

using Grid = Grid2D<double>;
using Field = Field2D<double>;

template <typename S, typename F>
Field2D<S> sample(const Grid2D<S>& g, F&& f) {
    Field2D<S> u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u(i, j) = f(g.node(i, j));
    return u;
}

template <typename S>
S inner(const Field2D<S>& u, const Field2D<S>& v) {
    return (u.values() * v.values()).sum() * u.grid().cell();
}

template <typename S>
S mass(const Field2D<S>& u) {
    return u.values().square().sum() * u.grid().cell();
}

template <typename S>
S lp_power(const Field2D<S>& u, S p) {
    if (p == S(2)) return mass(u);
    return u.values().abs().pow(p).sum() * u.grid().cell();
}

/// Discrete Laplacian (not its negative) under the zero extension.
template <typename S>
Field2D<S> laplacian(const Field2D<S>& u) {
    const auto& g = u.grid();
    Field2D<S> out(g);
    if (g.stencil == Stencil::five_point) {
        const S cx = S(1) / (g.hx * g.hx), cy = S(1) / (g.hy * g.hy);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const S c = u(i, j);
                out(i, j) = cx * (u.at(i - 1, j) - S(2) * c + u.at(i + 1, j)) +
                            cy * (u.at(i, j - 1) - S(2) * c + u.at(i, j + 1));
            }
    } else {
        const S cx = S(1) / (S(12) * g.hx * g.hx), cy = S(1) / (S(12) * g.hy * g.hy);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const S c = u(i, j);
                out(i, j) = cx * (-u.at(i - 2, j) + S(16) * u.at(i - 1, j) - S(30) * c +
                                  S(16) * u.at(i + 1, j) - u.at(i + 2, j)) +
                            cy * (-u.at(i, j - 2) + S(16) * u.at(i, j - 1) - S(30) * c +
                                  S(16) * u.at(i, j + 1) - u.at(i, j + 2));
            }
    }
    return out;
}

/// <u, -Delta_h u>. For the 5-point stencil this is the forward-difference sum,
/// which is the same quadratic form written as a sum of squares.
template <typename S>
S grad_norm_sq(const Field2D<S>& u) {
    const auto& g = u.grid();
    if (g.stencil == Stencil::fourth_order) return -inner(u, laplacian(u));
    S sx = 0, sy = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = -1; i < g.nx; ++i) {
            const S d = u.at(i + 1, j) - u.at(i, j);
            sx += d * d;
        }
    for (int j = -1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const S d = u.at(i, j + 1) - u.at(i, j);
            sy += d * d;
        }
    return (sx / (g.hx * g.hx) + sy / (g.hy * g.hy)) * g.cell();
}

/// Sparse matrix of -Delta_h acting on the row-major value vector.
template <typename S>
Eigen::SparseMatrix<S> neg_laplacian_matrix(const Grid2D<S>& g) {
    std::vector<Eigen::Triplet<S>> t;
    const bool fourth = g.stencil == Stencil::fourth_order;
    t.reserve(std::size_t(g.size()) * (fourth ? 9 : 5));
    auto idx = [&](int i, int j) { return Eigen::Index(j) * g.nx + i; };
    const S ix = S(1) / (g.hx * g.hx), iy = S(1) / (g.hy * g.hy);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const auto k = idx(i, j);
            auto put = [&](int ii, int jj, S w) {
                if (ii >= 0 && jj >= 0 && ii < g.nx && jj < g.ny) t.emplace_back(k, idx(ii, jj), w);
            };
            if (!fourth) {
                put(i, j, S(2) * (ix + iy));
                put(i - 1, j, -ix);
                put(i + 1, j, -ix);
                put(i, j - 1, -iy);
                put(i, j + 1, -iy);
            } else {
                put(i, j, S(30) / S(12) * (ix + iy));
                put(i - 1, j, -S(16) / S(12) * ix);
                put(i + 1, j, -S(16) / S(12) * ix);
                put(i - 2, j, ix / S(12));
                put(i + 2, j, ix / S(12));
                put(i, j - 1, -S(16) / S(12) * iy);
                put(i, j + 1, -S(16) / S(12) * iy);
                put(i, j - 2, iy / S(12));
                put(i, j + 2, iy / S(12));
            }
        }
    Eigen::SparseMatrix<S> m(g.size(), g.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

namespace detail {
template <typename S>
S catmull_rom(S p0, S p1, S p2, S p3, S t) {
    return p1 + S(0.5) * t * (p2 - p0 + t * (S(2) * p0 - S(5) * p1 + S(4) * p2 - p3 + t * (S(3) * (p1 - p2) + p3 - p0)));
}
}  // namespace detail

/// Bicubic (Catmull-Rom) interpolation of the zero-extended field.
template <typename S>
S interpolate(const Field2D<S>& u, const Point2<S>& p) {
    const auto& g = u.grid();
    const S fx = (p.x() - g.origin.x()) / g.hx, fy = (p.y() - g.origin.y()) / g.hy;
    if (!(fx > S(-1) && fy > S(-1) && fx < S(g.nx) && fy < S(g.ny))) return S(0);
    using std::floor;
    const int i = int(floor(fx)), j = int(floor(fy));
    const S tx = fx - S(i), ty = fy - S(j);
    S col[4];
    for (int m = 0; m < 4; ++m) {
        const int jj = j - 1 + m;
        col[m] = detail::catmull_rom(u.at(i - 1, jj), u.at(i, jj), u.at(i + 1, jj), u.at(i + 2, jj), tx);
    }
    return detail::catmull_rom(col[0], col[1], col[2], col[3], ty);
}

/// Bilinear interpolation of the zero-extended field.
template <typename S>
S interpolate_linear(const Field2D<S>& u, const Point2<S>& p) {
    const auto& g = u.grid();
    const S fx = (p.x() - g.origin.x()) / g.hx, fy = (p.y() - g.origin.y()) / g.hy;
    if (!(fx > S(-1) && fy > S(-1) && fx < S(g.nx) && fy < S(g.ny))) return S(0);
    using std::floor;
    const int i = int(floor(fx)), j = int(floor(fy));
    const S tx = fx - S(i), ty = fy - S(j);
    return (S(1) - ty) * ((S(1) - tx) * u.at(i, j) + tx * u.at(i + 1, j)) +
           ty * ((S(1) - tx) * u.at(i, j + 1) + tx * u.at(i + 1, j + 1));
}

/// Mirror image under x1 -> -x1.
template <typename S>
Field2D<S> reflect_x1(const Field2D<S>& u) {
    Grid2D<S> g = u.grid();
    g.origin.x() = -(u.grid().origin.x() + S(g.nx - 1) * g.hx);
    Field2D<S> r(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) r(i, j) = u(g.nx - 1 - i, j);
    return r;
}

// ---- FIELD2D dump: text header then little-endian float64 payload ----

namespace detail {
inline std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    else return __builtin_bswap64(v);
}
}  // namespace detail

inline void write_field(std::ostream& os, const Field& u) {
    const auto& g = u.grid();
    std::ostringstream h;
    h.precision(17);
    h << "FIELD2D " << g.nx << ' ' << g.ny << ' ' << g.hx << ' ' << g.hy << ' ' << g.origin.x() << ' '
      << g.origin.y() << '\n';
    os << h.str();
    std::vector<std::uint64_t> buf(std::size_t(g.size()));
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        std::uint64_t bits;
        const double v = u.values()[k];
        std::memcpy(&bits, &v, sizeof bits);
        buf[std::size_t(k)] = detail::to_le(bits);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * sizeof(std::uint64_t)));
    if (!os) throw Error(ErrorKind::IoError, "failed to write field payload");
}

inline Field read_field(std::istream& is, Stencil st = Stencil::five_point) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::IoError, "missing FIELD2D header");
    std::istringstream h(line);
    std::string tag;
    Grid g;
    h >> tag >> g.nx >> g.ny >> g.hx >> g.hy >> g.origin.x() >> g.origin.y();
    if (!h || tag != "FIELD2D" || g.nx <= 0 || g.ny <= 0)
        throw Error(ErrorKind::IoError, "malformed FIELD2D header: " + line);
    g.stencil = st;
    std::vector<std::uint64_t> buf(std::size_t(g.size()));
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(std::uint64_t)));
    if (!is) throw Error(ErrorKind::IoError, "truncated FIELD2D payload");
    Field u(g);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const std::uint64_t bits = detail::to_le(buf[std::size_t(k)]);
        std::memcpy(&u.values()[k], &bits, sizeof bits);
    }
    return u;
}

}  // namespace gpx
