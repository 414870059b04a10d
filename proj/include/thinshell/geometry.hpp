#pragma once

#include "thinshell/core.hpp"
#include "thinshell/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace thinshell {

enum class CurveKind { circle, ellipse, fourier, strip };

struct FourierMode {
    int k = 0;
    Complex c;
};

/// Declarative curve description; the strip is a flat periodic test harness (kappa = 0).
struct CurveDefinition {
    CurveKind kind = CurveKind::circle;
    double radius = 1.0;
    double a = 2.0;
    double b = 1.0;
    std::vector<FourierMode> modes;
    double length = 2.0 * pi;   // strip only
    int table_size = 512;
};

struct CurvePoint {
    double s = 0.0;
    Vec2 position;
    Vec2 tangent;
    Vec2 normal;      // outward normal nu = (-T_2, T_1)
    double curvature = 0.0;
};

namespace detail {

class CurveImpl {
public:
    virtual ~CurveImpl() = default;
    virtual CurvePoint at(double s) const = 0;
    double length = 0.0;
};

class CircleImpl final : public CurveImpl {
public:
    explicit CircleImpl(double r) : r_(r) { length = 2.0 * pi * r; }
    CurvePoint at(double s) const override {
        const double th = s / r_;
        CurvePoint p;
        p.s = s;
        p.position = r_ * Vec2(std::cos(th), -std::sin(th));
        p.tangent = Vec2(-std::sin(th), -std::cos(th));
        p.normal = Vec2(std::cos(th), -std::sin(th));
        p.curvature = -1.0 / r_;
        return p;
    }

private:
    double r_;
};

class StripImpl final : public CurveImpl {
public:
    explicit StripImpl(double l) { length = l; }
    CurvePoint at(double s) const override {
        CurvePoint p;
        p.s = s;
        p.position = Vec2(s, 0.0);
        p.tangent = Vec2(1.0, 0.0);
        p.normal = Vec2(0.0, 1.0);
        p.curvature = 0.0;
        return p;
    }
};

/// 2 pi-periodic parametrization r(theta) with analytic derivatives, reparametrized by arclength.
class ParametricImpl final : public CurveImpl {
public:
    using VecFn = std::function<Vec2(double)>;

    ParametricImpl(VecFn r, VecFn dr, VecFn ddr, int table_size)
        : r_(std::move(r)), dr_(std::move(dr)), ddr_(std::move(ddr)) {
        require(table_size >= 16, "curve: arclength table too small");
        const int samples = 4096;
        double area = 0.0, speed_max = 0.0, speed_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < samples; ++i) {
            const double th = 2.0 * pi * i / samples;
            const Vec2 p = r_(th), d = dr_(th);
            area += 0.5 * (p.x() * d.y() - p.y() * d.x()) * (2.0 * pi / samples);
            speed_max = std::max(speed_max, d.norm());
            speed_min = std::min(speed_min, d.norm());
        }
        if (!(speed_max > 1e-12) || speed_min < 1e-10 * speed_max)
            throw InvalidInput("curve: degenerate parametrization (vanishing speed or zero length)");
        if (area > 0.0) orient_ = -1.0;
        check_simple();

        thetas_.resize(table_size + 1);
        ells_.resize(table_size + 1);
        speeds_.resize(table_size + 1);
        ells_[0] = 0.0;
        auto speed = [this](double th) { return d1(th).norm(); };
        for (int j = 0; j <= table_size; ++j) {
            thetas_[j] = 2.0 * pi * j / table_size;
            speeds_[j] = speed(thetas_[j]);
            if (j > 0)
                ells_[j] = ells_[j - 1] + integrate_adaptive_simpson(speed, thetas_[j - 1], thetas_[j],
                                                                     1e-13 * speed_max / table_size);
        }
        length = ells_.back();
        if (!(length > 1e-12)) throw InvalidInput("curve: zero length");
    }

    CurvePoint at(double s) const override {
        const double th = theta_of(s);
        const Vec2 d = d1(th), dd = d2(th);
        const double sp = d.norm();
        CurvePoint p;
        p.s = s;
        p.position = r_(orient_ * th);
        p.tangent = d / sp;
        p.normal = Vec2(-p.tangent.y(), p.tangent.x());
        p.curvature = (d.x() * dd.y() - d.y() * dd.x()) / (sp * sp * sp);
        return p;
    }

    /// Parameter value theta(s) for s in [0, L): monotone cubic Hermite guess, Newton polish.
    double theta_of(double s) const {
        const auto it = std::upper_bound(ells_.begin(), ells_.end(), s);
        std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - ells_.begin()) - 1));
        j = std::min(j, thetas_.size() - 2);
        const double l0 = ells_[j], l1 = ells_[j + 1], dl = l1 - l0;
        const double u = (s - l0) / dl;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
        double th = h00 * thetas_[j] + h10 * dl / speeds_[j] + h01 * thetas_[j + 1] + h11 * dl / speeds_[j + 1];
        th = std::clamp(th, thetas_[j], thetas_[j + 1]);
        auto speed = [this](double x) { return d1(x).norm(); };
        for (int iter = 0; iter < 8; ++iter) {
            const double f = l0 + integrate_gauss(speed, thetas_[j], th, 16) - s;
            const double step = f / speed(th);
            th -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(th))) break;
        }
        return th;
    }

private:
    Vec2 d1(double th) const { return orient_ * dr_(orient_ * th); }
    Vec2 d2(double th) const { return ddr_(orient_ * th); }

    void check_simple() const {
        const int n = 1024;
        std::vector<Vec2> pts(n);
        for (int i = 0; i < n; ++i) pts[i] = r_(2.0 * pi * i / n);
        auto cross = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
        for (int i = 0; i < n; ++i) {
            const Vec2 a = pts[i], b = pts[(i + 1) % n];
            for (int j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                const Vec2 c = pts[j], d = pts[(j + 1) % n];
                const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
                const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
                if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)))
                    throw InvalidInput("curve: parametrization is self-intersecting");
            }
        }
    }

    VecFn r_, dr_, ddr_;
    double orient_ = 1.0;
    std::vector<double> thetas_, ells_, speeds_;
};

} // namespace detail

/// Closed planar curve, unit-speed, clockwise (kappa <= 0 on convex curves).
class Curve {
public:
    explicit Curve(const CurveDefinition& def) : def_(def) {
        switch (def.kind) {
        case CurveKind::circle:
            require(def.radius > 0.0, "circle: radius must be positive");
            impl_ = std::make_shared<detail::CircleImpl>(def.radius);
            name_ = "circle";
            break;
        case CurveKind::strip:
            require(def.length > 0.0, "strip: length must be positive");
            impl_ = std::make_shared<detail::StripImpl>(def.length);
            name_ = "strip";
            break;
        case CurveKind::ellipse: {
            require(def.a > 0.0 && def.b > 0.0, "ellipse: semi-axes must be positive");
            const double a = def.a, b = def.b;
            impl_ = std::make_shared<detail::ParametricImpl>(
                [a, b](double t) { return Vec2(a * std::cos(t), -b * std::sin(t)); },
                [a, b](double t) { return Vec2(-a * std::sin(t), -b * std::cos(t)); },
                [a, b](double t) { return Vec2(-a * std::cos(t), b * std::sin(t)); }, def.table_size);
            name_ = "ellipse";
            break;
        }
        case CurveKind::fourier: {
            bool nonconstant = false;
            for (const auto& m : def.modes) nonconstant = nonconstant || (m.k != 0 && std::abs(m.c) > 0.0);
            if (!nonconstant) throw InvalidInput("fourier curve: needs a nonzero mode with k != 0");
            auto modes = def.modes;
            auto eval = [modes](double t, int order) {
                Complex z = 0.0;
                for (const auto& m : modes) z += std::pow(imag_unit * double(m.k), order) * m.c *
                                                 std::exp(imag_unit * (m.k * t));
                return Vec2(z.real(), z.imag());
            };
            impl_ = std::make_shared<detail::ParametricImpl>([eval](double t) { return eval(t, 0); },
                                                             [eval](double t) { return eval(t, 1); },
                                                             [eval](double t) { return eval(t, 2); },
                                                             def.table_size);
            name_ = "fourier";
            break;
        }
        }
        const int n = 4096;
        for (int i = 0; i < n; ++i) max_abs_kappa_ = std::max(max_abs_kappa_, std::abs(curvature(length() * i / n)));
    }

    static Curve circle(double radius = 1.0) {
        CurveDefinition d;
        d.kind = CurveKind::circle;
        d.radius = radius;
        return Curve(d);
    }
    static Curve ellipse(double a, double b) {
        CurveDefinition d;
        d.kind = CurveKind::ellipse;
        d.a = a;
        d.b = b;
        return Curve(d);
    }
    static Curve fourier(std::vector<FourierMode> modes) {
        CurveDefinition d;
        d.kind = CurveKind::fourier;
        d.modes = std::move(modes);
        return Curve(d);
    }
    static Curve strip(double length) {
        CurveDefinition d;
        d.kind = CurveKind::strip;
        d.length = length;
        return Curve(d);
    }

    const CurveDefinition& definition() const { return def_; }
    const std::string& name() const { return name_; }
    double length() const { return impl_->length; }
    /// False for the flat strip harness, which is periodic but not a Jordan curve.
    bool is_closed() const { return def_.kind != CurveKind::strip; }

    /// Evaluation at arclength s; s is reduced modulo L.
    CurvePoint at(double s) const {
        const double l = length();
        double r = std::fmod(s, l);
        if (r < 0.0) r += l;
        CurvePoint p = impl_->at(r);
        p.s = s;
        return p;
    }
    double curvature(double s) const { return at(s).curvature; }

    /// Sampled at s_i = i L / n.
    std::vector<CurvePoint> sample(int n) const {
        std::vector<CurvePoint> out;
        out.reserve(n);
        for (int i = 0; i < n; ++i) out.push_back(at(length() * i / n));
        return out;
    }

    double max_abs_curvature() const { return max_abs_kappa_; }

    /// Integral of kappa over one period (periodic trapezoid rule).
    double total_curvature(int samples = 4096) const {
        double sum = 0.0;
        for (int i = 0; i < samples; ++i) sum += curvature(length() * i / samples);
        return sum * length() / samples;
    }

    /// Injectivity guard eps_0 = 0.9 / max|kappa| (infinite for flat curves).
    double injectivity_limit() const {
        return max_abs_kappa_ > 0.0 ? 0.9 / max_abs_kappa_ : std::numeric_limits<double>::infinity();
    }

    /// Range of eps on which the metric sandwich with c = 3 max|kappa| holds: 0.2 / max|kappa|.
    double metric_sandwich_limit() const {
        return max_abs_kappa_ > 0.0 ? 0.2 / max_abs_kappa_ : std::numeric_limits<double>::infinity();
    }

private:
    CurveDefinition def_;
    std::string name_;
    std::shared_ptr<const detail::CurveImpl> impl_;
    double max_abs_kappa_ = 0.0;
};

/// Elementary symmetric polynomials H_1..H_{n-1} of the principal curvatures.
inline std::vector<double> mean_curvatures(const std::vector<double>& principal) {
    std::vector<double> e(principal.size() + 1, 0.0);
    e[0] = 1.0;
    for (double k : principal)
        for (std::size_t p = e.size() - 1; p >= 1; --p) e[p] += k * e[p - 1];
    return std::vector<double>(e.begin() + 1, e.end());
}

/// H_p with the convention H_p = 0 for p >= n (p > number of principal curvatures).
inline double mean_curvature(const std::vector<double>& principal, int p) {
    require(p >= 1, "mean_curvature: p must be >= 1");
    if (static_cast<std::size_t>(p) > principal.size()) return 0.0;
    return mean_curvatures(principal)[p - 1];
}

/// Exact mean curvature of the shell boundary at t = side: side kappa / (1 + side eps kappa).
inline double boundary_mean_curvature(double kappa, double eps, int side) {
    return side * kappa / (1.0 + side * eps * kappa);
}

/// Tubular-coordinate metric of the planar shell {sigma(s) + eps t n(s)}, n = -nu the inward normal.
class ShellMetric2D {
public:
    ShellMetric2D(Curve curve, double eps) : curve_(std::move(curve)), eps_(eps) {
        require(eps > 0.0, "shell metric: eps must be positive");
        if (!(eps < curve_.injectivity_limit()))
            throw InvalidInput("shell metric: eps = " + std::to_string(eps) + " exceeds the injectivity guard " +
                               std::to_string(curve_.injectivity_limit()));
    }

    const Curve& curve() const { return curve_; }
    double eps() const { return eps_; }

    /// phi_eps = eps (1 + eps t kappa): area element of the tubular map.
    double weight(double s, double t) const { return weight_at(curve_.curvature(s), t); }
    double weight_at(double kappa, double t) const { return eps_ * (1.0 + eps_ * t * kappa); }

    /// G_11 = (1 + eps t kappa)^2.
    double tangential_metric(double s, double t) const { return tangential_metric_at(curve_.curvature(s), t); }
    double tangential_metric_at(double kappa, double t) const {
        const double q = 1.0 + eps_ * t * kappa;
        return q * q;
    }

    /// det G = eps^2 (1 + eps t kappa)^2.
    double det_metric(double s, double t) const {
        const double w = weight(s, t);
        return w * w;
    }

    /// h^pm = phi_eps(s, pm 1) / eps.
    double boundary_weight(double s, int side) const { return weight(s, side) / eps_; }

    double boundary_mean_curvature(double s, int side) const {
        require(side == 1 || side == -1, "boundary_mean_curvature: side must be +1 or -1");
        return thinshell::boundary_mean_curvature(curve_.curvature(s), eps_, side);
    }

    /// Inward unit normal n(s) = -nu(s).
    Vec2 tubular_normal(double s) const { return -curve_.at(s).normal; }

    Vec2 tubular_map(double s, double t) const {
        const CurvePoint p = curve_.at(s);
        return p.position - eps_ * t * p.normal;
    }

private:
    Curve curve_;
    double eps_;
};

inline double boundary_mean_curvature_exact(const Curve& curve, double eps, int side, double s) {
    return ShellMetric2D(curve, eps).boundary_mean_curvature(s, side);
}

} // namespace thinshell
