#include "flatflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace flatflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double polygon_signed_area(std::span<const Vec2> p) {
    double a = 0.0;
    const std::size_t m = p.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % m];
        a += u.x() * v.y() - u.y() * v.x();
    }
    return 0.5 * a;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Proper or improper intersection of open segments (shared endpoints of
// adjacent polygon edges are excluded by the caller).
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross2(b - a, c - a);
    const double d2 = cross2(b - a, d - a);
    const double d3 = cross2(d - c, a - c);
    const double d4 = cross2(d - c, b - c);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return true;
    auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return std::min(p.x(), q.x()) - 1e-15 <= r.x() && r.x() <= std::max(p.x(), q.x()) + 1e-15 &&
               std::min(p.y(), q.y()) - 1e-15 <= r.y() && r.y() <= std::max(p.y(), q.y()) + 1e-15;
    };
    if (d1 == 0 && on_segment(a, b, c)) return true;
    if (d2 == 0 && on_segment(a, b, d)) return true;
    if (d3 == 0 && on_segment(c, d, a)) return true;
    if (d4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

// --- periodic cubic spline (chord-length parameter) -------------------------

struct PeriodicSpline {
    std::vector<double> t;       // knots, t[0] = 0, t[m] = period
    std::vector<Vec2> p;         // values (size m)
    std::vector<Vec2> m2;        // second derivatives at knots (size m)
    double period = 0.0;

    Vec2 eval(double s, int order = 0) const {
        s = std::fmod(s, period);
        if (s < 0) s += period;
        const std::size_t m = p.size();
        std::size_t j = static_cast<std::size_t>(
            std::upper_bound(t.begin(), t.end() - 1, s) - t.begin());
        j = (j == 0) ? 0 : j - 1;
        const double h = t[j + 1] - t[j];
        const double A = (t[j + 1] - s) / h, B = (s - t[j]) / h;
        const Vec2 pa = p[j], pb = p[(j + 1) % m];
        const Vec2 Ma = m2[j], Mb = m2[(j + 1) % m];
        if (order == 0) {
            return A * pa + B * pb +
                   ((A * A * A - A) * Ma + (B * B * B - B) * Mb) * (h * h / 6.0);
        }
        if (order == 1) {
            return (pb - pa) / h +
                   ((3.0 * B * B - 1.0) * Mb - (3.0 * A * A - 1.0) * Ma) * (h / 6.0);
        }
        return A * Ma + B * Mb;
    }
};

// Cyclic tridiagonal solve (Thomas + Sherman-Morrison).
std::vector<double> solve_cyclic_tridiag(std::vector<double> a, std::vector<double> b,
                                         std::vector<double> c, std::vector<double> r) {
    const std::size_t n = b.size();
    const double alpha = a[0], beta = c[n - 1];
    const double gamma = -b[0];
    std::vector<double> bb = b;
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    auto thomas = [&](std::vector<double> rhs) {
        std::vector<double> cp(n), dp(n);
        cp[0] = c[0] / bb[0];
        dp[0] = rhs[0] / bb[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double mden = bb[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / mden;
            dp[i] = (rhs[i] - a[i] * dp[i - 1]) / mden;
        }
        std::vector<double> x(n);
        x[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
        return x;
    };
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = beta;
    auto x = thomas(r);
    auto z = thomas(u);
    const double fact = (x[0] + alpha * x[n - 1] / gamma) /
                        (1.0 + z[0] + alpha * z[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

PeriodicSpline fit_periodic_spline(std::span<const Vec2> pts) {
    const std::size_t m = pts.size();
    PeriodicSpline sp;
    sp.p.assign(pts.begin(), pts.end());
    sp.t.resize(m + 1);
    sp.t[0] = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        sp.t[i + 1] = sp.t[i] + (pts[(i + 1) % m] - pts[i]).norm();
    sp.period = sp.t[m];
    std::vector<double> lo(m), di(m), up(m);
    std::vector<double> rx(m), ry(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double hm = sp.t[i + 1] - sp.t[i];
        const double hp = (i == 0) ? sp.t[1] - sp.t[0] : hm;
        const double h_prev = (i == 0) ? sp.t[m] - sp.t[m - 1] : sp.t[i] - sp.t[i - 1];
        const double h_next = sp.t[i + 1] - sp.t[i];
        lo[i] = h_prev / 6.0;
        di[i] = (h_prev + h_next) / 3.0;
        up[i] = h_next / 6.0;
        const Vec2 prev = pts[(i + m - 1) % m], next = pts[(i + 1) % m];
        const Vec2 rhs = (next - pts[i]) / h_next - (pts[i] - prev) / h_prev;
        rx[i] = rhs.x();
        ry[i] = rhs.y();
        (void)hp;
    }
    auto mx = solve_cyclic_tridiag(lo, di, up, rx);
    auto my = solve_cyclic_tridiag(lo, di, up, ry);
    sp.m2.resize(m);
    for (std::size_t i = 0; i < m; ++i) sp.m2[i] = Vec2(mx[i], my[i]);
    return sp;
}

// Arclength positions of the knots plus total length, 5-point Gauss per span.
std::pair<std::vector<double>, double> spline_arclength(const PeriodicSpline& sp) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                                 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
    const std::size_t m = sp.p.size();
    std::vector<double> sigma(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double ta = sp.t[j], tb = sp.t[j + 1];
        const double half = 0.5 * (tb - ta), mid = 0.5 * (ta + tb);
        double len = 0.0;
        for (int q = 0; q < 5; ++q)
            len += gw[q] * sp.eval(mid + half * gx[q], 1).norm();
        sigma[j + 1] = sigma[j] + len * half;
    }
    return {sigma, sigma[m]};
}

// Trigonometric interpolation through points at arbitrary parameters in
// [0,1): returns series coefficients in the r2c layout. Falls back is
// handled by the caller via the returned residual.
struct NonUniformFit {
    TrigSeries x, y;
    double residual = 0.0;
};

NonUniformFit trig_fit_nonuniform(std::span<const double> u, std::span<const Vec2> pts) {
    const std::size_t m = u.size();
    Eigen::MatrixXd A(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        std::size_t col = 1;
        const std::size_t kmax = m / 2;
        for (std::size_t k = 1; k <= kmax && col < m; ++k) {
            A(i, col++) = std::cos(kTwoPi * k * u[i]);
            if (col < m) A(i, col++) = std::sin(kTwoPi * k * u[i]);
        }
    }
    Eigen::MatrixXd rhs(m, 2);
    for (std::size_t i = 0; i < m; ++i) {
        rhs(i, 0) = pts[i].x();
        rhs(i, 1) = pts[i].y();
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::MatrixXd coef = lu.solve(rhs);
    NonUniformFit fit;
    fit.residual = (A * coef - rhs).cwiseAbs().maxCoeff() /
                   (1.0 + rhs.cwiseAbs().maxCoeff());
    auto to_series = [&](int col) {
        std::vector<std::complex<double>> c(m / 2 + 1, {0.0, 0.0});
        c[0] = coef(0, col);
        std::size_t idx = 1;
        const std::size_t kmax = m / 2;
        for (std::size_t k = 1; k <= kmax && idx < m; ++k) {
            const double a = coef(idx++, col);
            const double b = (idx < m) ? coef(idx++, col) : 0.0;
            if (m % 2 == 0 && k == kmax) {
                c[k] = std::complex<double>(a, 0.0);
            } else {
                c[k] = 0.5 * std::complex<double>(a, -b);
            }
        }
        return TrigSeries::from_coeffs(std::move(c), m, 1.0);
    };
    fit.x = to_series(0);
    fit.y = to_series(1);
    return fit;
}

// Arclength machinery of a coordinate-series pair over [0, period).
struct ArcData {
    TrigSeries cum;     // antiderivative of the mean-zero part of the speed
    double length = 0;  // integral of the speed over one period
    double sigma0 = 0;

    double sigma(double t, double period) const {
        return length * t / period + cum.eval(t) - sigma0;
    }
    double speed(double t, double period) const {
        return length / period + cum.eval(t, 1);
    }
};

ArcData arc_data(const TrigSeries& X, const TrigSeries& Y) {
    const std::size_t fine = 4 * X.size();
    auto dx = X.dense_samples(fine, 1);
    auto dy = Y.dense_samples(fine, 1);
    std::vector<double> speed(fine);
    for (std::size_t i = 0; i < fine; ++i) speed[i] = std::hypot(dx[i], dy[i]);
    TrigSeries S(speed, X.period());
    ArcData a;
    a.length = S.mean() * X.period();
    a.cum = TrigSeries(S.antiderivative_mean_zero(), X.period());
    a.sigma0 = a.cum.eval(0.0);
    if (!(a.length > 0.0))
        throw ValidationError("resample: degenerate curve (zero length)");
    return a;
}

// Relative deviation of consecutive-node arclength spacing from uniform,
// measured against the series through the nodes themselves.
double spacing_deviation(const TrigSeries& X, const TrigSeries& Y) {
    const ArcData a = arc_data(X, Y);
    const std::size_t n = X.size();
    const double ds = a.length / static_cast<double>(n);
    double dev = 0.0;
    double prev = a.sigma(0.0, X.period());
    for (std::size_t i = 1; i <= n; ++i) {
        const double cur = a.sigma(X.period() * static_cast<double>(i) / n, X.period());
        dev = std::max(dev, std::abs((cur - prev) / ds - 1.0));
        prev = cur;
    }
    return dev;
}

}  // namespace

// --- ClosedCurve -------------------------------------------------------------

ClosedCurve ClosedCurve::build_from_uniform_samples(std::span<const Vec2> samples,
                                                    int n, int passes) {
    std::size_t m = samples.size();
    std::vector<double> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = samples[i].x();
        ys[i] = samples[i].y();
    }
    TrigSeries X(xs, 1.0), Y(ys, 1.0);
    const std::size_t target = static_cast<std::size_t>(n);
    const int max_passes = std::max(passes, 8);
    for (int pass = 0; pass < max_passes; ++pass) {
        // Stop once the nodes are uniform with respect to their own
        // interpolant (fixed point of the re-parameterization map).
        if (X.size() == target && spacing_deviation(X, Y) < 1e-9) break;
        const ArcData arc = arc_data(X, Y);
        const double L = arc.length;
        std::vector<double> nx(target), ny(target);
        double t = 0.0;
        for (std::size_t i = 0; i < target; ++i) {
            const double want = L * static_cast<double>(i) / static_cast<double>(target);
            // Safeguarded Newton on the monotone arclength function.
            double lo = t, hi = t + 2.0 / static_cast<double>(target) + 0.25;
            while (arc.sigma(hi, 1.0) < want && hi < 2.5) hi += 0.25;
            for (int it = 0; it < 100; ++it) {
                const double f = arc.sigma(t, 1.0) - want;
                if (std::abs(f) < 1e-14 * L) break;
                if (f > 0) hi = std::min(hi, t); else lo = std::max(lo, t);
                double step = f / std::max(arc.speed(t, 1.0), 1e-12 * L);
                double tn = t - step;
                if (tn <= lo || tn >= hi) tn = 0.5 * (lo + hi);
                t = tn;
            }
            nx[i] = X.eval(t);
            ny[i] = Y.eval(t);
        }
        X = TrigSeries(nx, 1.0);
        Y = TrigSeries(ny, 1.0);
    }
    ClosedCurve c;
    const double total_len = arc_data(X, Y).length;
    c.length_ = total_len;
    auto fx = X.samples();
    auto fy = Y.samples();
    c.nodes_.resize(target);
    for (std::size_t i = 0; i < target; ++i) c.nodes_[i] = Vec2(fx[i], fy[i]);
    c.x_ = TrigSeries(fx, total_len);
    c.y_ = TrigSeries(fy, total_len);
    c.finalize();
    return c;
}

void ClosedCurve::finalize() {
    const std::size_t n = nodes_.size();
    if (n < 16) throw std::domain_error("ClosedCurve: need at least 16 nodes");
    auto dx = x_.derivative(1);
    auto dy = y_.derivative(1);
    auto ddx = x_.derivative(2);
    auto ddy = y_.derivative(2);
    tangent_.resize(n);
    normal_.resize(n);
    kappa_.resize(n);
    std::vector<double> speed(n);
    for (std::size_t i = 0; i < n; ++i) {
        speed[i] = std::hypot(dx[i], dy[i]);
        tangent_[i] = Vec2(dx[i], dy[i]) / speed[i];
        normal_[i] = Vec2(tangent_[i].y(), -tangent_[i].x());
        kappa_[i] = (dx[i] * ddy[i] - dy[i] * ddx[i]) / (speed[i] * speed[i] * speed[i]);
    }
    const double dev = spacing_deviation(x_, y_);
    if (dev > 1e-6)
        throw ValidationError("ClosedCurve: arclength parameterization not uniform "
                              "(under-resolved curve), deviation " +
                              std::to_string(dev));
    length_ = spectral::integrate(speed, length_);
    // Shoelace in spectral form.
    std::vector<double> xy(n);
    for (std::size_t i = 0; i < n; ++i)
        xy[i] = nodes_[i].x() * dy[i] - nodes_[i].y() * dx[i];
    area_ = 0.5 * spectral::integrate(xy, length_);
    if (area_ <= 0.0)
        throw ValidationError("ClosedCurve: orientation must be positive (area > 0)");
    max_abs_kappa_ = 0.0;
    for (double k : kappa_) max_abs_kappa_ = std::max(max_abs_kappa_, std::abs(k));
    if (max_abs_kappa_ <= 0.0) max_abs_kappa_ = 1e-300;

    auto poly = polygon(2);
    if (!polyline_is_simple(poly))
        throw ValidationError("ClosedCurve: curve is self-intersecting");

    // Normal-injectivity sweep: global near-contacts between far-apart nodes.
    double min_gap = std::numeric_limits<double>::max();
    const double ds = length_ / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double arc = std::min<double>(j - i, n - (j - i)) * ds;
            const double chord = (nodes_[i] - nodes_[j]).norm();
            if (arc > 2.0 * chord) min_gap = std::min(min_gap, chord);
        }
    }
    const double half_gap = 0.5 * min_gap;
    ubc_radius_ = std::min(1.0 / max_abs_kappa_, half_gap);
    tube_gate_ = std::min(0.5 / max_abs_kappa_, half_gap);
}

ClosedCurve ClosedCurve::from_points(std::span<const Vec2> points, int n) {
    std::vector<Vec2> pts(points.begin(), points.end());
    if (pts.size() >= 2 && (pts.front() - pts.back()).norm() < 1e-14) pts.pop_back();
    // Collapse consecutive duplicates.
    std::vector<Vec2> distinct;
    for (const auto& p : pts) {
        if (distinct.empty() || (p - distinct.back()).norm() > 1e-14) distinct.push_back(p);
    }
    if (distinct.size() >= 2 && (distinct.front() - distinct.back()).norm() <= 1e-14)
        distinct.pop_back();
    if (distinct.size() < 8)
        throw std::domain_error("from_points: need at least 8 distinct points");
    if (!polyline_is_simple(distinct))
        throw ValidationError("from_points: input polyline self-intersects");
    if (polygon_signed_area(distinct) < 0.0)
        std::reverse(distinct.begin(), distinct.end());

    auto sp = fit_periodic_spline(distinct);
    auto [sigma, total] = spline_arclength(sp);
    const std::size_t m = distinct.size();
    std::vector<double> u(m);
    for (std::size_t i = 0; i < m; ++i) u[i] = sigma[i] / total;

    bool fit_ok = false;
    std::vector<Vec2> samples;
    if (m <= 384) {
        auto fit = trig_fit_nonuniform(u, distinct);
        if (fit.residual < 1e-8) {
            const std::size_t ns = std::max<std::size_t>(m, static_cast<std::size_t>(n));
            samples.resize(ns);
            for (std::size_t i = 0; i < ns; ++i) {
                const double t = static_cast<double>(i) / static_cast<double>(ns);
                samples[i] = Vec2(fit.x.eval(t), fit.y.eval(t));
            }
            // Reject fits that oscillate between the data points.
            double max_seg = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                max_seg = std::max(max_seg, (distinct[(i + 1) % m] - distinct[i]).norm());
            double worst = 0.0;
            for (const auto& p : samples) {
                double best = std::numeric_limits<double>::max();
                for (std::size_t j = 0; j < m; ++j) {
                    best = std::min(best, point_segment_distance(p, distinct[j],
                                                                 distinct[(j + 1) % m]));
                }
                worst = std::max(worst, best);
            }
            fit_ok = worst < 0.75 * max_seg;
        }
    }
    if (!fit_ok) {
        // Large or ill-conditioned interpolation: fall back to dense spline
        // sampling at uniform spline arclength.
        const std::size_t ns = std::max<std::size_t>(4 * m, static_cast<std::size_t>(2 * n));
        samples.assign(ns, Vec2::Zero());
        std::size_t seg = 0;
        for (std::size_t i = 0; i < ns; ++i) {
            const double want = total * static_cast<double>(i) / static_cast<double>(ns);
            while (seg + 1 < m && sigma[seg + 1] < want) ++seg;
            const double frac = (want - sigma[seg]) /
                                std::max(sigma[seg + 1] - sigma[seg], 1e-300);
            const double t = sp.t[seg] + frac * (sp.t[seg + 1] - sp.t[seg]);
            samples[i] = sp.eval(t);
        }
    }
    return build_from_uniform_samples(samples, n, 3);
}

ClosedCurve ClosedCurve::from_samples(std::span<const Vec2> samples, int n) {
    const int target = n > 0 ? n : static_cast<int>(samples.size());
    return build_from_uniform_samples(samples, target, 2);
}

ClosedCurve ClosedCurve::circle(double radius, int n, const Vec2& center) {
    if (!(radius > 0.0)) throw std::domain_error("circle: radius must be positive");
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        pts[static_cast<std::size_t>(i)] =
            center + radius * Vec2(std::cos(th), std::sin(th));
    }
    return build_from_uniform_samples(pts, n, 1);
}

ClosedCurve ClosedCurve::ellipse(double semi_a, double semi_b, int n) {
    if (!(semi_a > 0.0) || !(semi_b > 0.0))
        throw std::domain_error("ellipse: semi-axes must be positive");
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        pts[static_cast<std::size_t>(i)] = Vec2(semi_a * std::cos(th), semi_b * std::sin(th));
    }
    return build_from_uniform_samples(pts, n, 3);
}

Vec2 ClosedCurve::point_at(double s) const { return Vec2(x_.eval(s), y_.eval(s)); }

Vec2 ClosedCurve::derivative_at(double s, int order) const {
    return Vec2(x_.eval(s, order), y_.eval(s, order));
}

Vec2 ClosedCurve::tangent_at(double s) const {
    Vec2 d = derivative_at(s, 1);
    return d / d.norm();
}

Vec2 ClosedCurve::normal_at(double s) const {
    const Vec2 t = tangent_at(s);
    return Vec2(t.y(), -t.x());
}

double ClosedCurve::curvature_at(double s) const {
    const Vec2 d = derivative_at(s, 1);
    const Vec2 dd = derivative_at(s, 2);
    const double sp = d.norm();
    return cross2(d, dd) / (sp * sp * sp);
}

std::vector<double> ClosedCurve::tangential_derivative(std::span<const double> f,
                                                       int order) const {
    if (order < 1 || order > 4)
        throw std::domain_error("tangential_derivative: order must be in 1..4");
    if (f.size() != nodes_.size())
        throw std::domain_error("tangential_derivative: field size mismatch");
    return spectral::derivative(f, length_, order);
}

double ClosedCurve::integrate(std::span<const double> f) const {
    if (f.size() != nodes_.size())
        throw std::domain_error("integrate: field size mismatch");
    return spectral::integrate(f, length_);
}

ClosedCurve::Projection ClosedCurve::project(const Vec2& p) const {
    const std::size_t n = nodes_.size();
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = (nodes_[i] - p).squaredNorm();
        if (d2 < best_d2) { best_d2 = d2; best = i; }
    }
    const double ds = length_ / static_cast<double>(n);
    // rho(s) = (gamma - p) . gamma' vanishes at the foot; safeguarded Newton.
    auto rho = [&](double s) { return (point_at(s) - p).dot(derivative_at(s, 1)); };
    double lo = param(static_cast<int>(best)) - ds;
    double hi = param(static_cast<int>(best)) + ds;
    double rl = rho(lo), rh = rho(hi);
    int widen = 0;
    while ((rl > 0.0) == (rh > 0.0) && widen < 6) {
        lo -= ds; hi += ds;
        rl = rho(lo); rh = rho(hi);
        ++widen;
    }
    double s = param(static_cast<int>(best));
    for (int it = 0; it < 100; ++it) {
        const Vec2 g = point_at(s);
        const Vec2 g1 = derivative_at(s, 1);
        const Vec2 g2 = derivative_at(s, 2);
        const double f = (g - p).dot(g1);
        const double fp = g1.squaredNorm() + (g - p).dot(g2);
        if (f > 0) hi = s; else lo = s;
        double sn = (fp != 0.0) ? s - f / fp : 0.5 * (lo + hi);
        if (sn <= lo || sn >= hi) sn = 0.5 * (lo + hi);
        if (std::abs(sn - s) < 1e-15 * length_) { s = sn; break; }
        s = sn;
    }
    Projection pr;
    pr.s = std::fmod(s, length_);
    if (pr.s < 0) pr.s += length_;
    pr.foot = point_at(pr.s);
    pr.d = (p - pr.foot).dot(normal_at(pr.s));
    if (!(std::abs(pr.d) < tube_gate_))
        throw OutOfTubeError("project: point outside the tubular neighborhood");
    return pr;
}

std::vector<Vec2> ClosedCurve::polygon(int refine) const {
    const std::size_t m = nodes_.size() * static_cast<std::size_t>(std::max(refine, 1));
    if (refine <= 1) return nodes_;
    auto fx = x_.dense_samples(m);
    auto fy = y_.dense_samples(m);
    std::vector<Vec2> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = Vec2(fx[i], fy[i]);
    return out;
}

bool ClosedCurve::contains(const Vec2& p, int refine) const {
    return point_in_polygon(polygon(refine), p);
}

// --- HeightField -------------------------------------------------------------

HeightField::HeightField(ClosedCurve reference_curve, std::vector<double> values)
    : reference(std::move(reference_curve)), psi(std::move(values)) {
    if (psi.size() != static_cast<std::size_t>(reference.size()))
        throw std::domain_error("HeightField: field size mismatch");
    double m = 0.0;
    for (double v : psi) m = std::max(m, std::abs(v));
    if (!(m < reference.tube_gate()))
        throw std::domain_error("HeightField: ||psi||_inf must stay below the tube gate");
}

// --- operations --------------------------------------------------------------

std::vector<double> aniso_curvature(const ClosedCurve& E, const Anisotropy& a) {
    const auto& nu = E.normals();
    const auto& k = E.curvature();
    std::vector<double> out(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i)
        out[i] = a.mobility_angle(std::atan2(nu[i].y(), nu[i].x())) * k[i];
    return out;
}

double aniso_perimeter(const ClosedCurve& E, const Anisotropy& a) {
    const auto& nu = E.normals();
    std::vector<double> f(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) f[i] = a.eval(nu[i]);
    return E.integrate(f);
}

double gauss_bonnet(const ClosedCurve& E, const Anisotropy& a) {
    const auto kphi = aniso_curvature(E, a);
    const auto& nu = E.normals();
    std::vector<double> f(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) f[i] = kphi[i] * a.eval(nu[i]);
    return E.integrate(f);
}

std::vector<Vec2> lift_nodes(const HeightField& hf) {
    const auto& E = hf.reference;
    std::vector<Vec2> out(static_cast<std::size_t>(E.size()));
    for (int i = 0; i < E.size(); ++i) {
        const std::size_t j = static_cast<std::size_t>(i);
        out[j] = E.nodes()[j] + hf.psi[j] * E.normals()[j];
    }
    return out;
}

ClosedCurve lift(const HeightField& hf) {
    return ClosedCurve::from_samples(lift_nodes(hf), hf.reference.size());
}

GraphFrame graph_frame(const HeightField& hf) {
    const auto& E = hf.reference;
    const std::size_t n = static_cast<std::size_t>(E.size());
    const auto dpsi = E.tangential_derivative(hf.psi, 1);
    GraphFrame fr;
    fr.tangent.resize(n);
    fr.normal.resize(n);
    fr.jacobian.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 1.0 + hf.psi[i] * E.curvature()[i];
        const double b = dpsi[i];
        const double J = std::sqrt(a * a + b * b);
        fr.jacobian[i] = J;
        fr.tangent[i] = (a * E.tangents()[i] + b * E.normals()[i]) / J;
        fr.normal[i] = (-b * E.tangents()[i] + a * E.normals()[i]) / J;
    }
    return fr;
}

CurvatureExpansion curvature_expansion(const HeightField& hf, const Anisotropy& a) {
    const auto& E = hf.reference;
    const std::size_t n = static_cast<std::size_t>(E.size());
    const auto fr = graph_frame(hf);
    // Exact route: kappa^phi_F = d/ds [grad phi(nu_F)] . tau_F / J at the
    // lifted points, with s the reference arclength.
    std::vector<double> wx(n), wy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 w = a.gradient(fr.normal[i]);
        wx[i] = w.x();
        wy[i] = w.y();
    }
    const auto dwx = spectral::derivative(wx, E.length(), 1);
    const auto dwy = spectral::derivative(wy, E.length(), 1);
    const auto dpsi = E.tangential_derivative(hf.psi, 1);
    const auto ddpsi = E.tangential_derivative(hf.psi, 2);
    CurvatureExpansion ex;
    ex.kappa_phi.resize(n);
    ex.leading.resize(n);
    ex.linear.resize(n);
    ex.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = std::atan2(E.normals()[i].y(), E.normals()[i].x());
        const double g = a.mobility_angle(theta);
        const double gp = a.mobility_dtheta(theta);
        const double k = E.curvature()[i];
        ex.kappa_phi[i] = (dwx[i] * fr.tangent[i].x() + dwy[i] * fr.tangent[i].y()) /
                          fr.jacobian[i];
        ex.leading[i] = -g * ddpsi[i] + g * k;
        ex.linear[i] = -g * k * k * hf.psi[i] - k * gp * dpsi[i];
        ex.remainder[i] = ex.kappa_phi[i] - ex.leading[i] - ex.linear[i];
    }
    return ex;
}

GraphExtract extract_graph(const ClosedCurve& E, const ClosedCurve& F) {
    GraphExtract out;
    const std::size_t nF = static_cast<std::size_t>(F.size());
    std::vector<double> feet(nF), dist(nF);
    for (std::size_t j = 0; j < nF; ++j) {
        try {
            auto pr = E.project(F.nodes()[j]);
            feet[j] = pr.s;
            dist[j] = pr.d;
        } catch (const OutOfTubeError&) {
            out.failure = GraphFailure::out_of_tube;
            out.detail = "node " + std::to_string(j) + " of F outside the tube of E";
            return out;
        }
    }
    // Bijection certificate: foot parameters wind once, strictly monotone.
    double total = 0.0;
    for (std::size_t j = 0; j < nF; ++j) {
        double inc = feet[(j + 1) % nF] - feet[j];
        if (inc <= 0) inc += E.length();
        if (inc <= 0 || inc >= E.length()) {
            out.failure = GraphFailure::not_graph;
            out.detail = "projection onto E is not monotone";
            return out;
        }
        total += inc;
    }
    if (std::abs(total - E.length()) > 1e-9 * E.length()) {
        out.failure = GraphFailure::not_graph;
        out.detail = "foot parameters do not wind exactly once";
        return out;
    }
    // Sample psi at E's nodes: intersect each normal ray with F.
    const std::size_t nE = static_cast<std::size_t>(E.size());
    std::vector<double> psi(nE);
    for (std::size_t i = 0; i < nE; ++i) {
        const double si = E.param(static_cast<int>(i));
        // Initial guess from the nearest projected node of F.
        std::size_t jbest = 0;
        double gap_best = std::numeric_limits<double>::max();
        for (std::size_t j = 0; j < nF; ++j) {
            double gap = std::abs(feet[j] - si);
            gap = std::min(gap, E.length() - gap);
            if (gap < gap_best) { gap_best = gap; jbest = j; }
        }
        double u = F.param(static_cast<int>(jbest));
        double t = dist[jbest];
        const Vec2 xi = E.nodes()[i];
        const Vec2 nu = E.normals()[i];
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            const Vec2 r = F.point_at(u) - xi - t * nu;
            if (r.norm() < 1e-13 * (1.0 + E.length())) { ok = true; break; }
            const Vec2 gu = F.derivative_at(u, 1);
            const double det = gu.x() * (-nu.y()) - gu.y() * (-nu.x());
            if (std::abs(det) < 1e-300) break;
            const double du = (-r.x() * (-nu.y()) + r.y() * (-nu.x())) / det;
            const double dt = (gu.x() * (-r.y()) + gu.y() * r.x()) / det;
            u += du;
            t += dt;
            if (std::abs(t) > 4.0 * E.tube_gate()) break;
        }
        if (!ok) {
            out.failure = GraphFailure::not_graph;
            out.detail = "normal ray of E does not meet F transversally";
            return out;
        }
        if (!(std::abs(t) < E.tube_gate())) {
            out.failure = GraphFailure::out_of_tube;
            out.detail = "height exceeds the tube gate";
            return out;
        }
        psi[i] = t;
    }
    out.height.emplace(E, std::move(psi));
    return out;
}

std::pair<double, double> pushforward_gradient_check(const HeightField& hf,
                                                     std::span<const double> ghat) {
    const auto& E = hf.reference;
    const std::size_t n = static_cast<std::size_t>(E.size());
    if (ghat.size() != n)
        throw std::domain_error("pushforward_gradient_check: field size mismatch");
    const auto fr = graph_frame(hf);
    const auto dg = E.tangential_derivative(ghat, 1);
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) integrand[i] = dg[i] * dg[i] / fr.jacobian[i];
    const double rhs = E.integrate(integrand);

    // Independent route: transport ghat to the resampled lift and
    // differentiate in its own arclength.
    const ClosedCurve F = lift(hf);
    TrigSeries G(ghat, E.length());
    std::vector<double> gF(static_cast<std::size_t>(F.size()));
    for (int i = 0; i < F.size(); ++i) {
        const auto pr = E.project(F.nodes()[static_cast<std::size_t>(i)]);
        gF[static_cast<std::size_t>(i)] = G.eval(pr.s);
    }
    const auto dgF = F.tangential_derivative(gF, 1);
    std::vector<double> i2(dgF.size());
    for (std::size_t i = 0; i < dgF.size(); ++i) i2[i] = dgF[i] * dgF[i];
    const double lhs = F.integrate(i2);
    return {lhs, rhs};
}

double hausdorff_distance(const ClosedCurve& A, const ClosedCurve& B, int refine) {
    const auto pa = A.polygon(refine);
    const auto pb = B.polygon(refine);
    auto one_sided = [](const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::max();
            for (std::size_t j = 0; j < to.size(); ++j) {
                best = std::min(best,
                                point_segment_distance(p, to[j], to[(j + 1) % to.size()]));
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(pa, pb), one_sided(pb, pa));
}

bool polyline_is_simple(std::span<const Vec2> pts) {
    const std::size_t m = pts.size();
    if (m < 3) return false;
    // Spatial hash on segment bounding boxes.
    double maxlen = 0.0;
    Vec2 lo = pts[0], hi = pts[0];
    for (std::size_t i = 0; i < m; ++i) {
        maxlen = std::max(maxlen, (pts[(i + 1) % m] - pts[i]).norm());
        lo = lo.cwiseMin(pts[i]);
        hi = hi.cwiseMax(pts[i]);
    }
    if (maxlen <= 0.0) return false;
    const double cell = maxlen * 1.01;
    auto key = [&](int cx, int cy) {
        return static_cast<long long>(cx) * 1000003LL + cy;
    };
    std::unordered_map<long long, std::vector<std::size_t>> grid;
    auto cells_of = [&](std::size_t i, auto&& fn) {
        const Vec2& a = pts[i];
        const Vec2& b = pts[(i + 1) % m];
        const int x0 = static_cast<int>(std::floor(std::min(a.x(), b.x()) / cell));
        const int x1 = static_cast<int>(std::floor(std::max(a.x(), b.x()) / cell));
        const int y0 = static_cast<int>(std::floor(std::min(a.y(), b.y()) / cell));
        const int y1 = static_cast<int>(std::floor(std::max(a.y(), b.y()) / cell));
        for (int cx = x0; cx <= x1; ++cx)
            for (int cy = y0; cy <= y1; ++cy) fn(key(cx, cy));
    };
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<long long> seen;
        bool bad = false;
        cells_of(i, [&](long long k) {
            if (bad) return;
            for (std::size_t j : grid[k]) {
                const std::size_t gap = (i > j) ? i - j : j - i;
                if (gap == 1 || gap == m - 1) continue;  // adjacent segments
                if (segments_intersect(pts[i], pts[(i + 1) % m], pts[j],
                                       pts[(j + 1) % m])) {
                    bad = true;
                    return;
                }
            }
            seen.push_back(k);
        });
        if (bad) return false;
        for (long long k : seen) grid[k].push_back(i);
        // cells_of may visit a key twice only for degenerate boxes; harmless.
    }
    return true;
}

bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p) {
    bool inside = false;
    const std::size_t m = poly.size();
    for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if (((a.y() > p.y()) != (b.y() > p.y()))) {
            const double x_int = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x_int) inside = !inside;
        }
    }
    return inside;
}

std::string to_snapshot_json(const ClosedCurve& c) {
    std::string out;
    out.reserve(64 + 48 * static_cast<std::size_t>(c.size()));
    char buf[128];
    std::snprintf(buf, sizeof buf, "{\"n\": %d, \"nodes\": [", c.size());
    out += buf;
    for (int i = 0; i < c.size(); ++i) {
        const auto& p = c.nodes()[static_cast<std::size_t>(i)];
        std::snprintf(buf, sizeof buf, "%s[%.17g, %.17g]", i ? ", " : "", p.x(), p.y());
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "], \"length\": %.17g, \"area\": %.17g}", c.length(),
                  c.area());
    out += buf;
    return out;
}

ClosedCurve curve_from_snapshot_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw ValidationError("curve snapshot: missing nodes array");
    std::vector<Vec2> pts;
    for (const auto& e : j["nodes"]) pts.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    const int n = j.value("n", static_cast<int>(pts.size()));
    return ClosedCurve::from_samples(pts, n);
}

}  // namespace flatflow
