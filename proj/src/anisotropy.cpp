#include "flatflow/anisotropy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "flatflow/curve.hpp"

namespace flatflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Anisotropy Anisotropy::euclidean() {
    Anisotropy a;
    a.kind_ = Kind::euclidean;
    a.compute_bounds();
    return a;
}

Anisotropy Anisotropy::elliptic(const Mat2& M) {
    if ((M - M.transpose()).norm() > 1e-12 * (1.0 + M.norm()))
        throw std::invalid_argument("elliptic anisotropy: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat2> es(M);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("elliptic anisotropy: matrix must be positive definite");
    Anisotropy a;
    a.kind_ = Kind::elliptic;
    a.M_ = M;
    a.alpha_ = 0.5 * (M(0, 0) + M(1, 1));
    a.beta_ = 0.5 * (M(0, 0) - M(1, 1));
    a.gamma_ = M(0, 1);
    a.compute_bounds();
    return a;
}

Anisotropy Anisotropy::fourier(std::vector<FourierTerm> terms) {
    Anisotropy a;
    a.kind_ = Kind::fourier;
    a.terms_ = std::move(terms);
    for (const auto& t : a.terms_) {
        if (t.frequency < 0)
            throw std::invalid_argument("fourier anisotropy: frequency must be nonnegative");
    }
    // Admissibility: strict convexity on the sphere, sampled.
    constexpr int kSamples = 4096;
    double min_g = std::numeric_limits<double>::max();
    double min_h = min_g;
    for (int i = 0; i < kSamples; ++i) {
        const double th = kTwoPi * i / kSamples;
        min_g = std::min(min_g, a.h(th, 0) + a.h(th, 2));
        min_h = std::min(min_h, a.h(th, 0));
    }
    if (min_g <= 1e-6 || min_h <= 0.0)
        throw std::invalid_argument(
            "fourier anisotropy: parameters violate strict convexity (min(h+h'') <= 1e-6)");
    a.compute_bounds();
    return a;
}

std::string Anisotropy::kind_name() const {
    switch (kind_) {
        case Kind::euclidean: return "euclidean";
        case Kind::elliptic: return "elliptic";
        case Kind::fourier: return "fourier";
    }
    return "unknown";
}

void Anisotropy::compute_bounds() {
    constexpr int kSamples = 4096;
    m_phi_ = std::numeric_limits<double>::max();
    M_phi_ = 0.0;
    J_ = std::numeric_limits<double>::max();
    for (int i = 0; i < kSamples; ++i) {
        const double th = kTwoPi * i / kSamples;
        const double hv = h(th, 0);
        m_phi_ = std::min(m_phi_, hv);
        M_phi_ = std::max(M_phi_, hv);
        J_ = std::min(J_, mobility_angle(th));
    }
}

double Anisotropy::h(double theta, int order) const {
    switch (kind_) {
        case Kind::euclidean:
            return order == 0 ? 1.0 : 0.0;
        case Kind::elliptic: {
            // u = h^2 = alpha + beta cos 2t + gamma sin 2t; differentiate sqrt(u).
            const double c2 = std::cos(2.0 * theta), s2 = std::sin(2.0 * theta);
            const double u = alpha_ + beta_ * c2 + gamma_ * s2;
            const double u1 = -2.0 * beta_ * s2 + 2.0 * gamma_ * c2;
            const double u2 = -4.0 * (u - alpha_);
            const double u3 = -4.0 * u1;
            const double h0 = std::sqrt(u);
            if (order == 0) return h0;
            const double h1 = u1 / (2.0 * h0);
            if (order == 1) return h1;
            const double h2 = (u2 - 2.0 * h1 * h1) / (2.0 * h0);
            if (order == 2) return h2;
            const double h3 = (u3 - 6.0 * h1 * h2) / (2.0 * h0);
            if (order == 3) return h3;
            break;
        }
        case Kind::fourier: {
            double acc = (order == 0) ? 1.0 : 0.0;
            for (const auto& t : terms_) {
                const double m = t.frequency;
                const double arg = m * theta;
                double d = 0.0;
                switch (order % 4) {
                    case 0: d = std::cos(arg); break;
                    case 1: d = -std::sin(arg); break;
                    case 2: d = -std::cos(arg); break;
                    case 3: d = std::sin(arg); break;
                }
                acc += t.amplitude * std::pow(m, order) * d;
            }
            return acc;
        }
    }
    throw std::invalid_argument("Anisotropy::h: order must be in 0..3");
}

double Anisotropy::eval(const Vec2& v) const {
    const double r = v.norm();
    if (r <= 0.0) throw std::domain_error("anisotropy eval: zero vector");
    return r * h(std::atan2(v.y(), v.x()), 0);
}

Vec2 Anisotropy::gradient(const Vec2& v) const {
    const double r = v.norm();
    if (r <= 0.0) throw std::domain_error("anisotropy gradient: zero vector");
    const double th = std::atan2(v.y(), v.x());
    const Vec2 er = v / r;
    const Vec2 et(-er.y(), er.x());
    return h(th, 0) * er + h(th, 1) * et;
}

Mat2 Anisotropy::hessian(const Vec2& v) const {
    const double r = v.norm();
    if (r <= 0.0) throw std::domain_error("anisotropy hessian: zero vector");
    const double th = std::atan2(v.y(), v.x());
    const Vec2 er = v / r;
    const Vec2 et(-er.y(), er.x());
    return (mobility_angle(th) / r) * (et * et.transpose());
}

double Anisotropy::mobility(const Vec2& nu) const {
    if (std::abs(nu.norm() - 1.0) > 1e-12)
        throw std::domain_error("anisotropy mobility: input must be a unit vector");
    return mobility_angle(std::atan2(nu.y(), nu.x()));
}

double Anisotropy::dual_norm(const Vec2& xi) const {
    const double r = xi.norm();
    if (r == 0.0) return 0.0;
    // Dense scan of theta -> xi . nu(theta) / h(theta), then golden-section
    // refinement around the best sample. Accuracy is diagnostic-grade.
    constexpr int kScan = 1024;
    auto value = [&](double th) {
        return (xi.x() * std::cos(th) + xi.y() * std::sin(th)) / h(th, 0);
    };
    double best_th = 0.0, best = -std::numeric_limits<double>::max();
    for (int i = 0; i < kScan; ++i) {
        const double th = kTwoPi * i / kScan;
        const double v = value(th);
        if (v > best) { best = v; best_th = th; }
    }
    double lo = best_th - kTwoPi / kScan, hi = best_th + kTwoPi / kScan;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 20; ++it) {
        if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + invphi * (hi - lo); f2 = value(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - invphi * (hi - lo); f1 = value(x1);
        }
    }
    return std::max({best, f1, f2});
}

ClosedCurve wulff_boundary(const Anisotropy& a, int n) {
    if (n < 16) throw std::domain_error("wulff_boundary: need n >= 16");
    if (a.convexity_J() <= 0.0)
        throw std::invalid_argument("wulff_boundary: anisotropy fails strict convexity");
    // x(theta) = grad phi(nu(theta)) traces the Wulff boundary with outer
    // normal nu(theta); positively oriented since g = h + h'' > 0.
    // Sample densely in the normal angle (where ds/dtheta = g varies), then
    // resample down to uniform arclength.
    const int m = std::max(4 * n, 512);
    std::vector<Vec2> pts(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double th = kTwoPi * i / m;
        const Vec2 er(std::cos(th), std::sin(th));
        const Vec2 et(-er.y(), er.x());
        pts[static_cast<std::size_t>(i)] = a.h(th, 0) * er + a.h(th, 1) * et;
    }
    return ClosedCurve::from_samples(pts, n);
}

}  // namespace flatflow
