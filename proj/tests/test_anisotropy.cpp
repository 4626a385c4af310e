#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flatflow/anisotropy.hpp"
#include "flatflow/curve.hpp"
#include "oracles.hpp"

using namespace flatflow;
namespace {

Anisotropy make_elliptic41() {
    Mat2 M;
    M << 4.0, 0.0, 0.0, 1.0;
    return Anisotropy::elliptic(M);
}

Anisotropy make_fourier4(double eps = 0.05) {
    return Anisotropy::fourier({{eps, 4}});
}

std::vector<Anisotropy> all_kinds() {
    return {Anisotropy::euclidean(), make_elliptic41(), make_fourier4()};
}

}  // namespace

TEST_CASE("eval basics") {
    CHECK(Anisotropy::euclidean().eval(Vec2(0, 1)) == doctest::Approx(1.0));
    CHECK(make_elliptic41().eval(Vec2(1, 0)) == doctest::Approx(2.0));
    CHECK(make_fourier4().eval(Vec2(1, 0)) == doctest::Approx(1.05));
    CHECK_THROWS_AS(Anisotropy::euclidean().eval(Vec2(0, 0)), std::domain_error);
}

TEST_CASE("one-homogeneity over random directions") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> Uth(0.0, oracle::kTwoPi);
    std::uniform_real_distribution<double> Ul(0.1, 10.0);
    for (const auto& a : all_kinds()) {
        for (int i = 0; i < 1000; ++i) {
            const double th = Uth(rng);
            const double lam = Ul(rng);
            const Vec2 nu(std::cos(th), std::sin(th));
            CHECK(std::abs(a.eval(lam * nu) - lam * a.eval(nu)) < 1e-12 * lam);
        }
    }
}

TEST_CASE("Euler relation and hessian kernel") {
    for (const auto& a : all_kinds()) {
        for (int i = 0; i < 64; ++i) {
            const double th = oracle::kTwoPi * i / 64.0;
            const Vec2 nu(std::cos(th), std::sin(th));
            CHECK(std::abs(a.gradient(nu).dot(nu) - a.eval(nu)) < 1e-10);
            const Vec2 v = 1.7 * nu;
            CHECK((a.hessian(v) * v).norm() < 1e-10);
        }
    }
}

TEST_CASE("gradient and hessian match finite differences") {
    for (const auto& a : all_kinds()) {
        auto f = [&](const Vec2& v) { return a.eval(v); };
        for (int i = 0; i < 16; ++i) {
            const double th = oracle::kTwoPi * (i + 0.3) / 16.0;
            const Vec2 v = 1.3 * Vec2(std::cos(th), std::sin(th));
            const Vec2 g = a.gradient(v);
            const Vec2 gfd = oracle::fd_gradient(f, v);
            CHECK((g - gfd).norm() < 1e-6 * (1.0 + g.norm()));
            const Mat2 H = a.hessian(v);
            const Mat2 Hfd = oracle::fd_hessian(f, v);
            CHECK((H - Hfd).norm() < 1e-5 * (1.0 + H.norm()));
        }
    }
}

TEST_CASE("elliptic gradient from the closed form") {
    // Oracle: grad sqrt(x . M x) = M x / sqrt(x . M x).
    const auto a = make_elliptic41();
    const Vec2 g = a.gradient(Vec2(1, 0));
    CHECK(g.x() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.y() == doctest::Approx(0.0).epsilon(1e-12));
    Mat2 M;
    M << 4, 0, 0, 1;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> Uth(0.0, oracle::kTwoPi);
    for (int i = 0; i < 20; ++i) {
        const double th = Uth(rng);
        const Vec2 v(std::cos(th), std::sin(th));
        const Vec2 want = (M * v) / std::sqrt(v.dot(M * v));
        CHECK((a.gradient(v) - want).norm() < 1e-12);
    }
}

TEST_CASE("euclidean derivatives") {
    const auto a = Anisotropy::euclidean();
    const Vec2 g = a.gradient(Vec2(1, 0));
    CHECK(g.x() == doctest::Approx(1.0));
    CHECK(g.y() == doctest::Approx(0.0));
    const Mat2 H = a.hessian(Vec2(1, 0));
    CHECK(H(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(H(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(H(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("mobility") {
    CHECK(Anisotropy::euclidean().mobility(Vec2(0.6, 0.8)) == doctest::Approx(1.0));
    // Oracle: second derivative of sqrt(4 x1^2 + x2^2) in x2 at (1,0).
    const auto a = make_elliptic41();
    auto phi = [](const Vec2& v) { return std::sqrt(4 * v.x() * v.x() + v.y() * v.y()); };
    const Mat2 Hfd = oracle::fd_hessian(phi, Vec2(1, 0));
    CHECK(a.mobility(Vec2(1, 0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.mobility(Vec2(1, 0)) == doctest::Approx(Hfd(1, 1)).epsilon(1e-5));
    // Fourier: g = h + h'' with h'' = -16 eps cos(4 theta); at theta = 0: 1.05 - 0.8.
    CHECK(make_fourier4().mobility(Vec2(1, 0)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(a.mobility(Vec2(1, 1)), std::domain_error);
}

TEST_CASE("fourier mobility equals h + h'' at all angles") {
    const double eps = 0.05;
    const auto a = make_fourier4(eps);
    for (int i = 0; i < 257; ++i) {
        const double th = oracle::kTwoPi * i / 257.0;
        const double want = 1.0 + eps * std::cos(4 * th) - 16.0 * eps * std::cos(4 * th);
        CHECK(std::abs(a.mobility_angle(th) - want) < 1e-10);
    }
}

TEST_CASE("dual norm") {
    CHECK(Anisotropy::euclidean().dual_norm(Vec2(3, 4)) == doctest::Approx(5.0).epsilon(1e-9));
    // Oracle: dual of sqrt(x . M x) is sqrt(x . M^-1 x).
    CHECK(make_elliptic41().dual_norm(Vec2(1, 0)) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(make_elliptic41().dual_norm(Vec2(0, 0)) == doctest::Approx(0.0));
    // Norm-equivalence band.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (const auto& a : all_kinds()) {
        for (int i = 0; i < 50; ++i) {
            const Vec2 xi(U(rng), U(rng));
            if (xi.norm() < 1e-6) continue;
            const double dn = a.dual_norm(xi);
            CHECK(dn * a.m_phi() <= xi.norm() * (1 + 1e-9));
            CHECK(xi.norm() <= dn * a.M_phi() * (1 + 1e-9));
        }
    }
}

TEST_CASE("duality of smooth norms: phi0(grad phi(nu)) = 1") {
    for (const auto& a : all_kinds()) {
        for (int i = 0; i < 128; ++i) {
            const double th = oracle::kTwoPi * i / 128.0;
            const Vec2 nu(std::cos(th), std::sin(th));
            CHECK(a.dual_norm(a.gradient(nu)) == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("non-convex fourier parameters are rejected") {
    CHECK_THROWS_AS(Anisotropy::fourier({{0.2, 4}}), std::invalid_argument);
}

TEST_CASE("strict convexity constant is reported") {
    CHECK(Anisotropy::euclidean().convexity_J() == doctest::Approx(1.0));
    const auto a = make_fourier4();
    CHECK(a.convexity_J() == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(a.m_phi() == doctest::Approx(0.95).epsilon(1e-6));
    CHECK(a.M_phi() == doctest::Approx(1.05).epsilon(1e-6));
}

TEST_CASE("wulff boundary: euclidean gives the unit circle") {
    const auto W = wulff_boundary(Anisotropy::euclidean(), 128);
    CHECK(W.length() == doctest::Approx(oracle::kTwoPi).epsilon(1e-10));
    CHECK(W.area() == doctest::Approx(std::numbers::pi).epsilon(1e-10));
    for (const auto& p : W.nodes()) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("wulff boundary: elliptic diag(4,1) gives the (2,1) ellipse") {
    const auto W = wulff_boundary(make_elliptic41(), 256);
    for (const auto& p : W.nodes()) {
        CHECK(p.x() * p.x() / 4.0 + p.y() * p.y() == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("wulff boundary has constant anisotropic curvature") {
    for (const auto& a : all_kinds()) {
        const auto W = wulff_boundary(a, 512);
        const auto kphi = aniso_curvature(W, a);
        double mean = 0.0;
        for (double v : kphi) mean += v;
        mean /= static_cast<double>(kphi.size());
        double var = 0.0;
        for (double v : kphi) var += (v - mean) * (v - mean);
        const double stddev = std::sqrt(var / static_cast<double>(kphi.size()));
        CHECK(stddev < 1e-6);
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("wulff boundary rejects tiny node counts") {
    CHECK_THROWS_AS(wulff_boundary(Anisotropy::euclidean(), 8), std::domain_error);
}
