#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace flatflow {

class ClosedCurve;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct FourierTerm {
    double amplitude = 0.0;
    int frequency = 0;
};

// A smooth strictly convex one-homogeneous surface-energy density phi.
// All kinds are represented through the restriction to the unit circle,
// h(theta) = phi(cos theta, sin theta), so that
//   phi(v)    = |v| h(arg v),
//   grad phi  = h e_r + h' e_theta          (0-homogeneous),
//   D^2 phi   = (h + h'')/|v| e_theta (x) e_theta,
// and the mobility is g = h + h''.
class Anisotropy {
public:
    enum class Kind { euclidean, elliptic, fourier };

    static Anisotropy euclidean();
    // phi(x) = sqrt(x . M x), M symmetric positive definite.
    static Anisotropy elliptic(const Mat2& M);
    // h(theta) = 1 + sum eps_m cos(m theta); requires min(h + h'') > 1e-6.
    static Anisotropy fourier(std::vector<FourierTerm> terms);

    Kind kind() const { return kind_; }
    std::string kind_name() const;

    // h and its theta-derivatives, order 0..3.
    double h(double theta, int order = 0) const;

    double eval(const Vec2& v) const;
    Vec2 gradient(const Vec2& v) const;
    Mat2 hessian(const Vec2& v) const;

    // g(nu) = D^2 phi(nu) tau . tau for unit nu; equals (h + h'')(arg nu).
    double mobility(const Vec2& nu) const;
    double mobility_angle(double theta) const { return h(theta, 0) + h(theta, 2); }
    // d/dtheta of the mobility along the unit circle.
    double mobility_dtheta(double theta) const { return h(theta, 1) + h(theta, 3); }

    // phi^0(xi) = sup_{|eta|=1} xi . eta / phi(eta), angular scan + refinement.
    double dual_norm(const Vec2& xi) const;

    double m_phi() const { return m_phi_; }
    double M_phi() const { return M_phi_; }
    // Sampled lower bound for the convexity constant (min of g over 4096 angles).
    double convexity_J() const { return J_; }

private:
    Anisotropy() = default;
    void compute_bounds();

    Kind kind_ = Kind::euclidean;
    Mat2 M_ = Mat2::Identity();
    // Elliptic h^2(theta) = alpha + beta cos 2theta + gamma sin 2theta.
    double alpha_ = 1.0, beta_ = 0.0, gamma_ = 0.0;
    std::vector<FourierTerm> terms_;
    double m_phi_ = 1.0, M_phi_ = 1.0, J_ = 1.0;
};

// Boundary of the Wulff shape of `a`, positively oriented, resampled to n
// uniform-arclength nodes; its anisotropic curvature is constant (= 1).
ClosedCurve wulff_boundary(const Anisotropy& a, int n);

}  // namespace flatflow
