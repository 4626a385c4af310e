#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flatflow/anisotropy.hpp"
#include "flatflow/errors.hpp"
#include "flatflow/fourier.hpp"

namespace flatflow {

// A closed embedded planar curve sampled at n uniform-arclength nodes,
// positively (counterclockwise) oriented. The underlying smooth curve is the
// trigonometric interpolant of the nodes; frames and curvature come from
// periodic spectral differentiation. Immutable after construction.
class ClosedCurve {
public:
    // Periodic fit through arbitrary ordered points of a simple closed
    // polyline (>= 8 distinct), resampled to n uniform-arclength nodes.
    static ClosedCurve from_points(std::span<const Vec2> points, int n);

    // Uniform-parameter samples of a smooth closed curve (e.g. a lifted or
    // advected node set); resampled to uniform arclength keeping the count,
    // or to n nodes if given.
    static ClosedCurve from_samples(std::span<const Vec2> samples, int n = 0);

    static ClosedCurve circle(double radius, int n, const Vec2& center = Vec2::Zero());
    static ClosedCurve ellipse(double semi_a, double semi_b, int n);

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Vec2>& tangents() const { return tangent_; }
    const std::vector<Vec2>& normals() const { return normal_; }
    const std::vector<double>& curvature() const { return kappa_; }
    double length() const { return length_; }
    double area() const { return area_; }
    double node_spacing() const { return length_ / size(); }
    double param(int i) const { return length_ * i / size(); }

    double max_abs_curvature() const { return max_abs_kappa_; }
    // Paper tube half-width 1/(2 max|kappa|).
    double sigma() const { return 0.5 / max_abs_kappa_; }
    // Gate for all tube operations: min(sigma, half injectivity gap).
    double tube_gate() const { return tube_gate_; }
    // Lower bound on the uniform-ball-condition radius.
    double ubc_radius() const { return ubc_radius_; }

    // Spectral evaluation of the underlying curve at arclength parameter s.
    Vec2 point_at(double s) const;
    Vec2 derivative_at(double s, int order) const;
    Vec2 tangent_at(double s) const;
    Vec2 normal_at(double s) const;
    double curvature_at(double s) const;

    // Periodic spectral derivative with respect to arclength of a nodal
    // field; order 2 is the Laplace-Beltrami operator.
    std::vector<double> tangential_derivative(std::span<const double> f, int order) const;
    // Trapezoidal quadrature over the curve (spectrally accurate).
    double integrate(std::span<const double> f) const;

    struct Projection {
        Vec2 foot;
        double s = 0.0;  // arclength parameter of the foot
        double d = 0.0;  // signed distance, negative inside
    };
    // Projection onto the curve; throws OutOfTubeError outside the tube gate.
    Projection project(const Vec2& x) const;

    // Polygonal refinement of the underlying curve (refine * n vertices).
    std::vector<Vec2> polygon(int refine = 1) const;

    // Winding-number test against the refined polygon.
    bool contains(const Vec2& x, int refine = 4) const;

private:
    ClosedCurve() = default;
    static ClosedCurve build_from_uniform_samples(std::span<const Vec2> samples,
                                                  int n, int passes);
    void finalize();  // caches frames, curvature, gates; validates

    std::vector<Vec2> nodes_;
    std::vector<Vec2> tangent_;
    std::vector<Vec2> normal_;
    std::vector<double> kappa_;
    TrigSeries x_, y_;
    double length_ = 0.0;
    double area_ = 0.0;
    double max_abs_kappa_ = 0.0;
    double tube_gate_ = 0.0;
    double ubc_radius_ = 0.0;
};

// A scalar field psi on the reference curve's nodes describing the normal
// graph { x + psi(x) nu(x) }. Construction enforces ||psi||_inf below the
// reference tube gate.
struct HeightField {
    HeightField(ClosedCurve reference_curve, std::vector<double> values);
    const ClosedCurve reference;
    const std::vector<double> psi;
};

// --- curve operations -------------------------------------------------------

// kappa^phi = g(nu) kappa per node.
std::vector<double> aniso_curvature(const ClosedCurve& E, const Anisotropy& a);

// P_phi(E) = integral of phi(nu) over the curve.
double aniso_perimeter(const ClosedCurve& E, const Anisotropy& a);

// Integral of kappa^phi phi(nu); a constant of the anisotropy alone.
double gauss_bonnet(const ClosedCurve& E, const Anisotropy& a);

// Nodes x_i + psi_i nu_i resampled to uniform arclength. Throws
// ValidationError if the lifted curve self-intersects.
ClosedCurve lift(const HeightField& hf);

// Unresampled lifted node positions (samples of the lifted curve in the
// reference parameter).
std::vector<Vec2> lift_nodes(const HeightField& hf);

struct GraphFrame {
    std::vector<Vec2> tangent;     // tau_F at the lifted points
    std::vector<Vec2> normal;      // nu_F at the lifted points
    std::vector<double> jacobian;  // J = sqrt((1+psi kappa)^2 + psi_s^2)
};
// Closed-form frames of the lifted curve, expressed at the reference nodes.
GraphFrame graph_frame(const HeightField& hf);

struct CurvatureExpansion {
    // kappa^phi of the lifted curve at the lifted points (exact route).
    std::vector<double> kappa_phi;
    // -g(nu) psi'' + kappa^phi of the reference.
    std::vector<double> leading;
    // Remaining first-order terms: -g kappa^2 psi - kappa g'(theta) psi'.
    std::vector<double> linear;
    // kappa_phi - leading - linear; quadratically small in psi.
    std::vector<double> remainder;
};
CurvatureExpansion curvature_expansion(const HeightField& hf, const Anisotropy& a);

enum class GraphFailure { none, out_of_tube, not_graph };
struct GraphExtract {
    std::optional<HeightField> height;
    GraphFailure failure = GraphFailure::none;
    std::string detail;
};
// Height function of F over E, or a typed breakdown.
GraphExtract extract_graph(const ClosedCurve& E, const ClosedCurve& F);

// Both sides of the tangential-gradient pushforward identity for the field
// whose pullback to E is ghat: (integral over F of |grad_F g|^2,
// integral over E of |grad_E ghat|^2 / J).
std::pair<double, double> pushforward_gradient_check(const HeightField& hf,
                                                     std::span<const double> ghat);

// Hausdorff distance by dense mutual node-to-segment distances.
double hausdorff_distance(const ClosedCurve& A, const ClosedCurve& B, int refine = 4);

bool polyline_is_simple(std::span<const Vec2> pts);
bool point_in_polygon(std::span<const Vec2> poly, const Vec2& x);

// Snapshot format {"n":..., "nodes":[[x,y],...], "length":..., "area":...}
// with 17-significant-digit floats.
std::string to_snapshot_json(const ClosedCurve& c);
ClosedCurve curve_from_snapshot_json(const std::string& text);

}  // namespace flatflow
