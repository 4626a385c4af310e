#pragma once

#include <complex>
#include <span>
#include <vector>

namespace flatflow {

// Spectral calculus for real periodic fields sampled at n uniform points of a
// period-P interval. Coefficients follow the r2c half-spectrum layout
// (k = 0..n/2), normalized so that eval() reproduces the samples.
class TrigSeries {
public:
    TrigSeries() = default;
    TrigSeries(std::span<const double> samples, double period);

    static TrigSeries from_coeffs(std::vector<std::complex<double>> coeffs,
                                  std::size_t n, double period);

    std::size_t size() const { return n_; }
    double period() const { return period_; }
    const std::vector<std::complex<double>>& coeffs() const { return c_; }

    // Value / derivatives at an arbitrary parameter (O(n) Horner over modes).
    double eval(double t, int order = 0) const;

    // Derivative of given order, sampled back on the uniform grid.
    std::vector<double> derivative(int order) const;

    // Samples on the uniform grid (inverse transform).
    std::vector<double> samples() const;

    // Derivative of given order on a finer uniform grid of m >= size() points
    // (zero-padded spectral refinement).
    std::vector<double> dense_samples(std::size_t m, int order = 0) const;

    // Mean value (k = 0 coefficient).
    double mean() const;

    // Antiderivative of the mean-zero part, sampled on the grid; the k = 0
    // coefficient of the result is zero.
    std::vector<double> antiderivative_mean_zero() const;

private:
    std::size_t n_ = 0;
    double period_ = 0.0;
    std::vector<std::complex<double>> c_;  // size n/2 + 1
};

namespace spectral {

// d^order/dt^order of a periodic field on a uniform grid.
std::vector<double> derivative(std::span<const double> f, double period, int order);

// Trapezoidal quadrature over one period (spectrally accurate).
double integrate(std::span<const double> f, double period);

// L2 norm over one period.
double l2_norm(std::span<const double> f, double period);

// Solves -f'' = rhs with periodic BC and zero mean; rhs must be mean-zero
// (its k = 0 coefficient is dropped).
std::vector<double> solve_minus_laplace(std::span<const double> rhs, double period);

// Applies (a + b d^4/dt^4)^{-1}, a > 0, b >= 0.
std::vector<double> solve_helmholtz4(std::span<const double> rhs, double period,
                                     double a, double b);

// Amplitude of Fourier mode k: sqrt(c_k^2 + s_k^2) of the real series.
double mode_amplitude(std::span<const double> f, int k);

}  // namespace spectral

}  // namespace flatflow
