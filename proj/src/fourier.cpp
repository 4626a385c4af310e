#include "flatflow/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace flatflow {

namespace {

// FFTW plans are cached per size; plan creation is not thread-safe, execution
// with the new-array interface is.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::size_t n = 0;
};

std::mutex plan_mutex;

PlanPair& plans_for(std::size_t n) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    PlanPair p;
    p.n = n;
    std::vector<double> re(n);
    std::vector<std::complex<double>> co(n / 2 + 1);
    p.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(),
                                 reinterpret_cast<fftw_complex*>(co.data()),
                                 FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                 reinterpret_cast<fftw_complex*>(co.data()),
                                 re.data(), FFTW_ESTIMATE);
    auto [ins, ok] = cache.emplace(n, p);
    return ins->second;
}

std::vector<std::complex<double>> forward(std::span<const double> f) {
    const std::size_t n = f.size();
    PlanPair& p = plans_for(n);
    std::vector<double> in(f.begin(), f.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_execute_dft_r2c(p.fwd, in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& c : out) c *= scale;
    return out;
}

std::vector<double> backward(std::vector<std::complex<double>> c, std::size_t n) {
    PlanPair& p = plans_for(n);
    std::vector<double> out(n);
    fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(c.data()),
                         out.data());
    return out;  // forward already divided by n
}

// i*k scaled wavenumber for mode k of period P.
inline double wavenumber(std::size_t k, double period) {
    return 2.0 * std::numbers::pi * static_cast<double>(k) / period;
}

void apply_derivative(std::vector<std::complex<double>>& c, std::size_t n,
                      double period, int order) {
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        std::complex<double> factor = 1.0;
        const double w = wavenumber(k, period);
        for (int j = 0; j < order; ++j) factor *= I * w;
        c[k] *= factor;
    }
    // The Nyquist mode of an odd derivative has no real representative.
    if (n % 2 == 0 && order % 2 == 1) c.back() = 0.0;
}

}  // namespace

TrigSeries::TrigSeries(std::span<const double> samples, double period)
    : n_(samples.size()), period_(period), c_(forward(samples)) {
    if (n_ < 4) throw std::invalid_argument("TrigSeries: need at least 4 samples");
    if (!(period > 0.0)) throw std::invalid_argument("TrigSeries: period must be positive");
}

TrigSeries TrigSeries::from_coeffs(std::vector<std::complex<double>> coeffs,
                                   std::size_t n, double period) {
    TrigSeries s;
    s.n_ = n;
    s.period_ = period;
    s.c_ = std::move(coeffs);
    return s;
}

double TrigSeries::eval(double t, int order) const {
    const double base = 2.0 * std::numbers::pi * t / period_;
    const std::complex<double> I(0.0, 1.0);
    double acc = 0.0;
    const std::size_t kmax = c_.size() - 1;
    for (std::size_t k = 0; k <= kmax; ++k) {
        const double w = wavenumber(k, period_);
        std::complex<double> factor = 1.0;
        for (int j = 0; j < order; ++j) factor *= I * w;
        // Real signal: modes k and n-k are conjugate; interior modes count twice.
        const bool interior = (k > 0) && !(n_ % 2 == 0 && k == kmax);
        std::complex<double> term =
            c_[k] * factor * std::exp(I * (static_cast<double>(k) * base));
        if (n_ % 2 == 0 && k == kmax && order % 2 == 1) term = 0.0;
        acc += interior ? 2.0 * term.real() : term.real();
    }
    return acc;
}

std::vector<double> TrigSeries::derivative(int order) const {
    auto c = c_;
    apply_derivative(c, n_, period_, order);
    return backward(std::move(c), n_);
}

std::vector<double> TrigSeries::samples() const {
    auto c = c_;
    return backward(std::move(c), n_);
}

std::vector<double> TrigSeries::dense_samples(std::size_t m, int order) const {
    if (m < n_) throw std::invalid_argument("dense_samples: m must be >= size()");
    if (m == n_ && order == 0) return samples();
    auto c = c_;
    apply_derivative(c, n_, period_, order);
    // A Nyquist mode promoted to an interior mode of the finer grid must be
    // halved (it is counted twice there).
    if (n_ % 2 == 0 && m > n_) c.back() *= 0.5;
    c.resize(m / 2 + 1, std::complex<double>(0.0, 0.0));
    return backward(std::move(c), m);
}

double TrigSeries::mean() const { return c_[0].real(); }

std::vector<double> TrigSeries::antiderivative_mean_zero() const {
    auto c = c_;
    const std::complex<double> I(0.0, 1.0);
    c[0] = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        c[k] /= I * wavenumber(k, period_);
    }
    if (n_ % 2 == 0) c.back() = 0.0;
    return backward(std::move(c), n_);
}

namespace spectral {

std::vector<double> derivative(std::span<const double> f, double period, int order) {
    auto c = forward(f);
    apply_derivative(c, f.size(), period, order);
    return backward(std::move(c), f.size());
}

double integrate(std::span<const double> f, double period) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * period / static_cast<double>(f.size());
}

double l2_norm(std::span<const double> f, double period) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return std::sqrt(s * period / static_cast<double>(f.size()));
}

std::vector<double> solve_minus_laplace(std::span<const double> rhs, double period) {
    auto c = forward(rhs);
    c[0] = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        const double w = wavenumber(k, period);
        c[k] /= w * w;
    }
    return backward(std::move(c), rhs.size());
}

std::vector<double> solve_helmholtz4(std::span<const double> rhs, double period,
                                     double a, double b) {
    if (!(a > 0.0)) throw std::invalid_argument("solve_helmholtz4: a must be positive");
    auto c = forward(rhs);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double w = wavenumber(k, period);
        c[k] /= a + b * w * w * w * w;
    }
    return backward(std::move(c), rhs.size());
}

double mode_amplitude(std::span<const double> f, int k) {
    auto c = forward(f);
    if (k < 0 || static_cast<std::size_t>(k) >= c.size()) return 0.0;
    const double mag = std::abs(c[static_cast<std::size_t>(k)]);
    return k == 0 ? mag : 2.0 * mag;
}

}  // namespace spectral

}  // namespace flatflow
