// Brute-force reference implementations used by the tests. Written from
// the defining sums only; nothing here calls into the library.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

inline double basis_entry(std::size_t n, std::size_t k, std::size_t size, double alpha)
{
    const double w = k == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
    return std::sqrt(2.0 / size) * w *
           std::cos(std::numbers::pi * alpha * (2.0 * n + 1.0) * k / (2.0 * size));
}

// x_n = sum_k basis(n,k) X_k
inline std::vector<double> ifrct(const std::vector<double> &x, double alpha)
{
    const std::size_t size = x.size();
    std::vector<double> out(size, 0.0);
    for (std::size_t n = 0; n < size; ++n)
        for (std::size_t k = 0; k < size; ++k) out[n] += basis_entry(n, k, size, alpha) * x[k];
    return out;
}

// C(l,m) = sum_n basis(n,l) basis(n,m)
inline std::vector<std::vector<double>> correlation(std::size_t size, double alpha)
{
    std::vector<std::vector<double>> c(size, std::vector<double>(size, 0.0));
    for (std::size_t l = 0; l < size; ++l)
        for (std::size_t m = 0; m < size; ++m)
            for (std::size_t n = 0; n < size; ++n)
                c[l][m] += basis_entry(n, l, size, alpha) * basis_entry(n, m, size, alpha);
    return c;
}

inline std::vector<std::complex<double>> dft(const std::vector<double> &x)
{
    const std::size_t size = x.size();
    std::vector<std::complex<double>> out(size);
    for (std::size_t k = 0; k < size; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t n = 0; n < size; ++n)
            acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n % size) / size);
        out[k] = acc;
    }
    return out;
}

inline std::vector<double> cyclic_convolve(const std::vector<double> &x, const std::vector<double> &h)
{
    const std::size_t size = x.size();
    std::vector<double> y(size, 0.0);
    for (std::size_t n = 0; n < size; ++n)
        for (std::size_t k = 0; k < h.size(); ++k) y[n] += h[k] * x[(n + size - k % size) % size];
    return y;
}

// Composite Simpson rule on [a, b] with an even number of panels.
template <class F>
double simpson(F f, double a, double b, int panels = 20000)
{
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

inline double gauss_pdf(double x, double mean, double sigma)
{
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// E[max(x + b, 0)^2] for x ~ N(0, sigma^2), by quadrature.
inline double clipped_power(double sigma, double b)
{
    return simpson([&](double s) { return s * s * gauss_pdf(s, b, sigma); }, 0.0, b + 14.0 * sigma, 200000);
}

} // namespace oracle
