#pragma once

#include <array>
#include <cstddef>

namespace rrl {

// One classical 4th-order Runge-Kutta step of y' = f(y) over step width h.
// f maps a state array to its derivative array in the same units.
template <std::size_t N, typename F>
std::array<double, N> rk4_step(const F& f, const std::array<double, N>& y, double h) {
    const std::array<double, N> k1 = f(y);
    std::array<double, N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const std::array<double, N> k2 = f(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const std::array<double, N> k3 = f(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
    const std::array<double, N> k4 = f(tmp);
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace rrl
