#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace specfor {

/// Dense row-major matrix; the common currency of the spectrum and feature stages.
template <typename T>
struct Matrix {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t h, std::size_t w, T fill = T{}) : height(h), width(w), data(h * w, fill) {}
    Matrix(std::size_t h, std::size_t w, std::vector<T> values)
        : height(h), width(w), data(std::move(values)) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * width + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * width + c]; }

    std::span<T> row(std::size_t r) { return {data.data() + r * width, width}; }
    std::span<const T> row(std::size_t r) const { return {data.data() + r * width, width}; }

    std::size_t size() const { return data.size(); }
    bool operator==(const Matrix&) const = default;
};

using FloatMatrix = Matrix<float>;

} // namespace specfor
