#pragma once

// Dense data-parallel kernels. Every kernel exists twice: `serial` is the
// plain reference kept for tests and benchmarks, `omp` is the OpenMP path the
// library calls. Both must agree to rounding (matmuls accumulate in the same
// order, so they agree bitwise).
//
// Matrices are row-major. Shapes: a is n x k (or k x n for *TN), b is k x m
// (or m x k for *NT), c is n x m. With accumulate=true the product is added
// to c, otherwise c is overwritten.

#include <cstddef>
#include <span>

namespace finevq::kernels {

namespace serial {
void MatMul(std::span<const double> a, std::span<const double> b,
            std::span<double> c, std::size_t n, std::size_t k, std::size_t m,
            bool accumulate = false);
void MatMulNT(std::span<const double> a, std::span<const double> b,
              std::span<double> c, std::size_t n, std::size_t k,
              std::size_t m, bool accumulate = false);
void MatMulTN(std::span<const double> a, std::span<const double> b,
              std::span<double> c, std::size_t n, std::size_t k,
              std::size_t m, bool accumulate = false);
// BT.601 luma of an interleaved RGB plane.
void Luma(std::span<const double> rgb, std::span<double> y);
// Sobel gradient magnitude at interior pixels; out is (h-2) x (w-2).
void SobelMagnitude(std::span<const double> y, std::size_t h, std::size_t w,
                    std::span<double> out);
// Bilinear resize of an interleaved plane with `ch` channels, half-pixel
// centres, edge clamped.
void ResizeBilinear(std::span<const double> src, std::size_t sh,
                    std::size_t sw, std::size_t ch, std::span<double> dst,
                    std::size_t dh, std::size_t dw);
}  // namespace serial

namespace omp {
void MatMul(std::span<const double> a, std::span<const double> b,
            std::span<double> c, std::size_t n, std::size_t k, std::size_t m,
            bool accumulate = false);
void MatMulNT(std::span<const double> a, std::span<const double> b,
              std::span<double> c, std::size_t n, std::size_t k,
              std::size_t m, bool accumulate = false);
void MatMulTN(std::span<const double> a, std::span<const double> b,
              std::span<double> c, std::size_t n, std::size_t k,
              std::size_t m, bool accumulate = false);
// BT.601 luma of an interleaved RGB plane.
void Luma(std::span<const double> rgb, std::span<double> y);
// Sobel gradient magnitude at interior pixels; out is (h-2) x (w-2).
void SobelMagnitude(std::span<const double> y, std::size_t h, std::size_t w,
                    std::span<double> out);
// Bilinear resize of an interleaved plane with `ch` channels, half-pixel
// centres, edge clamped.
void ResizeBilinear(std::span<const double> src, std::size_t sh,
                    std::size_t sw, std::size_t ch, std::span<double> dst,
                    std::size_t dh, std::size_t dw);
}  // namespace omp

}  // namespace finevq::kernels
